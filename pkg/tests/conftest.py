import numpy as np
import pytest

from barrierbesov.dyadic import build_system
from barrierbesov.eigen import BarrierPotential
from barrierbesov.transform import GeneralizedFourier, Grids


@pytest.fixture(scope="session")
def pot():
    return BarrierPotential(1.0)


@pytest.fixture(scope="session")
def free():
    return BarrierPotential.free_particle()


@pytest.fixture(scope="session")
def sys():
    return build_system("inhomogeneous", "exp")


@pytest.fixture(scope="session")
def grids(pot, sys):
    """Bands 0..8 on [-16, 16], spacing 1/32."""
    return Grids.for_bands(pot, sys, 0, 8, half_width=16)


@pytest.fixture(scope="session")
def gf(pot, grids):
    return GeneralizedFourier(grids.spatial, grids.spectral, pot)


def packet(x, x0=0.0, sigma=1.0, k0=0.0):
    return np.exp(-(x - x0) ** 2 / (2 * sigma**2) + 1j * k0 * x)


def covered_family(gf, count=10, seed=0, xi_abs=(4.0, 14.0), widths=(0.5, 1.2)):
    """f = F*g with g a Gaussian bump in ξ away from 0, placed near random x0.

    Ff = g lies inside the spectral grid and clear of the origin, so these
    functions are reproduced by the truncated band expansion.
    """
    rng = np.random.default_rng(seed)
    xi = gf.xi
    cols = []
    for _ in range(count):
        x0 = rng.uniform(-3, 3)
        xi0 = rng.choice([-1.0, 1.0]) * rng.uniform(*xi_abs)
        s = rng.uniform(*widths)
        cols.append(np.exp(-(xi - xi0) ** 2 / (2 * s * s) - 1j * xi * x0))
    return gf.adjoint(np.column_stack(cols))


def l2(g, w):
    return np.sqrt(np.sum(w[:, None] * np.abs(g) ** 2, axis=0)) if g.ndim == 2 else \
        float(np.sqrt(np.sum(w * np.abs(g) ** 2)))


_VERDICTS: list[str] = []


@pytest.fixture
def verdict():
    """Record one PASS/FAIL line for an acceptance criterion and return ``ok``."""

    def record(number, name, ok, detail):
        line = f"{'PASS' if ok else 'FAIL'} criterion {number} ({name}): {detail}"
        print(line)
        _VERDICTS.append(line)
        return ok

    return record


def pytest_terminal_summary(terminalreporter):
    if _VERDICTS:
        terminalreporter.section("acceptance criteria")
        for line in sorted(_VERDICTS, key=lambda s: int(s.split()[2])):
            terminalreporter.write_line(line)
