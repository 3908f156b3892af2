"""
Generalized eigenfunctions of H = -d²/dx² + ε² χ_[-1,1].

For ξ > 0 the branch e₊ is incoming from the left with unit amplitude,
for ξ < 0 the branch e₋ is incoming from the right. Both are written in
one representation per frequency::

    x < -1 :  α_L e^{iξx} + β_L e^{-iξx}
    |x| ≤ 1:  γ [cosh(ρ u) + iξ u sinhc(ρ u)],   u = x - x_a
    x > 1  :  α_R e^{iξx} + β_R e^{-iξx}

with anchor x_a = +1 for e₊ and x_a = -1 for e₋. The middle form is the
closed-form combination B e^{ρx} + B' e^{-ρx} with the 1/ρ singularity
removed, so the branch point |ξ| = ε needs no special casing beyond the
sinhc series.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "BarrierPotential",
    "DomainError",
    "EigenCoefficients",
    "RhoValue",
    "coefficients",
    "eigen_residual",
    "eval_eigenfunction",
    "eval_eigenfunction_dx",
    "rho",
    "sinhc",
]

_SERIES_CUTOFF = 1e-4


class DomainError(ValueError):
    """Raised for ξ = 0, where the eigenfunction has no value."""


@dataclass(frozen=True)
class BarrierPotential:
    """Barrier V = ε² on [-1, 1], zero elsewhere.

    ``free=True`` is the ε = 0 limit; every formula short-circuits to plane
    waves and ``epsilon`` is forced to 0.
    """

    epsilon: float = 1.0
    free: bool = False

    def __post_init__(self):
        if self.free:
            object.__setattr__(self, "epsilon", 0.0)
        elif not (self.epsilon > 0 and math.isfinite(self.epsilon)):
            raise ValueError(f"epsilon must be positive and finite, got {self.epsilon!r}")

    @classmethod
    def free_particle(cls) -> "BarrierPotential":
        return cls(epsilon=0.0, free=True)

    @property
    def j_threshold(self) -> float:
        """J = 4 + floor(2 log2 ε); -inf in the free case (every band is high energy)."""
        if self.free:
            return -math.inf
        return 4 + math.floor(2 * math.log2(self.epsilon))

    def V(self, x):
        x = np.asarray(x, dtype=float)
        return np.where(np.abs(x) <= 1.0, self.epsilon**2, 0.0)

    def describe(self) -> dict:
        return {"epsilon": self.epsilon, "free": self.free}


@dataclass(frozen=True)
class RhoValue:
    value: complex
    regime: str  # "oscillatory" for |ξ| > ε, "evanescent" otherwise


@dataclass(frozen=True)
class EigenCoefficients:
    """The six scattering coefficients of e(·, ξ).

    ``b`` and ``b_prime`` carry the 1/ρ factor and are NaN exactly at
    |ξ| = ε, where only their combination in the middle region is finite.
    """

    a: complex
    a_prime: complex
    b: complex
    b_prime: complex
    c: complex
    c_prime: complex
    xi: float
    sign: str

    def flux_defect(self) -> float:
        if self.sign == "+":
            return abs(abs(self.c) ** 2 + abs(self.a_prime) ** 2 - 1.0)
        return abs(abs(self.a) ** 2 + abs(self.c_prime) ** 2 - 1.0)


def sinhc(z):
    """sinh(z)/z for complex arrays, with a 6-term Taylor series near 0."""
    z = np.asarray(z, dtype=complex)
    out = np.empty_like(z)
    small = np.abs(z) < _SERIES_CUTOFF
    zs = z[small]
    z2 = zs * zs
    # 1 + z²/3! + z⁴/5! + z⁶/7! + z⁸/9! + z¹⁰/11!
    out[small] = 1 + z2 / 6 * (1 + z2 / 20 * (1 + z2 / 42 * (1 + z2 / 72 * (1 + z2 / 110))))
    zb = z[~small]
    out[~small] = np.sinh(zb) / zb
    return out


def _rho(xi, eps):
    xi = np.asarray(xi, dtype=float)
    a = np.abs(xi)
    # (ε-|ξ|)(ε+|ξ|) avoids cancellation near the branch point
    d = (eps - a) * (eps + a)
    return np.where(d >= 0, np.sqrt(np.abs(d)) + 0j, 1j * np.sqrt(np.abs(d)))


def rho(xi: float, pot: BarrierPotential) -> RhoValue:
    """ρ(ξ) = i√(ξ²-ε²) for |ξ| > ε, √(ε²-ξ²) for |ξ| ≤ ε."""
    value = complex(_rho(xi, pot.epsilon))
    regime = "oscillatory" if abs(xi) > pot.epsilon else "evanescent"
    return RhoValue(value=value, regime=regime)


def _check_xi(xi):
    if np.any(np.asarray(xi) == 0):
        raise DomainError("e(x, ξ) is discontinuous at ξ = 0; split the integral there")


def _branch_data(xi, pot):
    """Coefficient arrays of the unified representation, one entry per ξ."""
    xi = np.asarray(xi, dtype=float)
    eps2 = pot.epsilon**2
    r = _rho(xi, pot.epsilon)
    ch = np.cosh(2 * r)
    s = sinhc(2 * r)
    q = eps2 - 2 * xi * xi  # ρ² - ξ², real by construction
    pos = xi > 0
    sgn = np.where(pos, 1.0, -1.0)
    phase = np.exp(-2j * sgn * xi)
    den = xi * ch + 1j * sgn * q * s
    main = xi * phase / den              # C₊ for ξ>0, A₋ for ξ<0
    refl = -1j * sgn * eps2 * s * phase / den  # A'₊ for ξ>0, C'₋ for ξ<0
    one = np.ones_like(main)
    zero = np.zeros_like(main)
    return {
        "alpha_l": np.where(pos, one, main),
        "beta_l": np.where(pos, refl, zero),
        "alpha_r": np.where(pos, main, one),
        "beta_r": np.where(pos, zero, refl),
        "gamma": main * np.exp(1j * sgn * xi),
        "anchor": sgn,
        "rho": r,
    }


def coefficients(xi: float, pot: BarrierPotential) -> EigenCoefficients:
    """Scattering coefficients (A, A', B, B', C, C') of e(·, ξ), ξ ≠ 0."""
    _check_xi(xi)
    xi = float(xi)
    if pot.free:
        one, zero = 1.0 + 0j, 0j
        return EigenCoefficients(one, zero, one, zero, one, zero, xi, "+" if xi > 0 else "-")
    d = _branch_data(np.array([xi]), pot)
    r = complex(d["rho"][0])
    with np.errstate(divide="ignore", invalid="ignore"):
        inv2r = 1 / (2 * r) if r != 0 else complex("nan")
    if xi > 0:
        c = complex(d["alpha_r"][0])
        b = c * inv2r * (r + 1j * xi) * np.exp(-r + 1j * xi)
        bp = c * inv2r * (r - 1j * xi) * np.exp(r + 1j * xi)
        return EigenCoefficients(1.0 + 0j, complex(d["beta_l"][0]), b, bp, c, 0j, xi, "+")
    a = complex(d["alpha_l"][0])
    b = a * inv2r * (r + 1j * xi) * np.exp(r - 1j * xi)
    bp = a * inv2r * (r - 1j * xi) * np.exp(-r - 1j * xi)
    return EigenCoefficients(a, 0j, b, bp, 1.0 + 0j, complex(d["beta_r"][0]), xi, "-")


def _phases(x, k):
    """exp(i x_i k_m) as a matrix.

    Uniformly spaced x (the common case) is split into blocks of 64 rows:
    e^{ik(x_0 + (64p + r)h)} = e^{ik(x_0 + 64ph)} · e^{ikrh}, both factors
    exact, so each entry costs one complex product instead of an exp.
    """
    n = x.size
    out = np.empty((n, k.size), dtype=complex)
    block = 64
    if n >= 2 * block:
        h = (x[-1] - x[0]) / (n - 1)
        uniform = h > 0 and np.allclose(np.diff(x), h, rtol=0, atol=1e-12 * max(1.0, abs(h)))
    else:
        uniform = False
    if not uniform:
        arg = np.outer(x, k)
        out.real = np.cos(arg)
        out.imag = np.sin(arg)
        return out
    r = np.arange(block) * h
    inner = np.exp(1j * np.outer(r, k))
    for p0 in range(0, n, block):
        m = min(block, n - p0)
        # anchor on the actual sample so the grid's own rounding is reproduced
        head = np.exp(1j * x[p0] * k)
        out[p0:p0 + m] = head * inner[:m]
    return out


def _evaluate_outer(x, xi, pot, deriv):
    """Fast path for a column of x against a row of ξ: regions split by rows."""
    xc = x[:, 0]
    k = xi[0]
    out = np.empty((xc.size, k.size), dtype=complex)
    if pot.free:
        E = _phases(xc, k)
        return 1j * k * E if deriv else E
    d = _branch_data(k, pot)
    left = xc < -1
    right = xc > 1
    mid = ~(left | right)
    for mask, a_name, b_name in ((left, "alpha_l", "beta_l"), (right, "alpha_r", "beta_r")):
        if not mask.any():
            continue
        E = _phases(xc[mask], k)
        a, b = d[a_name], d[b_name]
        if deriv:
            out[mask] = 1j * k * (a * E - b * E.conj())
        else:
            out[mask] = a * E + b * E.conj()
    if mid.any():
        u = xc[mid][:, None] - d["anchor"]
        r = d["rho"]
        ru = r * u
        if deriv:
            out[mid] = d["gamma"] * (r * r * u * sinhc(ru) + 1j * k * np.cosh(ru))
        else:
            out[mid] = d["gamma"] * (np.cosh(ru) + 1j * k * u * sinhc(ru))
    return out


def _evaluate(x, xi, pot, deriv):
    x = np.asarray(x, dtype=float)
    xi = np.asarray(xi, dtype=float)
    _check_xi(xi)
    if x.ndim == 2 and xi.ndim == 2 and x.shape[1] == 1 and xi.shape[0] == 1:
        return _evaluate_outer(x, xi, pot, deriv)
    shape = np.broadcast_shapes(x.shape, xi.shape)
    X = np.broadcast_to(x, shape)
    XI = np.broadcast_to(xi, shape)
    E = np.exp(1j * XI * X)
    if pot.free:
        return 1j * XI * E if deriv else E
    Ec = E.conj()
    d = _branch_data(xi, pot)

    left = X < -1
    right = X > 1
    mid = ~(left | right)

    def bc(name):
        return np.broadcast_to(d[name], shape)

    out = np.empty(shape, dtype=complex)
    for mask, a_name, b_name in ((left, "alpha_l", "beta_l"), (right, "alpha_r", "beta_r")):
        a = bc(a_name)[mask]
        b = bc(b_name)[mask]
        if deriv:
            out[mask] = 1j * XI[mask] * (a * E[mask] - b * Ec[mask])
        else:
            out[mask] = a * E[mask] + b * Ec[mask]
    if mid.any():
        u = X[mid] - bc("anchor")[mid]
        r = bc("rho")[mid]
        g = bc("gamma")[mid]
        k = XI[mid]
        ru = r * u
        if deriv:
            out[mid] = g * (r * r * u * sinhc(ru) + 1j * k * np.cosh(ru))
        else:
            out[mid] = g * (np.cosh(ru) + 1j * k * u * sinhc(ru))
    return out


def eval_eigenfunction(x, xi, pot: BarrierPotential):
    """e(x, ξ), broadcasting over ``x`` and ``xi``."""
    out = _evaluate(x, xi, pot, deriv=False)
    return out[()] if out.ndim == 0 else out


def eval_eigenfunction_dx(x, xi, pot: BarrierPotential):
    """∂e/∂x (x, ξ), same conventions as :func:`eval_eigenfunction`."""
    out = _evaluate(x, xi, pot, deriv=True)
    return out[()] if out.ndim == 0 else out


def eigen_residual(x: float, xi: float, pot: BarrierPotential, h: float = 1e-3,
                   delta: float | None = None) -> float:
    """|-e'' + V e - ξ² e| at x, with e'' from a 5-point central stencil.

    ``x`` must stay at least ``delta`` (default ``10 h``) away from the
    potential jumps at ±1.
    """
    delta = 10 * h if delta is None else delta
    if delta < 10 * h:
        raise ValueError("delta must be at least 10 stencil steps")
    if abs(abs(x) - 1.0) <= delta:
        raise ValueError(f"x = {x} is within {delta} of a potential jump")
    pts = x + h * np.arange(-2, 3)
    e = eval_eigenfunction(pts, xi, pot)
    e2 = (-e[0] + 16 * e[1] - 30 * e[2] + 16 * e[3] - e[4]) / (12 * h * h)
    v = float(pot.V(x))
    return float(abs(-e2 + (v - xi * xi) * e[2]))
