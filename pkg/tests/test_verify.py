import math
import warnings

import numpy as np
import pytest

from barrierbesov import symbols as S
from barrierbesov.besov import BesovParams
from barrierbesov.dyadic import build_system
from barrierbesov.transform import Grids, SpatialGrid
from barrierbesov.verify import (MultiplierSpec, TruncationWarning, default_j_range, doubled,
                                 envelope, fit_derivative_decay, fit_kernel_decay,
                                 gaussian_family, hormander_integral, kernel_l2_sizes,
                                 multiplier_operator_norm, regime_of, shift_count,
                                 write_envelope_csv)


def test_regimes(pot, free, sys):
    assert regime_of(0, pot, sys) == "local"
    assert regime_of(4, pot, sys) == "low"
    assert regime_of(5, pot, sys) == "high"
    assert regime_of(1, free, sys) == "high"
    assert regime_of(0, pot, build_system("homogeneous")) == "low"


@pytest.mark.parametrize("n, N", [(2, 1), (4, 1), (5, 2), (6, 2), (9, 3)])
def test_shift_count(n, N):
    assert shift_count(n) == N


def test_envelope_terms():
    x, y = np.array([0.3]), np.array([0.3])
    j, n = 6, 4
    s = 2.0 ** (j / 2)
    # high regime: ℓ = 0 gives |x-y|, |x+y|; ℓ = 1, 2 add four sign choices each
    d = [0.0, 0.6] + [abs(0.3 + a * 0.3 + b * 2 * l) for l in (1, 2) for a in (1, -1)
                      for b in (1, -1)]
    expected = s * sum((1 + s * v) ** -n for v in d)
    assert envelope(x, y, j, n, "high")[0, 0] == pytest.approx(expected)
    assert envelope(x, y, j, n, "high", derivative=True)[0, 0] == pytest.approx(s * expected)
    assert envelope(x, y, j, n, "low")[0, 0] == pytest.approx(s * (1 + (1 + s * 0.6) ** -n))
    assert envelope(x, np.array([1.3]), 0, 2, "local")[0, 0] == pytest.approx(0.25)


def test_symbol_constants():
    ip = MultiplierSpec.from_symbol(S.imaginary_power(1.0))
    assert ip.sup == pytest.approx(1.0) and ip.mikhlin_constant == pytest.approx(1.0, rel=1e-6)
    sat = MultiplierSpec.from_symbol(S.saturating())
    assert sat.mikhlin_constant == pytest.approx(0.25, rel=1e-4)
    assert sat.sup < 1 and "label" in sat.describe()


def test_decay_fit_barrier(pot, tmp_path):
    rep = fit_kernel_decay(8, 4, pot)
    assert rep.regime == "high"
    assert 0 < rep.fitted_constant < math.inf and math.isfinite(rep.residual)
    assert rep.refinement_delta <= 0.1
    ys = {round(y, 6) for x0, y, _ in rep.shift_peaks_found if x0 == 0.5}
    # reflected and barrier-shifted peaks of the row x = 0.5
    assert {0.5, -0.5, 2.5, -2.5, -3.5, 4.5} <= ys
    write_envelope_csv(rep, tmp_path / "env.csv")
    rows = (tmp_path / "env.csv").read_text().splitlines()
    assert rows[0] == "x,y,abs_kernel,envelope,ratio" and len(rows) == 1 + 385


def test_decay_fit_free_has_only_diagonal_peaks(free):
    for j in (6, 10):
        rep = fit_kernel_decay(j, 4, free, refine=0)
        assert rep.shift_peaks_found and all(x0 == y for x0, y, _ in rep.shift_peaks_found)
        assert rep.meta["free_residual"] < 1e-12


def test_decay_fit_local(pot):
    rep = fit_kernel_decay(0, 2, pot)
    assert rep.regime == "local" and math.isfinite(rep.fitted_constant)
    assert rep.refinement_delta <= 0.1
    rep = fit_derivative_decay(0, 4, pot)
    assert rep.regime == "local" and math.isfinite(rep.fitted_constant)


def test_decay_fit_rejects_odd_n(pot):
    with pytest.raises(ValueError):
        fit_kernel_decay(6, 3, pot)


def test_derivative_prefactor_scaling(pot):
    r = []
    for j in (6, 8, 10):
        k = fit_kernel_decay(j, 4, pot, refine=0).meta["sup_abs_kernel"]
        d = fit_derivative_decay(j, 4, pot, refine=0).meta["sup_abs_kernel"]
        r.append(d / k / 2.0 ** (j / 2))
    assert max(r) / min(r) <= 2


def test_free_derivative_kernel_matches_fourier_side(free, sys):
    grid = SpatialGrid.symmetric(3, 1 / 16)
    rep = fit_derivative_decay(6, 4, free, grid, refine=0)
    # independent oracle: dense trapezoid of (2π)^{-1}∫ φ_6(ξ²) iξ e^{iξ s} dξ
    xi = np.linspace(-8.5, 8.5, 200_001)
    w = S.band(sys, 6)(xi**2) * 1j * xi / (2 * math.pi) * (xi[1] - xi[0])
    for row in rep.envelope_table()[::24]:
        s = row["x"] - row["y"]
        ref = abs(np.sum(w * np.exp(1j * xi * s)))
        assert abs(row["abs_kernel"] - ref) <= 1e-6 * max(1.0, ref)


@pytest.mark.parametrize("derivative", [False, True])
def test_kernel_sizes_uniform(pot, derivative):
    reps = [kernel_l2_sizes(j, pot, derivative=derivative) for j in (6, 8, 10)]
    for name in ("size", "weighted", "tail"):
        vals = [getattr(r, name) for r in reps]
        assert max(vals) / min(vals) <= 4


def test_kernel_sizes_free(free):
    reps = [kernel_l2_sizes(j, free) for j in (6, 8, 10)]
    for name in ("size", "weighted", "tail"):
        vals = [getattr(r, name) for r in reps]
        assert max(vals) / min(vals) <= 4


def test_default_j_range(pot):
    # t = 1 puts the crossover at j_t = 0, so the range reaches j_t - 8
    assert default_j_range(1.0, pot) == (-8, 16)
    lo, hi = default_j_range(0.01, pot)
    assert lo == -4 and hi == 14 + 12
    assert doubled((0, 9)) == (-5, 14)


def test_hormander_zero_separation(pot):
    m = MultiplierSpec.from_symbol(S.saturating())
    rep = hormander_integral(m, 3.0, 3.0, pot, (0, 6))
    assert rep.total == 0 and all(v == 0 for v in rep.terms.values())


@pytest.mark.filterwarnings("ignore::barrierbesov.verify.TruncationWarning")
def test_hormander_tiers_agree(pot):
    m = MultiplierSpec.from_symbol(S.saturating())
    a = hormander_integral(m, 3.1, 3.0, pot, (9, 9), tiers={9: "gl"})
    b = hormander_integral(m, 3.1, 3.0, pot, (9, 9), tiers={9: "czt"})
    assert abs(a.total - b.total) <= 1e-8 * a.total


def test_hormander_truncation_warning(pot):
    m = MultiplierSpec.from_symbol(S.saturating())
    with pytest.warns(TruncationWarning):
        rep = hormander_integral(m, 3.1, 3.0, pot, (6, 8))
    assert rep.truncated and rep.end_share > 0.01


def test_gaussian_family_shape():
    fam = gaussian_family()
    assert len(fam) == 24
    (s, c, k), f = fam[0]
    assert f(np.array([c]))[0] == pytest.approx(np.exp(1j * k * c))


def test_multiplier_norms(pot, grids, sys):
    fam = [f for _, f in gaussian_family()]
    one = MultiplierSpec.from_symbol(S.constant(1.0))
    rep = multiplier_operator_norm(one, 3.0, fam, pot, grids)
    assert abs(rep.lp_ratio - 1) <= 1e-6
    sat = MultiplierSpec.from_symbol(S.saturating())
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        rep = multiplier_operator_norm(sat, 2.0, fam, pot, grids, besov=BesovParams(0.5, 2, 2),
                                       sys=sys)
    assert rep.lp_ratio <= sat.sup + 1e-6
    assert 0 < rep.besov_ratio <= 1 + 1e-6
    with pytest.raises(ValueError):
        multiplier_operator_norm(sat, 1.0, fam, pot, grids)
