import math
import warnings

import numpy as np
from hypothesis import HealthCheck, given, settings
from hypothesis import strategies as st

from barrierbesov.besov import BesovParams, TruncationWarning, besov_norm, combine
from barrierbesov.dyadic import build_system, eval_band
from barrierbesov.eigen import BarrierPotential, coefficients, eval_eigenfunction, rho
from barrierbesov.oracles import transfer_matrix_coefficients
from conftest import packet

eps_st = st.floats(0.05, 20.0)
xi_abs = st.floats(1e-3, 1e3)
sign = st.sampled_from([1.0, -1.0])
fixtures = settings(suppress_health_check=[HealthCheck.function_scoped_fixture], deadline=None,
                    max_examples=15)


@given(eps_st, xi_abs, sign)
def test_flux_identity(eps, a, s):
    assert coefficients(s * a, BarrierPotential(eps)).flux_defect() <= 1e-12


# the matrix product cancels terms of size e^{2ε}/|ξ|, so the oracle itself is
# only good to about 1e-16 e^{2ε}/|ξ|; keep ε where that stays below 1e-11
@given(st.floats(0.05, 2.0), xi_abs, sign)
def test_transfer_matrix_agreement(eps, a, s):
    xi = s * a
    if abs(a - eps) < 1e-9 * eps:
        return
    c = coefficients(xi, BarrierPotential(eps))
    ref = transfer_matrix_coefficients(xi, eps)
    for k in ("a", "a_prime", "c", "c_prime"):
        assert abs(getattr(c, k) - ref[k]) <= 1e-10 * max(1.0, abs(ref[k]))


@given(eps_st, st.floats(-6, 6), st.floats(0.01, 30), sign)
def test_reflection_symmetry(eps, x, a, s):
    pot = BarrierPotential(eps)
    xi = s * a
    assert abs(eval_eigenfunction(x, -xi, pot) - eval_eigenfunction(-x, xi, pot)) <= 1e-12


@given(eps_st, st.floats(0, 50), st.floats(0, 50))
def test_rho_square_and_half_holder(eps, a, b):
    pot = BarrierPotential(eps)
    ra, rb = rho(a, pot).value, rho(b, pot).value
    assert abs(ra**2 - (eps**2 - a**2)) <= 1e-12 * max(eps**2, a**2)
    # |√u - √v| ≤ √|u - v| on each branch and across the branch point
    assert abs(ra - rb) <= math.sqrt(abs(a * a - b * b)) * (1 + 1e-12) + 1e-12 * (eps + a + b)


@given(st.sampled_from(["exp", "split", "steep"]),
       st.lists(st.floats(-1e4, 1e4), min_size=1, max_size=50))
def test_partition_of_unity(family, xs):
    sys = build_system("inhomogeneous", family)
    assert np.max(np.abs(sys.partition(np.array(xs)) - 1)) <= 1e-12


@given(st.sampled_from(["exp", "split"]), st.integers(-6, 12), st.floats(1e-3, 1e4))
def test_band_vanishes_off_support(family, j, xi):
    sys = build_system("homogeneous", family)
    lo, hi = sys.band_support(j)
    if not lo <= xi <= hi:
        assert eval_band(sys, j, xi) == 0


norms_st = st.lists(st.floats(0, 10), min_size=11, max_size=11)
pq = st.sampled_from([(2.0, 2.0), (1.5, 1.0), (4.0, math.inf), (0.7, 0.5)])


@given(norms_st, st.floats(1e-3, 1e3), pq, st.floats(-1, 2))
def test_combine_homogeneous(norms, c, pq, alpha):
    params = BesovParams(alpha, *pq, j_max=10)
    n = np.array(norms)
    assert abs(combine(c * n, params) - c * combine(n, params)) <= 1e-12 * c * (
        combine(n, params) + 1e-300)


@given(norms_st, pq, st.floats(0, 1), st.floats(0, 1))
def test_combine_monotone_in_alpha(norms, pq, a, da):
    n = np.array(norms)
    lo = combine(n, BesovParams(a, *pq, j_max=10))
    hi = combine(n, BesovParams(a + da, *pq, j_max=10))
    assert hi >= lo * (1 - 1e-12)


@fixtures
@given(st.complex_numbers(min_magnitude=1e-3, max_magnitude=1e3, allow_nan=False,
                          allow_infinity=False), pq)
def test_besov_norm_homogeneous(pot, sys, grids, gf, c, pq):
    f = packet(grids.spatial.x, -5.0, 0.8, 2.0)
    params = BesovParams(0.5, *pq, j_max=8)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", TruncationWarning)
        n1 = besov_norm(f, params, sys, pot, grids, gf=gf).total
        nc = besov_norm(c * f, params, sys, pot, grids, gf=gf).total
    assert abs(nc - abs(c) * n1) <= 1e-10 * abs(c) * n1
