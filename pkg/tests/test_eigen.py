import math

import numpy as np
import pytest

from barrierbesov.eigen import (BarrierPotential, DomainError, coefficients, eigen_residual,
                                eval_eigenfunction, eval_eigenfunction_dx, rho)
from barrierbesov.oracles import transfer_matrix_coefficients


def test_threshold_recomputed_from_epsilon():
    assert BarrierPotential(1.0).j_threshold == 4
    assert BarrierPotential(0.5).j_threshold == 2
    assert BarrierPotential(3.0).j_threshold == 4 + math.floor(2 * math.log2(3.0))
    assert BarrierPotential.free_particle().j_threshold == -math.inf


@pytest.mark.parametrize("eps", [0.0, -1.0, float("nan"), float("inf")])
def test_rejects_bad_epsilon(eps):
    with pytest.raises(ValueError):
        BarrierPotential(eps)


def test_rho_examples(pot):
    assert rho(1.0, pot).value == 0
    r0 = rho(0.0, pot)
    assert r0.value == 1 and r0.regime == "evanescent"
    r = rho(math.sqrt(2), pot)
    assert r.regime == "oscillatory"
    assert abs(r.value - 1j) < 1e-15


def test_rho_continuous_at_branch_point(pot):
    lo, hi = rho(1 - 1e-10, pot), rho(1 + 1e-10, pot)
    assert lo.regime == "evanescent" and hi.regime == "oscillatory"
    assert abs(lo.value) < 1e-4 and abs(hi.value) < 1e-4


def test_branch_conventions(pot):
    cp = coefficients(0.7, pot)
    assert cp.sign == "+" and cp.a == 1 and cp.c_prime == 0
    cm = coefficients(-0.7, pot)
    assert cm.sign == "-" and cm.c == 1 and cm.a_prime == 0


def test_xi_zero_is_domain_error(pot):
    with pytest.raises(DomainError):
        coefficients(0.0, pot)
    with pytest.raises(DomainError):
        eval_eigenfunction(0.3, 0.0, pot)


def test_free_coefficients(free):
    for xi in (0.1, 1.0, 30.0):
        c = coefficients(xi, free)
        assert c.c == 1 and c.a_prime == 0


@pytest.mark.parametrize("xi", [1.5, 2.0, 7.0])
def test_transmission_closed_form(pot, xi):
    K = math.sqrt(xi * xi - 1)
    expected = 4 * K**2 * xi**2 / (4 * K**2 * xi**2 + math.sin(2 * K) ** 2)
    assert abs(abs(coefficients(xi, pot).c) ** 2 - expected) < 1e-13


def test_flux_on_log_grid():
    for eps in (0.1, 1.0, 5.0):
        pot = BarrierPotential(eps)
        for xi in np.logspace(-4, 4, 300) * eps:
            assert coefficients(xi, pot).flux_defect() < 1e-12
            assert coefficients(-xi, pot).flux_defect() < 1e-12


def test_cross_branch_relations(pot):
    for xi in (0.2, 0.99, 1.0 + 1e-9, 3.3):
        p, m = coefficients(xi, pot), coefficients(-xi, pot)
        assert abs(m.a - p.c) < 1e-12
        assert abs(m.c_prime - p.a_prime) < 1e-12


def test_continuity_across_branch_point(pot):
    lo, hi = coefficients(1 - 1e-8, pot), coefficients(1 + 1e-8, pot)
    assert abs(lo.c - hi.c) < 1e-6 and abs(lo.a_prime - hi.a_prime) < 1e-6
    x = np.linspace(-3, 3, 61)
    assert np.max(np.abs(eval_eigenfunction(x, 1 - 1e-8, pot)
                         - eval_eigenfunction(x, 1 + 1e-8, pot))) < 1e-6
    # exactly on the branch point the middle region still evaluates
    assert np.all(np.isfinite(eval_eigenfunction(x, 1.0, pot)))


def test_transfer_matrix_oracle_at_half(pot):
    ours = coefficients(0.5, pot)
    ref = transfer_matrix_coefficients(0.5, 1.0)
    for name in ("a", "a_prime", "c", "c_prime"):
        assert abs(getattr(ours, name) - ref[name]) <= 1e-10 * max(1.0, abs(ref[name]))


def test_symmetry_grid(pot):
    x = np.linspace(-4, 4, 50)[:, None]
    xi = np.linspace(-6, 6, 50)[None, :]
    assert np.max(np.abs(eval_eigenfunction(x, -xi, pot) - eval_eigenfunction(-x, xi, pot))) <= 1e-12


def test_free_plane_waves(free):
    x = np.linspace(-5, 5, 41)
    for xi in (-2.0, 0.5):
        assert np.max(np.abs(eval_eigenfunction(x, xi, free) - np.exp(1j * xi * x))) < 1e-15


@pytest.mark.parametrize("xi", [0.4, 1.0, 2.5, -3.0])
def test_c1_matching(pot, xi):
    h = 1e-6
    for x0 in (-1.0, 1.0):
        e_l = eval_eigenfunction(np.array([x0 - 2 * h, x0 - h]), xi, pot)
        e_r = eval_eigenfunction(np.array([x0 + h, x0 + 2 * h]), xi, pot)
        left = (e_l[1] - e_l[0]) / h
        right = (e_r[1] - e_r[0]) / h
        assert abs(left - right) <= 1e-5 * (1 + abs(xi))
        assert abs(e_l[1] - e_r[0]) <= 1e-5 * (1 + abs(xi))


def test_derivative_matches_difference_quotient(pot):
    x = np.array([-2.3, -0.4, 0.6, 1.7])
    h = 1e-5
    for xi in (0.5, 2.0, -1.3):
        fd = (eval_eigenfunction(x + h, xi, pot) - eval_eigenfunction(x - h, xi, pot)) / (2 * h)
        assert np.max(np.abs(fd - eval_eigenfunction_dx(x, xi, pot))) < 1e-7


def test_ode_residual_examples(pot, free):
    assert eigen_residual(2.0, 1.0, pot) <= 1e-6
    assert eigen_residual(0.0, 0.5, pot) <= 1e-6
    for x in (-3.0, 0.0, 2.5):
        assert eigen_residual(x, 1.3, free) <= 1e-8


def test_residual_rejects_points_near_jump(pot):
    with pytest.raises(ValueError):
        eigen_residual(1.005, 1.0, pot)


def test_uniformly_bounded(pot):
    x = np.linspace(-6, 6, 121)[:, None]
    xi = np.concatenate([-np.logspace(-3, 2, 60), np.logspace(-3, 2, 60)])[None, :]
    bound = float(np.max(np.abs(eval_eigenfunction(x, xi, pot))))
    assert bound <= 10
