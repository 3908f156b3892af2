import math

import numpy as np
import pytest

from barrierbesov.dyadic import (ConstructionError, DyadicSystem, build_system, check_system,
                                 eval_band, eval_dual)


@pytest.mark.parametrize("family", ["exp", "split", "steep"])
def test_families_pass_check(family):
    for kind in ("inhomogeneous", "homogeneous"):
        rep = check_system(build_system(kind, family), 10_000)
        assert rep.ok, rep
        assert rep.partition_deviation <= 1e-12


def test_origin_covered_by_head_only(sys):
    assert abs(sys.phi0(0.0) * sys.psi0(0.0) - 1) < 1e-15
    assert all(eval_band(sys, j, 0.0) == 0 for j in range(1, 12))


def test_support_arithmetic(sys):
    assert eval_band(sys, 1, 0.6) != 0
    assert eval_band(sys, 3, 3.0) > 0
    assert eval_band(sys, 3, 1.0) == 0
    lo, hi = sys.band_support(5)
    xi = np.linspace(0, 100, 20001)
    nz = xi[eval_band(sys, 5, xi) != 0]
    assert nz.min() >= 2.0**3 and nz.max() <= 2.0**5
    assert 2.0**3 <= lo and hi <= 2.0**5


def test_band_in_energy_variable(sys):
    # φ_j(ξ²) lives on 2^{(j-2)/2} ≤ |ξ| ≤ 2^{j/2}
    j = 6
    xi = np.linspace(0.01, 20, 40001)
    nz = xi[eval_band(sys, j, xi**2) != 0]
    assert nz.min() >= 2.0 ** ((j - 2) / 2) and nz.max() <= 2.0 ** (j / 2)


def test_partition_random_probes(sys):
    xi = np.random.default_rng(1).uniform(-64, 64, 1000)
    assert np.max(np.abs(sys.partition(xi) - 1)) <= 1e-12


def test_partition_at_breakpoints(sys):
    pts = np.array([2.0**j * c for j in range(0, 8) for c in (0.25, 0.5, 1.0)])
    assert np.max(np.abs(sys.partition(pts) - 1)) <= 1e-12


def test_at_most_two_bands_overlap(sys):
    for xi in np.random.default_rng(2).uniform(0.1, 500, 200):
        live = [j for j in range(1, 14) if eval_band(sys, j, xi) != 0]
        assert len(live) <= 2
        if len(live) == 2:
            assert live[1] == live[0] + 1


def test_corrupted_system_detected(sys):
    rep = check_system(sys, 1000, corrupt=0.9)
    assert not rep.partition_ok and not rep.ok
    # away from the head the bands alone sum to 1, so scaling them by 0.9 leaves 0.1
    assert abs(rep.partition_deviation - 0.1) < 1e-9


def test_homogeneous_small_frequency():
    hs = build_system("homogeneous")
    assert abs(hs.partition(np.array([1e-6]))[0] - 1) <= 1e-10


def test_split_family_is_not_self_dual():
    s = build_system("inhomogeneous", "split")
    xi = np.linspace(0.3, 0.9, 50)
    assert np.max(np.abs(s.band(xi) - s.psiband(xi))) > 1e-3
    e = build_system()
    assert np.max(np.abs(e.band(xi) - e.psiband(xi))) < 1e-15


def test_lower_bounds_recorded(sys):
    assert set(sys.lower_bounds) == {"band", "psiband", "phi0", "psi0"}
    assert min(sys.lower_bounds.values()) > 1e-3


def test_json_round_trip():
    s = build_system("homogeneous", "split", 3, j_range=(-6, 9))
    back = DyadicSystem.from_json(s.to_json())
    assert back == s


def test_validation():
    with pytest.raises(ValueError):
        build_system("other")
    with pytest.raises(ValueError):
        build_system(family_id="nope")
    with pytest.raises(ValueError):
        build_system(smoothness_order=1)
    with pytest.raises(ValueError):
        check_system(build_system(), 10)
    with pytest.raises(ValueError):
        eval_band(build_system(), -1, 1.0)
    # a steeper flat-top order pushes the steep family's band floor below 1e-8
    with pytest.raises(ConstructionError):
        build_system("inhomogeneous", "steep", 3)


def test_dual_band_matches_head(sys):
    xi = np.linspace(0, 1, 11)
    assert np.allclose(eval_dual(sys, 0, xi), sys.psi0(xi))
    assert math.isclose(float(eval_dual(sys, 2, 2.0)), float(sys.psiband(0.5)))
