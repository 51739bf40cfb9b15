import math

import numpy as np
import pytest

from weyl_lab import morselab, rootsys
from weyl_lab.morselab import MCSpec, MorseModel, PhaseConfiguration
from weyl_lab.spherical import haar_sample


@pytest.fixture(params=[(2, 1), (1, 2)], ids=["Q21", "Q12"])
def cfg3(request):
    return PhaseConfiguration(3, request.param)


def test_phase_matches_sl2_closed_form():
    cfg = PhaseConfiguration(2, (1, 1))
    for theta, u in [(0.3, 0.0), (1.1, 2.0), (-2.0, -0.7)]:
        k = np.array([[math.cos(theta), -math.sin(theta)], [math.sin(theta), math.cos(theta)]])
        x = np.array([[1.0, u], [0.0, 1.0]])
        want = morselab.phase_sl2(cfg.xi.coords, theta, u)
        assert float(morselab.phase_value(cfg, k[None], x)[0]) == pytest.approx(want, abs=1e-12)


def test_phase_vanishes_on_k_times_identity():
    cfg = PhaseConfiguration(3, (2, 1))
    k = haar_sample(3, 10, seed=2)
    assert np.abs(morselab.phase_value(cfg, k, np.eye(3))).max() < 1e-12


def test_critical_points(cfg3):
    for w in rootsys.weyl_group(3):
        assert morselab.critical_residual(cfg3, w) <= 1e-8 * cfg3.xi.norm()


def test_random_points_are_not_critical(cfg3):
    assert morselab.random_point_residuals(cfg3, count=30).min() > 1e-3


def test_hessian_closed_form_vs_fd(cfg3):
    for w in rootsys.weyl_group(3):
        hp = morselab.hessian_pairing(cfg3, w)
        assert hp.fd_relative_error <= 1e-6
        assert hp.nonsingular
        assert hp.singular_values.min() > 0


def test_sl2_hessian_singular_value():
    cfg = PhaseConfiguration(2, (1, 1))
    for w in rootsys.weyl_group(2):
        hp = morselab.hessian_pairing(cfg, w)
        assert hp.singular_values.min() == pytest.approx(0.5, rel=1e-10)


def test_levi_invariance(cfg3):
    assert morselab.levi_invariance_defect(cfg3, count=10) <= 1e-10


def test_singular_xi_rejected():
    with pytest.raises(ValueError):
        PhaseConfiguration(3, (2, 1), xi=rootsys.CartanVector([1.0, 1.0, -2.0]))


def test_composition_must_sum_to_n():
    with pytest.raises(ValueError):
        PhaseConfiguration(3, (2, 2))


def test_model_kinds():
    with pytest.raises(ValueError):
        MorseModel("cubic")
    m = MorseModel("quadric", p=2, q=1)
    assert m.dim == 3 and m.volume == 8.0
    assert m(np.array([1.0, 1.0, 1.0])) == 1.0


def test_linear_sublevel_volume_exact():
    m = MorseModel("linear", dim=2)
    v, se = morselab.sublevel_volume(m, 0.01, mc=MCSpec(samples=1000))
    # slab of width 2 delta across a second side of length 2
    assert v == pytest.approx(2 * 0.01 * 2, rel=1e-12)
    assert se == pytest.approx(0.0, abs=1e-15)


def test_regular_model_has_no_small_sublevel():
    m = MorseModel("regular", dim=2)
    v, _ = morselab.sublevel_volume(m, 0.1, mc=MCSpec(samples=1000))
    assert v == 0.0


def test_delta_range_guard():
    with pytest.raises(ValueError):
        morselab.sublevel_volume(MorseModel("linear"), 0.7)


def test_reciprocal_linear_exact():
    # int_{[-1,1]^2, |x| >= delta} 1/|x| = 2 * 2 * log(1/delta)
    m = MorseModel("linear", dim=2)
    v, _ = morselab.reciprocal_integral(m, 1e-4, mc=MCSpec(samples=1000))
    assert v == pytest.approx(4 * math.log(1e4), rel=1e-10)


def test_product_reciprocal_log_squared():
    # int_{[-1,1]^2, |xy| >= delta} 1/|xy| = 2 log(1/delta)^2
    m = MorseModel("product", dim=2)
    d = 1e-6
    v, se = morselab.reciprocal_integral(m, d, mc=MCSpec(samples=200_000))
    assert v == pytest.approx(2 * math.log(1 / d) ** 2, abs=5 * se + 1e-6 * v)


@pytest.mark.parametrize("case", ["slab", "saddle", "quadric21"])
def test_model_case_windows(case):
    rep = morselab.model_case_report(case, MCSpec(samples=100_000))
    assert rep["pass"], rep
