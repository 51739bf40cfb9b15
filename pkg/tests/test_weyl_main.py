import math

import numpy as np
import pytest

from weyl_lab import weyl_main
from weyl_lab.weyl_main import SpectralDomain


def test_sl2_main_term_oracle():
    for t in (1.0, 10.0, 60.0):
        got = weyl_main.main_term(SpectralDomain.ball(1), t, 2)["value"]
        assert got == pytest.approx(weyl_main.main_term_sl2_oracle(t), rel=1e-8)


def test_weyl_constant_values():
    assert weyl_main.weyl_constant(2, 4 * math.pi) == 1.0
    assert weyl_main.weyl_constant(2, 1.0) == pytest.approx(1 / (4 * math.pi))
    d = 5
    assert weyl_main.weyl_constant(3, 2.0) == pytest.approx(2.0 / ((4 * math.pi) ** 2.5 * math.gamma(3.5)))
    with pytest.raises(ValueError):
        weyl_main.weyl_constant(2, 0.0)


@pytest.mark.parametrize("n", [2, 3])
def test_exponent_fit_short_range(n):
    rec = weyl_main.exponent_fit(n, [20, 40, 80])
    assert rec["pass"], rec


def test_box_domain_runs():
    v = weyl_main.main_term(SpectralDomain.box([1.0, 0.5]), 10.0, 3)
    assert v["value"] > 0 and v["tol"] < 1e-3 * v["value"]


@pytest.mark.parametrize("dom", [SpectralDomain.ball(2), SpectralDomain.ball(2, 3.0)])
def test_ball_is_w_invariant(dom):
    assert weyl_main.check_W_invariance(dom, 3)


def test_box_is_not_w_invariant_in_general():
    assert not weyl_main.check_W_invariance(SpectralDomain.box([1.0, 0.2]), 3)


def test_domain_containment_scales_with_t():
    dom = SpectralDomain.ball(2, 1.0)
    p = np.array([[1.5, 0.0]])
    assert not dom.contains(p)[0]
    assert dom.contains(p, t=2.0)[0]


def test_shell_volume_ball_sl2():
    # r = 1: the shell around [-t, t] of width kappa is four intervals of length kappa
    dom = SpectralDomain.ball(1, 1.0)
    rec = weyl_main.boundary_shell_volume(dom, 5.0, 0.25, samples=400_000)
    assert rec["volume"] == pytest.approx(1.0, abs=4 * rec["stderr"] + 1e-3)
    assert weyl_main.boundary_shell_volume(dom, 5.0, 0.0)["volume"] == 0.0
