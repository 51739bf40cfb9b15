import numpy as np
import pytest

from weyl_lab import plancherel, rootsys


def test_sl2_closed_form_on_dense_grid():
    u = np.linspace(0, 20, 2001)
    lam = 1j * np.stack([u, -u], axis=1)
    err = np.abs(plancherel.beta(lam) - plancherel.beta_sl2_closed_form(u))
    assert np.all(err <= 1e-10 * (1 + u * u))


def test_phi_modulus_identity():
    y = np.linspace(0.05, 60, 500)
    got = np.exp(plancherel.log_abs_phi_sq_imag(y))
    np.testing.assert_allclose(got, plancherel.abs_phi_sq_imag_oracle(y), rtol=1e-11)


@pytest.mark.parametrize("n", [3, 4])
def test_beta_is_w_invariant_and_nonnegative(n):
    rng = np.random.default_rng(1)
    nu = rng.standard_normal((20, n)) * 5
    nu -= nu.mean(axis=1, keepdims=True)
    b = plancherel.beta(1j * nu)
    assert np.all(b >= 0)
    for w in rootsys.weyl_group(n)[:6]:
        np.testing.assert_allclose(plancherel.beta(1j * np.array([w.act(v) for v in nu])), b, rtol=1e-12)


@pytest.mark.parametrize("n", [2, 3])
def test_beta_over_beta_tilde_bounded(n):
    rec = plancherel.verify_plnchbnd(n, sample_count=2400)
    assert rec["pass"], rec


def test_log_derivative_bound_n3():
    rec = plancherel.verify_logderbnd(3, sample_count=1200)
    assert rec["pass"], rec


def test_scr_ratio_rejects_whole_group():
    with pytest.raises(ValueError):
        plancherel.scr_ratio(rootsys.LeviSubgroup.whole(3), 1j * np.array([1.0, 0.0, -1.0]))

