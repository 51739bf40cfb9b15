import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.integrate import trapezoid

from weyl_lab import testfn


@pytest.fixture(scope="module")
def h1():
    return testfn.make_autocorrelation(2.0, grid_size=256, r=1, normalize="h0")


@pytest.fixture(scope="module")
def h2():
    return testfn.make_autocorrelation(1.5, grid_size=256, r=2, normalize="h0")


def test_normalized_at_zero(h1, h2):
    assert h1.at_zero() == pytest.approx(1.0, abs=1e-12)
    assert h2.at_zero() == pytest.approx(1.0, abs=1e-10)


def test_support_and_parity(h1):
    assert h1.support_radius == pytest.approx(2.0)
    assert h1.parity_even
    y = np.array([[2.01], [3.0], [-2.5]])
    assert np.all(h1.value(y) == 0)


def test_transform_is_nonnegative(h1, h2):
    xi = np.linspace(0, 40, 161)
    assert np.real(h1.fourier_xi(xi[:, None])).min() >= -1e-12
    pts = np.stack([xi, 0.3 * xi], axis=1)
    assert np.real(h2.fourier_xi(pts)).min() >= -1e-12


def test_transform_matches_direct_quadrature(h1):
    y = np.linspace(-2, 2, 4001)
    vals = np.real(h1.value(y[:, None]))
    for xi in (0.0, 1.3, 4.0):
        direct = trapezoid(vals * np.cos(xi * y), y)
        assert np.real(h1.fourier_xi(np.array([[xi]])))[0] == pytest.approx(direct, abs=1e-6)


def test_json_roundtrip(h1):
    back = testfn.TestFunction.from_json(h1.to_json())
    xi = np.array([[0.0], [2.0], [7.5]])
    np.testing.assert_allclose(back.fourier_xi(xi), h1.fourier_xi(xi))


def test_scale_modulate_shifts_the_transform(h1):
    ht = testfn.scale_modulate(h1, 3.0, [2.0])
    xi = np.array([[2.0], [2.0 + 3 * 0.7]])
    want = np.real(h1.fourier_xi(np.array([[0.0], [0.7]])))
    np.testing.assert_allclose(np.real(ht.fourier_xi(xi)), want, rtol=1e-10)


def test_scale_modulate_guards(h1):
    with pytest.raises(ValueError):
        testfn.scale_modulate(h1, 0.5, [0.0])
    with pytest.raises(ValueError):
        testfn.scale_modulate(testfn.scale_modulate(h1, 2.0, [0.0]), 2.0, [0.0])


def test_strip_guard(h1):
    with pytest.raises(ValueError):
        testfn.fourier(h1, np.array([3.0, -3.0]), strip=1.0)


def test_M_dominates_the_value(h1):
    lam = 1j * np.array([1.5, -1.5])
    M = testfn.M_functional(h1, lam)
    assert M >= abs(testfn.fourier(h1, lam)) - 1e-12


def test_M_rejects_points_off_the_imaginary_axis(h1):
    with pytest.raises(ValueError):
        testfn.M_functional(h1, np.array([0.5 + 1j, -0.5 - 1j]))


@settings(max_examples=15, deadline=None)
@given(st.floats(0.0, 30.0))
def test_M_is_at_least_the_center_value(s):
    h = testfn.make_autocorrelation(2.0, grid_size=256, r=1, normalize="h0")
    lam = 1j * np.array([s, -s])
    assert testfn.M_functional(h, lam) >= abs(testfn.fourier(h, lam)) * (1 - 1e-9)


@pytest.mark.parametrize("radius", [1.0, 2.0, 3.0])
def test_abel_roundtrip(radius):
    h = testfn.make_autocorrelation(radius, grid_size=256, r=1, normalize="h0")
    rec = testfn.abel_roundtrip_sl2(h)
    assert rec["pass"], rec
    assert rec["sup_deviation"] <= 1e-6


def test_smp_small_grid():
    rec = testfn.verify_smp(2, ts=np.arange(1, 16), mu_per_t=2)
    assert rec["pass"], rec
