import numpy as np
import pytest

from weyl_lab import rootsys, spherical
from weyl_lab.spherical import GroupPoint, QuadratureSpec


def _random_g(n, rng):
    return GroupPoint.normalized(rng.standard_normal((n, n)) + 2 * np.eye(n))


@pytest.mark.parametrize("n", [2, 3, 4, 5])
def test_iwasawa_matches_trailing_minors(n):
    rng = np.random.default_rng(n)
    for _ in range(50):
        g = _random_g(n, rng)
        np.testing.assert_allclose(spherical.iwasawa_H(g).coords, spherical.iwasawa_H_minors(g), atol=1e-10)


def test_iwasawa_of_diagonal_is_log():
    x = np.array([0.7, -0.2, -0.5])
    np.testing.assert_allclose(spherical.iwasawa_H(GroupPoint.diagonal(x)).coords, x, atol=1e-14)


def test_haar_samples_are_orthogonal_and_reproducible():
    a = spherical.haar_sample(4, 200, seed=3)
    b = spherical.haar_sample(4, 200, seed=3)
    np.testing.assert_array_equal(a, b)
    eye = np.einsum("kij,kil->kjl", a, a)
    np.testing.assert_allclose(eye, np.broadcast_to(np.eye(4), eye.shape), atol=1e-12)
    np.testing.assert_allclose(np.linalg.det(a), 1.0, atol=1e-12)


def test_haar_first_moment_vanishes():
    k = spherical.haar_sample(3, 20000, seed=0)
    assert np.abs(k.mean(axis=0)).max() < 0.03


def test_phi_at_identity_is_one():
    lam = rootsys.SpectralPoint.imaginary([1.3, 0.1, -1.4])
    est = spherical.spherical_phi(lam, GroupPoint.diagonal([0.0, 0.0, 0.0]),
                                  QuadratureSpec(sample_count=500, seed=1))
    assert abs(est.value - 1.0) < 1e-12


@pytest.mark.parametrize("u,s", [(0.0, 0.3), (0.7, 0.4), (2.5, 1.1)])
def test_sl2_against_quad_oracle(u, s):
    lam = rootsys.SpectralPoint.imaginary([u, -u])
    est = spherical.spherical_phi(lam, GroupPoint.diagonal([s, -s]), QuadratureSpec("product_angles", 4096))
    assert abs(est.value - spherical.spherical_phi_sl2_oracle(u, s)) < 1e-8


def test_kostant_convexity():
    rec = spherical.kostant_check(rootsys.CartanVector([1.0, 0.2, -1.2]), QuadratureSpec(sample_count=5000))
    assert rec["pass"], rec


def test_kostant_rejects_zero():
    with pytest.raises(ValueError):
        spherical.kostant_check(np.zeros(3))


def test_bounds_and_w_invariance_small():
    rec = spherical.verify_bounds(3, points=8, samples=20_000, seed=5)
    assert rec["pass"], rec


def test_group_point_needs_unit_determinant():
    with pytest.raises(ValueError):
        GroupPoint(np.diag([2.0, 1.0]))
