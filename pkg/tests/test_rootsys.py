import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from weyl_lab import rootsys


@pytest.mark.parametrize("n", [2, 3, 4, 5])
def test_weyl_group_is_symmetric_group(n):
    W = rootsys.weyl_group(n)
    assert len(W) == math.factorial(n)
    assert len({w.perm for w in W}) == len(W)
    e = rootsys.WeylElement.identity(n)
    for w in W[:10]:
        assert (w * w.inverse()).perm == e.perm


@pytest.mark.parametrize("n", [2, 3, 4])
def test_action_is_a_homomorphism(n):
    rng = np.random.default_rng(n)
    x = rng.standard_normal(n)
    W = rootsys.weyl_group(n)
    for a, b in itertools.islice(itertools.product(W, W), 40):
        np.testing.assert_allclose((a * b).act(x), a.act(b.act(x)))
        np.testing.assert_allclose(a.matrix() @ x, a.act(x))


@pytest.mark.parametrize("n", range(2, 7))
def test_levi_count_is_bell_number(n):
    levis = rootsys.enumerate_levis(n)
    assert len(levis) == rootsys.bell_number(n)
    assert len(rootsys.maximal_levis(n)) == 2 ** (n - 1) - 1


def test_bell_numbers_small():
    assert [rootsys.bell_number(k) for k in range(1, 8)] == [1, 2, 5, 15, 52, 203, 877]


def test_levi_lattice_operations():
    A = rootsys.LeviSubgroup.standard([2, 1, 1])
    B = rootsys.LeviSubgroup.standard([1, 2, 1])
    m = A.meet(B)
    j = A.join(B)
    assert m.refines(A) and m.refines(B)
    assert A.refines(j) and B.refines(j)
    assert rootsys.LeviSubgroup.minimal(4).refines(m)
    assert j.refines(rootsys.LeviSubgroup.whole(4))


@pytest.mark.parametrize("n", [2, 3, 4])
@pytest.mark.parametrize("form", rootsys.FORMS)
def test_orthonormal_roundtrip(n, form):
    rng = np.random.default_rng(0)
    y = rng.standard_normal((5, n - 1))
    x = rootsys.from_orthonormal(y, n, form)
    np.testing.assert_allclose(x.sum(axis=-1), 0, atol=1e-13)
    np.testing.assert_allclose(rootsys.to_orthonormal(x, form), y, atol=1e-12)


def test_form_scales():
    assert rootsys.form_scale(3, "killing") == 6
    assert rootsys.form_scale(3, "trace") == 1


def test_rank_guard():
    with pytest.raises(rootsys.RankError):
        rootsys.dims(1)


def test_dims():
    assert rootsys.dims(2) == (2, 1)
    assert rootsys.dims(3) == (5, 2)


def test_cartan_vector_rejects_nonzero_trace():
    with pytest.raises(ValueError):
        rootsys.CartanVector([1.0, 1.0])


@settings(max_examples=40, deadline=None)
@given(st.lists(st.floats(-5, 5), min_size=3, max_size=3))
def test_dual_norm_is_w_invariant(nu):
    lam = rootsys.SpectralPoint.imaginary(nu)
    for w in rootsys.weyl_group(3):
        assert math.isclose(rootsys.SpectralPoint(w.act(lam.coords)).norm(), lam.norm(),
                            rel_tol=1e-12, abs_tol=1e-14)
