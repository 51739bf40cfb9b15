import mpmath
import numpy as np
import pytest

from weyl_lab import special


@pytest.mark.parametrize("z", [0.5 + 3j, 2.0 - 40j, 0.25 + 0.1j, 7.5 + 900j])
def test_loggamma_digamma_match_mpmath(z):
    assert abs(special.loggamma(z) - complex(mpmath.loggamma(z))) < 1e-12 * max(1, abs(z))
    assert abs(special.digamma(z) - complex(mpmath.digamma(z))) < 1e-12 * max(1, abs(z))


def test_poles_are_rejected():
    with pytest.raises(special.PoleError):
        special.gamma(-2.0)
    with pytest.raises(special.PoleError):
        special.digamma(0.0)


@pytest.mark.parametrize("s,a", [(2.0, 0.5), (0.5 + 14j, 1 / 3), (1.5 - 7j, 2 / 3), (3 + 0.5j, 1.0)])
def test_hurwitz_against_mpmath(s, a):
    got = complex(special.hurwitz_zeta(s, a))
    want = complex(mpmath.zeta(s, a))
    assert abs(got - want) <= 1e-11 * max(1.0, abs(want))


def test_hurwitz_vectorized():
    s = np.array([0.5 + 1j, 0.5 + 2j])
    v = special.hurwitz_zeta(s, 0.5)
    assert v.shape == (2,)
