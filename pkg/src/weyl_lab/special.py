"""Complex special functions: log-gamma, digamma, Hurwitz zeta.

Log-gamma and digamma come from scipy; the Hurwitz zeta function for
complex s is not available there and is implemented below.

Everything here works on numpy arrays of complex arguments and is written
so that the pole of the Hurwitz zeta function at s = 1 can be split off
exactly (callers summing over Dirichlet characters need that).
"""

from __future__ import annotations

import math

import numpy as np
import scipy.special as sc

# B_{2k}, k = 1..20
_BERNOULLI_2K = np.array([
    1.0 / 6, -1.0 / 30, 1.0 / 42, -1.0 / 30, 5.0 / 66, -691.0 / 2730, 7.0 / 6,
    -3617.0 / 510, 43867.0 / 798, -174611.0 / 330, 854513.0 / 138,
    -236364091.0 / 2730, 8553103.0 / 6, -23749461029.0 / 870,
    8615841276005.0 / 14322, -7709321041217.0 / 510, 2577687858367.0 / 6,
    -26315271553053477373.0 / 1919190, 2929993913841559.0 / 6,
    -261082718496449122051.0 / 13530,
])


class PoleError(ValueError):
    """Raised when a function is evaluated exactly at one of its poles."""


def _check_poles(z, what):
    if np.any((z.imag == 0) & (z.real <= 0) & (z.real == np.round(z.real))):
        raise PoleError(f"{what} pole at nonpositive integer")


def loggamma(z):
    """Principal branch of log Gamma(z) for complex z (scipy backend)."""
    z = np.asarray(z, dtype=complex)
    _check_poles(z, "loggamma")
    return sc.loggamma(z)


def gamma(z):
    """Gamma(z) for complex z."""
    z = np.asarray(z, dtype=complex)
    _check_poles(z, "Gamma")
    return sc.gamma(z)


def digamma(z):
    """psi(z) = Gamma'/Gamma for complex z."""
    z = np.asarray(z, dtype=complex)
    _check_poles(z, "digamma")
    return sc.psi(z)


# ---------------------------------------------------------------------------
# Hurwitz zeta by Euler-Maclaurin, with the s = 1 pole removed analytically.

def _em_order(s, p):
    # cut-off index M: terms of the tail series then shrink geometrically
    return int(max(12, math.ceil(0.6 * np.max(np.abs(s)) + 2 * p)))


def _e_kernel(s, logx):
    """(x^(1-s) - 1)/(s - 1) and its s-derivative, stable near s = 1."""
    z = -(s - 1.0) * logx  # x^(1-s) = exp(z)
    small = np.abs(z) < 0.5
    e = np.empty(np.broadcast(s, logx).shape, dtype=complex)
    de = np.empty_like(e)
    sm = np.broadcast_to(s, e.shape)
    lx = np.broadcast_to(logx, e.shape)
    zz = np.broadcast_to(z, e.shape)
    if np.any(small):
        zs = zz[small]
        lxs = lx[small]
        # e = -logx * sum_{k>=0} z^k/(k+1)!,  de/ds = logx^2 * sum_{k>=0} (k+1) z^k/(k+2)!
        acc = np.zeros_like(zs)
        dacc = np.zeros_like(zs)
        term = np.ones_like(zs)
        fact1 = 1.0
        for k in range(0, 30):
            fact1 *= (k + 1)
            acc = acc + term / fact1
            dacc = dacc + (k + 1) * term / (fact1 * (k + 2))
            term = term * zs
        e[small] = -lxs * acc
        de[small] = lxs * lxs * dacc
    big = ~small
    if np.any(big):
        sb = sm[big]
        lxb = lx[big]
        xp = np.exp(-(sb - 1.0) * lxb)
        e[big] = (xp - 1.0) / (sb - 1.0)
        de[big] = (-lxb * xp * (sb - 1.0) - (xp - 1.0)) / (sb - 1.0) ** 2
    return e, de


def hurwitz_regular(s, a, p=10, M=None):
    """Regular part of the Hurwitz zeta function and its s-derivative.

    Returns (R, dR) with zeta(s, a) = R(s, a) + 1/(s - 1). R is entire in s,
    so the pole never has to be evaluated numerically. `a` is a scalar in
    (0, 1]; `s` may be an array.
    """
    s = np.asarray(s, dtype=complex)
    if M is None:
        M = _em_order(s, p)
    k = np.arange(M, dtype=float) + a
    logk = np.log(k)
    sv = s[..., None]
    head_terms = np.exp(-sv * logk)
    head = head_terms.sum(axis=-1)
    dhead = -(head_terms * logk).sum(axis=-1)

    x = M + a
    lx = math.log(x)
    xs = np.exp(-s * lx)
    e, de = _e_kernel(s, lx)
    R = head + e + 0.5 * xs
    dR = dhead + de - 0.5 * lx * xs

    # Bernoulli tail: sum_j B_2j/(2j)! * (s)_(2j-1) * x^(-s-2j+1)
    poch = s.copy()  # (s)_1
    dpoch = np.ones_like(s)
    xpow = xs / x  # x^(-s-1)
    fact = 2.0
    for j in range(1, p + 1):
        coef = _BERNOULLI_2K[j - 1] / fact
        R = R + coef * poch * xpow
        dR = dR + coef * (dpoch * xpow - lx * poch * xpow)
        # advance (s)_(2j-1) -> (s)_(2j+1)
        f1 = s + 2 * j - 1
        f2 = s + 2 * j
        dpoch = dpoch * f1 * f2 + poch * (f1 + f2)
        poch = poch * f1 * f2
        xpow = xpow / (x * x)
        fact *= (2 * j + 1) * (2 * j + 2)
    return R, dR


def hurwitz_zeta(s, a, p=10, M=None):
    """zeta(s, a) = sum_k (k + a)^(-s); raises PoleError at s = 1."""
    s = np.asarray(s, dtype=complex)
    if np.any(s == 1.0):
        raise PoleError("Hurwitz zeta has a pole at s = 1")
    R, _ = hurwitz_regular(s, a, p=p, M=M)
    return R + 1.0 / (s - 1.0)
