"""Harish-Chandra c-function and Plancherel density for SL(n, R)/SO(n).

    Gamma_R(s) = pi^(-s/2) Gamma(s/2),     phi(s) = Gamma_R(s+1)/Gamma_R(s)
    c(lam)^(-1) = prod_{i<j} phi(lam_i - lam_j)
    beta(lam)   = |c(lam) / c(rho)|^(-2)

The comparison density beta~(t, lam) = prod_{i<j} (t + |lam_i - lam_j|)
has the same polynomial growth and is what the counting estimates use.

Evaluators accept a SpectralPoint or a raw array whose last axis holds
the n coordinates, so large sample sets go through in one call.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from . import rootsys
from .fits import tail_slope
from .reports import check_record
from .special import PoleError, loggamma

LOG_PI = math.log(math.pi)


def gamma_R(s):
    """pi^(-s/2) Gamma(s/2). Raises PoleError at s = 0, -2, -4, ..."""
    s = np.asarray(s, dtype=complex)
    return np.exp(-0.5 * s * LOG_PI + loggamma(0.5 * s))


def log_phi_ratio(s):
    """log phi(s) on the branch continuous from the positive axis.

    Only defined where phi(s) is finite and nonzero; callers that may hit
    the zeros of phi use phi_ratio instead.
    """
    s = np.asarray(s, dtype=complex)
    return -0.5 * LOG_PI + loggamma(0.5 * (s + 1.0)) - loggamma(0.5 * s)


def _denominator_poles(s):
    half = 0.5 * s
    return (s.imag == 0) & (half.real <= 0) & (half.real == np.round(half.real))


def phi_ratio(s):
    """Gamma_R(s+1)/Gamma_R(s), with phi = 0 at the poles s = 0, -2, -4, ...

    At s = -1, -3, ... the numerator has a pole and the value is infinite;
    beta never touches those points.
    """
    s = np.asarray(s, dtype=complex)
    scalar = s.ndim == 0
    s = np.atleast_1d(s)
    out = np.zeros_like(s)
    zero = _denominator_poles(s)
    num_pole = (s.imag == 0) & ((0.5 * (s.real + 1)) <= 0) & \
        (0.5 * (s.real + 1) == np.round(0.5 * (s.real + 1)))
    out[num_pole] = np.inf
    ok = ~(zero | num_pole)
    out[ok] = np.exp(log_phi_ratio(s[ok]))
    return out[0] if scalar else out


def _coords(lam) -> np.ndarray:
    if isinstance(lam, rootsys.SpectralPoint):
        return lam.coords
    return np.asarray(lam, dtype=complex)


def _pair_differences(c):
    n = c.shape[-1]
    i, j = np.triu_indices(n, k=1)
    return c[..., i] - c[..., j]


def _require_imaginary(c):
    scale = np.maximum(1.0, np.abs(c).max(axis=-1, initial=0.0))
    if np.any(np.abs(c.real).max(axis=-1, initial=0.0) > 1e-12 * scale):
        raise ValueError("beta is only defined here on the imaginary axis i a*")


def log_abs_phi_sq_imag(y):
    """log |phi(i y)|^2 for real y != 0."""
    y = np.asarray(y, dtype=float)
    return 2.0 * log_phi_ratio(1j * y).real


@dataclass(frozen=True)
class PlancherelDensity:
    """beta, beta~ and c for a fixed rank n and quadratic form."""

    n: int
    form: str = "killing"

    def __post_init__(self):
        rootsys._check_rank(self.n)
        rootsys.form_scale(self.n, self.form)

    @property
    def c_rho_inv(self) -> float:
        return c_rho_inverse(self.n)

    @property
    def dims(self):
        return rootsys.dims(self.n)

    def c_inv(self, lam):
        """c(lam)^(-1) for complex lam (last axis = coordinates)."""
        d = _pair_differences(_coords(lam))
        return np.prod(phi_ratio(d.reshape(-1)).reshape(d.shape), axis=-1)

    def beta(self, lam):
        return beta(lam)

    def beta_tilde(self, t, lam):
        return beta_tilde(t, lam)

    def norm(self, lam):
        c = _coords(lam)
        return np.sqrt((np.abs(c) ** 2).sum(axis=-1) / rootsys.form_scale(self.n, self.form))


def c_rho_inverse(n: int) -> float:
    """c(rho)^(-1) = prod_{i<j} phi(j - i) > 0."""
    rootsys._check_rank(n)
    total = 0.0
    for i, j in itertools.combinations(range(n), 2):
        total += float(log_phi_ratio(complex(j - i)).real)
    return math.exp(total)


def beta(lam):
    """Plancherel density on i a*. Vectorized over leading axes."""
    c = _coords(lam)
    _require_imaginary(c)
    n = c.shape[-1]
    y = _pair_differences(c).imag
    zero = np.abs(y) == 0.0
    ysafe = np.where(zero, 1.0, y)
    logs = log_abs_phi_sq_imag(ysafe.reshape(-1)).reshape(y.shape)
    total = logs.sum(axis=-1) - 2.0 * math.log(c_rho_inverse(n))
    val = np.exp(total)
    val = np.where(zero.any(axis=-1), 0.0, val)
    return float(val) if val.ndim == 0 else val


def beta_tilde(t, lam):
    """prod_{i<j} (t + |lam_i - lam_j|) for t > 0."""
    if np.any(np.asarray(t) <= 0):
        raise ValueError("t must be positive")
    c = _coords(lam)
    d = np.abs(_pair_differences(c))
    t = np.asarray(t, dtype=float)[..., None]
    val = np.prod(t + d, axis=-1)
    return float(val) if val.ndim == 0 else val


def beta_tilde_levi(M: rootsys.LeviSubgroup, lam, t=1.0):
    """beta~ of the Levi M: the product over pairs inside one block only."""
    c = _coords(lam)
    pairs = M.within_pairs()
    if not pairs:
        return np.ones(c.shape[:-1]) if c.ndim > 1 else 1.0
    i, j = np.array(pairs).T
    val = np.prod(t + np.abs(c[..., i] - c[..., j]), axis=-1)
    return float(val) if val.ndim == 0 else val


def directional_derivative_beta(xi, lam, step: float = 1e-4):
    """Central difference of beta along i*xi at lam."""
    if not (1e-6 <= step <= 1e-2):
        raise ValueError("step must lie in [1e-6, 1e-2]")
    x = xi.coords if isinstance(xi, rootsys.CartanVector) else np.asarray(xi, dtype=float)
    c = _coords(lam)
    return (beta(c + 1j * step * x) - beta(c - 1j * step * x)) / (2.0 * step)


def scr_ratio(M: rootsys.LeviSubgroup, lam, form: str = "killing"):
    """beta~^M(lam^M) (1 + |lam|) / beta~(lam) for a proper Levi M."""
    if M.is_whole:
        raise ValueError("scr_ratio needs a proper Levi subgroup (M != G)")
    c = _coords(lam)
    n = c.shape[-1]
    # lam^M has the same within-block differences as lam
    num = beta_tilde_levi(M, c)
    nrm = np.sqrt((np.abs(c) ** 2).sum(axis=-1) / rootsys.form_scale(n, form))
    return num * (1.0 + nrm) / beta_tilde(1.0, c)


# ---------------------------------------------------------------------------
# sampling on spheres in i a*

def sphere_samples(n: int, radius: float, count: int, rng, form: str = "killing"):
    """Uniform points on the dual-norm sphere of i a*, as complex coordinates."""
    r = n - 1
    g = rng.standard_normal((count, r))
    g /= np.linalg.norm(g, axis=1, keepdims=True)
    x = rootsys.from_orthonormal(radius * g, n, form=form, dual=True)
    return 1j * x


def _radii(norm_max: float, levels: int):
    return np.logspace(0.0, math.log10(norm_max), levels)


def _sweep(n, fn, sample_count, norm_max, seed, form, levels=24):
    rng = np.random.default_rng(seed)
    radii = _radii(norm_max, levels)
    per = max(1, sample_count // levels)
    sups = np.empty(levels)
    for k, R in enumerate(radii):
        pts = sphere_samples(n, R, per, rng, form)
        sups[k] = float(np.max(fn(pts)))
    return radii, sups, per * levels


def verify_plnchbnd(n: int, sample_count: int = 4000, norm_max: float = 1e4,
                    seed: int = 0, form: str = "killing") -> dict:
    """beta/beta~ stays bounded: running-sup tail slope <= 0.02."""
    if n > 5:
        raise rootsys.RankError("verify_plnchbnd is limited to n <= 5")
    radii, sups, used = _sweep(n, lambda p: beta(p) / beta_tilde(1.0, p),
                               sample_count, norm_max, seed, form)
    slope = tail_slope(radii, sups)
    return check_record("plnchbnd", n, used, float(sups.max()), slope, slope <= 0.02)


def verify_logderbnd(n: int, sample_count: int = 2000, norm_max: float = 1e3,
                     seed: int = 0, form: str = "killing", step: float = 1e-4) -> dict:
    """|D_xi beta| / (1 + |lam|)^(d - r - 1) stays bounded for unit xi."""
    d, r = rootsys.dims(n)
    rng = np.random.default_rng(seed + 1)

    def fn(pts):
        xi = sphere_samples(n, 1.0, len(pts), rng, form).imag
        nrm = np.sqrt((np.abs(pts) ** 2).sum(axis=-1) / rootsys.form_scale(n, form))
        db = np.abs(directional_derivative_beta(xi, pts, step))
        return db / (1.0 + nrm) ** (d - r - 1)

    radii, sups, used = _sweep(n, fn, sample_count, norm_max, seed, form)
    slope = tail_slope(radii, sups)
    return check_record("logderbnd", n, used, float(sups.max()), slope, slope <= 0.02)


def verify_scr(n: int, sample_count: int = 100_000, norm_max: float = 1e4,
               seed: int = 0, form: str = "killing") -> list[dict]:
    """scr_ratio running-sup slope for every maximal Levi."""
    out = []
    for M in rootsys.maximal_levis(n):
        radii, sups, used = _sweep(n, lambda p, M=M: scr_ratio(M, p, form),
                                   sample_count, norm_max, seed, form)
        slope = tail_slope(radii, sups)
        out.append(check_record("scr", n, used, float(sups.max()), slope,
                                slope <= 0.02, levi=str(M)))
    return out


def beta_sl2_closed_form(u):
    """n = 2 oracle: beta((iu, -iu)) = pi u tanh(pi u)."""
    u = np.asarray(u, dtype=float)
    return np.pi * u * np.tanh(np.pi * u)


def abs_phi_sq_imag_oracle(y):
    """|phi(i y)|^2 from the modulus identities for Gamma(1/2 + ix), Gamma(ix).

    |Gamma(1/2 + ix)|^2 = pi / cosh(pi x),  |Gamma(ix)|^2 = pi / (x sinh(pi x)),
    so |phi(iy)|^2 = (1/pi) * (pi/cosh(pi y/2)) / (pi/((y/2) sinh(pi y/2)))
                   = (y / (2 pi)) tanh(pi y / 2).
    """
    y = np.asarray(y, dtype=float)
    return (y / (2 * np.pi)) * np.tanh(np.pi * y / 2)


__all__ = [
    "PlancherelDensity", "PoleError", "abs_phi_sq_imag_oracle", "beta", "beta_sl2_closed_form",
    "beta_tilde", "beta_tilde_levi", "c_rho_inverse", "directional_derivative_beta",
    "gamma_R", "phi_ratio", "scr_ratio", "sphere_samples", "verify_logderbnd",
    "verify_plnchbnd", "verify_scr",
]
