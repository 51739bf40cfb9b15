"""Iwasawa projection, Haar sampling on SO(n) and spherical functions.

The decomposition is G = A N K with N upper triangular unipotent, so a
matrix factors as g = R Q with R upper triangular (positive diagonal) and
Q orthogonal; H(g) is the log of diag(R), projected to trace zero.

Spherical functions are K-averages

    phi_lam(g) = int_K exp(<lam + rho, H(k g)>) dk

estimated by Monte Carlo over Haar samples (any n) or, for n <= 3, by a
deterministic product-angle rule used as an oracle.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.integrate

from . import rootsys

BATCH = 4096


@dataclass(frozen=True)
class GroupPoint:
    matrix: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=float).copy()
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ValueError("group point must be a square matrix")
        det = np.linalg.det(m)
        if abs(det) == 0.0 or not np.isfinite(det):
            raise ValueError("singular matrix")
        if abs(abs(det) - 1.0) > 1e-12:
            raise ValueError(f"|det g| must be 1, got {abs(det)!r}")
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    @classmethod
    def normalized(cls, m) -> "GroupPoint":
        """Rescale an invertible matrix to |det| = 1."""
        m = np.asarray(m, dtype=float)
        det = np.linalg.det(m)
        if det == 0.0:
            raise ValueError("singular matrix")
        return cls(m / abs(det) ** (1.0 / m.shape[0]))

    @classmethod
    def diagonal(cls, x) -> "GroupPoint":
        x = np.asarray(x, dtype=float)
        return cls(np.diag(np.exp(x - x.mean())))

    @property
    def n(self) -> int:
        return self.matrix.shape[0]


@dataclass(frozen=True)
class QuadratureSpec:
    method: str = "monte_carlo"
    sample_count: int = 10_000
    seed: int = 0

    def __post_init__(self):
        if self.method not in ("monte_carlo", "product_angles"):
            raise ValueError(f"unknown quadrature method {self.method!r}")
        if self.sample_count < 100:
            raise ValueError("sample_count must be at least 100")


@dataclass(frozen=True)
class Estimate:
    value: complex
    stderr: float
    samples: int = field(default=0)


def _as_matrix(g):
    return g.matrix if isinstance(g, GroupPoint) else np.asarray(g, dtype=float)


def iwasawa_H_batch(g):
    """H for a stack of matrices, shape (..., n, n) -> (..., n)."""
    g = np.asarray(g, dtype=float)
    # g^T with reversed columns = Q1 R1  =>  g = (J R1^T J)(J Q1^T), and the
    # upper-triangular factor has diagonal R1[n-1-i, n-1-i].
    gt = np.swapaxes(g, -1, -2)[..., ::-1]
    r1 = np.linalg.qr(gt, mode="r")
    diag = np.abs(np.diagonal(r1, axis1=-2, axis2=-1))[..., ::-1]
    h = np.log(diag)
    return h - h.mean(axis=-1, keepdims=True)


def iwasawa_H(g) -> rootsys.CartanVector:
    """a-component of g = exp(H) n k."""
    m = _as_matrix(g)
    if abs(np.linalg.det(m)) == 0.0:
        raise ValueError("singular matrix")
    return rootsys.CartanVector(iwasawa_H_batch(m))


def iwasawa_H_minors(g) -> np.ndarray:
    """Oracle: H from trailing principal minors of g g^T.

    g g^T = R R^T and the trailing k x k block of R R^T is R22 R22^T, so its
    determinant is the product of the last k squared diagonal entries of R.
    """
    m = _as_matrix(g)
    n = m.shape[0]
    s = m @ m.T
    minors = [1.0] + [np.linalg.det(s[n - k:, n - k:]) for k in range(1, n + 1)]
    h = np.empty(n)
    for i in range(n):
        k = n - i
        h[i] = 0.5 * math.log(minors[k] / minors[k - 1])
    return h - h.mean()


def _haar_from_gaussian(z):
    q, r = np.linalg.qr(z)
    d = np.sign(np.diagonal(r, axis1=-2, axis2=-1))
    d[d == 0] = 1.0
    q = q * d[..., None, :]
    neg = np.linalg.det(q) < 0
    q[neg, :, 0] *= -1.0
    return q


def _stream(seed: int, index: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence([int(seed) & (2**64 - 1), index]))


def haar_so_n(n: int, spec: QuadratureSpec):
    """Yield batches of Haar rotations in SO(n); batch b uses stream (seed, b)."""
    left = spec.sample_count
    b = 0
    while left > 0:
        m = min(BATCH, left)
        z = _stream(spec.seed, b).standard_normal((m, n, n))
        yield _haar_from_gaussian(z)
        left -= m
        b += 1


def haar_sample(n: int, count: int, seed: int = 0) -> np.ndarray:
    spec = QuadratureSpec(sample_count=max(count, 100), seed=seed)
    return np.concatenate(list(haar_so_n(n, spec)))[:count]


def _lam_coords(lam):
    if isinstance(lam, rootsys.SpectralPoint):
        return lam.coords
    return np.asarray(lam, dtype=complex)


def _integrand(lam_plus_rho, k, g):
    h = iwasawa_H_batch(k @ g)
    return np.exp(h @ lam_plus_rho)


def _mc(values_iter):
    # Fixed-order accumulation of first and second moments.
    s = 0.0 + 0.0j
    s2 = 0.0
    cnt = 0
    for v in values_iter:
        s += v.sum()
        s2 += float((np.abs(v) ** 2).sum())
        cnt += v.size
    mean = s / cnt
    var = max(s2 / cnt - abs(mean) ** 2, 0.0) * cnt / max(cnt - 1, 1)
    return Estimate(complex(mean), math.sqrt(var / cnt), cnt)


def spherical_phi(lam, g, spec: QuadratureSpec = QuadratureSpec()) -> Estimate:
    """Harish-Chandra's K-integral, with a standard error."""
    m = _as_matrix(g)
    n = m.shape[0]
    lr = _lam_coords(lam) + rootsys.rho(n).coords
    if spec.method == "product_angles":
        return Estimate(_product_angles(lambda k: _integrand(lr, k, m), n, spec.sample_count),
                        0.0, spec.sample_count)
    return _mc(_integrand(lr, k, m) for k in haar_so_n(n, spec))


def spherical_phi_pair(lam1, lam2, g, spec: QuadratureSpec = QuadratureSpec()):
    """Paired estimate of phi_lam1(g) - phi_lam2(g) on one shared K-stream.

    Returns (est1, est2, diff) so that W-invariance can be tested against the
    standard error of the difference rather than of each value.
    """
    m = _as_matrix(g)
    n = m.shape[0]
    rho = rootsys.rho(n).coords
    a = _lam_coords(lam1) + rho
    b = _lam_coords(lam2) + rho
    v1, v2 = [], []
    for k in haar_so_n(n, spec):
        h = iwasawa_H_batch(k @ m)
        v1.append(np.exp(h @ a))
        v2.append(np.exp(h @ b))
    return _mc(iter(v1)), _mc(iter(v2)), _mc(x - y for x, y in zip(v1, v2))


def _rot2(theta):
    c, s = np.cos(theta), np.sin(theta)
    return np.stack([np.stack([c, -s], -1), np.stack([s, c], -1)], -2)


def _product_angles(f, n, count):
    if n == 2:
        m = max(count, 16)
        th = 2 * np.pi * np.arange(m) / m
        return complex(np.mean(f(_rot2(th))))
    if n == 3:
        m = max(int(round(count ** (1 / 3))), 8)
        x, w = np.polynomial.legendre.leggauss(m)
        beta = np.arccos(x)
        ang = 2 * np.pi * np.arange(m) / m
        A, B, C = np.meshgrid(ang, np.arange(m), ang, indexing="ij")
        k = _zyz(A.ravel(), beta[B.ravel()], C.ravel())
        wt = np.broadcast_to(w[None, :, None], A.shape).ravel() / (2.0 * m * m)
        return complex(np.sum(f(k) * wt))
    raise ValueError("product-angle quadrature is only provided for n <= 3")


def _zyz(a, b, c):
    def rz(t):
        z = np.zeros(t.shape + (3, 3))
        z[..., 0, 0] = np.cos(t)
        z[..., 0, 1] = -np.sin(t)
        z[..., 1, 0] = np.sin(t)
        z[..., 1, 1] = np.cos(t)
        z[..., 2, 2] = 1.0
        return z

    def ry(t):
        z = np.zeros(t.shape + (3, 3))
        z[..., 0, 0] = np.cos(t)
        z[..., 0, 2] = np.sin(t)
        z[..., 2, 0] = -np.sin(t)
        z[..., 2, 2] = np.cos(t)
        z[..., 1, 1] = 1.0
        return z

    return rz(a) @ ry(b) @ rz(c)


def spherical_phi_sl2_oracle(u: float, s: float) -> complex:
    """n = 2, lam = (iu, -iu), g = diag(e^s, e^-s), by 1-D adaptive quadrature.

    For k_theta g the bottom row is (sin(th) e^s, cos(th) e^-s); its length is
    the lower-right Iwasawa entry, so H = (-L, L) with L the log of that length.
    """
    def integrand(th, part):
        L = 0.5 * math.log(math.sin(th) ** 2 * math.exp(2 * s) + math.cos(th) ** 2 * math.exp(-2 * s))
        # <lam + rho, H> with H = (-L, L): (iu + 1/2)(-L) + (-iu - 1/2)L
        z = complex(-1.0, -2.0 * u) * L
        v = np.exp(z)
        return v.real if part == 0 else v.imag

    re = scipy.integrate.quad(integrand, 0, 2 * np.pi, args=(0,), limit=400, epsabs=1e-13)[0]
    im = scipy.integrate.quad(integrand, 0, 2 * np.pi, args=(1,), limit=400, epsabs=1e-13)[0]
    return complex(re, im) / (2 * np.pi)


def kostant_projection(xi, k):
    """Diagonal of k^T diag(xi) k for a stack of rotations k."""
    x = xi.coords if isinstance(xi, rootsys.CartanVector) else np.asarray(xi, dtype=float)
    k = np.asarray(k)
    return np.einsum("...ji,j,...ji->...i", k, x, k)


def in_permutohedron(p, xi, tol: float = 1e-9):
    """p lies in conv{w xi} iff p is majorized by xi (Schur-Horn / Rado)."""
    p = np.sort(np.atleast_2d(p), axis=-1)[..., ::-1]
    x = np.sort(np.asarray(xi, dtype=float))[::-1]
    cp = np.cumsum(p, axis=-1)
    cx = np.cumsum(x)
    ok = np.all(cp[..., :-1] <= cx[:-1] + tol, axis=-1)
    ok &= np.abs(cp[..., -1] - cx[-1]) <= tol
    return ok


def kostant_check(xi, spec: QuadratureSpec = QuadratureSpec()) -> dict:
    x = xi.coords if isinstance(xi, rootsys.CartanVector) else np.asarray(xi, dtype=float)
    if not np.any(x):
        raise ValueError("xi must be nonzero")
    n = x.size
    total = 0
    inside = 0
    worst = -np.inf
    for k in haar_so_n(n, spec):
        p = kostant_projection(x, k)
        ok = in_permutohedron(p, x)
        inside += int(ok.sum())
        total += ok.size
        ps = np.sort(p, axis=-1)[..., ::-1]
        excess = np.cumsum(ps, axis=-1)[..., :-1] - np.cumsum(np.sort(x)[::-1])[:-1]
        worst = max(worst, float(excess.max()))
    return {"check": "kostant", "n": n, "samples": total, "inside": inside,
            "max_excess": worst, "pass": inside == total}


def verify_bounds(n: int, points: int = 100, samples: int = 100_000, seed: int = 0,
                  nu_scale: float = 3.0, g_scale: float = 1.0) -> dict:
    """Boundedness and W-invariance of phi_lam(g) at random (lam in i a*, g).

    Each point draws nu (trace zero, N(0, nu_scale^2) entries), a random w,
    and g = a normalized Gaussian matrix scaled by exp(g_scale * diag). The
    pair phi_lam(g), phi_{w lam}(g) shares one K-stream, so the W test is
    stated in the standard error of the difference.
    """
    rng = np.random.default_rng(np.random.SeedSequence([int(seed), 3]))
    W = rootsys.weyl_group(n)
    worst_bound = -np.inf
    worst_w = 0.0
    ok_bound = ok_w = True
    for i in range(points):
        nu = nu_scale * rng.standard_normal(n)
        lam = rootsys.SpectralPoint.imaginary(nu)
        w = W[int(rng.integers(len(W)))]
        lam_w = rootsys.SpectralPoint(w.act(lam.coords))
        m = rng.standard_normal((n, n))
        if np.linalg.det(m) < 0:
            m[:, 0] *= -1.0
        m = m @ np.diag(np.exp(g_scale * rng.standard_normal(n)))
        g = GroupPoint.normalized(m)
        spec = QuadratureSpec(sample_count=samples, seed=int(seed) * 1_000_003 + i)
        e1, _, diff = spherical_phi_pair(lam, lam_w, g, spec)
        excess = (abs(e1.value) - 1.0) / max(e1.stderr, 1e-300)
        worst_bound = max(worst_bound, excess)
        ok_bound &= abs(e1.value) <= 1.0 + 3.0 * e1.stderr
        z = abs(diff.value) / max(diff.stderr, 1e-300) if diff.stderr > 0 else 0.0
        worst_w = max(worst_w, z)
        ok_w &= abs(diff.value) <= 6.0 * diff.stderr + 1e-15
    return {"check": "spherical_bounds", "n": n, "points": points, "samples": samples,
            "max_bound_excess_sigma": float(worst_bound), "max_w_defect_sigma": float(worst_w),
            "bound_pass": bool(ok_bound), "w_pass": bool(ok_w), "pass": bool(ok_bound and ok_w)}
