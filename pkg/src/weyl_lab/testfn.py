"""Paley-Wiener test functions on a and the functionals M and N.

Test functions are autocorrelations h = c * (g * g) of the radial bump

    g(y) = exp(-1 / (1 - |y/a|^2))   for |y| < a,

written in form-orthonormal coordinates y of a. Since g is radial and even,
h^(lam) = c * g^(eta)^2 where eta are the matching orthonormal coordinates
of lam, and g^ depends on eta only through w = eta . eta (complex bilinear):

    g^(w) = int_{-a}^{a} G(x) cosh(sqrt(w) x) dx,

with G the projection of g onto a line. This is exact for every complex
eta, so g^ is evaluated by Gauss-Legendre quadrature of a smooth compactly
supported function rather than by a multidimensional grid.

The dilated and modulated family h_{t,mu}(X) = t^r h(tX) exp(-<mu, X>)
is represented by parameters; its transform is h^((lam - mu)/t) by
construction. A sampled grid of h is available for serialization and as
an independent quadrature path.

Lebesgue measure on i a* is (2 pi)^(-r) d xi in orthonormal coordinates,
so that int h^(i xi) d lam = h(0).
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, replace
from functools import cached_property, lru_cache

import numpy as np
import scipy.signal
from scipy.interpolate import CubicSpline, PchipInterpolator

from . import plancherel, rootsys
from .fits import tail_slope
from .reports import check_record

SCHEMA = "weyl-lab/testfn"
SCHEMA_VERSION = 1
NET_SPACING = 0.05
FINE_SPACING = 0.005


class QuadratureError(RuntimeError):
    pass


def bump(s, a: float):
    """exp(-1/(1 - (s/a)^2)) on |s| < a, zero outside."""
    s = np.asarray(s, dtype=float)
    u = (s / a) ** 2
    out = np.zeros_like(s)
    inside = u < 1.0
    out[inside] = np.exp(-1.0 / (1.0 - u[inside]))
    return out


@lru_cache(maxsize=None)
def _gl(k: int):
    return np.polynomial.legendre.leggauss(k)


def _sphere_area(m: int) -> float:
    """Surface area of the unit sphere S^(m-1) in R^m (m = 1 gives 2)."""
    return 2.0 * math.pi ** (m / 2) / math.gamma(m / 2)


@lru_cache(maxsize=64)
def _projection_nodes(r: int, a: float, k: int):
    """Nodes x_j in [0, a], weights, and G(x_j) for the radial bump.

    G(x) = |S^(r-2)| int_0^sqrt(a^2-x^2) g(sqrt(x^2+s^2)) s^(r-2) ds.
    The substitution x = a sin(theta) keeps the integrand smooth at the end.
    """
    x, w = _gl(k)
    th = 0.25 * math.pi * (x + 1.0)           # theta in [0, pi/2]
    xs = a * np.sin(th)
    wx = w * 0.25 * math.pi * a * np.cos(th)
    if r == 1:
        G = bump(xs, a)
    else:
        xi, wi = _gl(96)
        G = np.empty(k)
        for j, x0 in enumerate(xs):
            top = math.sqrt(max(a * a - x0 * x0, 0.0))
            s = 0.5 * top * (xi + 1.0)
            G[j] = 0.5 * top * np.sum(wi * bump(np.sqrt(x0 * x0 + s * s), a) * s ** (r - 2))
        G *= _sphere_area(r - 1)
    return xs, wx, G


def _node_count(a: float, zmax: float) -> int:
    need = int(1.3 * a * zmax) + 64
    for k in (64, 128, 256, 512, 1024, 2048):
        if k >= need:
            return k
    return 4096


def ghat(w, r: int, a: float):
    """Transform of the unnormalized bump as a function of w = eta . eta."""
    w = np.asarray(w, dtype=complex)
    z = np.sqrt(w)
    zmax = float(np.abs(z).max(initial=0.0))
    xs, wx, G = _projection_nodes(r, a, _node_count(a, zmax))
    flat = z.reshape(-1)
    out = np.empty(flat.shape, dtype=complex)
    step = max(1, 2_000_000 // xs.size)
    for i in range(0, flat.size, step):
        zz = flat[i:i + step, None]
        out[i:i + step] = 2.0 * (np.cosh(zz * xs) * (wx * G)).sum(axis=1)
    return out.reshape(w.shape)


def ghat_real_axis(xi_abs, r: int, a: float):
    """g^ on the imaginary axis (w = -|xi|^2): real cosine transform."""
    s = np.asarray(xi_abs, dtype=float)
    xs, wx, G = _projection_nodes(r, a, _node_count(a, float(np.abs(s).max(initial=0.0))))
    flat = s.reshape(-1)
    out = np.empty(flat.shape)
    step = max(1, 2_000_000 // xs.size)
    for i in range(0, flat.size, step):
        out[i:i + step] = 2.0 * (np.cos(flat[i:i + step, None] * xs) * (wx * G)).sum(axis=1)
    return out.reshape(s.shape)


@dataclass(frozen=True)
class TestFunction:
    """h_{t,mu} = (c (g * g))_{t,mu} on a of dimension r.

    bump_radius a is the radius of g, so supp h has radius 2a/t.
    mu_xi holds mu = i*mu_xi in orthonormal dual coordinates (mu in i a*).
    """

    r: int
    bump_radius: float
    amplitude: float = 1.0
    t: float = 1.0
    mu_xi: tuple = ()
    grid_size: int = 256

    __test__ = False  # keep pytest from collecting this class

    def __post_init__(self):
        if self.r < 1:
            raise ValueError("dimension r must be positive")
        if self.bump_radius <= 0:
            raise ValueError("bump radius must be positive")
        if self.t < 1.0:
            raise ValueError("dilation parameter t must be >= 1")
        mu = tuple(float(v) for v in self.mu_xi) if len(self.mu_xi) else (0.0,) * self.r
        if len(mu) != self.r:
            raise ValueError("mu has the wrong dimension")
        object.__setattr__(self, "mu_xi", mu)
        floor = 256 if self.r <= 2 else 64
        if self.grid_size < floor:
            raise ValueError(f"grid_size must be >= {floor} for r = {self.r}")

    # -- geometry -----------------------------------------------------------
    @property
    def support_radius(self) -> float:
        return 2.0 * self.bump_radius / self.t

    @property
    def parity_even(self) -> bool:
        return not any(self.mu_xi)

    @property
    def mu(self) -> np.ndarray:
        return np.asarray(self.mu_xi)

    def base(self) -> "TestFunction":
        return replace(self, t=1.0, mu_xi=())

    # -- transform ----------------------------------------------------------
    def fourier_eta(self, eta):
        """h^ at complex orthonormal coordinates eta (last axis of length r)."""
        eta = np.asarray(eta, dtype=complex)
        if eta.shape[-1] != self.r:
            raise ValueError("eta has the wrong dimension")
        e = (eta - 1j * self.mu) / self.t
        w = (e * e).sum(axis=-1)
        return self.amplitude * ghat(w, self.r, self.bump_radius) ** 2

    def fourier_xi(self, xi):
        """h^(i xi) for real xi; real for even h."""
        xi = np.asarray(xi, dtype=float)
        if xi.shape[-1] != self.r:
            raise ValueError("xi has the wrong dimension")
        s = np.linalg.norm((xi - self.mu) / self.t, axis=-1)
        return self.amplitude * ghat_real_axis(s, self.r, self.bump_radius) ** 2

    def fourier_radial(self, s):
        """Base transform h^(i xi) as a function of |xi| (ignores t, mu)."""
        return self.amplitude * ghat_real_axis(s, self.r, self.bump_radius) ** 2

    # -- physical side ------------------------------------------------------
    def value(self, y):
        """h_{t,mu}(y) for real y (last axis r)."""
        y = np.asarray(y, dtype=float)
        base = _autocorr_radial(np.linalg.norm(y * self.t, axis=-1), self.r, self.bump_radius)
        val = self.amplitude * self.t ** self.r * base
        if self.parity_even:
            return val
        return val * np.exp(-1j * (y @ self.mu))

    def mass(self) -> float:
        """int h = h^(0) for the base function."""
        return float(self.amplitude * ghat_real_axis(np.array(0.0), self.r, self.bump_radius) ** 2)

    def at_zero(self) -> float:
        """h_{t,mu}(0) = t^r c int g^2."""
        return float(self.t ** self.r * self.amplitude * _g_sq_integral(self.r, self.bump_radius))

    # -- sampled grid -------------------------------------------------------
    def grid_axis(self) -> np.ndarray:
        R = self.support_radius
        return np.linspace(-R, R, self.grid_size)

    @cached_property
    def grid(self) -> np.ndarray:
        """Samples of h on the cube [-R, R]^r, by discrete autoconvolution.

        On a uniform grid the discrete convolution of sampled g is the
        trapezoid rule for g * g, which converges faster than any power for
        smooth compactly supported g. For an even number of grid points the
        nodes sit at half-integer multiples of the step, so one factor is
        sampled on the shifted lattice.
        """
        m = self.grid_size
        axis = self.grid_axis()
        step = axis[1] - axis[0]
        half = self.bump_radius / self.t
        k = int(math.floor(half / step)) + 1
        shift = 0.0 if m % 2 else 0.5
        g1 = self._g_lattice(step * np.arange(-k, k + 1))
        g2 = self._g_lattice(step * (np.arange(-k, k + 1) + shift))
        conv = scipy.signal.fftconvolve(g1, g2, mode="full") * step ** self.r
        # conv index j sits at (j - 2k + shift) * step
        idx = np.round(axis / step - shift).astype(int) + 2 * k
        out = np.zeros((m,) * self.r)
        ok = (idx >= 0) & (idx < conv.shape[0])
        out[np.ix_(*([np.where(ok)[0]] * self.r))] = conv[np.ix_(*([idx[ok]] * self.r))]
        out *= self.amplitude * self.t ** self.r
        if not self.parity_even:
            mesh = np.meshgrid(*([axis] * self.r), indexing="ij")
            phase = sum(mu * c for mu, c in zip(self.mu, mesh))
            out = out * np.exp(-1j * phase)
        out.setflags(write=False)
        return out

    def _g_lattice(self, ax):
        mesh = np.meshgrid(*([ax] * self.r), indexing="ij")
        rad = np.sqrt(sum(c * c for c in mesh))
        return bump(rad * self.t, self.bump_radius)

    def fourier_grid(self, eta, strip: float | None = None):
        """Oracle path: tensor trapezoid rule of int h(y) e^{eta . y} dy on the grid."""
        eta = np.atleast_2d(np.asarray(eta, dtype=complex))
        if strip is not None and np.any(np.linalg.norm(eta.real, axis=-1) > strip):
            raise ValueError("Re(lambda) outside the strip guard")
        axis = self.grid_axis()
        step = axis[1] - axis[0]
        samples = self.grid
        out = np.empty(eta.shape[0], dtype=complex)
        for j, e in enumerate(eta):
            acc = samples
            for ax in range(self.r):
                f = np.exp(e[ax] * axis)
                acc = np.tensordot(acc, f, axes=([0], [0]))
            out[j] = acc * step ** self.r
        return out

    # -- serialization ------------------------------------------------------
    def to_json(self) -> str:
        samples = self.grid
        body = {
            "schema": SCHEMA, "schema_version": SCHEMA_VERSION,
            "radius": self.support_radius, "grid_shape": list(samples.shape),
            "parity": "even" if self.parity_even else "none",
            "params": {"r": self.r, "bump_radius": self.bump_radius,
                       "amplitude": self.amplitude, "t": self.t, "mu_xi": list(self.mu_xi),
                       "grid_size": self.grid_size},
        }
        if np.iscomplexobj(samples):
            body["samples"] = {"re": samples.real.ravel().tolist(), "im": samples.imag.ravel().tolist()}
        else:
            body["samples"] = samples.ravel().tolist()
        return json.dumps(body)

    @classmethod
    def from_json(cls, text: str) -> "TestFunction":
        body = json.loads(text)
        if body.get("schema") != SCHEMA:
            raise ValueError("not a test-function container")
        if body.get("schema_version") != SCHEMA_VERSION:
            raise ValueError(f"unsupported schema_version {body.get('schema_version')}")
        p = body["params"]
        tf = cls(r=p["r"], bump_radius=p["bump_radius"], amplitude=p["amplitude"],
                 t=p["t"], mu_xi=tuple(p["mu_xi"]), grid_size=p["grid_size"])
        raw = body["samples"]
        stored = (np.asarray(raw["re"]) + 1j * np.asarray(raw["im"])) if isinstance(raw, dict) \
            else np.asarray(raw)
        if stored.size != tf.grid.size or not np.allclose(stored, tf.grid.ravel(), rtol=0, atol=1e-15):
            raise ValueError("stored samples do not match the stored parameters")
        return tf


def _g_sq_integral(r: int, a: float) -> float:
    x, w = _gl(200)
    s = 0.5 * a * (x + 1.0)
    return float(_sphere_area(r) * 0.5 * a * np.sum(w * bump(s, a) ** 2 * s ** (r - 1)))


def _autocorr_radial(s, r: int, a: float):
    """(g * g)(y) for |y| = s, by direct quadrature."""
    s = np.asarray(s, dtype=float)
    flat = s.reshape(-1)
    out = np.zeros(flat.shape)
    if r == 1:
        x, w = _gl(160)
        for j, v in enumerate(flat):
            lo, hi = max(-a, v - a), min(a, v + a)
            if hi <= lo:
                continue
            z = 0.5 * (hi - lo) * (x + 1.0) + lo
            out[j] = 0.5 * (hi - lo) * np.sum(w * bump(z, a) * bump(v - z, a))
        return out.reshape(s.shape)
    xr, wr = _gl(120)
    xt, wt = _gl(120)
    rho = 0.5 * a * (xr + 1.0)
    th = 0.5 * math.pi * (xt + 1.0)
    R, T = np.meshgrid(rho, th, indexing="ij")
    W = np.outer(wr * 0.5 * a, wt * 0.5 * math.pi)
    ang = np.sin(T) ** (r - 2) * _sphere_area(r - 1)
    gR = bump(R, a) * R ** (r - 1)
    for j, v in enumerate(flat):
        if v >= 2 * a:
            continue
        d = np.sqrt(np.maximum(v * v + R * R - 2 * v * R * np.cos(T), 0.0))
        out[j] = np.sum(W * gR * ang * bump(d, a))
    return out.reshape(s.shape)


def make_autocorrelation(g_radius: float, grid_size: int = 256, r: int = 1,
                         normalize: str | None = "h0") -> TestFunction:
    """h = g * g with supp h of radius g_radius; h^ = g^^2 >= 0.

    normalize: "h0" gives h(0) = 1, "mass" gives int h^ d lam = 1 on i a*
    in the (2 pi)^(-r) normalization (the same thing as h(0) = 1 there),
    "spectral" gives int h^(i xi) d xi = 1 with Lebesgue d xi.
    """
    a = 0.5 * g_radius
    tf = TestFunction(r=r, bump_radius=a, grid_size=grid_size)
    base = _g_sq_integral(r, a)
    if normalize in (None, "none"):
        return tf
    if normalize in ("h0", "mass"):
        return replace(tf, amplitude=1.0 / base)
    if normalize == "spectral":
        return replace(tf, amplitude=1.0 / ((2 * math.pi) ** r * base))
    raise ValueError(f"unknown normalization {normalize!r}")


def scale_modulate(h: TestFunction, t: float, mu) -> TestFunction:
    """h_{t,mu}: dilate by t >= 1 and modulate by mu in i a* (orthonormal xi)."""
    if t < 1.0:
        raise ValueError("t must be >= 1")
    mu = np.asarray(mu, dtype=float).reshape(-1)
    if mu.size == 0:
        mu = np.zeros(h.r)
    if h.t != 1.0 or h.mu.any():
        raise ValueError("scale_modulate expects an undilated, unmodulated h")
    return replace(h, t=float(t), mu_xi=tuple(mu))


def spectral_to_eta(lam, form: str = "killing"):
    """Complex a*-coordinates -> complex orthonormal coordinates."""
    c = lam.coords if isinstance(lam, rootsys.SpectralPoint) else np.asarray(lam, dtype=complex)
    if isinstance(lam, rootsys.SpectralPoint):
        form = lam.form
    return rootsys.to_orthonormal(c.real, form) + 1j * rootsys.to_orthonormal(c.imag, form)


def fourier(h: TestFunction, lam, form: str = "killing", strip: float | None = None):
    """h^(lam) for lam in a*_C given in standard coordinates.

    strip, when given, bounds |Re lam| in the dual norm.
    """
    eta = spectral_to_eta(lam, form)
    if strip is not None and np.any(np.linalg.norm(np.atleast_2d(eta.real), axis=-1) > strip):
        raise ValueError("Re(lambda) outside the strip guard")
    return h.fourier_eta(eta)


# ---------------------------------------------------------------------------
# The functional M: max of |h^| over a complex ball.

def rho_norm(n: int, form: str = "killing") -> float:
    return rootsys.rho(n, form).norm(dual=True)


def ball_radius(n: int, form: str = "killing") -> float:
    return 1.0 + rho_norm(n, form)


def _w_of(r, sigma, rad, a1, b1, theta):
    # center i*sigma*e1, ball point z = a + i b; w = (a1 + i(sigma+b1))^2 + zeta
    w0 = (a1 + 1j * (sigma + b1)) ** 2
    if r == 1:
        return w0
    s = np.maximum(rad * rad - a1 * a1 - b1 * b1, 0.0)
    return w0 + s * np.exp(1j * theta)


TAYLOR_TERMS = 34


def _local_ghat(r: int, a: float, sigma: float, reach: float):
    """Evaluator of g^(w) for w near -sigma^2.

    With zeta = i sqrt(-w) (the root near i sigma) and delta = zeta - i sigma,
    g^ = sum_k delta^k / k! M_k with M_k = 2 int_0^a G(x) x^k c_k(sigma x) dx,
    c_k = cos for even k and i sin for odd k. Used when |delta| a stays
    below about 2.5, where 34 terms reach double precision.
    """
    if sigma < 3.0 or reach * a > 2.5:
        return lambda w: ghat(w, r, a)
    xs, wx, G = _projection_nodes(r, a, _node_count(a, sigma + reach))
    base = 2.0 * wx * G
    c, sn = np.cos(sigma * xs), np.sin(sigma * xs)
    K = TAYLOR_TERMS
    M = np.empty(K, dtype=complex)
    xp = np.ones_like(xs)
    fact = 1.0
    for k in range(K):
        if k:
            fact *= k
        M[k] = np.sum(base * xp * (c if k % 2 == 0 else 1j * sn)) / fact
        xp = xp * xs
    coef = M[::-1]

    def f(w):
        w = np.asarray(w, dtype=complex)
        delta = 1j * np.sqrt(-w) - 1j * sigma
        return np.polyval(coef, delta)
    return f


def _ball_max_params(r: int, a: float, sigma: float, rad: float, spacing: float, fine: float):
    """max |g^(w)| over the image of the complex ball of radius rad at i*sigma*e1.

    r = 1: by the maximum principle only the circle |z| = rad matters.
    r >= 2: the image of the ball is the union over p = (a1, b1) in the disk
    of radius rad of disks centred at (a1 + i(sigma + b1))^2 with radius
    rad^2 - |p|^2, and again only their boundary circles matter.
    """
    gh = _local_ghat(r, a, sigma, rad + rad * rad / max(sigma, 1.0))

    def val(a1, b1, th):
        return np.abs(gh(_w_of(r, sigma, rad, a1, b1, th)))

    if r == 1:
        m = max(16, int(math.ceil(2 * math.pi * rad / spacing)))
        phi = 2 * math.pi * np.arange(m) / m
        v = val(rad * np.cos(phi), rad * np.sin(phi), 0.0)
        k = int(np.argmax(v))
        best = float(v[k])
        for step, span in ((fine / rad, 2 * math.pi / m), (fine / rad / 10, fine / rad)):
            loc = phi[k] if step == fine / rad else loc_best
            grid = loc + np.arange(-span, span + step / 2, step)
            vv = val(rad * np.cos(grid), rad * np.sin(grid), 0.0)
            j = int(np.argmax(vv))
            loc_best = grid[j]
            best = max(best, float(vv[j]))
        return best

    # p-disk net in polar form, theta net with arc length <= spacing on the widest circle
    cand = []
    nr = max(2, int(math.ceil(rad / spacing)) + 1)
    radii = np.linspace(0.0, rad, nr)
    pts = []
    for q in radii:
        nphi = 1 if q == 0 else max(4, int(math.ceil(2 * math.pi * q / spacing)))
        phi = 2 * math.pi * np.arange(nphi) / nphi
        pts.append(np.stack([q * np.cos(phi), q * np.sin(phi)], -1))
    P = np.concatenate(pts)
    smax = rad * rad
    nth = max(8, int(math.ceil(2 * math.pi * smax / (2 * max(sigma, rad) * spacing))) + 8)
    th = 2 * math.pi * np.arange(nth) / nth
    A1 = np.repeat(P[:, 0], nth)
    B1 = np.repeat(P[:, 1], nth)
    TH = np.tile(th, len(P))
    v = val(A1, B1, TH)
    order = np.argsort(v)[::-1][:4]
    best = float(v[order[0]])
    for k in order:
        x0 = np.array([A1[k], B1[k], TH[k]])
        steps = np.array([spacing, spacing, 2 * math.pi / nth])
        for _ in range(2):
            g = np.linspace(-1, 1, 11)
            D = np.stack(np.meshgrid(g, g, g, indexing="ij"), -1).reshape(-1, 3) * steps
            X = x0 + D
            nrm = np.hypot(X[:, 0], X[:, 1])
            scale = np.where(nrm > rad, rad / np.maximum(nrm, 1e-300), 1.0)
            X[:, 0] *= scale
            X[:, 1] *= scale
            vv = val(X[:, 0], X[:, 1], X[:, 2])
            j = int(np.argmax(vv))
            x0 = X[j]
            best = max(best, float(vv[j]))
            steps = steps * (fine / spacing) * 2
        cand.append(best)
    return max(cand)


def m_profile(h: TestFunction, sigmas, rad: float, spacing: float = NET_SPACING,
              fine: float = FINE_SPACING) -> np.ndarray:
    """m(sigma) = max |h^ base| over the ball of radius rad centred at i sigma e1."""
    out = np.empty(len(sigmas))
    for i, s in enumerate(sigmas):
        g = _ball_max_params(h.r, h.bump_radius, float(s), rad, spacing, fine)
        out[i] = h.amplitude * g * g
    return out


def M_functional(h: TestFunction, lam, n: int | None = None, form: str = "killing",
                 spacing: float = NET_SPACING) -> float:
    """M(h^)(lam) = max over the complex ball B_{1+|rho|}(lam) of |h^|."""
    eta = spectral_to_eta(lam, form)
    if np.any(np.abs(eta.real) > 1e-12 * max(1.0, float(np.abs(eta).max()))):
        raise ValueError("M is evaluated at points of i a*")
    n = h.r + 1 if n is None else n
    xi = eta.imag
    s = float(np.linalg.norm((xi - h.mu) / h.t))
    rad = ball_radius(n, form) / h.t
    return float(m_profile(h, [s], rad, spacing)[0])


# ---------------------------------------------------------------------------
# The functional N = int beta~ M(h^) d lam

@dataclass
class NResult:
    value: float
    error_estimate: float
    cutoff: float
    converged: bool
    detail: dict = field(default_factory=dict)


def _cutoff(h, rad, n, t, spacing):
    d, r = rootsys.dims(n)
    s = 1.0
    peak = float(m_profile(h, [0.0], rad, spacing)[0])
    while s <= 1e3:
        v = float(m_profile(h, [s], rad, spacing)[0]) * (1 + t * s) ** (d - r) * s ** (r - 1)
        if v < 1e-14 * peak:
            return s, True
        s *= 1.25
    return 1e3, False


_M_TABLES: dict = {}


def m_table(h: TestFunction, rad: float, cut: float, count: int, spacing: float = NET_SPACING):
    """log m on graded sigma nodes in [0, cut], as a shape-preserving interpolant.

    M(h_{t,mu}^) depends on mu only through a shift of the argument, so one
    table per (base function, ball radius) serves every modulation.
    """
    key = (h.r, h.bump_radius, h.amplitude, round(rad, 14), round(cut, 12), count, spacing)
    if key not in _M_TABLES:
        sig = cut * np.linspace(0.0, 1.0, count) ** 1.5
        vals = m_profile(h, sig, rad, spacing)
        _M_TABLES[key] = PchipInterpolator(sig, np.log(vals))
    return _M_TABLES[key]


def _angular_beta_tilde(n, form, mu_xi, t, sigma, nodes=32):
    """Average over the unit sphere of beta~(i(mu + t sigma theta)) (times area)."""
    r = n - 1
    if r == 1:
        th = np.array([[1.0], [-1.0]])
        pts = mu_xi + t * sigma * th
        return float(plancherel.beta_tilde(1.0, 1j * rootsys.from_orthonormal(pts, n, form)).sum())
    if r == 2:
        # split [0, 2pi) at the kinks of |lam_i - lam_j|, then Gauss-Legendre on each arc
        B = rootsys.trace_zero_basis(n) * math.sqrt(rootsys.form_scale(n, form))
        i, j = np.triu_indices(n, 1)
        D = B[i] - B[j]                       # pair differences as linear forms in xi
        brk = [0.0, 2 * math.pi]
        for dvec in D:
            c0 = float(dvec @ mu_xi)
            A = t * sigma * float(np.hypot(*dvec))
            if A > abs(c0):
                base = math.atan2(dvec[1], dvec[0])
                delta = math.acos(-c0 / A)
                for ang in (base + delta, base - delta):
                    brk.append(ang % (2 * math.pi))
        brk = np.unique(np.array(brk))
        x, w = _gl(nodes)
        tot = 0.0
        for lo, hi in zip(brk[:-1], brk[1:]):
            if hi - lo < 1e-15:
                continue
            ph = 0.5 * (hi - lo) * (x + 1.0) + lo
            pts = mu_xi + t * sigma * np.stack([np.cos(ph), np.sin(ph)], -1)
            bt = plancherel.beta_tilde(1.0, 1j * rootsys.from_orthonormal(pts, n, form))
            tot += 0.5 * (hi - lo) * float(np.sum(w * bt))
        return tot
    raise NotImplementedError("N functional is implemented for rank r <= 2 (n <= 3)")


def N_functional(h: TestFunction, n: int | None = None, form: str = "killing",
                 panels: int = 32, spacing: float = NET_SPACING, table: int | None = None) -> NResult:
    """int_{i a*} beta~(lam) M(h^)(lam) d lam.

    With lam = mu + t eta the integral becomes
    t^r (2 pi)^-r int beta~(mu + t eta) m_{rho'/t}(|eta|) d eta, where m is
    the ball maximum of the base transform and rho' = 1 + |rho|. The radial
    integral uses graded Gauss panels; the error estimate compares P and 2P
    panels. `table` sets the number of sigma nodes of the m interpolant.
    """
    n = h.r + 1 if n is None else n
    r = n - 1
    if r != h.r:
        raise ValueError("test function dimension does not match the rank")
    t = h.t
    rad = ball_radius(n, form) / t
    cut, ok = _cutoff(h.base(), rad, n, t, spacing)
    if table is None:
        table = 400 if r == 1 else 160
    logm = m_table(h.base(), rad, cut, table, spacing)

    def integrate(P):
        edges = cut * (np.linspace(0.0, 1.0, P + 1) ** 1.5)
        if r == 1:
            kink = abs(float(h.mu[0])) / t
            if 0 < kink < cut:
                edges = np.unique(np.append(edges, kink))
        x, w = _gl(12)
        total = 0.0
        for lo, hi in zip(edges[:-1], edges[1:]):
            s = 0.5 * (hi - lo) * (x + 1.0) + lo
            m = np.exp(logm(s))
            ang = np.array([_angular_beta_tilde(n, form, h.mu, t, si) for si in s])
            total += 0.5 * (hi - lo) * float(np.sum(w * m * ang * s ** (r - 1)))
        return total * t ** r / (2 * math.pi) ** r

    v1 = integrate(panels)
    v2 = integrate(2 * panels)
    err = abs(v2 - v1) / max(abs(v2), 1e-300)
    return NResult(v2, err, cut, ok, {"panels": 2 * panels, "ball_radius": rad, "table": table})


def smp_ratio(h: TestFunction, n: int, t: float, mu, form: str = "killing") -> float:
    """N(h_{t,mu}) / (t^r beta~(t, mu)) for an undilated base function h."""
    ht = scale_modulate(h, t, mu)
    val = N_functional(ht, n, form).value
    lam = 1j * rootsys.from_orthonormal(ht.mu, n, form)
    return val / (t ** (n - 1) * plancherel.beta_tilde(t, lam))


def verify_smp(n: int, ts=None, mu_per_t: int = 4, mu_max: float = 100.0,
               g_radius: float = 2.0, seed: int = 0, form: str = "killing") -> dict:
    """Running-sup slope of the smp ratio over a (t, mu) grid.

    Points are ordered by t + |mu| and the running sup is fitted on the
    upper half of that range. Each t gets mu = 0 plus `mu_per_t` random
    directions with log-uniform norms in [1, mu_max].
    """
    r = n - 1
    ts = np.arange(1, 101) if ts is None else np.asarray(ts, dtype=float)
    rng = np.random.default_rng(seed)
    h = make_autocorrelation(g_radius, grid_size=256 if r <= 2 else 64, r=r, normalize="h0")
    keys, vals = [], []
    for t in ts:
        mus = [np.zeros(r)]
        for _ in range(mu_per_t):
            d = rng.standard_normal(r)
            mus.append(d / np.linalg.norm(d) * math.exp(rng.uniform(0.0, math.log(mu_max))))
        for mu in mus:
            keys.append(float(t) + float(np.linalg.norm(mu)))
            vals.append(smp_ratio(h, n, float(t), mu, form))
    order = np.argsort(keys, kind="stable")
    keys = np.asarray(keys)[order]
    vals = np.asarray(vals)[order]
    slope = tail_slope(keys, vals)
    return check_record("smp", n, len(vals), float(vals.max()), slope, slope <= 0.02,
                        t_values=[float(x) for x in ts])


# ---------------------------------------------------------------------------
# n = 2 Abel roundtrip.
#
# With a_x = diag(e^x, e^-x), H = (x, -x), lam = (iu, -iu):
#   phi_lam(a_x) = (1/2pi) int exp(-(1 + 2iu) L(theta)) d theta,
#   L(theta) = log |bottom row of k_theta a_x| = (1/2) log(sin^2 e^{2x} + cos^2 e^{-2x}).
# The Abel transform with dn = dv/pi (so that c(rho) = 1):
#   A F(x) = e^x int F(a_x n_v) dv / pi = (sqrt 2 / pi) int f(cosh 2x + w^2) dw
# where F(a_y) = f(cosh 2y).

def _sl2_scales(form: str):
    # orthonormal coordinate of H = (x, -x) is kx * x; of lam = (iu,-iu) is i ku * u
    c = rootsys.form_scale(2, form)
    return math.sqrt(2.0 * c), math.sqrt(2.0 / c)


def synthesis_sl2(h: TestFunction, xs, form: str = "killing", theta_nodes: int = 2048,
                  u_nodes: int = 4096):
    """B h(a_x) = (1/|W|) int h^(lam) phi_{-lam}(a_x) beta(lam) d lam, n = 2."""
    if h.r != 1:
        raise ValueError("n = 2 needs a one-dimensional test function")
    kx, ku = _sl2_scales(form)
    xs = np.asarray(xs, dtype=float)
    # spectral grid in xi = ku * u; cut where h^ beta is negligible
    smax = 1.0
    while smax < 1e4:
        v = h.fourier_xi(np.array([[smax]]))[0] * plancherel.beta_sl2_closed_form(smax / ku)
        if abs(v) < 1e-17 * max(h.mass(), 1e-300):
            break
        smax *= 1.2
    xg, wg = _gl(u_nodes)
    xi = 0.5 * smax * (xg + 1.0)
    wxi = 0.5 * smax * wg
    u = xi / ku
    weight = h.fourier_xi(xi[:, None]) * plancherel.beta_sl2_closed_form(u) * wxi
    # even integrand: (1/2) int_R = int_0^inf; measure (2 pi)^-1 d xi
    weight = weight / (2 * math.pi)
    # L(theta) has period pi and is even about 0 and pi/2: the trapezoid rule
    # on [0, pi) reduces to the nodes in [0, pi/2] with doubled inner weights
    m = theta_nodes
    k = np.arange(m // 2 + 1)
    th = math.pi * k / m
    tw = np.where((k == 0) | (k == m // 2), 1.0, 2.0) / m
    s2, c2 = np.sin(th) ** 2, np.cos(th) ** 2
    # Phi(L) = int weight(u) cos(2 u L) is band limited to 2 u_max; tabulate it
    # once on a uniform grid fine enough for a cubic spline, then look it up.
    Lmax = float(np.abs(xs).max(initial=0.0)) + 1e-3
    delta = min(0.02 / float(u.max()), Lmax / 64)
    Lgrid = np.arange(0.0, Lmax + 2 * delta, delta)
    phi_tab = np.empty(Lgrid.size)
    step = max(1, 4_000_000 // u.size)
    for i in range(0, Lgrid.size, step):
        phi_tab[i:i + step] = np.cos(2.0 * np.outer(Lgrid[i:i + step], u)) @ weight
    spline = CubicSpline(np.concatenate([-Lgrid[:0:-1], Lgrid]),
                         np.concatenate([phi_tab[:0:-1], phi_tab]))
    out = np.empty(xs.shape)
    for i, x in enumerate(xs.ravel()):
        L = 0.5 * np.log(s2 * math.exp(2 * x) + c2 * math.exp(-2 * x))
        # phi_{-lam}: exponent -(1 - 2iu) L; the u-integral is even so only the cosine survives
        out.flat[i] = float(np.sum(tw * np.exp(-L) * spline(L)))
    return out


def abel_sl2(f_of_Q, xs, wmax: float, nodes: int = 400):
    """A F(a_x) = (sqrt 2 / pi) int_R f(cosh 2x + w^2) dw for F supported in Q <= Qmax."""
    x, w = _gl(nodes)
    out = np.empty(np.shape(xs))
    for i, xv in enumerate(np.ravel(xs)):
        Q0 = math.cosh(2 * xv)
        top = math.sqrt(max(wmax - Q0, 0.0))
        if top == 0.0:
            out.flat[i] = 0.0
            continue
        ww = 0.5 * top * (x + 1.0)
        out.flat[i] = 2.0 * 0.5 * top * float(np.sum(w * f_of_Q(Q0 + ww * ww))) * math.sqrt(2) / math.pi
    return out


def abel_roundtrip_sl2(h: TestFunction, form: str = "killing", points: int = 41,
                       table: int = 600) -> dict:
    """sup |A(B h) - h^W| on a grid of the Cartan line, n = 2."""
    if h.r != 1:
        raise ValueError("n = 2 only")
    kx, _ = _sl2_scales(form)
    Rx = h.support_radius / kx                 # support in the x-coordinate
    if not np.any(h.fourier_xi(np.array([[0.0], [1.0], [3.0]]))):
        return {"check": "abel_roundtrip", "sup_deviation": 0.0, "pass": True, "points": points}
    # B h as a function of Q = cosh 2y on [1, cosh(2 Rx)], tabulated then splined
    ys = Rx * (1 - np.cos(np.linspace(0, math.pi, table))) / 2
    Bh = synthesis_sl2(h, ys, form)
    Q = np.cosh(2 * ys)
    spl = CubicSpline(Q, Bh)
    Qmax = float(Q[-1])

    def f(qv):
        qv = np.asarray(qv)
        return np.where(qv <= Qmax, spl(np.minimum(qv, Qmax)), 0.0)

    xs = np.linspace(0.0, 1.1 * Rx, points)
    got = abel_sl2(f, xs, Qmax)
    want = h.value((kx * xs)[:, None])
    want = np.real(want)
    dev = float(np.max(np.abs(got - want)))
    # support: B h beyond the Cartan radius R + margin
    beyond = synthesis_sl2(h, np.array([Rx + 0.1 / kx, Rx + 0.5 / kx]), form)
    return {"check": "abel_roundtrip", "points": points, "sup_deviation": dev,
            "scale": float(np.max(np.abs(want))), "support_leak": float(np.max(np.abs(beyond))),
            "pass": bool(dev <= 1e-6 and np.max(np.abs(beyond)) <= 1e-8)}
