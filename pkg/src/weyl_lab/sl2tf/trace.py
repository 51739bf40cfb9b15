"""Geometric side of the Selberg trace formula for Gamma(N), evaluated term by term.

Conventions. The spectral variable r has lambda = 1/4 + r^2, the length
variable is hyperbolic distance, and

    h^(r) = int h(x) e^{irx} dx,      so   int h^ dr = 2 pi h(0).

For even h and a shift t the spectral test function is
H_t(r) = h^(t - r) + h^(t + r); its Fourier partner is 2 h(u) cos(tu), which
is where the cos(t l) in the hyperbolic term and the factor 2 in the log 2
term come from. The spectral side is sum_j H_t(r_j) over r_j >= 0 (with the
constant function at r = i/2).

Term list (all real for real t):

    identity        (Area / 2pi) int h^(t - r) r tanh(pi r) dr
    hyperbolic      sum_{classes} l0 / sinh(l/2) h(l) cos(t l)
    scatter_int     (1 / 2pi) int h^(t - r) phi'/phi(1/2 + ir) dr
    scatter_half    -(1/2) tr Phi(1/2) h^(t)
    digamma_int     -(m / pi) int h^(t - r) Re psi(1 + ir) dr
    m_half          (m / 2) h^(t)
    log2            -2 m log 2 h(0)

The r-integrands are analytic in a strip around the real axis (|Im r| < 1/4
for the scattering phase), so a trapezoid rule on a uniform lattice
converges geometrically; the tables of phi'/phi and Re psi are computed
once per lattice and reused for every t.
"""

from __future__ import annotations

import hashlib
import io
import math
import os
from dataclasses import dataclass, asdict
from functools import cached_property
from pathlib import Path

import numpy as np

from .. import rootsys
from ..fits import loglog_fit
from ..reports import atomic_write
from ..special import digamma
from ..testfn import TestFunction, _gl, make_autocorrelation
from .groups import CongruenceGroup
from .lengths import CACHE_ENV, LengthSpectrum
from .scattering import ScatteringData, scattering_phase

STEP = 0.05


class SupportError(ValueError):
    """The test function reaches lengths the length spectrum does not certify."""


# ---------------------------------------------------------------------------
# coordinates

def _scales(form: str):
    c = rootsys.form_scale(2, form)
    return math.sqrt(2.0 * c), math.sqrt(2.0 / c)


def selberg_to_orthonormal(length=None, r=None, form: str = "killing"):
    """Selberg (length, r) -> orthonormal (y, xi) coordinates of a and a* for n = 2.

    a_x = diag(e^x, e^-x) translates by hyperbolic distance 2x, and
    lambda = (iu, -iu) has Selberg parameter r = u. With y = kx x and
    xi = ku u (kx = sqrt(2c), ku = sqrt(2/c), so kx ku = 2) this gives
    y = kx length / 2 and xi = ku r; the pairing r * length = xi * y is kept.
    """
    kx, ku = _scales(form)
    y = None if length is None else np.asarray(length, dtype=float) * kx / 2.0
    xi = None if r is None else np.asarray(r, dtype=float) * ku
    return y, xi


def orthonormal_to_selberg(y=None, xi=None, form: str = "killing"):
    kx, ku = _scales(form)
    length = None if y is None else 2.0 * np.asarray(y, dtype=float) / kx
    r = None if xi is None else np.asarray(xi, dtype=float) / ku
    return length, r


@dataclass
class SelbergTestFunction:
    """A one-dimensional TestFunction read in Selberg variables."""

    base: TestFunction
    form: str = "killing"

    def __post_init__(self):
        if self.base.r != 1:
            raise ValueError("the SL(2) trace formula needs a one-dimensional test function")

    @property
    def support_radius(self) -> float:
        kx, _ = _scales(self.form)
        return 2.0 * self.base.support_radius / kx

    @property
    def is_even(self) -> bool:
        return bool(self.base.parity_even)

    def h(self, length):
        y, _ = selberg_to_orthonormal(length=length, form=self.form)
        y = np.atleast_1d(y)
        return np.array([self.base.value(np.array([v])) for v in y], dtype=float).reshape(np.shape(length))

    def at_zero(self) -> float:
        return float(self.base.at_zero())

    def hhat(self, r):
        _, ku = _scales(self.form)
        r = np.asarray(r, dtype=float)
        v = self.base.fourier_xi((ku * r).reshape(-1, 1))
        return (ku * np.real(v)).reshape(r.shape)

    def spectral_mass(self) -> float:
        return 2.0 * math.pi * self.at_zero()

    def extent(self, rel: float = 1e-18) -> float:
        """|r| beyond which |h^| < rel * h^(0)."""
        peak = abs(float(self.hhat(np.array([0.0]))[0]))
        s = 1.0
        while s < 1e5:
            if abs(float(self.hhat(np.array([s]))[0])) < rel * peak:
                return s
            s *= 1.1
        return s

    def cumulative(self, x):
        """H(x) = int_{-inf}^x h^(u) du = pi h(0) + 2 int_0^R h(y) sin(x y) / y dy.

        Beyond the extent of h^ the value is 0 or 2 pi h(0) to working
        precision; inside it the sine integral is resolved with enough
        Gauss nodes for x R / pi oscillations.
        """
        R = self.support_radius
        S = self.reach
        x = np.asarray(x, dtype=float)
        xc = np.clip(x, -S, S)
        g, w = _gl(max(200, int(2.0 * S * R) + 64))
        y = 0.5 * R * (g + 1.0)
        hy = self._h_nodes(y) * 0.5 * R * w
        mid = math.pi * self.at_zero() + 2.0 * (np.sin(np.multiply.outer(xc, y)) / y) @ hy
        return np.where(x >= S, 2 * math.pi * self.at_zero(), np.where(x <= -S, 0.0, mid))

    @cached_property
    def reach(self) -> float:
        return self.extent()

    def _h_nodes(self, y):
        key = (y.size, float(y[-1]))
        cache = self.__dict__.setdefault("_hcache", {})
        if key not in cache:
            cache[key] = self.h(y)
        return cache[key]


def selberg_autocorrelation(support: float, form: str = "killing") -> SelbergTestFunction:
    """Even autocorrelation bump with h(0) = 1 and support [-support, support] in length."""
    # the base function lives in y = kx * length / 2
    kx, _ = _scales(form)
    base = make_autocorrelation(support * kx / 2.0, grid_size=256, r=1, normalize="h0")
    return SelbergTestFunction(base, form)


# ---------------------------------------------------------------------------
# spectral tables

_TABLES: dict = {}


def _table_key(N, scat: ScatteringData, step, kmax):
    blob = f"{N}|{scat.k}|{scat.l}|{scat.A!r}|{scat.char_spec}|{step!r}|{kmax}"
    return hashlib.sha256(blob.encode()).hexdigest()[:24]


def spectral_tables(N: int, scat: ScatteringData, rmax: float, step: float = STEP, cache_dir=None):
    """phi'/phi(1/2 + ir) and Re psi(1 + ir) on r = k * step, |r| <= rmax."""
    kmax = int(math.ceil(rmax / step))
    # tables are nested: a larger one serves any smaller request
    for (n0, key0, st0, k0), val in _TABLES.items():
        if n0 == N and key0 == _table_key(N, scat, step, 0) and st0 == step and k0 >= kmax:
            off = k0 - kmax
            return tuple(v[off:len(v) - off] for v in val)
    key = _table_key(N, scat, step, kmax)
    d = cache_dir if cache_dir is not None else os.environ.get(CACHE_ENV)
    path = Path(d) / f"phase-{key}.npz" if d else None
    if path is not None and path.exists():
        with np.load(path) as z:
            r, phase, psi = z["r"], z["phase"], z["psi"]
    else:
        k = np.arange(0, kmax + 1)
        rp = k * step
        half = np.empty(rp.size)
        for i in range(0, rp.size, 2000):
            half[i:i + 2000] = scattering_phase(N, rp[i:i + 2000], scat).value
        # the phase is even in r (checked in the validator); tabulate r >= 0 once
        phase = np.concatenate([half[:0:-1], half])
        r = np.concatenate([-rp[:0:-1], rp])
        psi = digamma(1.0 + 1j * r).real
        if path is not None:
            buf = io.BytesIO()
            np.savez(buf, r=r, phase=phase, psi=psi)
            atomic_write(path, buf.getvalue())
    _TABLES[(N, _table_key(N, scat, step, 0), step, kmax)] = (r, phase, psi)
    return r, phase, psi


# ---------------------------------------------------------------------------
# evaluation

@dataclass(frozen=True)
class TraceFormulaEvaluation:
    t: float
    identity_term: float
    hyperbolic_term: float
    scattering_integral: float
    scattering_half: float
    digamma_integral: float
    m_half_term: float
    log2_term: float
    total: float

    def terms(self):
        return (self.identity_term, self.hyperbolic_term, self.scattering_integral,
                self.scattering_half, self.digamma_integral, self.m_half_term, self.log2_term)

    def scale(self) -> float:
        return max(abs(v) for v in self.terms())

    def as_dict(self):
        return asdict(self)


def _check_support(h: SelbergTestFunction, spec: LengthSpectrum):
    if h.support_radius > spec.validity_radius + 1e-12:
        raise SupportError(f"test function support {h.support_radius:.6g} exceeds the certified "
                           f"length-spectrum radius {spec.validity_radius:.6g}")


def _trace_phi_half(scat: ScatteringData, grp: CongruenceGroup) -> float:
    if scat.trace_phi_half is not None:
        return scat.trace_phi_half
    raise ValueError("constants carry no tr Phi(1/2) value")


def _hyperbolic(h, spec: LengthSpectrum, ts):
    ts = np.asarray(ts, dtype=float)
    out = np.zeros(ts.shape)
    R = h.support_radius
    for e in spec.entries:
        if e.length >= R:
            continue
        w = e.class_count * e.primitive_length / math.sinh(e.length / 2.0) * float(h.h(np.array([e.length]))[0])
        out = out + w * np.cos(ts * e.length)
    return out


def geometric_side_grid(h: SelbergTestFunction, ts, grp: CongruenceGroup, spec: LengthSpectrum,
                        scat: ScatteringData, step: float = STEP) -> list[TraceFormulaEvaluation]:
    """All seven terms at every t in ts.

    When every t is a multiple of the lattice step the convolutions reuse
    one table of h^ on the lattice; otherwise h^(t - r) is evaluated per t.
    """
    _check_support(h, spec)
    ts = np.asarray(ts, dtype=float)
    S = h.reach
    tmax = float(np.abs(ts).max(initial=0.0))
    r, phase, psi = spectral_tables(grp.N, scat, tmax + S, step)
    K = (r.size - 1) // 2
    weight_id = grp.area / (2 * math.pi) * r * np.tanh(math.pi * r)
    weight_sc = phase / (2 * math.pi)
    weight_dg = -(grp.cusps / math.pi) * psi
    W = np.stack([weight_id, weight_sc, weight_dg])
    idx = np.round(ts / step)
    on_lattice = np.all(np.abs(idx * step - ts) <= 1e-12 * np.maximum(1.0, np.abs(ts)))
    if on_lattice:
        # h^ on lattice offsets u = t - r, |u| <= tmax + rmax
        U = np.arange(-2 * K, 2 * K + 1) * step
        hu = np.zeros(U.size)
        inside = np.abs(U) <= S
        hu[inside] = h.hhat(U[inside])
        conv = np.empty((3, ts.size))
        for i, kt in enumerate(idx.astype(int)):
            # u = t - r_j = (kt - j) step with j = -K..K
            sl = hu[2 * K + kt - np.arange(-K, K + 1)]
            conv[:, i] = step * (W @ sl)
    else:
        conv = np.empty((3, ts.size))
        for i, t in enumerate(ts):
            u = t - r
            sl = np.zeros(r.size)
            m = np.abs(u) <= S
            sl[m] = h.hhat(u[m])
            conv[:, i] = step * (W @ sl)
    hh_t = h.hhat(ts)
    tr_half = _trace_phi_half(scat, grp)
    hyp = _hyperbolic(h, spec, ts)
    log2 = -2.0 * grp.cusps * math.log(2.0) * h.at_zero()
    out = []
    for i, t in enumerate(ts):
        terms = (conv[0, i], hyp[i], conv[1, i], -0.5 * tr_half * hh_t[i], conv[2, i],
                 0.5 * grp.cusps * hh_t[i], log2)
        out.append(TraceFormulaEvaluation(float(t), *map(float, terms), total=float(math.fsum(terms))))
    return out


def geometric_side(h: SelbergTestFunction, t: float, grp: CongruenceGroup, spec: LengthSpectrum,
                   scat: ScatteringData, step: float = STEP) -> TraceFormulaEvaluation:
    return geometric_side_grid(h, [t], grp, spec, scat, step)[0]


def check_positivity(h, ts, grp, spec, scat, step: float = STEP) -> dict:
    """Spectral-side positivity and evenness over a t-grid (even h with h^ >= 0)."""
    ev = geometric_side_grid(h, ts, grp, spec, scat, step)
    ev_neg = geometric_side_grid(h, -np.asarray(ts, dtype=float), grp, spec, scat, step)
    scale = max(e.scale() for e in ev)
    worst = min(e.total for e in ev)
    even = max(abs(a.total - b.total) for a, b in zip(ev, ev_neg))
    ok = worst >= -1e-6 * scale and even <= 1e-9 * max(1.0, scale)
    return {"N": grp.N, "t_points": len(ev), "min_total": worst, "scale": scale,
            "evenness": even, "pass": bool(ok), "evaluations": ev}


# ---------------------------------------------------------------------------
# smoothed count

def smoothed_count(h: SelbergTestFunction, lam: float, grp: CongruenceGroup, spec: LengthSpectrum,
                   scat: ScatteringData, step: float = STEP) -> dict:
    """int_{-lam}^{lam} (geometric side)(t) dt, normalized by the spectral mass of h.

    By Fubini every r-integral becomes an integral against
    K(r) = int_{-lam}^{lam} h^(t - r) dt = H(lam - r) - H(-lam - r), with H
    the antiderivative of h^; the h^(t) terms give K(0), the hyperbolic
    term gives 2 sin(lam l)/l, the constant term 2 lam. Dividing by
    int h^ = 2 pi h(0) makes the count read as a number of eigenvalues.
    """
    if not h.is_even:
        raise ValueError("smoothed count needs an even test function")
    _check_support(h, spec)
    if lam <= 0:
        return {"lambda": float(lam), "integral": 0.0, "weyl_prediction": 0.0, "residual": 0.0}
    S = h.reach
    r, phase, psi = spectral_tables(grp.N, scat, lam + S, step)
    Kr = h.cumulative(lam - r) - h.cumulative(-lam - r)
    K0 = float(h.cumulative(np.array([lam]))[0] - h.cumulative(np.array([-lam]))[0])
    ident = grp.area / (2 * math.pi) * step * float(np.sum(Kr * r * np.tanh(math.pi * r)))
    sc_int = step * float(np.sum(Kr * phase)) / (2 * math.pi)
    dg_int = -(grp.cusps / math.pi) * step * float(np.sum(Kr * psi))
    tr_half = _trace_phi_half(scat, grp)
    hyp = 0.0
    for e in spec.entries:
        if e.length < h.support_radius:
            hyp += e.class_count * e.primitive_length / math.sinh(e.length / 2.0) * \
                float(h.h(np.array([e.length]))[0]) * 2.0 * math.sin(lam * e.length) / e.length
    total = ident + hyp + sc_int + (-0.5 * tr_half + 0.5 * grp.cusps) * K0 + dg_int \
        - 2.0 * grp.cusps * math.log(2.0) * h.at_zero() * 2.0 * lam
    integral = total / h.spectral_mass()
    pred = grp.area / (2 * math.pi) * lam * lam
    return {"lambda": float(lam), "integral": integral, "weyl_prediction": pred,
            "residual": integral - pred,
            "parts": {"identity": ident, "hyperbolic": hyp, "scatter_int": sc_int,
                      "half_terms": (-0.5 * tr_half + 0.5 * grp.cusps) * K0, "digamma_int": dg_int,
                      "log2": -4.0 * grp.cusps * math.log(2.0) * h.at_zero() * lam}}


def smoothed_count_experiment(h, lams, grp, spec, scat, step: float = STEP) -> dict:
    rows = [smoothed_count(h, float(l), grp, spec, scat, step) for l in lams]
    res = np.array([abs(r["residual"]) for r in rows])
    slope, _ = loglog_fit(np.asarray(lams, dtype=float), res)
    return {"rows": rows, "residual_exponent": slope, "pass": bool(slope <= 1.15)}
