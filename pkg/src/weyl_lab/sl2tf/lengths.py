"""Hyperbolic conjugacy classes of Gamma(N) and their lengths.

A matrix gamma = [[a, b], [c, d]] of trace t corresponds to the binary
quadratic form (c, d - a, -b) of discriminant t^2 - 4, and conjugation in
SL(2, Z) is proper equivalence of forms. Classes are therefore counted by
cycles of reduced indefinite forms. Each SL(2, Z)-class inside Gamma(N)
splits into [SL(2, Z/N) : image of the centralizer] classes of Gamma(N).
"""

from __future__ import annotations

import hashlib
import json
import math
import os
import time
from dataclasses import dataclass, field
from math import isqrt
from pathlib import Path

import numpy as np

from .groups import _check_level, sl2_index

MAX_TRACE = 200
CACHE_ENV = "WEYL_LAB_CACHE"


@dataclass(frozen=True)
class LengthEntry:
    trace: int
    length: float
    primitive_length: float
    class_count: int


@dataclass
class LengthSpectrum:
    N: int
    requested: float
    validity_radius: float
    entries: list[LengthEntry] = field(default_factory=list)
    truncated: bool = False

    def to_json(self) -> dict:
        return {"N": self.N, "L": self.requested, "validity_radius": self.validity_radius,
                "truncated": self.truncated,
                "entries": [[e.trace, e.length, e.primitive_length, e.class_count] for e in self.entries]}

    @classmethod
    def from_json(cls, d: dict) -> "LengthSpectrum":
        ents = [LengthEntry(int(t), float(l), float(l0), int(c)) for t, l, l0, c in d["entries"]]
        out = cls(int(d["N"]), float(d["L"]), float(d["validity_radius"]), ents, bool(d["truncated"]))
        out.check()
        return out

    def check(self):
        for e in self.entries:
            if abs(e.length - hyperbolic_length(e.trace)) > 1e-12 * max(1.0, e.length):
                raise ValueError(f"inconsistent length for trace {e.trace}")
        if any(a.length > b.length for a, b in zip(self.entries, self.entries[1:])):
            raise ValueError("entries must be sorted by length")


def hyperbolic_length(trace: int) -> float:
    return 2.0 * math.acosh(abs(trace) / 2.0)


# ---------------------------------------------------------------------------
# reduced indefinite forms

def _lt_sqrt(x: int, D: int) -> bool:
    """x < sqrt(D) for integer x and non-square D > 0."""
    return x < 0 or x * x < D


def reduced_forms(D: int) -> list[tuple[int, int, int]]:
    """All reduced forms (a, b, c) of discriminant D, primitive or not.

    Reduced means 0 < b < sqrt D and sqrt D - b < 2|a| < sqrt D + b.
    """
    if D <= 0 or isqrt(D) ** 2 == D:
        raise ValueError("discriminant must be positive and not a square")
    out = []
    for b in range(1, isqrt(D) + 1):
        if (b - D) % 2 or not _lt_sqrt(b, D):
            continue
        ac = (b * b - D) // 4
        m = -ac
        for a in range(1, isqrt(m) + 1):
            if m % a:
                continue
            for aa in {a, m // a}:
                # sqrt D - b < 2|a|  and  2|a| - b < sqrt D
                if not _lt_sqrt(2 * aa - b, D) or _lt_sqrt(2 * aa + b, D):
                    continue
                out.append((aa, b, -(m // aa)))
                out.append((-aa, b, m // aa))
    return sorted(set(out))


def rho_step(f: tuple[int, int, int], D: int) -> tuple[int, int, int]:
    """The reduction operator (a, b, c) -> (c, b', a'), a proper equivalence."""
    a, b, c = f
    ac = abs(c)
    r = isqrt(D)
    # b' = -b mod 2|c| with sqrt D - 2|c| < b' < sqrt D
    if ac <= r:
        top = r
    else:
        top = r  # the window still has width 2|c| > sqrt D
    bp = top - ((top + b) % (2 * ac))
    while not _lt_sqrt(bp, D):
        bp -= 2 * ac
    while _lt_sqrt(bp + 2 * ac, D):
        bp += 2 * ac
    ap = (bp * bp - D) // (4 * c)
    return (c, bp, ap)


def form_cycles(D: int) -> list[list[tuple[int, int, int]]]:
    forms = reduced_forms(D)
    seen = set()
    cycles = []
    for f in forms:
        if f in seen:
            continue
        cyc = [f]
        seen.add(f)
        g = rho_step(f, D)
        while g != f:
            if g in seen:
                raise RuntimeError("reduction cycle did not close")
            seen.add(g)
            cyc.append(g)
            g = rho_step(g, D)
        cycles.append(cyc)
    return cycles


def form_to_matrix(f, t: int) -> np.ndarray:
    A, B, C = f
    return np.array([[(t - B) // 2, -C], [A, (t + B) // 2]], dtype=object)


def matrix_to_form(g) -> tuple[int, int, int]:
    (a, b), (c, d) = g
    return (int(c), int(d - a), int(-b))


def sl2z_classes(t: int) -> list[np.ndarray]:
    """One representative matrix per SL(2, Z)-conjugacy class of trace t, |t| > 2."""
    if abs(t) <= 2:
        raise ValueError("hyperbolic classes need |trace| > 2")
    D = t * t - 4
    reps = []
    for cyc in form_cycles(D):
        f = next((g for g in cyc if (g[1] - t) % 2 == 0), cyc[0])
        reps.append(form_to_matrix(f, t))
    return reps


# ---------------------------------------------------------------------------
# primitive roots and the Gamma(N) refinement

def _mat_mod(g, N):
    return tuple(int(x) % N for x in np.asarray(g).ravel())


def _mul_mod(x, y, N):
    a, b, c, d = x
    e, f, g, h = y
    return ((a * e + b * g) % N, (a * f + b * h) % N, (c * e + d * g) % N, (c * f + d * h) % N)


def primitive_root(g) -> tuple[np.ndarray, int]:
    """(delta, k) with g = +-delta^k and delta primitive in SL(2, Z), tr delta > 2.

    Tests k from large to small: tr(delta^k) follows s_{j+1} = tau s_j - s_{j-1},
    and Cayley-Hamilton gives delta^k = u_k delta - u_{k-1} I.
    """
    g = np.asarray(g, dtype=object)
    t = int(g[0, 0] + g[1, 1])
    sign = 1 if t > 0 else -1
    ell = hyperbolic_length(t)
    kmax = int(ell / hyperbolic_length(3)) + 1
    for k in range(kmax, 0, -1):
        tau = round(2.0 * math.cosh(ell / (2 * k)))
        if tau < 3:
            continue
        s0, s1, u0, u1 = 2, tau, 0, 1
        for _ in range(k - 1):
            s0, s1 = s1, tau * s1 - s0
            u0, u1 = u1, tau * u1 - u0
        if s1 != abs(t):
            continue
        m = sign * g + u0 * np.eye(2, dtype=object)
        if all(int(x) % u1 == 0 for x in m.ravel()):
            return m // u1, k
    raise RuntimeError("no primitive root found")


def centralizer_image_order(delta, N: int) -> tuple[int, int]:
    """(|<-I, delta> mod N|, j) with j the least power such that delta^j = +-I mod N."""
    I = (1 % N, 0, 0, 1 % N)
    mI = ((-1) % N, 0, 0, (-1) % N)
    dm = _mat_mod(delta, N)
    x = dm
    j = 1
    while x != I and x != mI:
        x = _mul_mod(x, dm, N)
        j += 1
    return (2 * j, j)


def in_gamma(g, N: int) -> bool:
    return _mat_mod(g, N) == (1 % N, 0, 0, 1 % N)


def _admissible_traces(N: int, tmax: int):
    step = N * N if N > 1 else 1
    out = []
    for t in range(-tmax, tmax + 1):
        if abs(t) > 2 and (t - 2) % step == 0:
            out.append(t)
    return sorted(out, key=abs)


def _cache_path(N: int, L: float, cache_dir) -> Path | None:
    d = cache_dir if cache_dir is not None else os.environ.get(CACHE_ENV)
    if not d:
        return None
    key = hashlib.sha256(f"length-spectrum:{N}:{float(L)!r}".encode()).hexdigest()[:24]
    return Path(d) / f"lengths-{key}.json"


def length_spectrum(N: int, L: float, budget_seconds: float = 60.0, cache_dir=None) -> LengthSpectrum:
    """Hyperbolic Gamma(N)-classes with length <= L (N = 1 gives SL(2, Z) itself)."""
    if N != 1:
        N = _check_level(N)
    tmax = 2.0 * math.cosh(L / 2.0)
    if tmax > MAX_TRACE:
        raise ValueError(f"L = {L} needs traces above {MAX_TRACE}")
    path = _cache_path(N, L, cache_dir)
    if path is not None and path.exists():
        return LengthSpectrum.from_json(json.loads(path.read_text()))

    index = sl2_index(N) if N > 1 else 1
    start = time.monotonic()
    entries: list[LengthEntry] = []
    validity = L
    truncated = False
    for t in _admissible_traces(N, int(math.floor(tmax))):
        ell = hyperbolic_length(t)
        if ell > L:
            continue
        if time.monotonic() - start > budget_seconds:
            validity = math.nextafter(ell, 0.0)
            truncated = True
            break
        groups: dict[float, int] = {}
        for g in sl2z_classes(t):
            if N > 1 and not in_gamma(g, N):
                continue
            delta, _ = primitive_root(g)
            if N > 1:
                order, j = centralizer_image_order(delta, N)
                count = index // order
            else:
                j, count = 1, 1
            l0 = j * hyperbolic_length(int(delta[0, 0] + delta[1, 1]))
            groups[l0] = groups.get(l0, 0) + count
        for l0 in sorted(groups):
            entries.append(LengthEntry(t, ell, l0, groups[l0]))
    entries.sort(key=lambda e: (e.length, e.trace, e.primitive_length))
    spec = LengthSpectrum(N, float(L), validity, entries, truncated)
    spec.check()
    if path is not None and not truncated:
        from ..reports import atomic_write
        path.parent.mkdir(parents=True, exist_ok=True)
        atomic_write(path, json.dumps(spec.to_json(), sort_keys=True))
    return spec


# ---------------------------------------------------------------------------
# brute-force oracle

def matrices_with_trace(t: int, bound: int) -> list[tuple[int, int, int, int]]:
    out = []
    for a in range(-bound, bound + 1):
        d = t - a
        if abs(d) > bound:
            continue
        bc = a * d - 1
        for b in range(-bound, bound + 1):
            if b == 0:
                continue
            if bc % b == 0 and abs(bc // b) <= bound:
                out.append((a, b, bc // b, d))
    return out


def brute_force_class_count(t: int, bound: int = 30) -> int:
    """SL(2, Z)-classes of trace t found by conjugation search in a box.

    All matrices with entries <= bound are joined whenever conjugation by
    S or T^{+-1} maps one to the other; the number of components that
    contain a matrix of height <= bound / 3 is returned (classes whose
    small members are connected only through the box boundary would show
    up as extra components there).
    """
    mats = matrices_with_trace(t, bound)
    idx = {m: i for i, m in enumerate(mats)}
    parent = list(range(len(mats)))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    def conj(m, g, ginv):
        a, b, c, d = m
        p = (g[0] * a + g[1] * c, g[0] * b + g[1] * d, g[2] * a + g[3] * c, g[2] * b + g[3] * d)
        return (p[0] * ginv[0] + p[1] * ginv[2], p[0] * ginv[1] + p[1] * ginv[3],
                p[2] * ginv[0] + p[3] * ginv[2], p[2] * ginv[1] + p[3] * ginv[3])

    gens = [((0, -1, 1, 0), (0, 1, -1, 0)), ((1, 1, 0, 1), (1, -1, 0, 1))]
    for i, m in enumerate(mats):
        for g, gi in gens:
            for h in (conj(m, g, gi), conj(m, gi, g)):
                j = idx.get(h)
                if j is not None:
                    ri, rj = find(i), find(j)
                    if ri != rj:
                        parent[ri] = rj
    small = bound // 3
    roots = {find(i) for i, m in enumerate(mats) if max(map(abs, m)) <= small}
    return len(roots)
