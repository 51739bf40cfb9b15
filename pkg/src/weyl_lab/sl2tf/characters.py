"""Dirichlet characters and L-functions.

Characters mod q are stored as value tables over Z/q. They are built from
the structure of (Z/q)^*: a generator for each odd prime power, and the
pair (-1, 5) for powers of 2. L(s, chi) goes through the Hurwitz zeta
function,

    L(s, chi) = q^-s sum_{a mod q} chi(a) zeta(s, a/q),

and for principal characters the pole at s = 1 is split off exactly.
"""

from __future__ import annotations

import cmath
import itertools
import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from ..special import PoleError, hurwitz_regular
from .groups import euler_phi, prime_factors


@dataclass(frozen=True)
class DirichletCharacter:
    modulus: int
    values: tuple          # chi(a) for a = 0 .. q-1 (complex, 0 off the units)
    label: str = ""

    def __call__(self, a: int) -> complex:
        return self.values[a % self.modulus]

    @property
    def is_principal(self) -> bool:
        return all(abs(v - 1) < 1e-12 for a, v in enumerate(self.values)
                   if math.gcd(a, self.modulus) == 1)

    @property
    def is_even(self) -> bool:
        return abs(self(-1) - 1) < 1e-12

    def conj(self) -> "DirichletCharacter":
        return DirichletCharacter(self.modulus, tuple(complex(v).conjugate() for v in self.values),
                                  self.label + "*" if self.label else "")

    def __str__(self):
        return self.label or f"chi mod {self.modulus}"


def _primitive_root(pe: int, p: int) -> int:
    phi = euler_phi(pe)
    fac = prime_factors(phi)
    for g in range(2, pe):
        if math.gcd(g, p) != 1:
            continue
        if all(pow(g, phi // f, pe) != 1 for f in fac):
            return g
    raise RuntimeError("no primitive root")


def _dlog_table(pe: int, g: int) -> dict:
    out = {}
    x = 1
    for k in range(euler_phi(pe)):
        out[x] = k
        x = x * g % pe
    return out


def _local_characters(p: int, e: int):
    """Characters of (Z/p^e)^* as functions on residues mod p^e."""
    pe = p ** e
    if p == 2 and e >= 3:
        # (Z/2^e)^* = <-1> x <5>, the second factor of order 2^(e-2)
        order5 = 2 ** (e - 2)
        log5 = {}
        for s in (1, -1):
            x = 1
            for k in range(order5):
                log5[(s * x) % pe] = (0 if s == 1 else 1, k)
                x = x * 5 % pe
        out = []
        for i in range(2):
            for j in range(order5):
                tab = {a: cmath.exp(1j * math.pi * i * u) * cmath.exp(2j * math.pi * j * v / order5)
                       for a, (u, v) in log5.items()}
                out.append(tab)
        return out
    g = _primitive_root(pe, p) if pe > 2 else 1
    logs = _dlog_table(pe, g) if pe > 2 else {1: 0}
    n = euler_phi(pe)
    return [{a: cmath.exp(2j * math.pi * j * k / n) for a, k in logs.items()} for j in range(n)]


def _clean(z: complex) -> complex:
    re, im = round(z.real, 14), round(z.imag, 14)
    return complex(re + 0.0, im + 0.0)


@lru_cache(maxsize=None)
def characters(q: int) -> tuple[DirichletCharacter, ...]:
    """All phi(q) characters mod q; index 0 is the principal one."""
    if q < 1:
        raise ValueError("modulus must be positive")
    if q == 1:
        return (DirichletCharacter(1, (1.0 + 0j,), "trivial mod 1"),)
    parts = []
    for p in prime_factors(q):
        e = 0
        m = q
        while m % p == 0:
            m //= p
            e += 1
        parts.append((p ** e, _local_characters(p, e)))
    out = []
    for k, combo in enumerate(itertools.product(*[c for _, c in parts])):
        vals = []
        for a in range(q):
            if math.gcd(a, q) != 1:
                vals.append(0j)
                continue
            v = 1 + 0j
            for (pe, _), tab in zip(parts, combo):
                v *= tab[a % pe]
            vals.append(_clean(v))
        out.append(DirichletCharacter(q, tuple(vals), f"chi_{q}[{k}]"))
    out.sort(key=lambda c: (not c.is_principal, c.label))
    princ = out[0]
    out[0] = DirichletCharacter(q, princ.values, f"principal mod {q}")
    return tuple(out)


def principal(q: int) -> DirichletCharacter:
    return characters(q)[0]


def orthogonality_defect(q: int) -> float:
    """max |sum_a chi(a) conj chi'(a) - phi(q) delta| over all pairs."""
    chars = characters(q)
    V = np.array([c.values for c in chars])
    G = V @ V.conj().T
    return float(np.abs(G - euler_phi(q) * np.eye(len(chars))).max())


def conductor(chi: DirichletCharacter) -> int:
    q = chi.modulus
    for d in sorted(d for d in range(1, q + 1) if q % d == 0):
        # chi is induced mod d iff chi(a) = 1 for every unit a = 1 mod d
        if all(abs(chi(a) - 1) < 1e-12 for a in range(1, q) if math.gcd(a, q) == 1 and a % d == 1 % d):
            return d
    return q


# ---------------------------------------------------------------------------
# L-functions

def _regular_sum(s, chi: DirichletCharacter, p: int, M):
    """P(s) = sum_a chi(a) R(s, a/q) and P'(s), where zeta = R + 1/(s - 1)."""
    q = chi.modulus
    P = np.zeros(np.shape(s), dtype=complex)
    dP = np.zeros_like(P)
    for a in range(1, q + 1):
        c = chi(a)
        if c == 0:
            continue
        R, dR = hurwitz_regular(s, a / q, p=p, M=M)
        P = P + c * R
        dP = dP + c * dR
    return P, dP


def _mass(chi: DirichletCharacter) -> complex:
    """sum_a chi(a): phi(q) for principal chi, 0 otherwise."""
    return complex(sum(chi.values))


def dirichlet_L(s, chi: DirichletCharacter, derivative_order: int = 0, p: int = 10, M=None):
    """L(s, chi) or L'(s, chi) for Re s >= 3/4 (the Hurwitz sum works anywhere but s = 1)."""
    s = np.asarray(s, dtype=complex)
    if derivative_order not in (0, 1):
        raise ValueError("derivative_order must be 0 or 1")
    if np.any(s.real < 0.75 - 1e-12):
        raise ValueError("dirichlet_L is specified for Re s >= 3/4")
    mass = _mass(chi)
    if abs(mass) > 0.5 and np.any(s == 1.0):
        raise PoleError(f"L(s, {chi}) has a pole at s = 1")
    return _L_any(s, chi, derivative_order, p, M)


def _L_any(s, chi, derivative_order, p=10, M=None):
    q = chi.modulus
    mass = _mass(chi)
    P, dP = _regular_sum(s, chi, p, M)
    qs = np.exp(-s * math.log(q))
    if abs(mass) < 0.5:
        Z, dZ = P, dP
    else:
        Z = P + mass / (s - 1.0)
        dZ = dP - mass / (s - 1.0) ** 2
    if derivative_order == 0:
        return qs * Z
    return qs * (dZ - math.log(q) * Z)


def log_derivative_pair(r, chi: DirichletCharacter, p: int = 10):
    """L'/L(1 - 2ir, conj chi) + L'/L(1 + 2ir, chi) for real r.

    For principal chi both terms have a simple pole at r = 0 that cancels;
    with L = q^-s (P + phi(q)/(s-1)) and delta = s - 1 each term is
    -log q + G(delta)/delta, G(delta) = (P' delta^2 - phi)/(P delta + phi),
    and the pair is -2 log q + (G(eps) - G(-eps))/eps with eps = 2ir.
    Near r = 0 the even function is extrapolated from r0 and 2 r0.
    """
    r = np.asarray(r, dtype=float)
    q = chi.modulus
    mass = _mass(chi)
    cc = chi.conj()
    if abs(mass) < 0.5:
        s1, s2 = 1.0 - 2j * r, 1.0 + 2j * r
        a = _L_any(s1, cc, 1, p) / _L_any(s1, cc, 0, p)
        b = _L_any(s2, chi, 1, p) / _L_any(s2, chi, 0, p)
        return a + b

    def pair(rr):
        eps = 2j * rr
        P1, dP1 = _regular_sum(1.0 - eps, cc, p, None)
        P2, dP2 = _regular_sum(1.0 + eps, chi, p, None)

        def G(P, dP, d):
            return (dP * d * d - mass) / (P * d + mass)
        return -2.0 * math.log(q) + (G(P2, dP2, eps) - G(P1, dP1, -eps)) / eps

    r0 = 1e-3
    small = np.abs(r) < r0
    out = np.empty(r.shape, dtype=complex)
    if np.any(~small):
        out[~small] = pair(r[~small])
    if np.any(small):
        f1, f2 = pair(np.array([r0, 2 * r0]))
        a0 = (4 * f1 - f2) / 3.0
        out[small] = a0 + (f1 - a0) * (r[small] / r0) ** 2
    return out


def alternating_oracle(chi: DirichletCharacter, terms: int = 10_000_000) -> float:
    """L(1, chi) for non-principal real chi by direct summation, with the
    partial sums averaged over one period (a Cesaro step that removes the
    bounded oscillation of the tail)."""
    q = chi.modulus
    vals = np.array([chi(a).real for a in range(q)])
    n = np.arange(1, terms + 1, dtype=float)
    partial = np.cumsum(vals[(n.astype(np.int64)) % q] / n)
    return float(partial[-q:].mean())
