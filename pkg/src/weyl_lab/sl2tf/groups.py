"""Principal congruence subgroups Gamma(N) of SL(2, Z).

Index, covolume and cusp count come from the multiplicative formula; the
enumeration helpers below recompute them the slow way and serve as oracles.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np


class LevelError(ValueError):
    pass


def prime_factors(n: int) -> list[int]:
    out = []
    p = 2
    while p * p <= n:
        if n % p == 0:
            out.append(p)
            while n % p == 0:
                n //= p
        p += 1
    if n > 1:
        out.append(n)
    return out


def euler_phi(n: int) -> int:
    out = n
    for p in prime_factors(n):
        out -= out // p
    return out


def _check_level(N: int) -> int:
    if not isinstance(N, (int, np.integer)) or isinstance(N, bool):
        raise LevelError(f"level must be an integer, got {N!r}")
    if N < 3:
        raise LevelError("Gamma(N) is torsion free only for N >= 3")
    return int(N)


@dataclass(frozen=True)
class CongruenceGroup:
    N: int
    sl2_index: int
    psl2_index: int
    area: float
    cusps: int

    def contains(self, g) -> bool:
        g = np.asarray(g, dtype=np.int64)
        return bool(round(np.linalg.det(g)) == 1 and np.all((g - np.eye(2, dtype=np.int64)) % self.N == 0))


def sl2_index(N: int) -> int:
    """[SL(2,Z) : Gamma(N)] = |SL(2, Z/N)| = N^3 prod_{p | N} (1 - p^-2)."""
    num, den = N ** 3, 1
    for p in prime_factors(N):
        num *= p * p - 1
        den *= p * p
    return num // den


def group_data(N: int) -> CongruenceGroup:
    N = _check_level(N)
    idx = sl2_index(N)
    # -I is not in Gamma(N) for N >= 3, so the image in PSL(2) has half the index
    pidx = idx // 2
    return CongruenceGroup(N, idx, pidx, pidx * math.pi / 3.0, pidx // N)


# ---------------------------------------------------------------------------
# oracles

def sl2_order_by_enumeration(N: int) -> int:
    """|SL(2, Z/N)| by checking all N^4 matrices."""
    count = 0
    for a, b, c, d in itertools.product(range(N), repeat=4):
        if (a * d - b * c - 1) % N == 0:
            count += 1
    return count


def primitive_vectors(N: int) -> list[tuple[int, int]]:
    """Vectors of order N in (Z/N)^2, one from each pair {v, -v}."""
    seen = set()
    out = []
    for x, y in itertools.product(range(N), repeat=2):
        if math.gcd(math.gcd(x, y), N) != 1:
            continue
        key = min((x, y), ((-x) % N, (-y) % N))
        if key not in seen:
            seen.add(key)
            out.append(key)
    return out


def cusp_count_by_representatives(N: int, bound: int = 40) -> int:
    """Count Gamma(N)-orbits on P^1(Q) from reduced fractions a/c.

    The cusp a/c (with 1/0 for infinity) lies in the orbit labelled by the
    column (a, c) mod N up to sign; fractions with small height already
    reach every label.
    """
    labels = set()
    for c in range(0, bound + 1):
        for a in range(-bound, bound + 1):
            if math.gcd(a, c) != 1:
                continue
            v = (a % N, c % N)
            labels.add(min(v, ((-v[0]) % N, (-v[1]) % N)))
    return len(labels)


def trace_congruence_bound(N: int) -> float:
    """Certified lower bound for hyperbolic lengths in Gamma(N).

    gamma = I + N M with det gamma = 1 forces tr gamma = 2 - N^2 det M, so a
    hyperbolic element has tr <= 2 - N^2 or tr >= 2 + N^2, i.e. |tr| >= N^2 - 2.
    """
    N = _check_level(N)
    return 2.0 * math.acosh((N * N - 2) / 2.0)


def brute_force_min_trace(N: int, bound: int = 50) -> tuple[int, np.ndarray]:
    """Smallest |trace| of a hyperbolic element of Gamma(N) with entries <= bound.

    Loops over (a, b, c) with a = 1 mod N, b, c = 0 mod N and solves for d.
    """
    best, arg = None, None
    r = np.arange(-bound, bound + 1)
    A = r[(r - 1) % N == 0]
    BC = r[r % N == 0]
    for a in A:
        if a == 0:
            continue
        b = BC[:, None]
        c = BC[None, :]
        num = 1 + b * c
        ok = (num % a == 0)
        d = np.where(ok, num // a, 0)
        ok &= (np.abs(d) <= bound) & ((d - 1) % N == 0)
        tr = np.abs(a + d)
        ok &= tr > 2
        if not ok.any():
            continue
        tmin = tr[ok].min()
        if best is None or tmin < best:
            i, j = np.argwhere(ok & (tr == tmin))[0]
            best = int(tmin)
            arg = np.array([[a, b[i, 0]], [c[0, j], d[i, j]]])
    return best, arg
