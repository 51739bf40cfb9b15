"""Type A_{n-1} conventions: Cartan vectors, Weyl group, Levi partitions.

Coordinates are the standard ones on the trace-zero hyperplane of R^n.
All lengths and Lebesgue measures derive from one quadratic form on the
Cartan subspace, selected by name:

    killing   <X, Y> = 2n * sum x_i y_i
    trace     <X, Y> = sum x_i y_i

The dual form on a* is the inverse, so <lam, mu>* = sum lam_i mu_i / c.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

FORMS = ("killing", "trace")
MAX_LEVI_RANK = 8


class RankError(ValueError):
    pass


def form_scale(n: int, form: str = "killing") -> float:
    """The constant c with <X, Y> = c * sum x_i y_i on the Cartan subspace."""
    if form == "killing":
        return 2.0 * n
    if form == "trace":
        return 1.0
    raise ValueError(f"unknown form {form!r}; expected one of {FORMS}")


def _check_rank(n: int, minimum: int = 2) -> None:
    if int(n) != n or n < minimum:
        raise RankError(f"rank parameter n must be an integer >= {minimum}, got {n}")


@dataclass(frozen=True)
class CartanVector:
    """Element of a (or, through the dual pairing, of a*) in standard coordinates."""

    coords: np.ndarray
    form: str = "killing"

    def __post_init__(self):
        c = np.asarray(self.coords, dtype=float).copy()
        c.setflags(write=False)
        object.__setattr__(self, "coords", c)
        scale = max(1.0, float(np.linalg.norm(c)))
        if abs(c.sum()) > 1e-12 * scale:
            raise ValueError("Cartan coordinates must sum to zero")

    @property
    def n(self) -> int:
        return self.coords.size

    def norm(self, dual: bool = False) -> float:
        c = form_scale(self.n, self.form)
        q = float(self.coords @ self.coords)
        return math.sqrt(q / c if dual else q * c)

    def __neg__(self):
        return CartanVector(-self.coords, self.form)


@dataclass(frozen=True)
class SpectralPoint:
    """lam in a*_C, stored as n complex coordinates summing to zero."""

    coords: np.ndarray
    form: str = "killing"

    def __post_init__(self):
        c = np.asarray(self.coords, dtype=complex).copy()
        c.setflags(write=False)
        object.__setattr__(self, "coords", c)
        scale = max(1.0, float(np.abs(c).max(initial=0.0)))
        s = c.sum()
        if abs(s.real) > 1e-12 * scale or abs(s.imag) > 1e-12 * scale:
            raise ValueError("spectral coordinates must sum to zero")

    @classmethod
    def imaginary(cls, nu, form: str = "killing") -> "SpectralPoint":
        """The point i*nu for real nu in the trace-zero hyperplane."""
        nu = np.asarray(nu, dtype=float)
        return cls(1j * (nu - nu.mean()), form)

    @property
    def n(self) -> int:
        return self.coords.size

    @property
    def is_imaginary(self) -> bool:
        scale = max(1.0, float(np.abs(self.coords).max(initial=0.0)))
        return bool(np.all(np.abs(self.coords.real) <= 1e-12 * scale))

    def norm(self) -> float:
        """Dual-form norm of the coordinate vector (Hermitian)."""
        c = form_scale(self.n, self.form)
        return math.sqrt(float(np.vdot(self.coords, self.coords).real) / c)

    def __add__(self, other):
        return SpectralPoint(self.coords + other.coords, self.form)

    def __sub__(self, other):
        return SpectralPoint(self.coords - other.coords, self.form)

    def scaled(self, t: float) -> "SpectralPoint":
        return SpectralPoint(self.coords * t, self.form)


def dual_inner(lam, mu, n: int | None = None, form: str = "killing"):
    """Bilinear dual pairing <lam, mu>* = sum lam_i mu_i / c (no conjugation)."""
    lam = np.asarray(lam)
    mu = np.asarray(mu)
    n = lam.shape[-1] if n is None else n
    return (lam * mu).sum(axis=-1) / form_scale(n, form)


@dataclass(frozen=True)
class WeylElement:
    """Permutation w of {0..n-1}; acts on coordinates by (w x)_{w(i)} = x_i."""

    perm: tuple

    def __post_init__(self):
        p = tuple(int(i) for i in self.perm)
        if sorted(p) != list(range(len(p))):
            raise ValueError(f"not a permutation: {self.perm}")
        object.__setattr__(self, "perm", p)

    @property
    def n(self) -> int:
        return len(self.perm)

    @classmethod
    def identity(cls, n: int) -> "WeylElement":
        return cls(tuple(range(n)))

    def __mul__(self, other: "WeylElement") -> "WeylElement":
        # (self * other)(i) = self(other(i))
        return WeylElement(tuple(self.perm[j] for j in other.perm))

    def inverse(self) -> "WeylElement":
        inv = [0] * self.n
        for i, j in enumerate(self.perm):
            inv[j] = i
        return WeylElement(tuple(inv))

    def act(self, x):
        """Apply w to coordinate vectors (last axis)."""
        x = np.asarray(x)
        out = np.empty_like(x)
        out[..., list(self.perm)] = x
        return out

    def matrix(self) -> np.ndarray:
        """Permutation matrix P with P e_i = e_{w(i)}."""
        P = np.zeros((self.n, self.n))
        P[list(self.perm), list(range(self.n))] = 1.0
        return P

    def rotation(self) -> np.ndarray:
        """A representative of w in SO(n): the permutation matrix with one
        column negated when the permutation is odd."""
        P = self.matrix()
        if np.linalg.det(P) < 0:
            P[:, 0] *= -1.0
        return P

    def cycles(self) -> list[tuple]:
        seen = set()
        out = []
        for i in range(self.n):
            if i in seen:
                continue
            cyc = [i]
            seen.add(i)
            j = self.perm[i]
            while j != i:
                cyc.append(j)
                seen.add(j)
                j = self.perm[j]
            out.append(tuple(sorted(cyc)))
        return out


def weyl_group(n: int) -> list[WeylElement]:
    return [WeylElement(p) for p in itertools.permutations(range(n))]


@dataclass(frozen=True)
class LeviSubgroup:
    """Set partition of {0..n-1}; blocks sorted internally and by least element."""

    blocks: tuple
    n: int = field(default=-1)

    def __post_init__(self):
        blocks = tuple(sorted((tuple(sorted(int(i) for i in b)) for b in self.blocks),
                              key=lambda b: b[0]))
        flat = [i for b in blocks for i in b]
        n = len(flat) if self.n < 0 else self.n
        if any(len(b) == 0 for b in blocks) or sorted(flat) != list(range(n)):
            raise ValueError(f"blocks {self.blocks} do not partition range({n})")
        object.__setattr__(self, "blocks", blocks)
        object.__setattr__(self, "n", n)

    @classmethod
    def minimal(cls, n: int) -> "LeviSubgroup":
        """M_0: all singletons (the diagonal torus)."""
        return cls(tuple((i,) for i in range(n)))

    @classmethod
    def whole(cls, n: int) -> "LeviSubgroup":
        return cls((tuple(range(n)),))

    @classmethod
    def standard(cls, sizes) -> "LeviSubgroup":
        """Block-diagonal Levi of a composition, e.g. (2, 1) -> {0,1}|{2}."""
        blocks, start = [], 0
        for m in sizes:
            blocks.append(tuple(range(start, start + m)))
            start += m
        return cls(tuple(blocks))

    @property
    def is_whole(self) -> bool:
        return len(self.blocks) == 1

    def block_index(self) -> np.ndarray:
        idx = np.empty(self.n, dtype=int)
        for k, b in enumerate(self.blocks):
            idx[list(b)] = k
        return idx

    def refines(self, other: "LeviSubgroup") -> bool:
        """self <= other: every block of self lies inside a block of other."""
        lab = other.block_index()
        return all(len({lab[i] for i in b}) == 1 for b in self.blocks)

    def meet(self, other: "LeviSubgroup") -> "LeviSubgroup":
        a, b = self.block_index(), other.block_index()
        groups: dict = {}
        for i in range(self.n):
            groups.setdefault((a[i], b[i]), []).append(i)
        return LeviSubgroup(tuple(tuple(g) for g in groups.values()))

    def join(self, other: "LeviSubgroup") -> "LeviSubgroup":
        parent = list(range(self.n))

        def find(i):
            while parent[i] != i:
                parent[i] = parent[parent[i]]
                i = parent[i]
            return i

        for part in (self, other):
            for b in part.blocks:
                for i in b[1:]:
                    parent[find(i)] = find(b[0])
        groups: dict = {}
        for i in range(self.n):
            groups.setdefault(find(i), []).append(i)
        return LeviSubgroup(tuple(tuple(g) for g in groups.values()))

    def within_pairs(self):
        """Pairs (i, j), i < j, lying in a common block (roots of M)."""
        return [(i, j) for b in self.blocks for i, j in itertools.combinations(b, 2)]

    def __str__(self):
        return "|".join("{" + ",".join(str(i + 1) for i in b) + "}" for b in self.blocks)


def rho(n: int, form: str = "killing") -> CartanVector:
    """Half sum of positive roots: ((n-1)/2, (n-3)/2, ..., -(n-1)/2)."""
    _check_rank(n)
    return CartanVector((n - 1) / 2.0 - np.arange(n), form)


def dims(n: int) -> tuple[int, int]:
    """(d, r): dimension of SL(n,R)/SO(n) and rank of a."""
    _check_rank(n)
    return n * (n + 1) // 2 - 1, n - 1


def levi_decompose(lam: SpectralPoint, M: LeviSubgroup) -> tuple[SpectralPoint, SpectralPoint]:
    """Split lam = lam_M + lam^M: block averages and their within-block remainder."""
    if M.n != lam.n:
        raise ValueError("rank mismatch")
    c = lam.coords
    lam_M = np.empty_like(c)
    for b in M.blocks:
        lam_M[list(b)] = c[list(b)].mean()
    return SpectralPoint(lam_M, lam.form), SpectralPoint(c - lam_M, lam.form)


def fixed_levi(w: WeylElement) -> LeviSubgroup:
    """M_w: the Levi whose blocks are the cycles of w."""
    return LeviSubgroup(tuple(w.cycles()))


def plus_eigenspace(w: WeylElement) -> np.ndarray:
    """Orthonormal basis (columns) of the +1 eigenspace of w on a*."""
    n = w.n
    P = w.matrix()
    # restrict to the trace-zero hyperplane
    B = trace_zero_basis(n)
    A = B.T @ P @ B
    vals, vecs = np.linalg.eig(A)
    sel = np.abs(vals - 1.0) < 1e-9
    V = np.real_if_close(B @ vecs[:, sel])
    if V.shape[1] == 0:
        return np.zeros((n, 0))
    q, _ = np.linalg.qr(np.real(V))
    return q


def block_constant_space(M: LeviSubgroup) -> np.ndarray:
    """Orthonormal basis of a*_M: trace-zero vectors constant on blocks of M."""
    n = M.n
    cols = []
    for b in M.blocks:
        v = np.zeros(n)
        v[list(b)] = 1.0
        cols.append(v - v.mean())
    A = np.array(cols).T
    u, s, _ = np.linalg.svd(A, full_matrices=False)
    return u[:, s > 1e-10]


@lru_cache(maxsize=None)
def _bell(n: int) -> int:
    row = [1]
    for _ in range(n):
        nxt = [row[-1]]
        for v in row:
            nxt.append(nxt[-1] + v)
        row = nxt
    return row[0]


def bell_number(n: int) -> int:
    return _bell(n)


def enumerate_levis(n: int) -> list[LeviSubgroup]:
    """All set partitions of {0..n-1} (the Levi lattice), count B_n."""
    if n > MAX_LEVI_RANK:
        raise RankError(f"enumerate_levis capped at n = {MAX_LEVI_RANK}")
    if n < 1:
        raise RankError("n must be positive")
    out = []

    def rec(i, blocks):
        if i == n:
            out.append(LeviSubgroup(tuple(tuple(b) for b in blocks)))
            return
        for b in blocks:
            b.append(i)
            rec(i + 1, blocks)
            b.pop()
        blocks.append([i])
        rec(i + 1, blocks)
        blocks.pop()

    rec(0, [])
    return out


def maximal_levis(n: int) -> list[LeviSubgroup]:
    """Two-block partitions (maximal proper Levi subgroups)."""
    return [M for M in enumerate_levis(n) if len(M.blocks) == 2]


@lru_cache(maxsize=None)
def _trace_zero_basis(n: int) -> np.ndarray:
    # Helmert-type orthonormal basis of {x in R^n : sum x = 0}
    B = np.zeros((n, n - 1))
    for k in range(1, n):
        B[:k, k - 1] = 1.0
        B[k, k - 1] = -float(k)
        B[:, k - 1] /= math.sqrt(k * (k + 1))
    B.setflags(write=False)
    return B


def trace_zero_basis(n: int) -> np.ndarray:
    """Euclidean-orthonormal basis (columns) of the trace-zero hyperplane."""
    return _trace_zero_basis(n)


def to_orthonormal(coords, form: str = "killing", dual: bool = True):
    """Standard coordinates -> coordinates in a form-orthonormal basis.

    For the dual space (dual=True) the basis is sqrt(c)*f_k, so
    eta_k = <x, f_k>/sqrt(c); for a itself it is f_k/sqrt(c).
    """
    coords = np.asarray(coords)
    n = coords.shape[-1]
    c = form_scale(n, form)
    y = coords @ trace_zero_basis(n)
    return y / math.sqrt(c) if dual else y * math.sqrt(c)


def from_orthonormal(y, n: int, form: str = "killing", dual: bool = True):
    """Inverse of to_orthonormal."""
    y = np.asarray(y)
    c = form_scale(n, form)
    x = y @ trace_zero_basis(n).T
    return x * math.sqrt(c) if dual else x / math.sqrt(c)
