"""Chip-firing action and complete linear-system enumeration.

A firing vector f assigns an integer to each vertex; positive values
borrow (the vertex takes one chip from each neighbor per unit), negative
values lend.  The group action is ``D + L f`` with L the Laplacian.  The
complete linear system |D| is the set of effective divisors reachable
from D, enumerated exactly:

1. short-circuit when the total degree is negative,
2. pin f[0] = 0 (for connected G the Laplacian kernel is the constants,
   so each equivalence move has exactly one representative with f[0] = 0),
3. describe the firing polytope {f : L f >= -D, f[0] = 0} as a halfspace
   system over the remaining n - 1 coordinates,
4. bound each coordinate by exact rational Fourier-Motzkin elimination,
5. walk the integer box and keep the effective results.

The polytope in step 3 is bounded: its recession cone is
{f : L f >= 0, f[0] = 0}, and L f >= 0 forces f constant because the
entries of L f sum to zero, so the cone is {0}.  Unbounded coordinates
can therefore only appear for inputs that do not come from a connected
Laplacian, and they raise ``UnboundedPolytopeError``.

Everything here is exact integer / rational arithmetic; no floating
point is involved at any step.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass
from fractions import Fraction
from math import gcd
from typing import Iterable, Sequence

import numpy as np

from .graphs import Divisor, DivisorLike, Multigraph, _coerce_divisor, degree, laplacian

__all__ = [
    "FiringVector",
    "HalfspaceSystem",
    "LinearSystem",
    "UnboundedPolytopeError",
    "InfeasibleSystemError",
    "apply_firing",
    "fm_bounds",
    "linear_system",
    "is_effective_equivalent",
]

# A firing vector is any length-n integer sequence; no wrapper class is
# needed beyond length validation at the point of use.
FiringVector = Sequence[int]


class UnboundedPolytopeError(ValueError):
    """A coordinate of the halfspace system has no finite bound."""

    def __init__(self, coordinate: int, side: str):
        self.coordinate = coordinate
        self.side = side
        super().__init__(f"coordinate {coordinate} unbounded {side}")


class InfeasibleSystemError(ValueError):
    """The halfspace system has no real solutions."""


@dataclass(frozen=True)
class HalfspaceSystem:
    """Inequalities ``row . x >= bound`` with exact rational data."""

    rows: tuple[tuple[Fraction, ...], ...]
    bounds: tuple[Fraction, ...]
    dim: int

    def __post_init__(self) -> None:
        rows = tuple(tuple(Fraction(c) for c in row) for row in self.rows)
        bounds = tuple(Fraction(b) for b in self.bounds)
        if len(rows) != len(bounds):
            raise ValueError("row/bound count mismatch")
        for row in rows:
            if len(row) != self.dim:
                raise ValueError(f"row of length {len(row)} in dimension {self.dim}")
        object.__setattr__(self, "rows", rows)
        object.__setattr__(self, "bounds", bounds)

    @classmethod
    def from_rows(
        cls, rows: Iterable[Sequence[int | Fraction]], bounds: Iterable[int | Fraction]
    ) -> "HalfspaceSystem":
        rows = tuple(tuple(r) for r in rows)
        bounds = tuple(bounds)
        dim = len(rows[0]) if rows else 0
        return cls(rows, bounds, dim)


def apply_firing(G: Multigraph, D: DivisorLike, f: FiringVector) -> Divisor:
    """The divisor ``D + L f``.

    A unit borrowing at v (f[v] = +1) adds deg(v) chips at v and removes
    adj(v, w) chips from each neighbor w.  Total degree is conserved.
    """
    D = _coerce_divisor(D, G.n)
    f = tuple(int(x) for x in f)
    if len(f) != G.n:
        raise ValueError(f"firing vector has {len(f)} entries, graph has {G.n} vertices")
    moved = laplacian(G) @ np.array(f, dtype=np.int64)
    return Divisor(tuple(int(c) + int(m) for c, m in zip(D.coeffs, moved)))


# ---------------------------------------------------------------------------
# Fourier-Motzkin elimination
# ---------------------------------------------------------------------------
#
# Internally rows are scaled to integer coefficient vectors with Fraction
# bounds.  Combining a row with positive coefficient a and one with
# negative coefficient b at the pivot uses the positive multipliers (-b)
# and a, which keeps coefficients integral.  Each derived row is divided
# by the gcd of its coefficients and redundant rows are pruned by pairwise
# dominance only: equal coefficient vectors keep the largest bound.


def _integerize(system: HalfspaceSystem) -> list[tuple[tuple[int, ...], Fraction]]:
    rows = []
    for row, bound in zip(system.rows, system.bounds):
        scale = 1
        for c in row:
            scale = scale * c.denominator // gcd(scale, c.denominator)
        coefs = tuple(int(c * scale) for c in row)
        rows.append((coefs, bound * scale))
    return rows


def _normalize(coefs: tuple[int, ...], bound: Fraction) -> tuple[tuple[int, ...], Fraction] | None:
    """Divide by the gcd of the coefficients; return None for constant rows
    (raising if the constant row is contradictory)."""
    g = 0
    for c in coefs:
        g = gcd(g, abs(c))
    if g == 0:
        if bound > 0:
            raise InfeasibleSystemError(f"derived contradiction 0 >= {bound}")
        return None
    if g > 1:
        coefs = tuple(c // g for c in coefs)
        bound = bound / g
    return coefs, bound


def _prune(rows: Iterable[tuple[tuple[int, ...], Fraction]]) -> list[tuple[tuple[int, ...], Fraction]]:
    best: dict[tuple[int, ...], Fraction] = {}
    for coefs, bound in rows:
        cur = best.get(coefs)
        if cur is None or bound > cur:
            best[coefs] = bound
    return list(best.items())


def _eliminate(rows: list[tuple[tuple[int, ...], Fraction]], var: int) -> list[tuple[tuple[int, ...], Fraction]]:
    pos, neg, keep = [], [], []
    for coefs, bound in rows:
        c = coefs[var]
        if c > 0:
            pos.append((coefs, bound))
        elif c < 0:
            neg.append((coefs, bound))
        else:
            keep.append((coefs, bound))
    out = keep
    for ac, ab in pos:
        a = ac[var]
        for bc, bb in neg:
            b = bc[var]
            coefs = tuple(x * (-b) + y * a for x, y in zip(ac, bc))
            bound = ab * (-b) + bb * a
            norm = _normalize(coefs, bound)
            if norm is not None:
                out.append(norm)
    return _prune(out)


def _exact_interval(
    rows: list[tuple[tuple[int, ...], Fraction]], dim: int, target: int
) -> tuple[Fraction, Fraction]:
    """Project the polyhedron onto coordinate ``target``."""
    for var in range(dim):
        if var != target:
            rows = _eliminate(rows, var)
    lo = None
    hi = None
    for coefs, bound in rows:
        c = coefs[target]
        if c > 0:  # c*x >= b  ->  x >= b/c
            v = bound / c
            lo = v if lo is None or v > lo else lo
        elif c < 0:  # c*x >= b  ->  x <= b/c
            v = bound / c
            hi = v if hi is None or v < hi else hi
    if lo is None:
        raise UnboundedPolytopeError(target, "below")
    if hi is None:
        raise UnboundedPolytopeError(target, "above")
    if lo > hi:
        raise InfeasibleSystemError(f"empty projection on coordinate {target}")
    return lo, hi


def fm_bounds(system: HalfspaceSystem) -> list[tuple[int, int]]:
    """Integer bounding box of the polyhedron, one (lo, hi) per coordinate.

    Each exact rational endpoint is truncated toward zero (floor for
    nonnegative values, ceiling for negative ones), applied to the minimum
    and the maximum alike.  The rounding is conservative: no integer point
    of the polyhedron falls outside the box, though the box may contain
    spurious non-solutions, which callers filter afterwards.
    """
    base = _prune(r for r in (_normalize(c, b) for c, b in _integerize(system)) if r is not None)
    out = []
    for k in range(system.dim):
        lo, hi = _exact_interval(list(base), system.dim, k)
        out.append((int(lo), int(hi)))  # int() on Fraction truncates toward zero
    return out


# ---------------------------------------------------------------------------
# divisor class keys (internal)
# ---------------------------------------------------------------------------
#
# D and D' are linearly equivalent iff D - D' lies in the image of the
# Laplacian.  Diagonalizing L as U L V = S with unimodular U, V makes the
# test cheap: y is in im(L) iff (U y)_i is divisible by S_ii (rows with
# S_ii = 0 must vanish exactly).  The tuple of residues is a complete
# invariant of the divisor class and serves as a cache key, letting the
# expensive member enumeration run once per class instead of once per
# divisor.  Only the key is derived; no reduced representative divisor is
# ever produced or exposed.


def _snf_left(M: Sequence[Sequence[int]]) -> tuple[tuple[tuple[int, ...], ...], tuple[int, ...]]:
    """Diagonalize the integer matrix with row ops tracked: returns (U, diag)
    with U M V diagonal for some unimodular V (V is discarded)."""
    A = [list(map(int, row)) for row in M]
    n = len(A)
    m = len(A[0])
    U = [[1 if i == j else 0 for j in range(n)] for i in range(n)]

    def swap_rows(i, j):
        A[i], A[j] = A[j], A[i]
        U[i], U[j] = U[j], U[i]

    def add_row(src, dst, q):  # row[dst] += q * row[src]
        A[dst] = [a + q * b for a, b in zip(A[dst], A[src])]
        U[dst] = [a + q * b for a, b in zip(U[dst], U[src])]

    def swap_cols(i, j):
        for row in A:
            row[i], row[j] = row[j], row[i]

    def add_col(src, dst, q):
        for row in A:
            row[dst] += q * row[src]

    for t in range(min(n, m)):
        while True:
            pi, pj, pv = -1, -1, 0
            for i in range(t, n):
                for j in range(t, m):
                    v = abs(A[i][j])
                    if v and (pv == 0 or v < pv):
                        pi, pj, pv = i, j, v
            if pv == 0:
                break
            if pi != t:
                swap_rows(t, pi)
            if pj != t:
                swap_cols(t, pj)
            if A[t][t] < 0:
                A[t] = [-x for x in A[t]]
                U[t] = [-x for x in U[t]]
            dirty = False
            for i in range(n):
                if i != t and A[i][t]:
                    q = -(A[i][t] // A[t][t])
                    add_row(t, i, q)
                    if A[i][t]:
                        dirty = True
            for j in range(m):
                if j != t and A[t][j]:
                    q = -(A[t][j] // A[t][t])
                    add_col(t, j, q)
                    if A[t][j]:
                        dirty = True
            if not dirty and all(A[i][t] == 0 for i in range(n) if i != t) and all(
                A[t][j] == 0 for j in range(m) if j != t
            ):
                break
        # pivot settled; continue with the trailing block
    diag = tuple(A[i][i] if i < m else 0 for i in range(min(n, m)))
    return tuple(tuple(row) for row in U), diag


_CLASS_DATA_LOCK = threading.Lock()
_CLASS_DATA: dict[Multigraph, tuple[np.ndarray, tuple[int, ...]]] = {}


def _class_data(G: Multigraph) -> tuple[np.ndarray, tuple[int, ...]]:
    with _CLASS_DATA_LOCK:
        hit = _CLASS_DATA.get(G)
    if hit is not None:
        return hit
    U, diag = _snf_left(laplacian(G).tolist())
    Ua = np.array(U, dtype=np.int64)
    if max(1, int(np.abs(Ua).max())) >= 1 << 40:
        raise OverflowError("unexpected transform growth in Laplacian diagonalization")
    full_diag = tuple(diag) + (0,) * (G.n - len(diag))
    with _CLASS_DATA_LOCK:
        _CLASS_DATA[G] = (Ua, full_diag)
    return Ua, full_diag


def _class_key(G: Multigraph, D: Divisor) -> tuple[int, ...]:
    U, diag = _class_data(G)
    v = U @ D.as_array()
    key = []
    for x, s in zip(v.tolist(), diag):
        if s == 0:
            key.append(int(x))
        else:
            key.append(int(x) % s)
    return tuple(key)


def _class_keys_batch(G: Multigraph, divisors: np.ndarray) -> np.ndarray:
    """Class keys for an (m, n) array of divisors, one key row each."""
    U, diag = _class_data(G)
    keys = divisors.astype(np.int64) @ U.T
    for i, s in enumerate(diag):
        if s != 0:
            keys[:, i] %= s
    return keys


# ---------------------------------------------------------------------------
# linear systems
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class LinearSystem:
    """The complete linear system of a divisor: every effective divisor
    linearly equivalent to the base, deduplicated and lexicographically
    sorted."""

    base: Divisor
    divisors: tuple[Divisor, ...]

    def __len__(self) -> int:
        return len(self.divisors)

    def __iter__(self):
        return iter(self.divisors)

    def __contains__(self, d: object) -> bool:
        return d in self.divisors

    def is_empty(self) -> bool:
        return not self.divisors


_MEMBER_LOCK = threading.Lock()
_MEMBER_CACHE: dict[tuple, tuple[tuple["Divisor", ...], np.ndarray]] = {}
_MEMBER_CACHE_LIMIT = 1 << 15

_ENUM_CHUNK = 1 << 18


def _box_points(box: list[tuple[int, int]]) -> Iterable[np.ndarray]:
    """Integer points of the box in lexicographic order, in chunks."""
    sizes = [hi - lo + 1 for lo, hi in box]
    if any(s <= 0 for s in sizes):
        return
    total = 1
    for s in sizes:
        total *= s
    lows = np.array([lo for lo, _ in box], dtype=np.int64)
    for start in range(0, total, _ENUM_CHUNK):
        idx = np.arange(start, min(start + _ENUM_CHUNK, total))
        coords = np.unravel_index(idx, sizes)
        yield np.stack(coords, axis=1).astype(np.int64) + lows


def _compute_members(G: Multigraph, D: Divisor) -> np.ndarray:
    L = laplacian(G)
    n = G.n
    if n == 1:
        if D.coeffs[0] >= 0:
            return np.array([D.coeffs], dtype=np.int64)
        return np.empty((0, 1), dtype=np.int64)
    Lp = L[:, 1:]
    system = HalfspaceSystem.from_rows(
        [tuple(int(x) for x in row) for row in Lp], [-c for c in D.coeffs]
    )
    box = fm_bounds(system)
    base = D.as_array()
    parts = []
    for pts in _box_points(box):
        cand = base + pts @ Lp.T
        good = cand[(cand >= 0).all(axis=1)]
        if len(good):
            parts.append(good)
    if not parts:
        return np.empty((0, n), dtype=np.int64)
    return np.unique(np.vstack(parts), axis=0)


def _members_cached(G: Multigraph, D: Divisor) -> tuple[tuple[Divisor, ...], np.ndarray]:
    """Member divisors of |D| plus the same data as a read-only array.

    Cached per divisor class: equivalent inputs share one enumeration,
    which is transparent because the member set is a class invariant.
    """
    key = (G, _class_key(G, D))
    with _MEMBER_LOCK:
        hit = _MEMBER_CACHE.get(key)
    if hit is not None:
        return hit
    arr = _compute_members(G, D)
    arr.flags.writeable = False
    divisors = tuple(Divisor(tuple(int(x) for x in row)) for row in arr)
    value = (divisors, arr)
    with _MEMBER_LOCK:
        if len(_MEMBER_CACHE) >= _MEMBER_CACHE_LIMIT:
            _MEMBER_CACHE.clear()
        _MEMBER_CACHE[key] = value
    return value


def linear_system(G: Multigraph, D: DivisorLike) -> LinearSystem:
    """All effective divisors linearly equivalent to D, or empty."""
    D = _coerce_divisor(D, G.n)
    if degree(D) <= -1:
        return LinearSystem(D, ())
    divisors, _ = _members_cached(G, D)
    return LinearSystem(D, divisors)


def is_effective_equivalent(G: Multigraph, D: DivisorLike) -> bool:
    """True iff the complete linear system of D is nonempty."""
    return not linear_system(G, D).is_empty()
