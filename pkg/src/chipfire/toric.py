"""Toric rank over a generic graph curve.

A divisor class is torically effective when some effective representative
d admits nonzero functions on the curve components that agree at the
nodes.  With one component per vertex and one node per edge, the
agreement conditions form a linear system: one row per edge, and for each
vertex i a block of d_i + 1 columns (the coefficients of a function basis
on component i).  Node points and basis evaluations are modeled by
uniform random elements of a large prime field, so every verdict here is
about a GENERIC curve with the given dual graph, not any specific curve.

False verdicts come only from accidental vanishing over the field and
are bounded by O(rows * cols / p) per matrix sample; with the default
modulus just above 10^10 and desk-scale graphs that is under 1e-8, and
the majority vote over independent samples drives it lower still.  Any
disagreement between samples is surfaced on the outcome, never retried
silently.

All randomness is position-addressed from explicit integer seeds, so
identical inputs give identical outcomes regardless of evaluation order.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .graphs import (
    Divisor,
    DivisorLike,
    Multigraph,
    _coerce_divisor,
    canonical_divisor,
    degree,
    genus,
)
from .linsys import _members_cached
from .rank import RankResult, _compositions_array

__all__ = [
    "DEFAULT_PRIME",
    "NonEffectiveDivisorError",
    "PrimeField",
    "NodeConstraintMatrix",
    "ToricConfig",
    "ToricOutcome",
    "ToricMemo",
    "is_prime",
    "next_prime",
    "derive_seed",
    "build_constraint_matrix",
    "constraint_matrix_from_pattern",
    "kernel_basis",
    "matrix_rank",
    "toric_effective_test",
    "toric_rank",
    "verify_rr_toric",
]


class NonEffectiveDivisorError(ValueError):
    """Raised when a constraint matrix is requested for a divisor with a
    negative coefficient."""


_MR_BASES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37)


def is_prime(m: int) -> bool:
    """Deterministic Miller-Rabin, exact for all inputs below 3.3e24."""
    if m < 2:
        return False
    for q in _MR_BASES:
        if m % q == 0:
            return m == q
    d = m - 1
    s = 0
    while d % 2 == 0:
        d //= 2
        s += 1
    for a in _MR_BASES:
        x = pow(a, d, m)
        if x in (1, m - 1):
            continue
        for _ in range(s - 1):
            x = x * x % m
            if x == m - 1:
                break
        else:
            return False
    return True


def next_prime(m: int) -> int:
    """Smallest prime strictly greater than m."""
    c = m + 1
    if c <= 2:
        return 2
    if c % 2 == 0:
        c += 1
    while not is_prime(c):
        c += 2
    return c


DEFAULT_PRIME = next_prime(10**10)
assert DEFAULT_PRIME == 10_000_000_019


_SEED_SEP = b"\x1f"


def derive_seed(*parts: object) -> int:
    """Collapse a tuple of hashable descriptors into a 64-bit seed.

    Uses a keyed position in a blake2b stream rather than Python's hash()
    so the value is stable across processes and interpreter runs.
    """
    h = hashlib.blake2b(digest_size=8)
    for part in parts:
        h.update(repr(part).encode())
        h.update(_SEED_SEP)
    return int.from_bytes(h.digest(), "big")


def _field_element(seed: int, *tags: object, p: int, nonzero: bool = False) -> int:
    """Deterministic uniform field element addressed by (seed, tags)."""
    msg = ":".join([str(seed), *map(str, tags)]).encode()
    h = int.from_bytes(hashlib.blake2b(msg, digest_size=16).digest(), "big")
    if nonzero:
        return 1 + h % (p - 1)
    return h % p


@dataclass(frozen=True)
class PrimeField:
    """Arithmetic modulo a verified prime.

    Elements are plain Python ints in [0, p); products near p^2 ~ 1e20
    exceed 64-bit range, which is why none of the field arithmetic in
    this module goes through numpy.
    """

    modulus: int = DEFAULT_PRIME

    def __post_init__(self) -> None:
        if not is_prime(self.modulus):
            raise ValueError(f"modulus {self.modulus} is not prime")

    def normalize(self, x: int) -> int:
        return x % self.modulus

    def add(self, a: int, b: int) -> int:
        return (a + b) % self.modulus

    def mul(self, a: int, b: int) -> int:
        return (a * b) % self.modulus

    def inverse(self, a: int) -> int:
        if a % self.modulus == 0:
            raise ZeroDivisionError("no inverse of zero in a prime field")
        return pow(a, -1, self.modulus)


@dataclass(frozen=True)
class ToricConfig:
    """Knobs for the generic-curve model.

    mode "block-projection" passes when the kernel is nontrivial and every
    vertex block is supported by some basis vector.  mode "random-vector"
    draws a single random kernel combination and requires every entry
    nonzero; it is stricter and has avoidable false negatives, but is kept
    for compatibility with the classical experiment scripts.
    """

    prime: int = DEFAULT_PRIME
    trials: int = 3
    mode: str = "block-projection"
    seed: int = 0
    nonzero_entries: bool = False

    def __post_init__(self) -> None:
        if not is_prime(self.prime):
            raise ValueError(f"prime {self.prime} fails the primality check")
        if self.trials < 1:
            raise ValueError("trials must be at least 1")
        if self.mode not in ("block-projection", "random-vector"):
            raise ValueError(f"unknown mode {self.mode!r}")


@dataclass(frozen=True)
class NodeConstraintMatrix:
    """One row per edge (canonical order), one column block per vertex.

    Block i has width d_i + 1 for the candidate divisor d; the entry in
    row {i, j} may be nonzero only inside blocks i and j.  block_spans
    gives the half-open column range of each block; edge_rows records
    which edge produced each row (None for pattern-built fixtures).
    """

    entries: tuple[tuple[int, ...], ...]
    modulus: int
    block_spans: tuple[tuple[int, int], ...]
    edge_rows: tuple[tuple[int, int], ...] | None = None

    @property
    def n_rows(self) -> int:
        return len(self.entries)

    @property
    def n_cols(self) -> int:
        if self.entries:
            return len(self.entries[0])
        return self.block_spans[-1][1] if self.block_spans else 0

    @classmethod
    def from_entries(
        cls,
        entries: Sequence[Sequence[int]],
        modulus: int,
        block_spans: Sequence[tuple[int, int]],
        edge_rows: Sequence[tuple[int, int]] | None = None,
    ) -> "NodeConstraintMatrix":
        rows = tuple(tuple(int(x) % modulus for x in r) for r in entries)
        return cls(
            entries=rows,
            modulus=modulus,
            block_spans=tuple((int(a), int(b)) for a, b in block_spans),
            edge_rows=tuple((int(i), int(j)) for i, j in edge_rows) if edge_rows else None,
        )


def _block_spans(d: Divisor) -> tuple[tuple[int, int], ...]:
    spans = []
    start = 0
    for c in d:
        spans.append((start, start + c + 1))
        start += c + 1
    return tuple(spans)


def build_constraint_matrix(
    G: Multigraph,
    d: DivisorLike,
    rng_seed: int,
    *,
    prime: int = DEFAULT_PRIME,
    nonzero_entries: bool = False,
) -> NodeConstraintMatrix:
    """Node-compatibility matrix for an effective divisor d.

    Row r corresponds to edge r in canonical order; its generic entries
    occupy the two endpoint blocks and are addressed by (rng_seed, r, c),
    so the same seed always reproduces the same matrix.  Columns total
    degree(d) + n and rows total |E| = n + g - 1.
    """
    d = _coerce_divisor(d, G.n)
    if not d.is_effective():
        raise NonEffectiveDivisorError(f"divisor {d.coeffs} has a negative coefficient")
    if not is_prime(prime):
        raise ValueError(f"prime {prime} fails the primality check")
    spans = _block_spans(d)
    ncols = spans[-1][1]
    edges = G.edges()
    rows = []
    for r, (i, j) in enumerate(edges):
        row = [0] * ncols
        for block in (i, j):
            lo, hi = spans[block]
            for c in range(lo, hi):
                row[c] = _field_element(rng_seed, r, c, p=prime, nonzero=nonzero_entries)
        rows.append(tuple(row))
    return NodeConstraintMatrix(
        entries=tuple(rows),
        modulus=prime,
        block_spans=spans,
        edge_rows=tuple(edges),
    )


def constraint_matrix_from_pattern(
    mask_rows: Sequence[Sequence[int]],
    rng_seed: int,
    *,
    prime: int = DEFAULT_PRIME,
    block_spans: Sequence[tuple[int, int]] | None = None,
    nonzero_entries: bool = False,
) -> NodeConstraintMatrix:
    """Generic matrix with a prescribed zero pattern.

    mask_rows holds 0/1 flags; positions flagged 1 get a deterministic
    generic entry addressed exactly as in build_constraint_matrix.  When
    block_spans is omitted every column is its own width-1 block.
    """
    ncols = len(mask_rows[0])
    if any(len(r) != ncols for r in mask_rows):
        raise ValueError("ragged mask")
    if block_spans is None:
        block_spans = tuple((c, c + 1) for c in range(ncols))
    rows = []
    for r, mask in enumerate(mask_rows):
        row = [
            _field_element(rng_seed, r, c, p=prime, nonzero=nonzero_entries) if flag else 0
            for c, flag in enumerate(mask)
        ]
        rows.append(tuple(row))
    return NodeConstraintMatrix(
        entries=tuple(rows),
        modulus=prime,
        block_spans=tuple(block_spans),
        edge_rows=None,
    )


def kernel_basis(M: NodeConstraintMatrix) -> list[tuple[int, ...]]:
    """Canonical basis of the right kernel {v : M v = 0 mod p}.

    Exact Gauss-Jordan elimination over the field; one basis vector per
    free column, with a 1 in its free position.  Empty list iff M has
    full column rank.
    """
    p = M.modulus
    ncols = M.n_cols
    rows = [list(r) for r in M.entries]
    pivots: list[int] = []
    r = 0
    for c in range(ncols):
        pr = next((i for i in range(r, len(rows)) if rows[i][c] % p), None)
        if pr is None:
            continue
        rows[r], rows[pr] = rows[pr], rows[r]
        inv = pow(rows[r][c], -1, p)
        rows[r] = [x * inv % p for x in rows[r]]
        for i in range(len(rows)):
            if i != r and rows[i][c]:
                f = rows[i][c]
                rows[i] = [(x - f * y) % p for x, y in zip(rows[i], rows[r])]
        pivots.append(c)
        r += 1
        if r == len(rows):
            break
    pivot_set = set(pivots)
    basis = []
    for fc in range(ncols):
        if fc in pivot_set:
            continue
        v = [0] * ncols
        v[fc] = 1
        for i, pc in enumerate(pivots):
            v[pc] = -rows[i][fc] % p
        basis.append(tuple(v))
    return basis


def matrix_rank(M: NodeConstraintMatrix) -> int:
    return M.n_cols - len(kernel_basis(M))


@dataclass(frozen=True)
class ToricOutcome:
    """Verdict of one effectivity test.

    passed is the majority over all trials; kernel_dim, per_block_support
    and sample_seed describe the first trial that agrees with the
    majority.  trial_disagreement is set when the trials did not all
    agree (expected probability ~1/p; reported, never hidden).
    """

    passed: bool
    kernel_dim: int
    per_block_support: tuple[bool, ...]
    mode: str
    sample_seed: int
    trial_disagreement: bool = False


def _blocks_supported(
    basis: Iterable[tuple[int, ...]], spans: Sequence[tuple[int, int]]
) -> tuple[bool, ...]:
    support = [False] * len(spans)
    for vec in basis:
        for b, (lo, hi) in enumerate(spans):
            if not support[b] and any(vec[c] for c in range(lo, hi)):
                support[b] = True
    return tuple(support)


def _single_trial(
    G: Multigraph, d: Divisor, sample_seed: int, config: ToricConfig
) -> ToricOutcome:
    M = build_constraint_matrix(
        G, d, sample_seed, prime=config.prime, nonzero_entries=config.nonzero_entries
    )
    basis = kernel_basis(M)
    kdim = len(basis)
    if config.mode == "block-projection":
        support = _blocks_supported(basis, M.block_spans)
        passed = kdim >= 1 and all(support)
    else:
        p = config.prime
        vec = [0] * M.n_cols
        for k, bvec in enumerate(basis):
            coeff = _field_element(sample_seed, "draw", k, p=p)
            if coeff:
                vec = [(x + coeff * y) % p for x, y in zip(vec, bvec)]
        support = tuple(
            all(vec[c] for c in range(lo, hi)) for lo, hi in M.block_spans
        )
        passed = all(support)
    return ToricOutcome(
        passed=passed,
        kernel_dim=kdim,
        per_block_support=support,
        mode=config.mode,
        sample_seed=sample_seed,
    )


def toric_effective_test(
    G: Multigraph, d: DivisorLike, config: ToricConfig | None = None
) -> ToricOutcome:
    """Does the generic curve admit compatible nonzero functions for d?

    Runs config.trials independent matrix samples and returns the
    majority verdict (an even split counts as a failure).  The reported
    kernel data comes from the first trial on the majority side.
    """
    if config is None:
        config = ToricConfig()
    d = _coerce_divisor(d, G.n)
    if not d.is_effective():
        raise NonEffectiveDivisorError(f"divisor {d.coeffs} has a negative coefficient")
    outcomes = []
    for trial in range(config.trials):
        sample_seed = derive_seed(config.seed, G.adj, d.coeffs, trial)
        outcomes.append(_single_trial(G, d, sample_seed, config))
    passes = sum(o.passed for o in outcomes)
    majority = passes * 2 > config.trials
    disagreement = 0 < passes < config.trials
    rep = next(o for o in outcomes if o.passed == majority)
    return ToricOutcome(
        passed=majority,
        kernel_dim=rep.kernel_dim,
        per_block_support=rep.per_block_support,
        mode=rep.mode,
        sample_seed=rep.sample_seed,
        trial_disagreement=disagreement,
    )


@dataclass
class ToricMemo:
    """Shared cache of effectivity verdicts for one (graph, config) pair.

    toric_rank probes the same candidate representatives over and over
    (for D and for K - D, across many removals); verdicts depend only on
    the candidate's coefficients, so they are safe to share.
    """

    graph: Multigraph
    config: ToricConfig
    outcomes: dict[tuple[int, ...], ToricOutcome] = field(default_factory=dict)

    def outcome(self, d: Divisor) -> ToricOutcome:
        key = d.coeffs
        got = self.outcomes.get(key)
        if got is None:
            got = toric_effective_test(self.graph, d, self.config)
            self.outcomes[key] = got
        return got

    def trial_disagreements(self) -> list[tuple[int, ...]]:
        return [k for k, o in self.outcomes.items() if o.trial_disagreement]


_CHUNK = 4096


def toric_rank(
    G: Multigraph,
    D: DivisorLike,
    config: ToricConfig | None = None,
    memo: ToricMemo | None = None,
) -> RankResult:
    """Toric analogue of rank: a removal E is survivable iff SOME member
    of |D - E| passes the effectivity test.

    Same level-by-level lexicographic search as rank; the witness is the
    first removal no representative survives.  Candidates m - E (for
    members m >= E) are exactly the members of |D - E|, tested in
    lexicographic order with verdicts shared through the memo.
    """
    if config is None:
        config = ToricConfig()
    if memo is None:
        memo = ToricMemo(G, config)
    elif memo.graph is not G and memo.graph != G:
        raise ValueError("memo was built for a different graph")
    elif memo.config != config:
        raise ValueError("memo was built for a different config")
    D = _coerce_divisor(D, G.n)
    n = G.n
    if degree(D) < 0:
        return RankResult(-1, Divisor.zero(n))
    _, members = _members_cached(G, D)
    if len(members) == 0:
        return RankResult(-1, Divisor.zero(n))
    level = 0
    while True:
        removals = _compositions_array(n, level)
        for start in range(0, len(removals), _CHUNK):
            chunk = removals[start : start + _CHUNK]
            dom = (chunk[:, None, :] <= members[None, :, :]).all(axis=2)
            for i in range(len(chunk)):
                row = chunk[i]
                survivable = False
                for mi in np.nonzero(dom[i])[0]:
                    cand = Divisor(tuple(int(x) for x in members[mi] - row))
                    if memo.outcome(cand).passed:
                        survivable = True
                        break
                if not survivable:
                    witness = Divisor(tuple(int(x) for x in row))
                    return RankResult(level - 1, witness)
        level += 1
        assert level <= degree(D) + 1, "toric rank search exceeded its degree bound"


def verify_rr_toric(
    G: Multigraph,
    D: DivisorLike,
    config: ToricConfig | None = None,
    memo: ToricMemo | None = None,
) -> bool:
    """Riemann-Roch with toric ranks on both sides:
    toric_rank(D) - toric_rank(K - D) == degree(D) + 1 - genus(G)."""
    if config is None:
        config = ToricConfig()
    D = _coerce_divisor(D, G.n)
    K = canonical_divisor(G)
    r = toric_rank(G, D, config, memo).rank
    r_dual = toric_rank(G, K - D, config, memo).rank
    return r - r_dual == degree(D) + 1 - genus(G)
