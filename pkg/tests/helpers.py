"""Shared test utilities: independent oracles and small-graph catalogs.

Everything here is deliberately naive.  The oracles recompute answers by
brute force or by a different algorithm entirely, so agreement with the
library is evidence and not circularity.
"""

from __future__ import annotations

import heapq
import itertools

import numpy as np

import chipfire as cf


def canonical_adjacency(adj) -> tuple[tuple[int, ...], ...]:
    """Lexicographically minimal adjacency matrix over all vertex
    permutations.  Brute force; fine for n <= 6."""
    n = len(adj)
    return min(
        tuple(tuple(adj[p[i]][p[j]] for j in range(n)) for i in range(n))
        for p in itertools.permutations(range(n))
    )


def all_connected_simple_graphs(n: int) -> list[cf.Multigraph]:
    """Every connected simple graph on n labeled vertices."""
    cells = [(i, j) for i in range(n) for j in range(i + 1, n)]
    out = []
    for bits in itertools.product((0, 1), repeat=len(cells)):
        adj = [[0] * n for _ in range(n)]
        for (i, j), b in zip(cells, bits):
            adj[i][j] = adj[j][i] = b
        if cf.is_connected(adj):
            out.append(cf.Multigraph.from_adjacency(adj))
    return out


def connected_multigraphs_up_to_iso(max_n: int, max_mult: int) -> list[cf.Multigraph]:
    out = []
    for n in range(1, max_n + 1):
        cells = [(i, j) for i in range(n) for j in range(i + 1, n)]
        seen = set()
        for vals in itertools.product(range(max_mult + 1), repeat=len(cells)):
            adj = [[0] * n for _ in range(n)]
            for (i, j), v in zip(cells, vals):
                adj[i][j] = adj[j][i] = v
            if not cf.is_connected(adj):
                continue
            canon = canonical_adjacency(adj)
            if canon not in seen:
                seen.add(canon)
                out.append(cf.Multigraph(canon))
    return out


def trees_up_to_iso(n: int) -> list[cf.Multigraph]:
    """All trees on n vertices up to isomorphism, decoded from Pruefer
    sequences and deduplicated by canonical form."""
    if n == 1:
        return [cf.Multigraph.from_adjacency([[0]])]
    if n == 2:
        return [cf.path_graph(2)]
    seen, out = set(), []
    for seq in itertools.product(range(n), repeat=n - 2):
        deg = [1] * n
        for v in seq:
            deg[v] += 1
        adj = [[0] * n for _ in range(n)]
        leaves = [v for v in range(n) if deg[v] == 1]
        heapq.heapify(leaves)
        for v in seq:
            leaf = heapq.heappop(leaves)
            adj[leaf][v] = adj[v][leaf] = 1
            deg[v] -= 1
            if deg[v] == 1:
                heapq.heappush(leaves, v)
        u, w = heapq.heappop(leaves), heapq.heappop(leaves)
        adj[u][w] = adj[w][u] = 1
        canon = canonical_adjacency(adj)
        if canon not in seen:
            seen.add(canon)
            out.append(cf.Multigraph(canon))
    return out


def cycle_with_pendant_path(k: int, plen: int) -> cf.Multigraph:
    """k-cycle with a path of plen extra vertices hanging off vertex 0."""
    n = k + plen
    adj = [[0] * n for _ in range(n)]
    for i in range(k):
        j = (i + 1) % k
        adj[i][j] = adj[j][i] = 1
    prev = 0
    for t in range(plen):
        v = k + t
        adj[prev][v] = adj[v][prev] = 1
        prev = v
    return cf.Multigraph.from_adjacency(adj)


_OFFSET_CACHE: dict[tuple, np.ndarray] = {}


def _firing_offsets(G: cf.Multigraph, radius: int) -> np.ndarray:
    """Deduplicated L f over all firing vectors f with one coordinate
    pinned to zero and the rest in [-radius, radius], union over every
    choice of pinned coordinate.  Depends only on the graph, so sweeps
    of many divisors on one graph reuse it."""
    key = (G.adj, radius)
    got = _OFFSET_CACHE.get(key)
    if got is None:
        n = G.n
        L = cf.laplacian(G)
        fs = np.array(
            list(itertools.product(range(-radius, radius + 1), repeat=n - 1)),
            dtype=np.int64,
        )
        got = np.unique(
            np.concatenate(
                [
                    fs @ L[:, [c for c in range(n) if c != pin]].T
                    for pin in range(n)
                ]
            ),
            axis=0,
        )
        _OFFSET_CACHE[key] = got
    return got


def brute_members(G: cf.Multigraph, coeffs, radius: int = 10) -> set[tuple[int, ...]]:
    """Effective divisors reachable by firing vectors within the box,
    taking the union over every choice of pinned coordinate (mirroring
    the classical enumeration loop)."""
    D = np.array(coeffs, dtype=np.int64)
    if G.n == 1:
        return {tuple(D.tolist())} if D[0] >= 0 else set()
    cand = D + _firing_offsets(G, radius)
    eff = cand[(cand >= 0).all(axis=1)]
    return set(map(tuple, eff.tolist()))


def brute_rank(G: cf.Multigraph, coeffs, radius: int = 10) -> int:
    """Rank recomputed from scratch against the brute member sets."""
    n = G.n
    members = brute_members(G, coeffs, radius)
    if not members:
        return -1
    level = 0
    while True:
        for removal in itertools.product(range(level + 1), repeat=n):
            if sum(removal) != level:
                continue
            if not any(all(m[i] >= removal[i] for i in range(n)) for m in members):
                return level - 1
        level += 1


def greedy_winnable(G: cf.Multigraph, coeffs, max_rounds: int = 10_000) -> bool:
    """Debt-chasing play: the lowest-indexed vertex in debt borrows from
    its neighbors until no vertex is in debt or the round budget runs
    out.  Declares unwinnable on budget exhaustion, so only trust it on
    instances where the budget is generous."""
    state = list(coeffs)
    if sum(state) < 0:
        return False
    L = cf.laplacian(G)
    for _ in range(max_rounds):
        debtor = next((i for i, c in enumerate(state) if c < 0), None)
        if debtor is None:
            return True
        # borrowing at the debtor adds column `debtor` of the Laplacian
        for j in range(G.n):
            state[j] += int(L[j][debtor])
    return False
