"""Static bipartite matching: Hopcroft-Karp, single augmenting-path search,
bottleneck cost by threshold binary search, and the persistence-diagram
reduction graph.

Vertices on each side are numbered ``0..n-1``. A matching is a plain
``dict`` mapping left vertex to right vertex. Edges are addressed by their
index in :attr:`BipartiteGraph.edges`; that index is also the global
tiebreak, so equal weights are ordered by ``(weight, edge id)``.
"""

from __future__ import annotations

import itertools
import math
from collections import deque
from dataclasses import dataclass, field
from typing import Any, Iterable, Sequence

Matching = dict[int, int]
Path = list[int]  # u, y1, x1, y2, ..., v  (left, right, left, ..., right)


class NoPerfectMatching(Exception):
    """No perfect matching exists. ``witness`` is a Hall violator ``W`` with
    ``len(W) > len(neighbors)`` when one was found."""

    def __init__(self, message: str, witness: list[int] | None = None,
                 neighbors: list[int] | None = None) -> None:
        super().__init__(message)
        self.witness = witness
        self.neighbors = neighbors


class MatchingError(ValueError):
    pass


@dataclass
class BipartiteGraph:
    n_left: int
    n_right: int
    edges: list[tuple[int, int, Any]]
    _index: dict[tuple[int, int], int] = field(init=False, repr=False)

    def __post_init__(self) -> None:
        self._index = {}
        for i, (l, r, _w) in enumerate(self.edges):
            if not (0 <= l < self.n_left and 0 <= r < self.n_right):
                raise MatchingError(f"edge {i} = ({l}, {r}) out of range")
            if (l, r) in self._index:
                raise MatchingError(f"duplicate edge ({l}, {r})")
            self._index[(l, r)] = i

    @property
    def m(self) -> int:
        return len(self.edges)

    def edge_id(self, left: int, right: int) -> int:
        return self._index[(left, right)]

    def has_edge(self, left: int, right: int) -> bool:
        return (left, right) in self._index

    def weight(self, left: int, right: int) -> Any:
        return self.edges[self._index[(left, right)]][2]

    def adjacency(self, edge_ids: Iterable[int] | None = None) -> list[list[int]]:
        """Neighbor lists per left vertex, sorted by right id."""
        adj: list[list[int]] = [[] for _ in range(self.n_left)]
        ids = range(self.m) if edge_ids is None else edge_ids
        for i in ids:
            l, r, _ = self.edges[i]
            adj[l].append(r)
        for nbrs in adj:
            nbrs.sort()
        return adj

    def frozen(self, t: float) -> BipartiteGraph:
        """Scalar-weight copy with every flight plan evaluated at ``t``."""
        return BipartiteGraph(
            self.n_left, self.n_right, [(l, r, w(t)) for l, r, w in self.edges]
        )


def _as_adj(g: BipartiteGraph | Sequence[Sequence[int]]) -> Sequence[Sequence[int]]:
    return g.adjacency() if isinstance(g, BipartiteGraph) else g


def check_matching(adj: Sequence[Sequence[int]], m: Matching) -> None:
    seen = set()
    for l, r in m.items():
        if not 0 <= l < len(adj) or r not in adj[l]:
            raise MatchingError(f"({l}, {r}) is not an edge")
        if r in seen:
            raise MatchingError(f"right vertex {r} matched twice")
        seen.add(r)


def hopcroft_karp(
    g: BipartiteGraph | Sequence[Sequence[int]],
    seed_matching: Matching | None = None,
    n_right: int | None = None,
) -> Matching:
    """Maximum matching by Hopcroft-Karp, optionally warm-started."""
    adj = _as_adj(g)
    if n_right is None:
        n_right = g.n_right if isinstance(g, BipartiteGraph) else 1 + max(
            (r for nb in adj for r in nb), default=-1)
    match_l: list[int] = [-1] * len(adj)
    match_r: list[int] = [-1] * n_right
    if seed_matching:
        check_matching(adj, seed_matching)
        for l, r in seed_matching.items():
            match_l[l] = r
            match_r[r] = l

    inf = math.inf
    dist = [inf] * len(adj)

    def bfs() -> bool:
        q = deque()
        for u in range(len(adj)):
            if match_l[u] == -1:
                dist[u] = 0
                q.append(u)
            else:
                dist[u] = inf
        found = False
        while q:
            u = q.popleft()
            for r in adj[u]:
                w = match_r[r]
                if w == -1:
                    found = True
                elif dist[w] == inf:
                    dist[w] = dist[u] + 1
                    q.append(w)
        return found

    def dfs(u: int) -> bool:
        for r in adj[u]:
            w = match_r[r]
            if w == -1 or (dist[w] == dist[u] + 1 and dfs(w)):
                match_l[u] = r
                match_r[r] = u
                return True
        dist[u] = inf
        return False

    while bfs():
        for u in range(len(adj)):
            if match_l[u] == -1:
                dfs(u)
    return {l: r for l, r in enumerate(match_l) if r != -1}


def find_augmenting_path(
    g: BipartiteGraph | Sequence[Sequence[int]], m: Matching, u: int, v: int
) -> Path | None:
    """Shortest alternating path from unmatched left ``u`` to unmatched
    right ``v``, or ``None``. Neighbors are explored in id order, so the
    result is deterministic.
    """
    adj = _as_adj(g)
    mate_r = {r: l for l, r in m.items()}
    if u in m:
        raise MatchingError(f"left vertex {u} is matched")
    if v in mate_r:
        raise MatchingError(f"right vertex {v} is matched")
    # parent_r[right] = left it was reached from
    parent_r: dict[int, int] = {}
    seen_l = {u}
    q = deque([u])
    while q:
        x = q.popleft()
        for y in adj[x]:
            if y in parent_r or m.get(x) == y:
                continue
            parent_r[y] = x
            if y == v:
                path = [y]
                while True:
                    x = parent_r[path[-1]]
                    path.append(x)
                    if x == u:
                        return path[::-1]
                    path.append(m[x])
            w = mate_r.get(y)
            if w is not None and w not in seen_l:
                seen_l.add(w)
                q.append(w)
    return None


def path_edges(path: Path) -> list[tuple[int, int]]:
    """``(left, right)`` pairs along an alternating vertex path."""
    out = []
    for i in range(len(path) - 1):
        a, b = path[i], path[i + 1]
        out.append((a, b) if i % 2 == 0 else (b, a))
    return out


def aug(m: Matching, path: Path) -> Matching:
    """Symmetric difference of ``m`` with the augmenting path."""
    if len(path) < 2 or len(path) % 2:
        raise MatchingError("augmenting path must have an odd number of edges")
    mate_r = {r: l for l, r in m.items()}
    if path[0] in m or path[-1] in mate_r:
        raise MatchingError("path endpoints must be unmatched")
    edges = path_edges(path)
    for i, (l, r) in enumerate(edges):
        if (m.get(l) == r) != (i % 2 == 1):
            raise MatchingError("path does not alternate with the matching")
    out = dict(m)
    for i, (l, r) in enumerate(edges):
        if i % 2 == 0:
            out[l] = r
    return out


def hall_witness(g: BipartiteGraph | Sequence[Sequence[int]], m: Matching,
                 n_right: int | None = None) -> tuple[list[int], list[int]] | None:
    """Given a maximum matching, return ``(W, N(W))`` with ``|W| > |N(W)|``
    (left vertices reachable by alternating paths from unmatched ones)."""
    adj = _as_adj(g)
    free = [u for u in range(len(adj)) if u not in m]
    if not free:
        return None
    mate_r = {r: l for l, r in m.items()}
    seen_l, seen_r = set(free), set()
    q = deque(free)
    while q:
        x = q.popleft()
        for y in adj[x]:
            if y in seen_r:
                continue
            seen_r.add(y)
            w = mate_r.get(y)
            if w is not None and w not in seen_l:
                seen_l.add(w)
                q.append(w)
    return sorted(seen_l), sorted(seen_r)


def _sort_key(w: Any, i: int) -> tuple:
    return (w, i)


def static_bottleneck(g: BipartiteGraph) -> tuple[float, Matching, int]:
    """Minimum over perfect matchings of the maximum edge weight.

    Returns ``(delta, matching, bottleneck edge id)``. Edges are totally
    ordered by ``(weight, edge id)``; the binary search runs over positions
    in that order, so the bottleneck edge is unique.
    """
    n = g.n_left
    if g.n_right != n:
        raise NoPerfectMatching(f"sides differ: {g.n_left} vs {g.n_right}")
    if n == 0:
        return 0.0, {}, -1
    order = sorted(range(g.m), key=lambda i: _sort_key(g.edges[i][2], i))
    rank = {e: k for k, e in enumerate(order)}

    full = hopcroft_karp(g.adjacency(), n_right=n)
    if len(full) < n:
        w = hall_witness(g, full)
        raise NoPerfectMatching(
            "graph has no perfect matching",
            witness=w[0] if w else None, neighbors=w[1] if w else None)

    def restrict(m: Matching, k: int) -> Matching:
        return {l: r for l, r in m.items() if rank[g.edge_id(l, r)] <= k}

    # smallest k with a perfect matching inside order[:k+1]
    lo, hi = n - 1, g.m - 1
    best = restrict(full, hi)
    seed = best
    while lo < hi:
        mid = (lo + hi) // 2
        adj = g.adjacency(order[: mid + 1])
        cand = hopcroft_karp(adj, restrict(seed, mid), n_right=n)
        if len(cand) == n:
            hi, best, seed = mid, cand, cand
        else:
            lo = mid + 1
            seed = cand
    e_hat = order[hi]
    return float(g.edges[e_hat][2]), best, e_hat


def brute_force_bottleneck(g: BipartiteGraph) -> float:
    """Exact bottleneck cost by enumerating all ``n!`` permutations (n <= 8).
    Returns ``inf`` when no perfect matching exists."""
    n = g.n_left
    if n > 8:
        raise ValueError(f"brute force refused for n={n} > 8")
    if g.n_right != n:
        return math.inf
    if n == 0:
        return 0.0
    w = {(l, r): float(c) for l, r, c in g.edges}
    best = math.inf
    for perm in itertools.permutations(range(n)):
        cost = 0.0
        for l in range(n):
            c = w.get((l, perm[l]))
            if c is None:
                cost = math.inf
                break
            if c > cost:
                cost = c
                if cost >= best:
                    break
        best = min(best, cost)
    return best


# ---------------------------------------------------------------------------
# persistence diagrams


def _proj(p: Sequence[float]) -> tuple[float, float]:
    m = 0.5 * (p[0] + p[1])
    return (m, m)


def linf(p: Sequence[float], q: Sequence[float]) -> float:
    return max(abs(p[0] - q[0]), abs(p[1] - q[1]))


def _check_diagram(pts: Sequence[Sequence[float]], name: str) -> None:
    for p in pts:
        if len(p) != 2 or not all(math.isfinite(x) for x in p):
            raise ValueError(f"{name}: only finite points are supported, got {p!r}")
        if not p[1] > p[0]:
            raise ValueError(f"{name}: point {p!r} is on or below the diagonal")


def diagram_reduction(X: Sequence[Sequence[float]], Y: Sequence[Sequence[float]]) -> BipartiteGraph:
    """Complete bipartite graph on ``X + proj(Y)`` versus ``Y + proj(X)``.

    Weights are L-infinity distances whenever an original point is involved
    and 0 between two projections.
    """
    _check_diagram(X, "X")
    _check_diagram(Y, "Y")
    p, q = len(X), len(Y)
    left = [tuple(x) for x in X] + [_proj(y) for y in Y]
    right = [tuple(y) for y in Y] + [_proj(x) for x in X]
    edges = []
    for u in range(p + q):
        for v in range(q + p):
            if u >= p and v >= q:
                w = 0.0
            else:
                w = linf(left[u], right[v])
            edges.append((u, v, w))
    return BipartiteGraph(p + q, q + p, edges)


def bottleneck_distance(X: Sequence[Sequence[float]], Y: Sequence[Sequence[float]]) -> float:
    """Bottleneck distance between two finite persistence diagrams."""
    if not X and not Y:
        return 0.0
    return static_bottleneck(diagram_reduction(X, Y))[0]
