"""Zero-dimensional persistent homology transform of planar embedded graphs.

For a direction ``theta`` every vertex ``v = (x, y)`` has height
``h_v(theta) = x cos(theta) + y sin(theta)``, a sinusoid in ``theta``. Between
two consecutive critical directions (perpendiculars of vertex-pair lines) the
vertex order is fixed, so every finite diagram point is a pair of vertex
heights ``(h_b, h_d)`` and traces an ellipse arc. Stitching those arcs
across the critical directions yields the vines.

For the kinetic bipartite graph each vine is extended to the whole circle:
outside its birth interval it is parked on the diagonal at a point that
joins its two diagonal endpoints continuously. Diagonal points never change
a bottleneck distance, so the extension keeps the distance exact while
making every edge cost continuous on the circle.
"""

from __future__ import annotations

import json
import math
import random
from dataclasses import dataclass, field

from . import curves
from .curves import TWO_PI, CostPiece, FlightPlan, Sinusoid, max_abs
from .hourglass import BottleneckTrajectory, Hourglass, Segment
from .kinetic_pq import HEAP
from .matching import BipartiteGraph, bottleneck_distance

#: angular tolerance for parallel vertex-pair lines
ANGLE_TOL = 1e-9
#: relative tolerance for matching vine limits at critical directions
STITCH_TOL = 1e-9


class PHTError(ValueError):
    """Base class for input geometry that the PHT pipeline rejects."""


class GenericityError(PHTError):
    """Two distinct vertex-pair lines are parallel, or vertices coincide."""


class MonodromyError(PHTError):
    """Vines could not be stitched consistently around the circle."""


def _unit(omega) -> tuple[float, float]:
    if isinstance(omega, (int, float)):
        return math.cos(omega), math.sin(omega)
    x, y = float(omega[0]), float(omega[1])
    r = math.hypot(x, y)
    if r == 0:
        raise ValueError("direction must be nonzero")
    return x / r, y / r


# ---------------------------------------------------------------------------
# input


@dataclass
class EmbeddedGraph:
    """A connected straight-line graph in the plane.

    ``triangles`` is optional and only used by the star-shape spot check;
    2-simplices never change 0-dimensional persistence.
    """

    vertices: list[tuple[float, float]]
    edges: list[tuple[int, int]]
    center: tuple[float, float] | None = None
    triangles: list[tuple[int, int, int]] = field(default_factory=list)

    def __post_init__(self) -> None:
        self.vertices = [(float(x), float(y)) for x, y in self.vertices]
        n = len(self.vertices)
        if n == 0:
            raise PHTError("graph has no vertices")
        seen = set()
        clean = []
        for i, j in self.edges:
            i, j = int(i), int(j)
            if not (0 <= i < n and 0 <= j < n) or i == j:
                raise PHTError(f"bad edge ({i}, {j})")
            key = (min(i, j), max(i, j))
            if key not in seen:
                seen.add(key)
                clean.append(key)
        self.edges = clean
        if self.center is not None:
            self.center = (float(self.center[0]), float(self.center[1]))
        self.triangles = [tuple(int(v) for v in t) for t in self.triangles]
        self.neighbors: list[list[int]] = [[] for _ in range(n)]
        for i, j in clean:
            self.neighbors[i].append(j)
            self.neighbors[j].append(i)
        if not self._connected():
            raise PHTError("graph is not connected")
        self.heights = [Sinusoid.from_coeffs(x, y) for x, y in self.vertices]

    def _connected(self) -> bool:
        stack, seen = [0], {0}
        while stack:
            v = stack.pop()
            for u in self.neighbors[v]:
                if u not in seen:
                    seen.add(u)
                    stack.append(u)
        return len(seen) == len(self.vertices)

    @property
    def n(self) -> int:
        return len(self.vertices)

    @property
    def scale(self) -> float:
        return 1.0 + max(max(abs(x), abs(y)) for x, y in self.vertices)

    def translated(self, dx: float, dy: float) -> EmbeddedGraph:
        c = None if self.center is None else (self.center[0] + dx, self.center[1] + dy)
        return EmbeddedGraph([(x + dx, y + dy) for x, y in self.vertices], list(self.edges),
                             c, list(self.triangles))

    @classmethod
    def from_json(cls, obj: dict) -> EmbeddedGraph:
        try:
            return cls([tuple(v) for v in obj["vertices"]], [tuple(e) for e in obj["edges"]],
                       obj.get("center"), [tuple(t) for t in obj.get("triangles", [])])
        except (KeyError, TypeError, ValueError) as exc:
            if isinstance(exc, PHTError):
                raise
            raise PHTError(f"malformed embedded graph: {exc}") from exc

    def to_json(self) -> dict:
        out: dict = {"vertices": [list(v) for v in self.vertices],
                     "edges": [list(e) for e in self.edges]}
        if self.center is not None:
            out["center"] = list(self.center)
        if self.triangles:
            out["triangles"] = [list(t) for t in self.triangles]
        return out


# ---------------------------------------------------------------------------
# one direction


@dataclass
class DirectionDiagram:
    essential_birth: float
    essential_vertex: int
    points: list[tuple[float, float]]
    birth_vertices: list[int]
    death_vertices: list[int]


def lower_star_diagram(g: EmbeddedGraph, omega) -> DirectionDiagram:
    """0-dimensional persistence of the lower-star filtration of ``h_omega``.

    Union-find with the elder rule; equal heights are ordered by vertex id.
    Pairs with zero persistence are dropped.
    """
    c, s = _unit(omega)
    h = [x * c + y * s for x, y in g.vertices]
    order = sorted(range(g.n), key=lambda v: (h[v], v))
    pos = [0] * g.n
    for k, v in enumerate(order):
        pos[v] = k
    parent = list(range(g.n))

    def find(v: int) -> int:
        while parent[v] != v:
            parent[v] = parent[parent[v]]
            v = parent[v]
        return v

    pts, births, deaths = [], [], []
    for v in order:
        for u in g.neighbors[v]:
            if pos[u] > pos[v]:
                continue
            ru, rv = find(u), find(v)
            if ru == rv:
                continue
            young, old = (ru, rv) if pos[ru] > pos[rv] else (rv, ru)
            parent[young] = old
            if young != v and h[v] > h[young]:
                pts.append((h[young], h[v]))
                births.append(young)
                deaths.append(v)
    ess = order[0]
    return DirectionDiagram(h[ess], ess, pts, births, deaths)


# ---------------------------------------------------------------------------
# combinatorics over the circle


@dataclass
class Extremal:
    interval: tuple[float, float]  # (start, end), start in [0, 2pi), end > start
    external_edges: list[tuple[int, int]]


def extremal_vertices(g: EmbeddedGraph) -> dict[int, Extremal]:
    """Vertices outside the convex hull of their neighbors, with the open
    arc of directions in which each is a strict local minimum."""
    out: dict[int, Extremal] = {}
    for v in range(g.n):
        nb = g.neighbors[v]
        if not nb:
            out[v] = Extremal((0.0, TWO_PI), [])
            continue
        x0, y0 = g.vertices[v]
        ang = sorted((math.atan2(g.vertices[u][1] - y0, g.vertices[u][0] - x0) % TWO_PI, u)
                     for u in nb)
        best, k = -1.0, 0
        for i in range(len(ang)):
            nxt = ang[(i + 1) % len(ang)][0] + (TWO_PI if i + 1 == len(ang) else 0.0)
            gap = nxt - ang[i][0]
            if gap > best:
                best, k = gap, i
        if best <= math.pi + 1e-12:
            continue
        a_end, u_end = ang[k]
        a_start, u_start = ang[(k + 1) % len(ang)]
        span = (a_end - a_start) % TWO_PI
        lo = (a_start + span - 0.5 * math.pi) % TWO_PI
        hi = lo + (math.pi - span)
        ext = sorted({(min(v, u), max(v, u)) for u in (u_start, u_end)})
        out[v] = Extremal((lo, hi), ext)
    return out


def critical_events(g: EmbeddedGraph) -> list[tuple[float, list[tuple[int, int]]]]:
    """Sorted ``(angle, vertex pairs)`` where the listed pairs share a height."""
    n = g.n
    lines: list[tuple[float, list[tuple[int, int]]]] = []
    for i in range(n):
        for j in range(i + 1, n):
            dx = g.vertices[j][0] - g.vertices[i][0]
            dy = g.vertices[j][1] - g.vertices[i][1]
            if math.hypot(dx, dy) <= 1e-12 * g.scale:
                raise GenericityError(f"vertices {i} and {j} coincide")
            psi = math.atan2(dy, dx) % math.pi
            for k, (phi, pairs) in enumerate(lines):
                d = abs(psi - phi)
                if min(d, math.pi - d) > ANGLE_TOL:
                    continue
                a, b = pairs[0]
                ax, ay = g.vertices[a]
                ux, uy = g.vertices[b][0] - ax, g.vertices[b][1] - ay
                cross = ux * (g.vertices[i][1] - ay) - uy * (g.vertices[i][0] - ax)
                if abs(cross) > 1e-9 * g.scale * math.hypot(ux, uy):
                    raise GenericityError(
                        f"lines through ({a}, {b}) and ({i}, {j}) are parallel and distinct")
                pairs.append((i, j))
                break
            else:
                lines.append((psi, [(i, j)]))
    events = []
    for psi, pairs in lines:
        for off in (0.5 * math.pi, 1.5 * math.pi):
            events.append(((psi + off) % TWO_PI, pairs))
    events.sort(key=lambda e: e[0])
    return events


def critical_directions(g: EmbeddedGraph) -> list[float]:
    return [a for a, _ in critical_events(g)]


# ---------------------------------------------------------------------------
# vines


@dataclass
class VineArc:
    t0: float
    t1: float
    birth_vertex: int
    death_vertex: int


@dataclass
class Vine:
    """A diagram point followed across directions.

    ``arcs`` use unwrapped angles: ``arcs[0].t0`` lies in ``[0, 2pi)`` and the
    last ``t1`` may exceed ``2pi``. A loop vine never touches the diagonal.
    """

    arcs: list[VineArc]
    loop: bool = False

    @property
    def interval(self) -> tuple[float, float]:
        return self.arcs[0].t0, self.arcs[-1].t1

    @property
    def birth_vertex(self) -> int:
        return self.arcs[0].birth_vertex

    def arc_at(self, theta: float) -> VineArc | None:
        lo, hi = self.interval
        t = lo + (theta - lo) % TWO_PI
        if not self.loop and not lo < t < hi:
            return None
        for a in self.arcs:
            if a.t0 <= t < a.t1:
                return a
        return self.arcs[-1]

    def to_json(self, g: EmbeddedGraph) -> dict:
        return {
            "interval": list(self.interval),
            "loop": self.loop,
            "arcs": [{"t0": a.t0, "t1": a.t1, "birth_vertex": a.birth_vertex,
                      "death_vertex": a.death_vertex,
                      "birth_coords": list(g.vertices[a.birth_vertex]),
                      "death_coords": list(g.vertices[a.death_vertex])} for a in self.arcs],
        }


@dataclass
class PHTVineyard:
    graph: EmbeddedGraph
    vines: list[Vine]
    infinite_birth: list[tuple[float, float, int]]  # (t0, t1, min-height vertex) over [0, 2pi)
    extremal: dict[int, Extremal]
    critical: list[float]

    def point(self, vine: Vine, theta: float) -> tuple[float, float] | None:
        a = vine.arc_at(theta)
        if a is None:
            return None
        h = self.graph.heights
        return h[a.birth_vertex](theta), h[a.death_vertex](theta)

    def points_at(self, theta: float) -> list[tuple[float, float]]:
        """Off-diagonal points of the diagram in direction ``theta``."""
        out = []
        for v in self.vines:
            p = self.point(v, theta)
            if p is not None:
                out.append(p)
        return out

    def essential_at(self, theta: float) -> float:
        t = theta % TWO_PI
        for s, e, v in self.infinite_birth:
            if s <= t < e:
                return self.graph.heights[v](t)
        return self.graph.heights[self.infinite_birth[-1][2]](t)

    def essential_sinusoids(self) -> list[tuple[float, float, Sinusoid]]:
        return [(s, e, self.graph.heights[v]) for s, e, v in self.infinite_birth]

    def to_json(self) -> dict:
        return {
            "vines": [v.to_json(self.graph) for v in self.vines],
            "infinite_birth": [{"t0": s, "t1": e, "vertex": v} for s, e, v in self.infinite_birth],
            "extremal": {str(v): {"interval": list(x.interval),
                                  "external_edges": [list(e) for e in x.external_edges]}
                         for v, x in sorted(self.extremal.items())},
        }


def _stitch(g: EmbeddedGraph, c: float, left: list[tuple[int, int]],
            right: list[tuple[int, int]]) -> dict[int, int]:
    """Match left-limit points to right-limit points at critical angle ``c``."""
    h = g.heights
    tol = STITCH_TOL * g.scale
    lpos = [(h[b](c), h[d](c)) for b, d in left]
    rpos = [(h[b](c), h[d](c)) for b, d in right]
    lopen = [i for i, (b, d) in enumerate(lpos) if d - b > tol]
    ropen = {j for j, (b, d) in enumerate(rpos) if d - b > tol}
    cands = []
    for i in lopen:
        for j in ropen:
            dist = max(abs(lpos[i][0] - rpos[j][0]), abs(lpos[i][1] - rpos[j][1]))
            if dist <= tol:
                cands.append((left[i][0] != right[j][0], left[i][1] != right[j][1], dist, i, j))
    cands.sort()
    link: dict[int, int] = {}
    used = set()
    for _b, _d, _dist, i, j in cands:
        if i in link or j in used:
            continue
        link[i] = j
        used.add(j)
    if len(link) != len(lopen) or used != ropen:
        raise MonodromyError(
            f"vines cannot be continued across direction {c:.12g}; "
            "the input is probably not star-shaped")
    return link


def check_star_shaped(g: EmbeddedGraph, samples: int = 1000, seed: int = 0) -> None:
    """Spot-check that segments from ``g.center`` to sampled points of the
    complex stay inside the complex. No-op without a center."""
    if g.center is None:
        return
    rng = random.Random(seed)
    cx, cy = g.center
    tol = 1e-9 * g.scale
    V = g.vertices

    def on_complex(px: float, py: float) -> bool:
        for i, j in g.edges:
            (ax, ay), (bx, by) = V[i], V[j]
            ux, uy = bx - ax, by - ay
            L2 = ux * ux + uy * uy
            t = min(1.0, max(0.0, ((px - ax) * ux + (py - ay) * uy) / L2))
            if math.hypot(ax + t * ux - px, ay + t * uy - py) <= tol:
                return True
        for i, j, k in g.triangles:
            (ax, ay), (bx, by), (qx, qy) = V[i], V[j], V[k]
            d1 = (bx - ax) * (py - ay) - (by - ay) * (px - ax)
            d2 = (qx - bx) * (py - by) - (qy - by) * (px - bx)
            d3 = (ax - qx) * (py - qy) - (ay - qy) * (px - qx)
            if (min(d1, d2, d3) >= -tol) or (max(d1, d2, d3) <= tol):
                return True
        return False

    if not g.edges:
        return
    for _ in range(samples):
        i, j = g.edges[rng.randrange(len(g.edges))]
        t = rng.random()
        px = V[i][0] + t * (V[j][0] - V[i][0])
        py = V[i][1] + t * (V[j][1] - V[i][1])
        for k in range(17):
            s = k / 16
            if not on_complex(cx + s * (px - cx), cy + s * (py - cy)):
                raise MonodromyError(
                    f"segment from the center to ({px:.6g}, {py:.6g}) leaves the complex")


def compute_vines(g: EmbeddedGraph) -> PHTVineyard:
    """Vines of the 0-dimensional PHT, stitched across critical directions."""
    check_star_shaped(g)
    crit = critical_directions(g)
    ext = extremal_vertices(g)
    if not crit:
        return PHTVineyard(g, [], [(0.0, TWO_PI, 0)], ext, [])
    K = len(crit)
    lo = crit
    hi = crit[1:] + [crit[0] + TWO_PI]
    arc_pts: list[list[tuple[int, int]]] = []
    ess: list[int] = []
    for k in range(K):
        dg = lower_star_diagram(g, 0.5 * (lo[k] + hi[k]))
        arc_pts.append(list(zip(dg.birth_vertices, dg.death_vertices)))
        ess.append(dg.essential_vertex)

    nxt: dict[tuple[int, int], tuple[int, int]] = {}
    has_prev: set[tuple[int, int]] = set()
    for k in range(K):
        k2 = (k + 1) % K
        link = _stitch(g, hi[k], arc_pts[k], arc_pts[k2])
        for i, j in link.items():
            nxt[(k, i)] = (k2, j)
            has_prev.add((k2, j))

    def follow(start: tuple[int, int]) -> tuple[list[VineArc], bool]:
        arcs: list[VineArc] = []
        node, off = start, 0.0
        while True:
            k, i = node
            b, d = arc_pts[k][i]
            arcs.append(VineArc(lo[k] + off, hi[k] + off, b, d))
            visited.add(node)
            if node not in nxt:
                return arcs, False
            node = nxt[node]
            if node[0] == 0:
                off += TWO_PI
            if node == start:
                return arcs, True

    visited: set[tuple[int, int]] = set()
    vines: list[Vine] = []
    nodes = [(k, i) for k in range(K) for i in range(len(arc_pts[k]))]
    for node in nodes:
        if node not in has_prev and node not in visited:
            arcs, _ = follow(node)
            vines.append(Vine(_merge_arcs(arcs)))
    for node in nodes:
        if node not in visited:
            arcs, looped = follow(node)
            if not looped:
                raise MonodromyError("inconsistent vine chain")
            vines.append(Vine(_merge_arcs(arcs), loop=True))

    if len(vines) > len(ext):
        raise MonodromyError(f"{len(vines)} vines but only {len(ext)} extremal vertices")

    # essential birth curve: minimum-height vertex per arc, folded onto [0, 2pi)
    raw: list[tuple[float, float, int]] = []
    for k in range(K):
        a, b = lo[k], hi[k]
        if b > TWO_PI:
            if a < TWO_PI:
                raw.append((a, TWO_PI, ess[k]))
            raw.append((max(a, TWO_PI) - TWO_PI, b - TWO_PI, ess[k]))
        else:
            raw.append((a, b, ess[k]))
    raw.sort()
    if raw[0][0] > 0.0:
        raw.insert(0, (0.0, raw[0][0], ess[-1]))
    infinite: list[tuple[float, float, int]] = []
    for s, e, v in raw:
        if e <= s:
            continue
        if infinite and infinite[-1][2] == v:
            infinite[-1] = (infinite[-1][0], e, v)
        else:
            infinite.append((s, e, v))
    return PHTVineyard(g, vines, infinite, ext, crit)


def _merge_arcs(arcs: list[VineArc]) -> list[VineArc]:
    out: list[VineArc] = []
    for a in arcs:
        if out and (out[-1].birth_vertex, out[-1].death_vertex) == (a.birth_vertex, a.death_vertex):
            out[-1] = VineArc(out[-1].t0, a.t1, a.birth_vertex, a.death_vertex)
        else:
            out.append(a)
    return out


# ---------------------------------------------------------------------------
# kinetic bipartite graph


Track = list[tuple[float, float, Sinusoid, Sinusoid]]


def _through(t0: float, y0: float, t1: float, y1: float) -> Sinusoid:
    # a cos t + b sin t through two points, |t1 - t0| < pi
    det = math.sin(t1 - t0)
    a = (y0 * math.sin(t1) - y1 * math.sin(t0)) / det
    b = (y1 * math.cos(t0) - y0 * math.cos(t1)) / det
    return Sinusoid.from_coeffs(a, b)


def vine_track(yard: PHTVineyard, vine: Vine) -> Track:
    """Birth/death sinusoid pairs tiling ``[0, 2pi)``; parked on the diagonal
    outside the vine's interval."""
    h = yard.graph.heights
    pieces: Track = [(a.t0, a.t1, h[a.birth_vertex], h[a.death_vertex]) for a in vine.arcs]
    lo, hi = vine.interval
    span = lo + TWO_PI - hi
    if not vine.loop and span > 1e-12:
        first, last = vine.arcs[0], vine.arcs[-1]
        y0 = h[last.birth_vertex](hi)
        y1 = h[first.birth_vertex](lo)
        n = max(1, math.ceil(span / (math.pi / 3)))
        for i in range(n):
            s = hi + span * i / n
            e = hi + span * (i + 1) / n if i + 1 < n else lo + TWO_PI
            p = _through(s, y0 + (y1 - y0) * i / n, e, y0 + (y1 - y0) * (i + 1) / n)
            pieces.append((s, e, p, p))
    out: Track = []
    for s, e, b, d in pieces:
        while s < e:
            k = math.floor(s / TWO_PI)
            cut = min(e, (k + 1) * TWO_PI)
            if cut > s:
                out.append((s - k * TWO_PI, cut - k * TWO_PI, b, d))
            s = cut
    out.sort(key=lambda p: p[0])
    return out


def _zip_tracks(*tracks: Track):
    idx = [0] * len(tracks)
    t = 0.0
    while t < TWO_PI:
        cur = []
        for k, tr in enumerate(tracks):
            while tr[idx[k]][1] <= t:
                idx[k] += 1
            cur.append(tr[idx[k]])
        e = min(p[1] for p in cur)
        yield t, e, cur
        t = e


def _plan_from(pieces: list[tuple[float, float, curves.Form]]) -> FlightPlan:
    merged: list[list] = []
    for s, e, f in pieces:
        if e <= s:
            continue
        if merged and _same_form(merged[-1][2], f):
            merged[-1][1] = e
        else:
            merged.append([s, e, f])
    merged[0][0] = 0.0
    merged[-1][1] = TWO_PI
    return FlightPlan([CostPiece(s, e, f) for s, e, f in merged], curves.CIRCLE)


def _same_form(f: curves.Form, g: curves.Form) -> bool:
    if f is curves.ZERO or g is curves.ZERO:
        return f is g
    if len(f.terms) != len(g.terms):
        return False
    return all(any(s.same_as(t) or s.same_as(-t) for t in g.terms) for s in f.terms)


def _linf_plan(ta: Track, tb: Track) -> FlightPlan:
    return _plan_from([(s, e, max_abs(pa[2] - pb[2], pa[3] - pb[3]))
                       for s, e, (pa, pb) in _zip_tracks(ta, tb)])


def _diag_plan(ta: Track) -> FlightPlan:
    return _plan_from([(s, e, max_abs((pa[3] - pa[2]).scaled(0.5)))
                       for s, e, (pa,) in _zip_tracks(ta)])


def _proj_plan(ta: Track, tb: Track) -> FlightPlan:
    # point of ta against the diagonal projection of tb
    out = []
    for s, e, (pa, pb) in _zip_tracks(ta, tb):
        m = (pb[2] + pb[3]).scaled(0.5)
        out.append((s, e, max_abs(pa[2] - m, pa[3] - m)))
    return _plan_from(out)


def pht_bipartite_graph(A: PHTVineyard, B: PHTVineyard) -> BipartiteGraph:
    """Complete bipartite graph on ``A vines + proj(B)`` versus
    ``B vines + proj(A)`` with circle flight plans as edge weights."""
    ta = [vine_track(A, v) for v in A.vines]
    tb = [vine_track(B, v) for v in B.vines]
    p, q = len(ta), len(tb)
    zero = FlightPlan.constant(0.0, curves.CIRCLE)
    edges = []
    for u in range(p + q):
        for v in range(q + p):
            if u < p and v < q:
                w = _linf_plan(ta[u], tb[v])
            elif u < p:
                k = v - q
                w = _diag_plan(ta[u]) if k == u else _proj_plan(ta[u], ta[k])
            elif v < q:
                k = u - p
                w = _diag_plan(tb[v]) if k == v else _proj_plan(tb[v], tb[k])
            else:
                w = zero
            edges.append((u, v, w))
    return BipartiteGraph(p + q, q + p, edges)


# ---------------------------------------------------------------------------
# integrated distance


@dataclass
class PHTDistance:
    value: float
    trajectory: BottleneckTrajectory  # root -1 where the essential classes dominate
    closure_gap: float
    vineyards: tuple[PHTVineyard, PHTVineyard]
    hourglass: Hourglass | None = None

    def at(self, theta: float) -> float:
        return self.trajectory.value(theta % TWO_PI)


def _essential_diff(A: PHTVineyard, B: PHTVineyard) -> list[tuple[float, float, Sinusoid]]:
    ea, eb = A.essential_sinusoids(), B.essential_sinusoids()
    out, i, j, t = [], 0, 0, 0.0
    while t < TWO_PI:
        while ea[i][1] <= t:
            i += 1
        while eb[j][1] <= t:
            j += 1
        e = min(ea[i][1], eb[j][1])
        out.append((t, e, ea[i][2] - eb[j][2]))
        t = e
    return out


def integrated_distance(K1: EmbeddedGraph, K2: EmbeddedGraph, flavor: str = HEAP,
                        seed: int | None = None) -> PHTDistance:
    """Exact integral over the circle of the bottleneck distance between the
    two transforms, with the piecewise distance curve."""
    A, B = compute_vines(K1), compute_vines(K2)
    ess = _essential_diff(A, B)
    g = pht_bipartite_graph(A, B)
    h = None
    if g.m:
        h = Hourglass(g, flavor=flavor, seed=seed)
        finite = [(s.t0, s.t1, s.root, s.piece.form) for s in h.run().segments]
    else:
        finite = [(0.0, TWO_PI, -1, curves.ZERO)]
    segs: list[Segment] = []
    i = j = 0
    t = 0.0
    while t < TWO_PI:
        while finite[i][1] <= t:
            i += 1
        while ess[j][1] <= t:
            j += 1
        e = min(finite[i][1], ess[j][1])
        form = finite[i][3]
        terms = [] if form is curves.ZERO else list(form.terms)
        for p, q, best in curves.split_max_abs(terms + [ess[j][2]], t, e):
            root = finite[i][2] if best is not None and any(best is s for s in terms) else -1
            f = curves.ZERO if best is None else curves.MaxAbs((best,))
            segs.append(Segment(p, q, root, CostPiece(p, q, f)))
        t = e
    traj = BottleneckTrajectory(segs)
    gap = abs(segs[-1].piece.form(TWO_PI) - segs[0].piece.form(0.0))
    if gap > 1e-9:
        raise MonodromyError(f"distance curve does not close up on the circle (gap {gap:.3g})")
    return PHTDistance(traj.integral(), traj, gap, (A, B), h)


def direction_distance(K1: EmbeddedGraph, K2: EmbeddedGraph, theta: float) -> float:
    """Static bottleneck distance between the two diagrams in one direction."""
    d1, d2 = lower_star_diagram(K1, theta), lower_star_diagram(K2, theta)
    return max(bottleneck_distance(d1.points, d2.points),
               abs(d1.essential_birth - d2.essential_birth))


def sampled_profile(K1: EmbeddedGraph, K2: EmbeddedGraph, samples: int) -> list[tuple[float, float]]:
    if samples < 4:
        raise ValueError("need at least 4 samples")
    step = TWO_PI / samples
    return [((k + 0.5) * step, direction_distance(K1, K2, (k + 0.5) * step))
            for k in range(samples)]


def sampled_oracle(K1: EmbeddedGraph, K2: EmbeddedGraph, samples: int = 10_000) -> float:
    """Midpoint Riemann sum of per-direction bottleneck distances."""
    step = TWO_PI / samples
    return step * sum(v for _t, v in sampled_profile(K1, K2, samples))


def load_graph(path) -> EmbeddedGraph:
    with open(path) as fh:
        return EmbeddedGraph.from_json(json.load(fh))
