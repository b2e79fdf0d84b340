"""The kinetic hourglass.

Maintains, for a bipartite graph whose edge costs follow flight plans, the
bottleneck edge ``root`` of a min-cost perfect matching, the matching
itself, and the piecewise trajectory of the bottleneck cost.

Edges cheaper than the root (the non-matching set L and the matching set M)
live in a kinetic max-structure, the lower one; edges dearer than the root
(U) live in a kinetic min-structure, the upper one. The root itself is held
once by the hourglass and plays the role of the shared root of both
structures: two extra certificates compare it against the top of each side.

An event that swaps two non-root elements is internal and leaves root and
matching alone. A root certificate failure is external and is classified by
the crossing edge ``e``:

* ``L``  - ``e`` in L rises above the root: ``e`` moves to the upper side.
* ``M1`` - ``e`` in M rises above the root and the matching can be repaired
  by an augmenting path avoiding ``e``: ``e`` moves to the upper side.
* ``M2`` - no such path: ``e`` becomes the root, the old root drops into
  the lower side.
* ``U1`` - ``e`` in U falls below the root and an augmenting path replaces
  the root: ``e`` becomes the root, the old root moves up.
* ``U2`` - no such path: ``e`` joins the lower side as an L edge.
"""

from __future__ import annotations

import csv
import functools
import json
import logging
import math
from dataclasses import dataclass, field
from typing import Hashable

from . import curves
from .curves import CostPiece, FlightPlan
from .kinetic_pq import HEAP, MAX, MIN, KineticPQ, beats, failure_time, make_rng
from .matching import (
    BipartiteGraph,
    Matching,
    aug,
    find_augmenting_path,
    static_bottleneck,
)

log = logging.getLogger(__name__)

L, M, U, ROOT = "L", "M", "U", "root"


class HourglassError(RuntimeError):
    """An internal invariant of the hourglass was violated."""


@dataclass
class EventRecord:
    time: float
    kind: str  # internal, L, M1, M2, U1, U2
    edge: Hashable
    root_after: int
    bottleneck_after: float


@dataclass
class Segment:
    t0: float
    t1: float
    root: int
    piece: CostPiece


@dataclass
class BottleneckTrajectory:
    """Piecewise record of the bottleneck cost: ``(interval, root, piece)``."""

    segments: list[Segment] = field(default_factory=list)

    def value(self, t: float) -> float:
        for s in self.segments:
            if s.t0 <= t < s.t1:
                return s.piece(t)
        if self.segments and t == self.segments[-1].t1:
            return self.segments[-1].piece(t)
        raise ValueError(f"t={t} outside the trajectory")

    def root_at(self, t: float) -> int:
        for s in self.segments:
            if s.t0 <= t < s.t1:
                return s.root
        raise ValueError(f"t={t} outside the trajectory")

    def integral(self) -> float:
        return curves.integrate(s.piece for s in self.segments)

    def root_runs(self, min_len: float = 1e-12) -> list[tuple[float, float, int]]:
        """Maximal ``(t0, t1, root)`` runs, ignoring runs shorter than ``min_len``."""
        runs: list[list] = []
        for s in self.segments:
            if runs and runs[-1][2] == s.root and abs(runs[-1][1] - s.t0) <= min_len:
                runs[-1][1] = s.t1
            else:
                runs.append([s.t0, s.t1, s.root])
        runs = [r for r in runs if r[1] - r[0] > min_len]
        merged: list[list] = []
        for r in runs:
            if merged and merged[-1][2] == r[2]:
                merged[-1][1] = r[1]
            else:
                merged.append(r)
        return [tuple(r) for r in merged]

    def write_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["t_start", "t_end", "root_edge", "value_at_midpoint"])
            for s in self.segments:
                mid = 0.5 * (s.t0 + s.t1)
                w.writerow([repr(s.t0), repr(s.t1), s.root, repr(s.piece(mid))])

    def to_json(self) -> list[dict]:
        return [
            {"t0": s.t0, "t1": s.t1, "root": s.root, "form": curves.piece_to_json(s.piece.form)}
            for s in self.segments
        ]


class Hourglass:
    """Kinetic hourglass over ``graph`` (edge weights are :class:`FlightPlan`)."""

    def __init__(self, graph: BipartiteGraph, t0: float | None = None,
                 until: float | None = None, flavor: str = HEAP, seed: int | None = None,
                 check: bool = False) -> None:
        if graph.m == 0:
            raise ValueError("the hourglass needs at least one edge")
        plans = [w for _l, _r, w in graph.edges]
        dom = plans[0].domain
        self.graph = graph
        self.plans: list[FlightPlan] = plans
        self.t0 = dom.start if t0 is None else t0
        self.until = dom.end if until is None else until
        self.now = self.t0
        self.flavor = flavor
        self.seed = seed
        self.check = check
        self.event_log: list[EventRecord] = []
        self.counts = {"internal": 0, "L": 0, "M1": 0, "M2": 0, "U1": 0, "U2": 0, "stale": 0}
        self.aug_searches = 0
        self._seg_start: list[tuple[float, int]] = []
        self._init()

    # -- setup -------------------------------------------------------------

    def _key_cmp(self, a: int, b: int) -> int:
        if a == b:
            return 0
        return 1 if beats(MAX, self.plans[a], self.plans[b], a, b, self.now, self.until) else -1

    def _init(self) -> None:
        g = self.graph
        order = sorted(range(g.m), key=functools.cmp_to_key(self._key_cmp))
        rank = {e: k for k, e in enumerate(order)}
        ranked = BipartiteGraph(g.n_left, g.n_right, [(l, r, rank[i]) for i, (l, r, _) in enumerate(g.edges)])
        _, matching, root = static_bottleneck(ranked)
        self.matching: Matching = matching
        self.root = root
        self.labels: dict[int, str] = {}
        in_m = {g.edge_id(l, r) for l, r in matching.items()}
        lower, upper = [], []
        for e in range(g.m):
            if e == root:
                self.labels[e] = ROOT
            elif rank[e] < rank[root]:
                self.labels[e] = M if e in in_m else L
                lower.append((e, self.plans[e]))
            else:
                self.labels[e] = U
                upper.append((e, self.plans[e]))
        rng_lo = make_rng(self.seed, 0) if self.flavor != HEAP else None
        rng_up = make_rng(self.seed, 1) if self.flavor != HEAP else None
        self.lower = KineticPQ.build(lower, self.now, MAX, self.flavor, until=self.until, rng=rng_lo)
        self.upper = KineticPQ.build(upper, self.now, MIN, self.flavor, until=self.until, rng=rng_up)
        self._root_cert: dict[str, tuple[float, int] | None] = {"lower": None, "upper": None}
        self._refresh_root_certs()
        self._seg_start.append((self.now, self.root))
        if self.check:
            self.check_invariants()

    # -- certificates ------------------------------------------------------

    def _refresh_root_cert(self, side: str) -> None:
        pq = self.lower if side == "lower" else self.upper
        top = pq.top()
        if top is None:
            self._root_cert[side] = None
            return
        order = MAX if side == "lower" else MIN
        r = self.root
        when = failure_time(order, self.plans[r], self.plans[top], r, top, self.now, self.until)
        self._root_cert[side] = None if when is None else (when, top)

    def _refresh_root_certs(self) -> None:
        self._refresh_root_cert("lower")
        self._refresh_root_cert("upper")

    def _next(self):
        cands = []
        for rank_, side, pq in ((0, "lower", self.lower), (0, "upper", self.upper)):
            ev = pq.next_event()
            if ev is not None:
                cands.append((ev.time, rank_, 0, side, ev))
        for side in ("lower", "upper"):
            rc = self._root_cert[side]
            if rc is not None:
                cands.append((rc[0], 1, rc[1], side, None))
        if not cands:
            return None
        return min(cands, key=lambda c: c[:3] + (c[3],))

    # -- public API --------------------------------------------------------

    @property
    def bottleneck(self) -> float:
        return self.plans[self.root](self.now)

    def step(self) -> EventRecord | None:
        """Process the next event; ``None`` once nothing is left before ``until``."""
        while True:
            nxt = self._next()
            if nxt is None or nxt[0] > self.until:
                return None
            when, kind, top, side, ev = nxt
            self.now = max(self.now, when)
            if kind == 0:
                rec = self._internal(side, ev)
            else:
                rec = self._external(side, top)
            if rec is None:
                self.counts["stale"] += 1
                continue
            self.counts[rec.kind] += 1
            self.event_log.append(rec)
            log.debug("%s event at %.12g: edge %s, root %s", rec.kind, rec.time, rec.edge, rec.root_after)
            if self.check:
                nxt = self._next()
                # simultaneous events leave the state mid-update until all are done
                if nxt is None or nxt[0] > self.now + 1e-12 * max(1.0, abs(self.now)):
                    self.check_invariants()
            return rec

    def run(self, until: float | None = None) -> BottleneckTrajectory:
        """Process every event up to ``until`` and return the trajectory."""
        stop = self.until if until is None else min(until, self.until)
        guard = 0
        while True:
            nxt = self._next()
            if nxt is None or nxt[0] > stop:
                break
            self.step()
            guard += 1
            if guard > 10_000_000:
                raise HourglassError("event loop does not terminate")
        traj = self.trajectory(stop)
        if self.plans[0].is_circle and math.isclose(stop - self.t0, curves.TWO_PI):
            gap = abs(traj.value(stop) - traj.segments[0].piece(self.t0))
            if gap > 1e-9:
                raise HourglassError(f"trajectory does not close up on the circle (gap {gap:.3g})")
        return traj

    def trajectory(self, until: float | None = None) -> BottleneckTrajectory:
        stop = self.now if until is None else until
        starts = self._seg_start + [(stop, None)]
        segs: list[Segment] = []
        for (a, root), (b, _) in zip(starts, starts[1:]):
            if b <= a:
                continue
            for s, e, form, off in self.plans[root].windows(a, b):
                if off:
                    form = _shift(form, off)
                segs.append(Segment(s, e, root, CostPiece(s, e, form)))
        return BottleneckTrajectory(segs)

    # -- event handlers ----------------------------------------------------

    def _internal(self, side: str, ev) -> EventRecord | None:
        pq = self.lower if side == "lower" else self.upper
        before = pq.top()
        if not pq.handle_swap(ev):
            return None
        if pq.top() != before:
            self._refresh_root_cert(side)
        return EventRecord(self.now, "internal", ev.child, self.root, self.bottleneck)

    def _external(self, side: str, e: int) -> EventRecord | None:
        pq = self.lower if side == "lower" else self.upper
        r = self.root
        order = MAX if side == "lower" else MIN
        if pq.top() != e or beats(order, self.plans[r], self.plans[e], r, e, self.now, self.until):
            # queued against an old top or the order did not flip
            self._refresh_root_cert(side)
            return None
        if side == "lower":
            kind = self.handle_M(e) if self.labels[e] == M else self.handle_L(e)
        else:
            kind = self.handle_U(e)
        self._refresh_root_certs()
        return EventRecord(self.now, kind, e, self.root, self.bottleneck)

    def handle_L(self, e: int) -> str:
        """``e`` (non-matching, lower side) rises above the root."""
        if self.labels[e] != L:
            raise HourglassError(f"edge {e} is not an L edge")
        self.lower.delete(e, self.now)
        self.upper.insert(e, self.plans[e], self.now)
        self.labels[e] = U
        return "L"

    def _search(self, skip: int, extra: int | None, u: int, v: int, base: Matching):
        self.aug_searches += 1
        ids = [i for i in self.lower.plans if i != skip]
        if self.root != skip:
            ids.append(self.root)
        if extra is not None:
            ids.append(extra)
        adj = self.graph.adjacency(ids)
        return find_augmenting_path(adj, base, u, v)

    def _apply(self, path) -> None:
        g = self.graph
        old = {g.edge_id(l, r) for l, r in self.matching.items()}
        self.matching = aug(self._unmatched, path)
        new = {g.edge_id(l, r) for l, r in self.matching.items()}
        for i in old - new:
            if self.labels[i] == M:
                self.labels[i] = L
        for i in new - old:
            if self.labels[i] == L:
                self.labels[i] = M

    def handle_M(self, e: int) -> str:
        """``e`` (matching edge, lower side) rises above the root."""
        if self.labels[e] != M:
            raise HourglassError(f"edge {e} is not an M edge")
        u, v, _ = self.graph.edges[e]
        self._unmatched = {l: r for l, r in self.matching.items() if l != u}
        path = self._search(e, None, u, v, self._unmatched)
        if path is not None:
            self._apply(path)
            self.labels[e] = U
            self.lower.delete(e, self.now)
            self.upper.insert(e, self.plans[e], self.now)
            if self.labels[self.root] != ROOT or self.matching.get(self.graph.edges[self.root][0]) != self.graph.edges[self.root][1]:
                raise HourglassError("root left the matching in an M event")
            return "M1"
        r = self.root
        self.lower.delete(e, self.now)
        self.lower.insert(r, self.plans[r], self.now)
        self.labels[r] = M
        self.labels[e] = ROOT
        self._set_root(e)
        return "M2"

    def handle_U(self, e: int) -> str:
        """``e`` (upper side) falls below the root."""
        if self.labels[e] != U:
            raise HourglassError(f"edge {e} is not a U edge")
        r = self.root
        u, v, _ = self.graph.edges[r]
        self._unmatched = {l: rr for l, rr in self.matching.items() if l != u}
        path = self._search(r, e, u, v, self._unmatched)
        if path is not None:
            self.labels[e] = L  # provisional, promoted by _apply
            self._apply(path)
            if self.labels[e] != M:
                raise HourglassError("augmenting path in a U event avoided the crossing edge")
            self.upper.delete(e, self.now)
            self.upper.insert(r, self.plans[r], self.now)
            self.labels[r] = U
            self.labels[e] = ROOT
            self._set_root(e)
            return "U1"
        self.upper.delete(e, self.now)
        self.lower.insert(e, self.plans[e], self.now)
        self.labels[e] = L
        return "U2"

    def _set_root(self, e: int) -> None:
        self.root = e
        if self._seg_start and self._seg_start[-1][0] == self.now:
            self._seg_start[-1] = (self.now, e)
        else:
            self._seg_start.append((self.now, e))

    # -- diagnostics -------------------------------------------------------

    def check_invariants(self, t: float | None = None) -> None:
        """Raise :class:`HourglassError` unless every structural invariant
        holds just after ``t`` (default: now)."""
        t = self.now if t is None else t
        g = self.graph
        if len(self.matching) != g.n_left or len(set(self.matching.values())) != g.n_left:
            raise HourglassError("matching is not perfect")
        in_m = {g.edge_id(l, r) for l, r in self.matching.items()}
        if self.root not in in_m:
            raise HourglassError("root is not a matching edge")
        for e, lab in self.labels.items():
            if lab == ROOT:
                ok = e == self.root
            elif lab == U:
                ok = e in self.upper and e not in in_m
            else:
                ok = e in self.lower and ((lab == M) == (e in in_m))
            if not ok:
                raise HourglassError(f"label {lab} of edge {e} is inconsistent")
        if len(self.lower) + len(self.upper) + 1 != g.m:
            raise HourglassError("partition does not cover the edge set")
        r = self.root
        for e in self.lower.plans:
            if not beats(MAX, self.plans[r], self.plans[e], r, e, t, self.until):
                raise HourglassError(f"lower edge {e} beats the root")
        for e in self.upper.plans:
            if not beats(MIN, self.plans[r], self.plans[e], r, e, t, self.until):
                raise HourglassError(f"upper edge {e} undercuts the root")
        if not (self.lower.is_valid_at(t) and self.upper.is_valid_at(t)):
            raise HourglassError("a heap certificate is violated")

    def write_trace(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["time", "event_kind", "edge", "root_after", "bottleneck_after"])
            for rec in self.event_log:
                w.writerow([repr(float(rec.time)), rec.kind, rec.edge, rec.root_after,
                            repr(float(rec.bottleneck_after))])


def _shift(form: curves.Form, off: float) -> curves.Form:
    # sinusoid forms are 2*pi periodic; linear forms never wrap
    if isinstance(form, curves.Linear):
        return curves.Linear(form.a - form.b * off, form.b)
    return form


def run_hourglass(graph: BipartiteGraph, until: float | None = None, flavor: str = HEAP,
                  seed: int | None = None, check: bool = False) -> tuple[Hourglass, BottleneckTrajectory]:
    h = Hourglass(graph, until=until, flavor=flavor, seed=seed, check=check)
    return h, h.run(until)


def trajectory_json(traj: BottleneckTrajectory) -> str:
    return json.dumps(traj.to_json(), indent=1)
