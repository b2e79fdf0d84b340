"""Kinetic max/min priority structures: the kinetic heap and the kinetic
hanger.

Both keep elements in a binary tree whose parent/child pairs carry a
certificate "parent beats child". A certificate's failure time is the next
order change of the two flight plans; failures sit in an event queue keyed
by ``(time, parent id, child id)``. Reschedules do not delete from the
queue: every certificate carries a generation number and outdated entries
are dropped when they reach the head.

Priorities are compared lexicographically by ``(cost, element id)`` so that
equal costs never leave the order undefined.
"""

from __future__ import annotations

import csv
import functools
import heapq
import itertools
import random
from dataclasses import dataclass
from typing import Hashable, Iterable

import numpy as np

from .curves import FlightPlan, next_order_change, sign_after

MAX = "max"
MIN = "min"
HEAP = "heap"
HANGER = "hanger"


class KineticError(ValueError):
    pass


def _tie(a: Hashable, b: Hashable) -> int:
    return (a > b) - (a < b)


def key_sign(pa: FlightPlan, pb: FlightPlan, a: Hashable, b: Hashable, t: float,
             until: float | None = None) -> int:
    """Sign of ``(cost_a, a) - (cost_b, b)`` just after ``t``."""
    s = sign_after(pa, pb, t, until)
    return s if s != 0 else _tie(a, b)


def beats(order: str, pa: FlightPlan, pb: FlightPlan, a: Hashable, b: Hashable,
          t: float, until: float | None = None) -> bool:
    s = key_sign(pa, pb, a, b, t, until)
    return s > 0 if order == MAX else s < 0


def failure_time(order: str, pw: FlightPlan, pl: FlightPlan, w: Hashable, l: Hashable,
                 now: float, until: float | None) -> float | None:
    """When the certificate "``w`` beats ``l``" next fails after ``now``.

    A certificate that is already invalid just after ``now`` fails at ``now``.
    """
    if not beats(order, pw, pl, w, l, now, until):
        return now
    return next_order_change(pw, pl, now, _tie(w, l), until)


@dataclass(frozen=True, order=True)
class Event:
    time: float
    parent: Hashable
    child: Hashable
    gen: int
    node: int


def make_rng(seed: int | None, stream: int = 0) -> random.Random:
    """Child generator ``stream`` of a seeded, splittable family."""
    ss = np.random.SeedSequence(0 if seed is None else seed)
    child = ss.spawn(stream + 1)[stream]
    return random.Random(int(child.generate_state(1, dtype=np.uint64)[0]))


class KineticPQ:
    """Kinetic max- or min-priority queue.

    ``flavor="heap"`` keeps a complete binary tree by insertion order;
    ``flavor="hanger"`` places elements by random descent from the root
    (one fair coin per step) and needs ``seed``.
    """

    def __init__(self, order: str = MAX, flavor: str = HEAP, seed: int | None = None,
                 now: float = 0.0, until: float | None = None, rng: random.Random | None = None):
        if order not in (MAX, MIN):
            raise KineticError(f"unknown order {order!r}")
        if flavor not in (HEAP, HANGER):
            raise KineticError(f"unknown flavor {flavor!r}")
        if flavor == HANGER and seed is None and rng is None:
            raise KineticError("the hanger flavor needs a seed")
        self.order = order
        self.flavor = flavor
        self.now = now
        self.until = until
        self.plans: dict[Hashable, FlightPlan] = {}
        self._rng = rng if rng is not None else (make_rng(seed) if flavor == HANGER else None)
        # tree storage: node -> element; heap nodes are array slots
        self._elem: list = []
        self._node_of: dict[Hashable, int] = {}
        # hanger links (unused by the heap)
        self._par: list[int] = []
        self._kids: list[list[int]] = []
        self._free: list[int] = []
        self._root_node = -1
        # certificates, keyed by child node
        self._cert: dict[int, tuple[Hashable, Hashable, float | None, int]] = {}
        self._queue: list[tuple] = []
        self._gen = itertools.count()
        self.trace: list[tuple] = []
        self.counts = {"swap": 0, "insert": 0, "delete": 0, "stale": 0}

    # -- construction ------------------------------------------------------

    @classmethod
    def build(cls, elements: Iterable[tuple[Hashable, FlightPlan]], t0: float = 0.0,
              order: str = MAX, flavor: str = HEAP, seed: int | None = None,
              until: float | None = None, rng: random.Random | None = None) -> KineticPQ:
        pq = cls(order, flavor, seed, now=t0, until=until, rng=rng)
        elements = list(elements)
        for eid, plan in elements:
            if eid in pq.plans:
                raise KineticError(f"duplicate id {eid!r}")
            pq.plans[eid] = plan
        ids = sorted(pq.plans, key=_cmp_key(pq))  # highest priority first
        if flavor == HEAP:
            pq._elem = list(ids)
            pq._node_of = {e: i for i, e in enumerate(ids)}
        else:
            for e in ids:
                pq._hang(e)
        for node in pq._nodes():
            pq._schedule(node)
        return pq

    # -- tree navigation ---------------------------------------------------

    def _nodes(self) -> list[int]:
        return [self._node_of[e] for e in self.plans]

    def _parent(self, node: int) -> int:
        if self.flavor == HEAP:
            return (node - 1) // 2 if node > 0 else -1
        return self._par[node]

    def _children(self, node: int) -> list[int]:
        if self.flavor == HEAP:
            n = len(self._elem)
            return [c for c in (2 * node + 1, 2 * node + 2) if c < n]
        return [c for c in self._kids[node] if c != -1]

    def _place(self, node: int, e: Hashable) -> None:
        self._elem[node] = e
        self._node_of[e] = node

    def _new_node(self, parent: int, e: Hashable) -> int:
        if self._free:
            node = self._free.pop()
            self._elem[node] = e
            self._par[node] = parent
            self._kids[node] = [-1, -1]
        else:
            node = len(self._elem)
            self._elem.append(e)
            self._par.append(parent)
            self._kids.append([-1, -1])
        self._node_of[e] = node
        return node

    def _beats(self, a: Hashable, b: Hashable, t: float | None = None) -> bool:
        t = self.now if t is None else t
        return beats(self.order, self.plans[a], self.plans[b], a, b, t, self.until)

    def _coin(self) -> int:
        return self._rng.getrandbits(1)

    def _hang(self, e: Hashable) -> None:
        if self._root_node == -1:
            self._root_node = self._new_node(-1, e)
            return
        node = self._root_node
        while True:
            side = self._coin()
            child = self._kids[node][side]
            if child == -1:
                self._kids[node][side] = self._new_node(node, e)
                return
            node = child

    # -- certificates ------------------------------------------------------

    def _schedule(self, node: int) -> None:
        """(Re)compute the certificate linking ``node`` to its parent."""
        self._cert.pop(node, None)
        par = self._parent(node)
        if par == -1:
            return
        p, c = self._elem[par], self._elem[node]
        when = failure_time(self.order, self.plans[p], self.plans[c], p, c, self.now, self.until)
        gen = next(self._gen)
        self._cert[node] = (p, c, when, gen)
        if when is not None and (self.until is None or when <= self.until):
            heapq.heappush(self._queue, (when, p, c, gen, node))

    def _refresh(self, nodes: Iterable[int]) -> list[tuple[Hashable, Hashable]]:
        touched = set()
        for node in nodes:
            if node == -1 or node >= len(self._elem) or self._elem[node] is None:
                continue
            touched.add(node)
            touched.update(self._children(node))
        pairs = []
        for node in sorted(touched):
            self._schedule(node)
            par = self._parent(node)
            if par != -1:
                pairs.append((self._elem[par], self._elem[node]))
        return pairs

    def certificates(self) -> list[tuple[Hashable, Hashable, float | None]]:
        return [(p, c, t) for p, c, t, _g in self._cert.values()]

    # -- queries -----------------------------------------------------------

    def __len__(self) -> int:
        return len(self.plans)

    def __contains__(self, eid: Hashable) -> bool:
        return eid in self.plans

    def top(self) -> Hashable | None:
        if not self.plans:
            return None
        return self._elem[0] if self.flavor == HEAP else self._elem[self._root_node]

    def parent_of(self, eid: Hashable) -> Hashable | None:
        par = self._parent(self._node_of[eid])
        return None if par == -1 else self._elem[par]

    def children_of(self, eid: Hashable) -> list[Hashable]:
        return [self._elem[c] for c in self._children(self._node_of[eid])]

    def depths(self) -> dict[Hashable, int]:
        out = {}
        for e, node in self._node_of.items():
            d = 0
            while (node := self._parent(node)) != -1:
                d += 1
            out[e] = d
        return out

    def is_valid_at(self, t: float) -> bool:
        """Heap property just after ``t`` for every parent/child pair."""
        for e, node in self._node_of.items():
            par = self._parent(node)
            if par != -1 and not self._beats(self._elem[par], e, t):
                return False
        return True

    # -- events ------------------------------------------------------------

    def _is_current(self, entry: tuple) -> bool:
        when, p, c, gen, node = entry
        cert = self._cert.get(node)
        return cert is not None and cert[3] == gen

    def next_event(self) -> Event | None:
        """Earliest pending certificate failure (stale entries are dropped)."""
        while self._queue:
            entry = self._queue[0]
            if self._is_current(entry):
                return Event(*entry)
            heapq.heappop(self._queue)
        return None

    def handle_swap(self, event: Event) -> list[tuple[Hashable, Hashable]]:
        """Process a certificate failure: swap parent and child, then
        recompute the (at most five) certificates around them.

        Returns the new parent/child pairs, or ``[]`` for a stale event.
        """
        entry = (event.time, event.parent, event.child, event.gen, event.node)
        if not self._is_current(entry):
            self.counts["stale"] += 1
            return []
        if self._queue and self._queue[0] == entry:
            heapq.heappop(self._queue)
        self.now = max(self.now, event.time)
        node = event.node
        par = self._parent(node)
        p, c = self._elem[par], self._elem[node]
        if not self._beats(c, p):
            # order did not actually flip (numerical near-touch); reschedule
            self.counts["stale"] += 1
            self._schedule(node)
            return []
        self._place(par, c)
        self._place(node, p)
        pairs = self._refresh([par, node])
        self.counts["swap"] += 1
        self.trace.append((self.now, "swap", (c, p), self.top()))
        return pairs

    def advance(self, t: float) -> int:
        """Process every event up to and including ``t``; returns the count."""
        done = 0
        while (ev := self.next_event()) is not None and ev.time <= t:
            if self.handle_swap(ev):
                done += 1
        self.now = max(self.now, t)
        return done

    # -- insert / delete ---------------------------------------------------

    def insert(self, eid: Hashable, plan: FlightPlan, t: float | None = None) -> None:
        if eid in self.plans:
            raise KineticError(f"duplicate id {eid!r}")
        if t is not None:
            self.now = max(self.now, t)
        self.plans[eid] = plan
        if self.flavor == HEAP:
            node = len(self._elem)
            self._elem.append(eid)
            self._node_of[eid] = node
            touched = [node]
            while node > 0:
                par = (node - 1) // 2
                if not self._beats(eid, self._elem[par]):
                    break
                self._place(node, self._elem[par])
                self._place(par, eid)
                touched.append(par)
                node = par
        else:
            touched = self._hanger_insert(eid)
        self._refresh(touched)
        self.counts["insert"] += 1
        self.trace.append((self.now, "insert", (eid,), self.top()))

    def _hanger_insert(self, eid: Hashable) -> list[int]:
        if self._root_node == -1:
            self._root_node = self._new_node(-1, eid)
            return [self._root_node]
        carry = eid
        node = self._root_node
        touched = []
        while True:
            cur = self._elem[node]
            if self._beats(carry, cur):
                self._place(node, carry)
                carry = cur
                touched.append(node)
            side = self._coin()
            child = self._kids[node][side]
            if child == -1:
                new = self._new_node(node, carry)
                self._kids[node][side] = new
                touched.append(new)
                return touched
            node = child

    def delete(self, eid: Hashable, t: float | None = None) -> None:
        if eid not in self.plans:
            raise KineticError(f"unknown id {eid!r}")
        if t is not None:
            self.now = max(self.now, t)
        node = self._node_of.pop(eid)
        if self.flavor == HEAP:
            touched = self._heap_delete(node)
        else:
            touched = self._hanger_delete(node)
        del self.plans[eid]
        self._refresh(touched)
        self.counts["delete"] += 1
        self.trace.append((self.now, "delete", (eid,), self.top()))

    def _heap_delete(self, node: int) -> list[int]:
        last = len(self._elem) - 1
        moved = self._elem.pop()
        # drop the certificate of the vanished last slot
        self._cert.pop(last, None)
        if node == last:
            return [self._parent(node)] if node > 0 else []
        self._place(node, moved)
        touched = [node]
        # sift up
        while node > 0:
            par = (node - 1) // 2
            if not self._beats(moved, self._elem[par]):
                break
            self._place(node, self._elem[par])
            self._place(par, moved)
            node = par
            touched.append(node)
        # sift down
        while True:
            kids = self._children(node)
            if not kids:
                break
            best = kids[0]
            if len(kids) == 2 and self._beats(self._elem[kids[1]], self._elem[kids[0]]):
                best = kids[1]
            if not self._beats(self._elem[best], moved):
                break
            self._place(node, self._elem[best])
            self._place(best, moved)
            node = best
            touched.append(node)
        return touched + [self._parent(touched[0])]

    def _hanger_delete(self, node: int) -> list[int]:
        touched = [node, self._par[node]]
        while True:
            kids = self._children(node)
            if not kids:
                break
            best = kids[0]
            if len(kids) == 2 and self._beats(self._elem[kids[1]], self._elem[kids[0]]):
                best = kids[1]
            self._place(node, self._elem[best])
            node = best
            touched.append(node)
        # node is now an empty leaf: unlink it
        par = self._par[node]
        if par == -1:
            self._root_node = -1
        else:
            k = self._kids[par]
            k[k.index(node)] = -1
        self._cert.pop(node, None)
        self._elem[node] = None
        self._free.append(node)
        return [n for n in touched if n != node]

    # -- output ------------------------------------------------------------

    def write_trace(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["time", "kind", "ids", "root_after"])
            for t, kind, ids, root in self.trace:
                w.writerow([repr(float(t)), kind, " ".join(map(str, ids)), root])


def _cmp_key(pq: KineticPQ):
    def cmp(a, b):
        if a == b:
            return 0
        return -1 if pq._beats(a, b) else 1

    return functools.cmp_to_key(cmp)


__all__ = [
    "Event", "HANGER", "HEAP", "KineticError", "KineticPQ", "MAX", "MIN",
    "beats", "failure_time", "key_sign", "make_rng",
]
