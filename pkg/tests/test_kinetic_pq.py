from __future__ import annotations

import math
import random
from collections import Counter

import pytest

from kinetic_hourglass.curves import CostPiece, FlightPlan, Interval, Linear
from kinetic_hourglass.kinetic_pq import HANGER, HEAP, MAX, MIN, KineticError, KineticPQ
from oracles import random_linear_plan

T = 10.0


def const(v):
    return FlightPlan.constant(v, Interval(T))


def lin(a, b, end=T):
    return FlightPlan([CostPiece(0.0, end, Linear(a, b))], Interval(end))


def crossing_pair(flavor=HEAP):
    # 1 + t and 3 - t on [0, 3]
    return KineticPQ.build([(0, lin(1, 1, 3.0)), (1, lin(3, -1, 3.0))], 0.0, MAX, flavor,
                           seed=7, until=3.0)


def resort_top(plans, t, order=MAX):
    """Independent oracle: linear scan under the (value, id) order."""
    sign = 1 if order == MAX else -1
    return max(plans, key=lambda e: (sign * plans[e](t), sign * e))


def make(elements, flavor=HEAP, order=MAX, seed=7):
    return KineticPQ.build(elements, 0.0, order, flavor, seed=seed, until=T)


def run_all(pq):
    while (ev := pq.next_event()) is not None:
        pq.handle_swap(ev)


FLAVORS = [HEAP, HANGER]


@pytest.mark.parametrize("flavor", FLAVORS)
def test_build_constant_max(flavor):
    pq = make([(0, const(5)), (1, const(3)), (2, const(8))], flavor)
    assert pq.top() == 2


def test_build_empty():
    pq = make([])
    assert pq.top() is None and pq.next_event() is None and len(pq) == 0


def test_build_duplicate_id():
    with pytest.raises(KineticError):
        make([(0, const(1)), (0, const(2))])


def test_hanger_needs_seed():
    with pytest.raises(KineticError):
        KineticPQ(MAX, HANGER)


@pytest.mark.parametrize("flavor", FLAVORS)
def test_two_lines_event_and_swap(flavor):
    pq = crossing_pair(flavor)
    assert pq.top() == 1
    ev = pq.next_event()
    assert ev.time == pytest.approx(1.0, abs=1e-12)
    assert pq.handle_swap(ev)
    assert pq.top() == 0


def test_constant_priorities_have_no_events():
    pq = make([(i, const(v)) for i, v in enumerate([4, 1, 9, 2])])
    assert pq.next_event() is None


def test_stale_event_is_dropped():
    pq = crossing_pair()
    ev = pq.next_event()
    pq.handle_swap(ev)
    assert pq.handle_swap(ev) == []


@pytest.mark.parametrize("flavor", FLAVORS)
def test_delete_root(flavor):
    pq = make([(0, const(5)), (1, const(3)), (2, const(8))], flavor)
    pq.delete(2, 0.0)
    assert pq.top() == 0
    with pytest.raises(KineticError):
        pq.delete(2, 0.0)


@pytest.mark.parametrize("flavor", FLAVORS)
def test_insert_new_max(flavor):
    pq = make([(0, const(5)), (1, const(3))], flavor)
    pq.insert(9, const(10), 0.0)
    assert pq.top() == 9
    with pytest.raises(KineticError):
        pq.insert(9, const(1), 0.0)


def test_min_order():
    pq = make([(0, const(5)), (1, const(3)), (2, const(8))], order=MIN)
    assert pq.top() == 1


def _oracle_top_changes(plans, order=MAX, samples=10_000):
    """Times where the oracle's top changes, by sampling and bisection."""
    out = []
    prev_t, prev = 0.0, resort_top(plans, 1e-9, order)
    for k in range(1, samples + 1):
        t = T * k / samples
        cur = resort_top(plans, t, order)
        if cur != prev:
            a, b = prev_t, t
            for _ in range(80):
                m = 0.5 * (a + b)
                if resort_top(plans, m, order) == prev:
                    a = m
                else:
                    b = m
            out.append(0.5 * (a + b))
            prev = cur
        prev_t = t
    return out


@pytest.mark.parametrize("flavor", FLAVORS)
@pytest.mark.parametrize("seed", range(8))
def test_root_changes_match_resort_oracle(flavor, seed):
    rng = random.Random(seed)
    plans = {i: random_linear_plan(rng, T) for i in range(20)}
    pq = make(plans.items(), flavor, seed=seed)
    run_all(pq)
    roots = [(t, root) for t, kind, _ids, root in pq.trace]
    changes, prev = [], resort_top(plans, 1e-9)
    for t, root in roots:
        if root != prev:
            changes.append(t)
            prev = root
    want = _oracle_top_changes(plans)
    assert len(changes) == len(want)
    for x, y in zip(changes, want):
        assert x == pytest.approx(y, abs=1e-8)
    # final structure equals the oracle at T
    assert pq.top() == resort_top(plans, T - 1e-9)
    assert pq.is_valid_at(T - 1e-9)


@pytest.mark.parametrize("flavor", FLAVORS)
@pytest.mark.parametrize("seed", range(5))
def test_no_certificate_fails_between_events(flavor, seed):
    rng = random.Random(50 + seed)
    plans = {i: random_linear_plan(rng, T) for i in range(15)}
    pq = make(plans.items(), flavor, seed=seed)
    while True:
        ev = pq.next_event()
        end = T if ev is None else ev.time
        for k in range(1, 20):
            t = pq.now + (end - pq.now) * k / 20
            if end - t > 1e-7:
                assert pq.is_valid_at(t)
                assert pq.top() == resort_top(plans, t)
        if ev is None:
            break
        pq.handle_swap(ev)


@pytest.mark.parametrize("seed", range(5))
def test_heap_locality_at_most_three_certificates(seed):
    rng = random.Random(seed)
    plans = {i: random_linear_plan(rng, T) for i in range(25)}
    pq = make(plans.items(), HEAP)
    while True:
        use = Counter()
        for p, c, _t in pq.certificates():
            use[p] += 1
            use[c] += 1
        assert max(use.values(), default=0) <= 3
        ev = pq.next_event()
        if ev is None:
            break
        pairs = pq.handle_swap(ev)
        assert len(pairs) <= 5


@pytest.mark.parametrize("flavor", FLAVORS)
@pytest.mark.parametrize("seed", range(6))
def test_insert_delete_script_matches_oracle(flavor, seed):
    rng = random.Random(seed)
    plans = {i: random_linear_plan(rng, T) for i in range(8)}
    pq = make(plans.items(), flavor, seed=seed)
    next_id = 8
    t = 0.0
    for _ in range(40):
        t += rng.uniform(0.0, 0.25)
        while (ev := pq.next_event()) is not None and ev.time <= t:
            pq.handle_swap(ev)
        if plans and rng.random() < 0.45:
            victim = rng.choice(sorted(plans))
            pq.delete(victim, t)
            del plans[victim]
        else:
            plans[next_id] = random_linear_plan(rng, T)
            pq.insert(next_id, plans[next_id], t)
            next_id += 1
        probe = t + 1e-7
        assert pq.is_valid_at(probe)
        if plans:
            assert pq.top() == resort_top(plans, probe)


@pytest.mark.parametrize("flavor", FLAVORS)
def test_determinism(flavor):
    def trace():
        rng = random.Random(3)
        plans = {i: random_linear_plan(rng, T) for i in range(20)}
        pq = make(plans.items(), flavor, seed=11)
        run_all(pq)
        return pq.trace

    assert trace() == trace()


def _mean_depth(n, seeds):
    total = 0.0
    for s in range(seeds):
        rng = random.Random(10_000 + s)
        vals = [(i, const(rng.uniform(0, 100))) for i in range(n)]
        pq = make(vals, HANGER, seed=s)
        d = pq.depths()
        total += sum(d.values()) / n
    return total / seeds


def test_hanger_mean_depth_64():
    assert _mean_depth(64, 200) <= 2 * math.log2(64)


def test_hanger_mean_depth_256():
    assert _mean_depth(256, 100) <= 3 * math.log2(256)


def test_trace_csv(tmp_path):
    pq = crossing_pair()
    run_all(pq)
    out = tmp_path / "t.csv"
    pq.write_trace(out)
    lines = out.read_text().splitlines()
    assert lines[0] == "time,kind,ids,root_after"
    assert lines[1].split(",")[1:] == ["swap", "0 1", "0"]
