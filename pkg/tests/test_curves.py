from __future__ import annotations

import json
import math
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from kinetic_hourglass.curves import (
    CIRCLE,
    TWO_PI,
    ZERO,
    CostPiece,
    DomainError,
    FlightPlan,
    Interval,
    Linear,
    MaxAbs,
    PlanError,
    Sinusoid,
    integrate,
    max_abs,
    next_crossing,
    plan_from_json,
    plan_to_json,
    sign_after,
    split_max_abs,
)
from oracles import adaptive_simpson, sampled_crossings


def lin(a, b, T=10.0):
    return FlightPlan([CostPiece(0.0, T, Linear(a, b))], Interval(T))


def circ(*terms):
    return FlightPlan([CostPiece(0.0, TWO_PI, max_abs(*terms))], CIRCLE)


def S(a, b):
    return Sinusoid.from_coeffs(a, b)


# -- eval ---------------------------------------------------------------------


def test_eval_linear():
    assert lin(1, 2)(3) == 7


def test_eval_single_sinusoid():
    assert circ(Sinusoid(1.0, 0.0))(math.pi) == pytest.approx(1.0, abs=1e-15)


def test_eval_two_sinusoids_at_quarter_pi():
    p = circ(Sinusoid(1.0, 0.0), Sinusoid(1.0, math.pi / 2))
    assert p(math.pi / 4) == pytest.approx(math.sqrt(2) / 2, abs=1e-15)


def test_eval_outside_interval_raises():
    with pytest.raises(DomainError):
        lin(1, 0)(11.0)


def test_circle_reduces_mod_two_pi():
    p = circ(S(1.0, 0.3))
    assert p(1.0 + 3 * TWO_PI) == pytest.approx(p(1.0), abs=1e-12)


def test_canonical_sinusoid_form():
    s = Sinusoid.from_coeffs(3.0, 4.0)
    assert s.amplitude == pytest.approx(5.0)
    assert s.phase == pytest.approx(math.atan2(4.0, 3.0))
    assert s(0.7) == pytest.approx(3 * math.cos(0.7) + 4 * math.sin(0.7), abs=1e-14)


# -- construction -------------------------------------------------------------


def test_rejects_discontinuous_plan():
    with pytest.raises(PlanError):
        FlightPlan([CostPiece(0, 1, Linear(0, 1)), CostPiece(1, 2, Linear(2, 0))], Interval(2))


def test_rejects_gap():
    with pytest.raises(PlanError):
        FlightPlan([CostPiece(0, 1, Linear(1, 0)), CostPiece(1.5, 2, Linear(1, 0))], Interval(2))


def test_rejects_negative_linear():
    with pytest.raises(PlanError):
        lin(1, -1, T=2.0)


def test_rejects_circle_without_closure():
    with pytest.raises(PlanError):
        FlightPlan([CostPiece(0, math.pi, MaxAbs((S(1, 0),))),
                    CostPiece(math.pi, TWO_PI, Linear(-1.0, 2.0 / math.pi))], CIRCLE)


def test_maxabs_length_bounds():
    with pytest.raises(PlanError):
        MaxAbs(())
    with pytest.raises(PlanError):
        MaxAbs((S(1, 0), S(0, 1), S(1, 1)))


def test_max_abs_drops_duplicates_and_zero_terms():
    assert max_abs(S(0, 0)) is ZERO
    assert max_abs(S(1, 2), S(-1, -2)).terms == (S(1, 2),)


# -- crossings ----------------------------------------------------------------


def test_linear_crossing():
    assert next_crossing(lin(1, 1, T=3), lin(3, -1, T=3), 0.0) == pytest.approx(1.0, abs=1e-12)


def test_cos_sin_crossing():
    t = next_crossing(circ(S(1, 0)), circ(S(0, 1)), 0.0)
    assert t == pytest.approx(math.pi / 4, abs=1e-12)


def test_tangential_contact_is_not_a_crossing():
    # |t - 5| touches zero at t=5 without crossing it
    a = FlightPlan([CostPiece(0, 5, Linear(5, -1)), CostPiece(5, 10, Linear(-5, 1))], Interval(10))
    b = lin(0, 0)
    assert next_crossing(a, b, 0.0) is None


def test_no_crossing_for_parallel_lines():
    assert next_crossing(lin(1, 1), lin(2, 1), 0.0) is None


def test_zero_stretch_is_transparent():
    # a == b on [2, 4]; a below before, above after: one crossing, reported
    # where the order actually flips
    a = FlightPlan([CostPiece(0, 2, Linear(0, 1)), CostPiece(2, 4, Linear(2, 0)),
                    CostPiece(4, 10, Linear(-2, 1))], Interval(10))
    b = lin(2, 0)
    assert next_crossing(a, b, 0.0) == pytest.approx(4.0)
    assert sign_after(a, b, 3.0) == 0
    assert sign_after(a, b, 4.0) == 1


def _rand_sin(rng):
    return S(rng.uniform(-2, 2), rng.uniform(-2, 2))


@pytest.mark.parametrize("seed", range(20))
def test_sinusoid_crossings_match_sampling_oracle(seed):
    rng = random.Random(seed)
    ka, kb = rng.randint(1, 2), rng.randint(1, 2)
    a = circ(*[_rand_sin(rng) for _ in range(ka)])
    b = circ(*[_rand_sin(rng) for _ in range(kb)])
    expected = sampled_crossings(lambda t: a(t) - b(t), 0.0, TWO_PI)
    got = []
    t = 0.0
    while True:
        nxt = next_crossing(a, b, t, until=TWO_PI)
        if nxt is None:
            break
        got.append(nxt)
        t = nxt
    assert len(got) == len(expected)
    for x, y in zip(got, expected):
        assert x == pytest.approx(y, abs=1e-9)


@pytest.mark.parametrize("seed", range(10))
def test_crossing_roots_solve_a_sinusoid_equality(seed):
    rng = random.Random(100 + seed)
    t = None
    while t is None:
        ta = [_rand_sin(rng) for _ in range(2)]
        tb = [_rand_sin(rng) for _ in range(2)]
        a, b = circ(*ta), circ(*tb)
        t = next_crossing(a, b, 0.0)
    res = min(abs(s(t) - sg * u(t)) for s in ta for u in tb for sg in (1, -1))
    assert res < 1e-9


def test_circle_horizon_is_one_revolution():
    a, b = circ(S(1, 0)), circ(S(0, 1))
    t = next_crossing(a, b, 6.0)
    assert 6.0 < t <= 6.0 + TWO_PI


# -- integration --------------------------------------------------------------


def test_integral_abs_cos_full_circle():
    assert integrate([((0.0, TWO_PI), MaxAbs((S(1, 0),)))]) == pytest.approx(4.0, abs=1e-13)


def test_integral_cos_quarter():
    assert integrate([((0.0, math.pi / 2), MaxAbs((S(1, 0),)))]) == pytest.approx(1.0, abs=1e-14)


def test_integral_linear():
    assert integrate(lin(1, 2, T=3.0)) == pytest.approx(3 + 9)


@pytest.mark.parametrize("seed", range(10))
def test_integral_matches_adaptive_simpson(seed):
    rng = random.Random(seed)
    cuts = sorted(rng.uniform(0, TWO_PI) for _ in range(3))
    ts = [0.0, *cuts, TWO_PI]
    pieces = [CostPiece(p, q, max_abs(*[_rand_sin(rng) for _ in range(rng.randint(1, 2))]))
              for p, q in zip(ts, ts[1:])]
    exact = integrate(pieces)
    oracle = sum(adaptive_simpson(pc.form, pc.t0, pc.t1, tol=1e-12) for pc in pieces)
    assert exact == pytest.approx(oracle, rel=1e-8)


def test_split_max_abs_single_term_runs():
    runs = split_max_abs([S(1, 0), S(0, 1)], 0.0, TWO_PI)
    assert [round(p, 12) for p, _q, _s in runs][:3] == [0.0, round(math.pi / 4, 12),
                                                       round(3 * math.pi / 4, 12)]
    for p, q, s in runs:
        m = 0.5 * (p + q)
        assert abs(s(m)) == pytest.approx(max(abs(math.cos(m)), abs(math.sin(m))))


coef = st.floats(-3, 3, allow_nan=False)


@settings(max_examples=60, deadline=None)
@given(coef, coef, coef, coef, st.floats(0, TWO_PI), st.floats(0, TWO_PI), st.floats(0, TWO_PI))
def test_integral_is_additive(a1, b1, a2, b2, x, y, z):
    lo, mid, hi = sorted((x, y, z))
    terms = (S(a1, b1), S(a2, b2))
    form = max_abs(*terms)
    whole = integrate([((lo, hi), form)])
    parts = integrate([((lo, mid), form)]) + integrate([((mid, hi), form)])
    assert whole == pytest.approx(parts, abs=1e-12)


@settings(max_examples=60, deadline=None)
@given(coef, coef, coef, coef, st.floats(0, TWO_PI))
def test_eval_nonnegative(a1, b1, a2, b2, t):
    assert circ(S(a1, b1), S(a2, b2))(t) >= 0.0


@settings(max_examples=40, deadline=None)
@given(coef, coef, coef, coef, st.floats(0, 6.0))
def test_next_crossing_symmetric(a1, b1, a2, b2, after):
    a, b = circ(S(a1, b1)), circ(S(a2, b2))
    x, y = next_crossing(a, b, after), next_crossing(b, a, after)
    assert (x is None) == (y is None)
    if x is not None:
        assert x == pytest.approx(y, abs=1e-12)


def test_json_round_trip():
    p = FlightPlan([CostPiece(0, 1, Linear(1, 1)), CostPiece(1, 3, Linear(2.5, -0.5))], Interval(3))
    q = plan_from_json(json.loads(json.dumps(plan_to_json(p))))
    assert [x.form for x in q.pieces] == [x.form for x in p.pieces]
    c = circ(S(1, 2), S(-0.5, 0.25))
    d = plan_from_json(plan_to_json(c))
    assert d(1.234) == pytest.approx(c(1.234), abs=1e-15)


def test_json_rejects_malformed():
    with pytest.raises(PlanError):
        plan_from_json({"domain": {"kind": "blob"}, "pieces": []})
    with pytest.raises(PlanError):
        plan_from_json({"pieces": []})
