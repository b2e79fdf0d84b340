"""Piecewise cost curves ("flight plans") and the crossing machinery behind
every kinetic event.

A :class:`FlightPlan` tiles either a time interval ``[0, T)`` or the circle
``[0, 2*pi)`` with :class:`CostPiece` objects. A piece carries one of three
forms: :class:`Linear` (``a + b*t``), :class:`MaxAbs` (``max_i |R_i cos(t - phi_i)|``
over one or two sinusoids) or :data:`ZERO`.

Crossings between two plans are computed in closed form: on every common
piece the difference of the two forms can only vanish at a root of a
sinusoid ``S_i -/+ S_j`` (or of an affine function), so the sign of the
difference is constant between consecutive candidate roots and is read off
at the midpoint.
"""

from __future__ import annotations

import bisect
import math
from dataclasses import dataclass, field
from typing import Iterator, Sequence, Union

TWO_PI = 2.0 * math.pi

#: junction tolerance for plan continuity
TAU_CONT = 1e-9
#: bisection tolerance for the numeric fallback
BISECT_TOL = 1e-12
#: candidates closer than this (relative) are merged
_TIME_EPS = 1e-12
#: differences below this (relative to the values) count as ties
_VALUE_EPS = 1e-12


class PlanError(ValueError):
    """Raised for malformed flight plans."""


class DomainError(ValueError):
    """Raised when a plan is evaluated outside its interval domain."""


# ---------------------------------------------------------------------------
# forms


@dataclass(frozen=True)
class Sinusoid:
    """``amplitude * cos(theta - phase)`` with ``amplitude >= 0``."""

    amplitude: float
    phase: float
    a: float = field(init=False, repr=False, compare=False)
    b: float = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        if self.amplitude < 0:
            raise PlanError(f"negative amplitude {self.amplitude}")
        object.__setattr__(self, "phase", self.phase % TWO_PI)
        object.__setattr__(self, "a", self.amplitude * math.cos(self.phase))
        object.__setattr__(self, "b", self.amplitude * math.sin(self.phase))

    @classmethod
    def from_coeffs(cls, a: float, b: float) -> Sinusoid:
        """Canonical form of ``a*cos(theta) + b*sin(theta)``."""
        s = cls(math.hypot(a, b), math.atan2(b, a))
        # keep the caller's coefficients exactly; they feed differences
        object.__setattr__(s, "a", float(a))
        object.__setattr__(s, "b", float(b))
        return s

    def __call__(self, theta: float) -> float:
        return self.a * math.cos(theta) + self.b * math.sin(theta)

    def __add__(self, other: Sinusoid) -> Sinusoid:
        return Sinusoid.from_coeffs(self.a + other.a, self.b + other.b)

    def __sub__(self, other: Sinusoid) -> Sinusoid:
        return Sinusoid.from_coeffs(self.a - other.a, self.b - other.b)

    def __neg__(self) -> Sinusoid:
        return Sinusoid.from_coeffs(-self.a, -self.b)

    def scaled(self, k: float) -> Sinusoid:
        return Sinusoid.from_coeffs(k * self.a, k * self.b)

    def same_as(self, other: Sinusoid, tol: float = 1e-14) -> bool:
        return abs(self.a - other.a) <= tol and abs(self.b - other.b) <= tol

    def zeros(self, lo: float, hi: float) -> list[float]:
        """Zeros strictly inside ``(lo, hi)``; none for the zero sinusoid."""
        if self.amplitude <= 1e-300:
            return []
        base = math.atan2(self.b, self.a) + 0.5 * math.pi
        k0 = math.ceil((lo - base) / math.pi)
        out = []
        k = k0
        while True:
            z = base + k * math.pi
            if z >= hi:
                break
            if z > lo:
                out.append(z)
            k += 1
        return out

    def antiderivative(self, theta: float) -> float:
        return self.a * math.sin(theta) - self.b * math.cos(theta)


@dataclass(frozen=True)
class Linear:
    """``a + b*t``."""

    a: float
    b: float

    def __call__(self, t: float) -> float:
        return self.a + self.b * t


@dataclass(frozen=True)
class MaxAbs:
    """``max_i |S_i(theta)|`` over one or two sinusoids."""

    terms: tuple[Sinusoid, ...]

    def __post_init__(self) -> None:
        if not 1 <= len(self.terms) <= 2:
            raise PlanError("MaxAbs needs one or two sinusoids")

    def __call__(self, theta: float) -> float:
        return max(abs(s(theta)) for s in self.terms)


class _Zero:
    _inst = None

    def __new__(cls):
        if cls._inst is None:
            cls._inst = super().__new__(cls)
        return cls._inst

    def __call__(self, t: float) -> float:
        return 0.0

    def __repr__(self) -> str:
        return "ZERO"

    def __reduce__(self):
        return (_Zero, ())


ZERO = _Zero()
Form = Union[Linear, MaxAbs, _Zero]


def max_abs(*terms: Sinusoid) -> Form:
    """Build a MaxAbs form, dropping vanishing and duplicate terms."""
    kept: list[Sinusoid] = []
    for s in terms:
        if s.amplitude <= 1e-300:
            continue
        if any(s.same_as(k) or s.same_as(-k) for k in kept):
            continue
        kept.append(s)
    if not kept:
        return ZERO
    return MaxAbs(tuple(kept))


def _terms(form: Form) -> tuple[Sinusoid, ...] | None:
    if form is ZERO:
        return ()
    if isinstance(form, MaxAbs):
        return form.terms
    return None


@dataclass(frozen=True)
class CostPiece:
    t0: float
    t1: float
    form: Form

    def __post_init__(self) -> None:
        if not self.t0 < self.t1:
            raise PlanError(f"empty piece [{self.t0}, {self.t1})")

    def __call__(self, t: float) -> float:
        return self.form(t)


# ---------------------------------------------------------------------------
# domains and plans


@dataclass(frozen=True)
class Interval:
    end: float
    kind: str = "interval"

    @property
    def start(self) -> float:
        return 0.0


@dataclass(frozen=True)
class Circle:
    kind: str = "circle"

    @property
    def start(self) -> float:
        return 0.0

    @property
    def end(self) -> float:
        return TWO_PI


Domain = Union[Interval, Circle]
CIRCLE = Circle()


class FlightPlan:
    """A continuous, nonnegative, piecewise cost function.

    Pieces must tile the domain exactly; on the circle they tile ``[0, 2*pi)``
    and the value must also close up across ``2*pi -> 0``.
    """

    __slots__ = ("pieces", "domain", "_starts")

    def __init__(self, pieces: Sequence[CostPiece], domain: Domain) -> None:
        pieces = list(pieces)
        if not pieces:
            raise PlanError("a flight plan needs at least one piece")
        lo, hi = domain.start, domain.end
        if pieces[0].t0 != lo or pieces[-1].t1 != hi:
            raise PlanError(f"pieces must cover [{lo}, {hi})")
        for p, q in zip(pieces, pieces[1:]):
            if p.t1 != q.t0:
                raise PlanError(f"gap or overlap at {p.t1} / {q.t0}")
            jump = abs(p.form(p.t1) - q.form(q.t0))
            if jump > TAU_CONT:
                raise PlanError(f"discontinuous plan at t={p.t1} (jump {jump:.3g})")
        if isinstance(domain, Circle):
            jump = abs(pieces[-1].form(TWO_PI) - pieces[0].form(0.0))
            if jump > TAU_CONT:
                raise PlanError(f"plan does not close up on the circle (jump {jump:.3g})")
        for p in pieces:
            if isinstance(p.form, Linear):
                if min(p.form(p.t0), p.form(p.t1)) < -TAU_CONT:
                    raise PlanError(f"negative cost on [{p.t0}, {p.t1})")
        self.pieces: list[CostPiece] = pieces
        self.domain = domain
        self._starts = [p.t0 for p in pieces]

    @classmethod
    def constant(cls, value: float, domain: Domain) -> FlightPlan:
        form = ZERO if value == 0 else Linear(float(value), 0.0)
        if isinstance(domain, Circle) and form is not ZERO:
            # a constant on the circle is still a valid linear piece
            pass
        return cls([CostPiece(domain.start, domain.end, form)], domain)

    @property
    def is_circle(self) -> bool:
        return isinstance(self.domain, Circle)

    def _index(self, t: float) -> int:
        return max(bisect.bisect_right(self._starts, t) - 1, 0)

    def reduce(self, t: float) -> float:
        if self.is_circle:
            t = t % TWO_PI
            return 0.0 if t >= TWO_PI else t
        if t < 0 or t > self.domain.end:
            raise DomainError(f"t={t} outside [0, {self.domain.end}]")
        return t

    def piece_at(self, t: float) -> CostPiece:
        return self.pieces[self._index(self.reduce(t))]

    def __call__(self, t: float) -> float:
        t = self.reduce(t)
        return self.pieces[self._index(t)].form(t)

    def windows(self, lo: float, hi: float) -> Iterator[tuple[float, float, Form, float]]:
        """Yield ``(s, e, form, offset)`` covering ``[lo, hi)``.

        ``s, e`` are in the caller's (possibly unwrapped) time; the form is
        evaluated at ``t - offset``.
        """
        if hi <= lo:
            return
        if not self.is_circle:
            lo = max(lo, 0.0)
            hi = min(hi, self.domain.end)
            i = self._index(lo)
            while i < len(self.pieces) and self.pieces[i].t0 < hi:
                p = self.pieces[i]
                yield max(p.t0, lo), min(p.t1, hi), p.form, 0.0
                i += 1
            return
        k = math.floor(lo / TWO_PI)
        off = k * TWO_PI
        i = self._index(lo - off)
        while True:
            if i == len(self.pieces):
                i = 0
                off += TWO_PI
            p = self.pieces[i]
            s, e = p.t0 + off, p.t1 + off
            if s >= hi:
                return
            if e > lo:
                yield max(s, lo), min(e, hi), p.form, off
            i += 1

    def breakpoints(self) -> list[float]:
        return list(self._starts)

    def __repr__(self) -> str:
        return f"FlightPlan({len(self.pieces)} pieces, {self.domain})"


# ---------------------------------------------------------------------------
# crossings


def _linear_root(f: Linear, g: Linear, lo: float, hi: float) -> list[float]:
    db = f.b - g.b
    if db == 0:
        return []
    r = -(f.a - g.a) / db
    return [r] if lo < r < hi else []


def _numeric_roots(fn, lo: float, hi: float, samples: int = 256) -> list[float]:
    # fallback for mixed linear/sinusoid pieces: sample then bisect
    roots = []
    xs = [lo + (hi - lo) * k / samples for k in range(samples + 1)]
    ys = [fn(x) for x in xs]
    for x0, x1, y0, y1 in zip(xs, xs[1:], ys, ys[1:]):
        if y0 == 0.0 and x0 > lo:
            roots.append(x0)
        elif y0 * y1 < 0:
            a, b, fa = x0, x1, y0
            while b - a > BISECT_TOL * max(1.0, abs(a)):
                m = 0.5 * (a + b)
                fm = fn(m)
                if fm == 0.0:
                    a = b = m
                    break
                if (fm < 0) == (fa < 0):
                    a, fa = m, fm
                else:
                    b = m
            roots.append(0.5 * (a + b))
    return roots


def candidate_roots(f: Form, g: Form, lo: float, hi: float) -> list[float]:
    """Times in ``(lo, hi)`` outside of which ``f - g`` keeps a fixed sign.

    For sinusoid forms these are the roots of the (at most eight) equalities
    ``S_i = +/- T_j``; when a term is shared by both sides the same-side
    equalities are added too, so that regions of exact equality are bounded
    by candidates.
    """
    tf, tg = _terms(f), _terms(g)
    if tf is not None and tg is not None:
        if not tf and not tg:
            return []
        if not tf or not tg:
            out = []
            for s in tf or tg:
                out.extend(s.zeros(lo, hi))
            return out
        pairs = [(s, t) for s in tf for t in tg]
        shared = any(s.same_as(t) or s.same_as(-t) for s, t in pairs)
        if shared:
            allt = list(tf) + list(tg)
            pairs = [(allt[i], allt[j]) for i in range(len(allt)) for j in range(i + 1, len(allt))]
        out = []
        for s, t in pairs:
            for d in (s - t, s + t):
                if d.amplitude > 1e-14 * max(1.0, s.amplitude, t.amplitude):
                    out.extend(d.zeros(lo, hi))
        return out
    if isinstance(f, Linear) and isinstance(g, Linear):
        return _linear_root(f, g, lo, hi)
    if isinstance(f, Linear) and g is ZERO:
        return _linear_root(f, Linear(0.0, 0.0), lo, hi)
    if f is ZERO and isinstance(g, Linear):
        return _linear_root(Linear(0.0, 0.0), g, lo, hi)
    return _numeric_roots(lambda t: f(t) - g(t), lo, hi)


def _sign(f: Form, g: Form, t: float) -> int:
    u, v = f(t), g(t)
    d = u - v
    if abs(d) <= _VALUE_EPS * (1.0 + abs(u) + abs(v)):
        return 0
    return 1 if d > 0 else -1


def _windows2(a: FlightPlan, b: FlightPlan, lo: float, hi: float):
    wa, wb = a.windows(lo, hi), b.windows(lo, hi)
    ca, cb = next(wa, None), next(wb, None)
    while ca is not None and cb is not None:
        s = max(ca[0], cb[0])
        e = min(ca[1], cb[1])
        if s < e:
            yield s, e, ca[2], ca[3], cb[2], cb[3]
        if ca[1] <= e:
            ca = next(wa, None)
        if cb is not None and cb[1] <= e:
            cb = next(wb, None)


def _horizon(a: FlightPlan, after: float, until: float | None) -> float:
    if until is not None:
        return until
    return after + TWO_PI if a.is_circle else a.domain.end


def sign_segments(
    a: FlightPlan, b: FlightPlan, lo: float, hi: float
) -> Iterator[tuple[float, float, int]]:
    """Yield maximal ``(s, e, sign)`` runs of ``sign(a - b)`` over ``[lo, hi)``.

    ``sign`` is 0 on stretches where the two plans coincide.
    """
    if a.is_circle != b.is_circle:
        raise PlanError("plans live on different domains")
    run_s, run_sign = None, None
    for s, e, fa, oa, fb, ob in _windows2(a, b, lo, hi):
        eps = _TIME_EPS * max(1.0, abs(s), abs(e))
        if oa == ob:
            cands = [c + oa for c in candidate_roots(fa, fb, s - oa, e - oa)]
        else:  # circle windows with different wrap offsets only for sinusoids
            cands = _numeric_roots(lambda t: fa(t - oa) - fb(t - ob), s, e)
        cuts = [s]
        for c in sorted(cands):
            if c - cuts[-1] > eps and e - c > eps:
                cuts.append(c)
        cuts.append(e)
        for p, q in zip(cuts, cuts[1:]):
            m = 0.5 * (p + q)
            sg = _sign(lambda t: fa(t - oa), lambda t: fb(t - ob), m)
            if run_sign is None:
                run_s, run_sign = p, sg
            elif sg != run_sign:
                yield run_s, p, run_sign
                run_s, run_sign = p, sg
    if run_sign is not None:
        yield run_s, hi, run_sign


def sign_after(a: FlightPlan, b: FlightPlan, t: float, until: float | None = None) -> int:
    """Sign of ``a - b`` on the open stretch right after ``t`` (0 if equal there)."""
    hi = _horizon(a, t, until)
    if hi <= t:
        hi = t + TWO_PI if a.is_circle else a.domain.end
    for _s, _e, sg in sign_segments(a, b, t, hi):
        return sg
    # t sits at the end of an interval domain: fall back to the value there
    return _sign(a, b, t)


def next_order_change(
    a: FlightPlan, b: FlightPlan, after: float, tie: int, until: float | None = None
) -> float | None:
    """First time after ``after`` at which the lexicographic order of
    ``(a, tie)`` versus ``(b, 0)`` flips. Stretches where the plans coincide
    take the sign ``tie``.
    """
    eff0 = None
    for s, _e, sg in sign_segments(a, b, after, _horizon(a, after, until)):
        es = sg if sg != 0 else tie
        if eff0 is None:
            eff0 = es
        elif es != eff0:
            return s
    return None


def next_crossing(
    a: FlightPlan, b: FlightPlan, after: float, until: float | None = None
) -> float | None:
    """Smallest ``t > after`` where ``a - b`` strictly changes sign.

    Tangential contacts are not crossings. On the circle the search covers
    one full revolution unless ``until`` is given.
    """
    eff0 = None
    for s, _e, sg in sign_segments(a, b, after, _horizon(a, after, until)):
        if sg == 0:
            continue
        if eff0 is None:
            eff0 = sg
        elif sg != eff0:
            return s
    return None


# ---------------------------------------------------------------------------
# integration


def _int_abs(s: Sinusoid, lo: float, hi: float) -> float:
    cuts = [lo, *s.zeros(lo, hi), hi]
    total = 0.0
    for p, q in zip(cuts, cuts[1:]):
        total += abs(s.antiderivative(q) - s.antiderivative(p))
    return total


def _int_form(form: Form, lo: float, hi: float) -> float:
    if form is ZERO:
        return 0.0
    if isinstance(form, Linear):
        return form.a * (hi - lo) + 0.5 * form.b * (hi * hi - lo * lo)
    return integrate_max_abs(form.terms, lo, hi)


def split_max_abs(
    terms: Sequence[Sinusoid], lo: float, hi: float
) -> list[tuple[float, float, Sinusoid | None]]:
    """Cut ``[lo, hi)`` at the equality angles of ``|S_i| = |S_j|`` and return
    ``(p, q, S)`` runs on which the single term ``S`` attains the maximum
    (``None`` where every term vanishes)."""
    terms = [s for s in terms if s.amplitude > 0]
    if hi <= lo:
        return []
    if len(terms) <= 1:
        return [(lo, hi, terms[0] if terms else None)]
    cuts = [lo]
    for i in range(len(terms)):
        for j in range(i + 1, len(terms)):
            for d in (terms[i] - terms[j], terms[i] + terms[j]):
                cuts.extend(d.zeros(lo, hi))
    cuts = sorted(cuts) + [hi]
    out: list[tuple[float, float, Sinusoid | None]] = []
    for p, q in zip(cuts, cuts[1:]):
        if q <= p:
            continue
        m = 0.5 * (p + q)
        best = max(terms, key=lambda s: abs(s(m)))
        if out and out[-1][2] is best:
            out[-1] = (out[-1][0], q, best)
        else:
            out.append((p, q, best))
    return out


def integrate_max_abs(terms: Sequence[Sinusoid], lo: float, hi: float) -> float:
    """Exact integral of ``max_i |S_i|`` over ``[lo, hi]`` for any number of terms."""
    return sum(_int_abs(s, p, q) for p, q, s in split_max_abs(terms, lo, hi) if s is not None)


def integrate(pieces) -> float:
    """Integrate a list of pieces.

    Accepts :class:`CostPiece` objects, ``((t0, t1), form)`` pairs, or a whole
    :class:`FlightPlan`. Intervals must be disjoint; order does not matter for
    the value.
    """
    if isinstance(pieces, FlightPlan):
        pieces = pieces.pieces
    total = 0.0
    for p in pieces:
        if isinstance(p, CostPiece):
            lo, hi, form = p.t0, p.t1, p.form
        else:
            (lo, hi), form = p
        total += _int_form(form, lo, hi)
    return total


def piece_to_json(form: Form) -> object:
    if form is ZERO:
        return "zero"
    if isinstance(form, Linear):
        return {"linear": {"a": form.a, "b": form.b}}
    return {"maxabs": [{"A": s.a, "B": s.b} for s in form.terms]}


def plan_to_json(plan: FlightPlan) -> dict:
    dom = (
        {"kind": "circle"}
        if plan.is_circle
        else {"kind": "interval", "end": plan.domain.end}
    )
    return {
        "domain": dom,
        "pieces": [
            {"t0": p.t0, "t1": p.t1, "form": piece_to_json(p.form)} for p in plan.pieces
        ],
    }


def form_from_json(obj: object) -> Form:
    if obj == "zero":
        return ZERO
    if not isinstance(obj, dict) or len(obj) != 1:
        raise PlanError(f"bad piece form {obj!r}")
    if "linear" in obj:
        lin = obj["linear"]
        return Linear(float(lin["a"]), float(lin["b"]))
    if "maxabs" in obj:
        terms = [Sinusoid.from_coeffs(float(t["A"]), float(t["B"])) for t in obj["maxabs"]]
        return MaxAbs(tuple(terms))
    raise PlanError(f"bad piece form {obj!r}")


def plan_from_json(obj: dict) -> FlightPlan:
    try:
        dom = obj["domain"]
        if dom["kind"] == "circle":
            domain: Domain = CIRCLE
        elif dom["kind"] == "interval":
            domain = Interval(float(dom["end"]))
        else:
            raise PlanError(f"unknown domain kind {dom['kind']!r}")
        pieces = [
            CostPiece(float(p["t0"]), float(p["t1"]), form_from_json(p["form"]))
            for p in obj["pieces"]
        ]
    except (KeyError, TypeError) as exc:
        raise PlanError(f"malformed flight plan: {exc}") from exc
    return FlightPlan(pieces, domain)
