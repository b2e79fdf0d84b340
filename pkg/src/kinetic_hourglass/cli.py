"""Command-line front end.

Exit codes: 0 success, 1 parse or usage error, 2 no perfect matching,
3 monodromy or genericity failure.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import os
import sys
from dataclasses import dataclass
from pathlib import Path

from . import curves, pht
from .hourglass import Hourglass
from .kinetic_pq import HANGER, HEAP
from .matching import (
    BipartiteGraph,
    MatchingError,
    NoPerfectMatching,
    diagram_reduction,
    static_bottleneck,
)

EXIT_OK, EXIT_PARSE, EXIT_INFEASIBLE, EXIT_GEOMETRY = 0, 1, 2, 3

log = logging.getLogger("kinetic_hourglass")


class InputError(ValueError):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):
        self.print_usage(sys.stderr)
        self.exit(EXIT_PARSE, f"{self.prog}: error: {message}\n")


@dataclass
class RunConfig:
    command: str
    inputs: list[str]
    flavor: str = HEAP
    seed: int | None = None
    samples: int = 10_000
    until: float | None = None
    out_trace: str | None = None
    out_traj: str | None = None
    tol: float | None = None

    def __post_init__(self) -> None:
        if self.flavor == HANGER and self.seed is None:
            raise InputError("--seed is required with --flavor hanger")


# ---------------------------------------------------------------------------
# input parsing


def _load(path: str):
    try:
        with open(path) as fh:
            return json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise InputError(f"{path}: {exc}") from exc


def _diagram(obj, path: str) -> list[tuple[float, float]]:
    pts = obj.get("points") if isinstance(obj, dict) else obj
    try:
        out = [(float(b), float(d)) for b, d in pts]
    except (TypeError, ValueError) as exc:
        raise InputError(f"{path}: expected {{\"points\": [[b, d], ...]}}") from exc
    for b, d in out:
        if not d > b:
            raise InputError(f"{path}: point ({b}, {d}) is not above the diagonal")
    return out


def _edge_triples(obj, path: str):
    try:
        n_left, n_right = int(obj["n_left"]), int(obj["n_right"])
        triples = []
        for e in obj["edges"]:
            if isinstance(e, dict):
                triples.append((int(e["left"]), int(e["right"]), e.get("plan", e.get("weight"))))
            else:
                triples.append((int(e[0]), int(e[1]), e[2]))
    except (KeyError, TypeError, ValueError, IndexError) as exc:
        raise InputError(f"{path}: malformed graph: {exc}") from exc
    return n_left, n_right, triples


def _scalar_graph(obj, path: str) -> BipartiteGraph:
    n_left, n_right, triples = _edge_triples(obj, path)
    try:
        return BipartiteGraph(n_left, n_right, [(l, r, float(w)) for l, r, w in triples])
    except (TypeError, ValueError) as exc:
        raise InputError(f"{path}: {exc}") from exc


def _kinetic_graph(obj, path: str) -> BipartiteGraph:
    n_left, n_right, triples = _edge_triples(obj, path)
    try:
        edges = [(l, r, curves.plan_from_json(w)) for l, r, w in triples]
        g = BipartiteGraph(n_left, n_right, edges)
    except (curves.PlanError, MatchingError, TypeError) as exc:
        raise InputError(f"{path}: {exc}") from exc
    if not edges:
        raise InputError(f"{path}: graph has no edges")
    circ = {w.is_circle for _l, _r, w in edges}
    ends = {w.domain.end for _l, _r, w in edges}
    if len(circ) > 1 or len(ends) > 1:
        raise InputError(f"{path}: all flight plans must share one domain")
    return g


def _embedded(path: str) -> pht.EmbeddedGraph:
    return pht.EmbeddedGraph.from_json(_load(path))


# ---------------------------------------------------------------------------
# commands


def _hall_message(exc: NoPerfectMatching) -> str:
    msg = f"no perfect matching: {exc}"
    if exc.witness is not None:
        msg += f"; Hall witness W={exc.witness} has N(W)={exc.neighbors}"
    return msg


def cmd_static(cfg: RunConfig, out) -> int:
    if len(cfg.inputs) == 2:
        X = _diagram(_load(cfg.inputs[0]), cfg.inputs[0])
        Y = _diagram(_load(cfg.inputs[1]), cfg.inputs[1])
        if not X and not Y:
            print("bottleneck 0.0", file=out)
            return EXIT_OK
        g = diagram_reduction(X, Y)
    elif len(cfg.inputs) == 1:
        g = _scalar_graph(_load(cfg.inputs[0]), cfg.inputs[0])
    else:
        raise InputError("static-bottleneck takes a graph file or two diagram files")
    delta, matching, e_hat = static_bottleneck(g)
    print(f"bottleneck {delta!r}", file=out)
    print("matching " + " ".join(f"{l}-{r}" for l, r in sorted(matching.items())), file=out)
    if e_hat >= 0:
        l, r, _ = g.edges[e_hat]
        print(f"bottleneck_edge {e_hat} ({l}-{r})", file=out)
    return EXIT_OK


def _pieces_path(p: str) -> Path:
    path = Path(p)
    return path.with_suffix(".pieces.json") if path.suffix == ".json" else path.with_suffix(".json")


def cmd_kinetic(cfg: RunConfig, out) -> int:
    if len(cfg.inputs) != 1:
        raise InputError("kinetic takes one graph file")
    g = _kinetic_graph(_load(cfg.inputs[0]), cfg.inputs[0])
    h = Hourglass(g, until=cfg.until, flavor=cfg.flavor, seed=cfg.seed)
    traj = h.run(cfg.until)
    if cfg.out_trace:
        h.write_trace(cfg.out_trace)
    if cfg.out_traj:
        traj.write_csv(cfg.out_traj)
        _pieces_path(cfg.out_traj).write_text(json.dumps(traj.to_json(), indent=1) + "\n")
    print(f"integral {traj.integral()!r}", file=out)
    print(f"events {len(h.event_log)} " + " ".join(f"{k}={v}" for k, v in h.counts.items()
                                                    if k != "stale"), file=out)
    print(f"final_root {h.root} final_bottleneck {h.bottleneck!r}", file=out)
    return EXIT_OK


def _apply_tol(cfg: RunConfig) -> None:
    if cfg.tol is not None:
        pht.STITCH_TOL = cfg.tol


def cmd_pht(cfg: RunConfig, out) -> int:
    if len(cfg.inputs) != 2:
        raise InputError("pht-distance takes two embedded-graph files")
    _apply_tol(cfg)
    k1, k2 = _embedded(cfg.inputs[0]), _embedded(cfg.inputs[1])
    res = pht.integrated_distance(k1, k2, flavor=cfg.flavor, seed=cfg.seed)
    if cfg.out_traj:
        res.trajectory.write_csv(cfg.out_traj)
        _pieces_path(cfg.out_traj).write_text(json.dumps(res.trajectory.to_json(), indent=1) + "\n")
    if cfg.out_trace and res.hourglass is not None:
        res.hourglass.write_trace(cfg.out_trace)
    print(f"distance {res.value!r}", file=out)
    print(f"closure_gap {res.closure_gap!r}", file=out)
    return EXIT_OK


def cmd_compare(cfg: RunConfig, out) -> int:
    if len(cfg.inputs) != 2:
        raise InputError("compare-oracle takes two embedded-graph files")
    _apply_tol(cfg)
    k1, k2 = _embedded(cfg.inputs[0]), _embedded(cfg.inputs[1])
    res = pht.integrated_distance(k1, k2, flavor=cfg.flavor, seed=cfg.seed)
    prof = pht.sampled_profile(k1, k2, cfg.samples)
    sampled = (curves.TWO_PI / cfg.samples) * sum(v for _t, v in prof)
    dev = max(abs(res.at(t) - v) for t, v in prof)
    gap = abs(res.value - sampled)
    print(f"exact {res.value!r}", file=out)
    print(f"sampled {sampled!r}", file=out)
    print(f"abs_gap {gap!r}", file=out)
    print(f"rel_gap {gap / max(res.value, 1e-12)!r}", file=out)
    print(f"max_direction_deviation {dev!r}", file=out)
    if cfg.out_traj:
        with open(cfg.out_traj, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["theta", "exact", "sampled"])
            for t, v in prof:
                w.writerow([repr(t), repr(res.at(t)), repr(v)])
    return EXIT_OK


COMMANDS = {
    "static-bottleneck": cmd_static,
    "kinetic": cmd_kinetic,
    "pht-distance": cmd_pht,
    "compare-oracle": cmd_compare,
}


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="kinetic-hourglass",
                description="Kinetic bottleneck matching and exact PHT distances.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)
    helps = {
        "static-bottleneck": "bottleneck of a graph file or of two diagram files",
        "kinetic": "run the kinetic hourglass on a graph with flight plans",
        "pht-distance": "exact integrated bottleneck distance of two embedded graphs",
        "compare-oracle": "exact distance against a sampled Riemann sum",
    }
    for name, text in helps.items():
        sp = sub.add_parser(name, help=text)
        sp.add_argument("inputs", nargs="+")
        sp.add_argument("--flavor", choices=[HEAP, HANGER], default=HEAP)
        sp.add_argument("--seed", type=int)
        sp.add_argument("--samples", type=int, default=10_000)
        sp.add_argument("--until", type=float)
        sp.add_argument("--out-trace")
        sp.add_argument("--out-traj")
        sp.add_argument("--tol", type=float)
    return p


def _setup_logging() -> None:
    level = os.environ.get("HOURGLASS_LOG")
    if level:
        logging.basicConfig(level=getattr(logging, level.upper(), logging.INFO),
                            format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)


def main(argv: list[str] | None = None, out=None) -> int:
    out = sys.stdout if out is None else out
    _setup_logging()
    args = build_parser().parse_args(argv)
    try:
        cfg = RunConfig(args.command, args.inputs, args.flavor, args.seed, args.samples,
                        args.until, args.out_trace, args.out_traj, args.tol)
        if cfg.samples < 4:
            raise InputError("--samples must be at least 4")
        return COMMANDS[cfg.command](cfg, out)
    except NoPerfectMatching as exc:
        print(_hall_message(exc), file=sys.stderr)
        return EXIT_INFEASIBLE
    except (pht.GenericityError, pht.MonodromyError) as exc:
        print(f"geometry error: {exc}", file=sys.stderr)
        return EXIT_GEOMETRY
    except (InputError, pht.PHTError, curves.PlanError, MatchingError) as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return EXIT_PARSE


if __name__ == "__main__":
    sys.exit(main())
