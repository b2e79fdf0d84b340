"""Kinetic hourglass: kinetic bottleneck matching and exact integrated
bottleneck distances between persistent homology transforms of planar
star-shaped graphs."""

from __future__ import annotations

from .curves import (
    CIRCLE,
    CostPiece,
    FlightPlan,
    Interval,
    Linear,
    MaxAbs,
    Sinusoid,
    ZERO,
    integrate,
    max_abs,
    next_crossing,
)
from .hourglass import BottleneckTrajectory, Hourglass, HourglassError
from .kinetic_pq import HANGER, HEAP, MAX, MIN, KineticPQ
from .matching import (
    BipartiteGraph,
    NoPerfectMatching,
    aug,
    bottleneck_distance,
    brute_force_bottleneck,
    diagram_reduction,
    find_augmenting_path,
    hopcroft_karp,
    static_bottleneck,
)
from .pht import (
    EmbeddedGraph,
    GenericityError,
    MonodromyError,
    compute_vines,
    critical_directions,
    extremal_vertices,
    integrated_distance,
    lower_star_diagram,
    pht_bipartite_graph,
    sampled_oracle,
)

__version__ = "0.1.0"
