"""Approximate nearest-bottleneck-distance search over planar point sets."""

from .compact import CompactIndex, Strategy
from .geometry import (
    GridDistribution,
    GridPoint,
    Point,
    PointSet,
    delta,
    nearest_grid_point,
    point_set,
    snap_candidates,
)
from .matching import (
    brute_force_bottleneck,
    exact_bottleneck,
    max_matching,
)
from .multisnap import BudgetExceededError, MultiSnapIndex
from .pairwise import ApproxResult, approx_bottleneck
from .results import QueryResult
from .storage import load_index, save_index

__version__ = "0.1.0"

__all__ = [
    "ApproxResult",
    "BudgetExceededError",
    "CompactIndex",
    "GridDistribution",
    "GridPoint",
    "MultiSnapIndex",
    "Point",
    "PointSet",
    "QueryResult",
    "Strategy",
    "approx_bottleneck",
    "brute_force_bottleneck",
    "delta",
    "exact_bottleneck",
    "load_index",
    "max_matching",
    "nearest_grid_point",
    "point_set",
    "save_index",
    "snap_candidates",
]
