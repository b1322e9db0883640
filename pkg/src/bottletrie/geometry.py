"""Grid hierarchy over the unit box: levels, norms, snapping, candidate corners.

All point sets live in [0,1]^2.  The level-d grid has spacing
``delta(d) = 2**(1-d)``; level 1 is the four box corners and each level
halves the spacing of the previous one, so every coarse grid point is also
a fine grid point.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Iterator, NamedTuple

# Inputs closer than this to an exact half-tie are rounded down (toward
# S/W) so snapping is reproducible across platforms.
TIE_EPS = 2.0 ** -40


class InvalidLevelError(ValueError):
    pass


class Point(NamedTuple):
    x: float
    y: float


class GridPoint(NamedTuple):
    """Level-d grid vertex named by integer lattice indices.

    Embedded coordinates are (ix * delta(level), iy * delta(level)).
    ``level == 0`` is reserved for the origin marker used by the string
    encoding.
    """

    level: int
    ix: int
    iy: int

    def coords(self) -> Point:
        if self.level == 0:
            return Point(0.0, 0.0)
        step = delta(self.level)
        return Point(self.ix * step, self.iy * step)


ORIGIN = GridPoint(0, 0, 0)


@dataclass(frozen=True)
class PointSet:
    """Named, ordered sequence of planar points (duplicates allowed)."""

    id: str
    points: tuple[Point, ...]

    def __post_init__(self) -> None:
        if not self.points:
            raise ValueError(f"point set {self.id!r} is empty")
        for p in self.points:
            if not (0.0 <= p.x <= 1.0 and 0.0 <= p.y <= 1.0):
                raise ValueError(
                    f"point set {self.id!r}: point {p} outside the unit box"
                )

    def __len__(self) -> int:
        return len(self.points)


def point_set(set_id: str, coords: Iterable[tuple[float, float]]) -> PointSet:
    return PointSet(set_id, tuple(Point(float(x), float(y)) for x, y in coords))


def delta(d: int) -> float:
    """Grid spacing at level d (exact binary power)."""
    if d < 1:
        raise InvalidLevelError(f"grid level must be >= 1, got {d}")
    return 2.0 ** (1 - d)


def l1_dist(p: Point, q: Point) -> float:
    return abs(p.x - q.x) + abs(p.y - q.y)


def linf_dist(p: Point, q: Point) -> float:
    return max(abs(p.x - q.x), abs(p.y - q.y))


def _snap_index(t: float) -> int:
    # Nearest integer to t with exact (or near-exact) half-ties rounded down.
    u = t - 0.5
    n = round(u)
    if abs(u - n) <= TIE_EPS:
        return int(n)
    return math.ceil(u)


def nearest_grid_point(p: Point, d: int) -> GridPoint:
    """Nearest level-d grid point, ties broken toward S/W (round half down)."""
    if d < 1:
        raise InvalidLevelError(f"grid level must be >= 1, got {d}")
    scale = 1 << (d - 1)
    ix = min(max(_snap_index(p.x * scale), 0), scale)
    iy = min(max(_snap_index(p.y * scale), 0), scale)
    return GridPoint(d, ix, iy)


def nearest_grid_point_level0(p: Point) -> GridPoint:
    """Level-0 snap: everything maps to the origin."""
    return ORIGIN


def _coarsen_index(i: int, s: int) -> int:
    # One level of nearest-grid coarsening of a grid index is exactly a
    # right shift: even indices are exact, odd indices sit on a half-tie
    # and round down (S/W).  Iterating the shift keeps string encodings
    # prefix-stable across levels, which one-shot nearest rounding does not.
    return i >> s


def snap_to_level(g: GridPoint, d: int) -> GridPoint:
    """Re-express (d >= g.level) or coarsen (d < g.level) a grid point.

    Coarsening applies nearest-grid snapping one level at a time, i.e. an
    index right shift per level; this iterated form is what the string
    encoding walks through, and for a single level it coincides with
    ``nearest_grid_point`` on the embedded coordinates.  d == 0 returns
    the origin marker.
    """
    if d == 0:
        return ORIGIN
    if d < 0:
        raise InvalidLevelError(f"grid level must be >= 0, got {d}")
    if g.level == 0:
        return GridPoint(d, 0, 0)
    if d >= g.level:
        shift = d - g.level
        return GridPoint(d, g.ix << shift, g.iy << shift)
    s = g.level - d
    return GridPoint(d, _coarsen_index(g.ix, s), _coarsen_index(g.iy, s))


def _index_candidates(t: float, scale: int) -> list[int]:
    # Integers strictly within distance 1 of t (grid units), clamped to the box.
    lo = math.floor(t)
    if t == lo:
        cands = [lo]
    else:
        cands = [lo, lo + 1]
    return [i for i in cands if 0 <= i <= scale]


def snap_candidates(p: Point, d: int) -> set[GridPoint]:
    """Corners of p's level-d cell: grid points at Chebyshev distance < delta(d).

    Always contains nearest_grid_point(p, d); size is between 1 and 4.
    """
    if d < 1:
        raise InvalidLevelError(f"grid level must be >= 1, got {d}")
    scale = 1 << (d - 1)
    out = {
        GridPoint(d, ix, iy)
        for ix in _index_candidates(p.x * scale, scale)
        for iy in _index_candidates(p.y * scale, scale)
    }
    out.add(nearest_grid_point(p, d))
    return out


def cell_adjacent(gp: GridPoint, gq: GridPoint) -> bool:
    """True iff the two same-level grid points are corners of a common cell."""
    if gp.level != gq.level:
        raise ValueError(
            f"level mismatch: {gp.level} vs {gq.level}"
        )
    return abs(gp.ix - gq.ix) <= 1 and abs(gp.iy - gq.iy) <= 1


@dataclass
class GridDistribution:
    """Multiset of level-d grid points with positive multiplicities."""

    level: int
    counts: dict[GridPoint, int]

    def total(self) -> int:
        return sum(self.counts.values())

    def members(self) -> Iterator[GridPoint]:
        for g, c in self.counts.items():
            for _ in range(c):
                yield g

    @staticmethod
    def from_points(points: Iterable[Point], d: int) -> "GridDistribution":
        counts: dict[GridPoint, int] = {}
        for p in points:
            g = nearest_grid_point(p, d)
            counts[g] = counts.get(g, 0) + 1
        return GridDistribution(d, counts)


def grid_points(d: int) -> Iterator[GridPoint]:
    """All level-d grid points ((2**(d-1) + 1)**2 of them)."""
    scale = 1 << (d - 1)
    for ix in range(scale + 1):
        for iy in range(scale + 1):
            yield GridPoint(d, ix, iy)
