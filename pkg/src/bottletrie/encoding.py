"""Direction-string encoding of grid points and interleaved distribution strings.

A level-d grid point is described by the d compass steps of the walk
``n_0(g), n_1(g), ..., n_d(g) = g`` through its coarser snappings.  A
multiset of n grid points becomes a single string of length n*d: the point
strings are sorted lexicographically and emitted column by column, so the
first n symbols describe the level-1 snap of the whole set, the next n the
level-2 snap, and so on.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Iterable, Sequence

from .geometry import (
    GridDistribution,
    GridPoint,
    Point,
    nearest_grid_point,
)


class NotANeighborError(ValueError):
    pass


class InvalidStringError(ValueError):
    pass


class Direction(enum.IntEnum):
    """Nine-symbol step alphabet; enum order is the lexicographic order."""

    I = 0
    N = 1
    S = 2
    E = 3
    W = 4
    NE = 5
    SE = 6
    NW = 7
    SW = 8


STEP: dict[Direction, tuple[int, int]] = {
    Direction.I: (0, 0),
    Direction.N: (0, 1),
    Direction.S: (0, -1),
    Direction.E: (1, 0),
    Direction.W: (-1, 0),
    Direction.NE: (1, 1),
    Direction.SE: (1, -1),
    Direction.NW: (-1, 1),
    Direction.SW: (-1, -1),
}

_DELTA_TO_SYM: dict[tuple[int, int], Direction] = {v: k for k, v in STEP.items()}

# Index-aligned copies for hot loops.
STEP_BY_VALUE: tuple[tuple[int, int], ...] = tuple(
    STEP[Direction(v)] for v in range(9)
)


def step_symbol(dx: int, dy: int) -> Direction:
    try:
        return _DELTA_TO_SYM[(dx, dy)]
    except KeyError:
        raise NotANeighborError(f"index step ({dx}, {dy}) is not a grid neighbor")


def direction_step(frm: GridPoint, to: GridPoint) -> Direction:
    """Compass symbol taking a level-(d-1) grid point to a level-d one."""
    if frm.level != to.level - 1:
        raise NotANeighborError(
            f"expected consecutive levels, got {frm.level} -> {to.level}"
        )
    if to.level == 1 or frm.level == 0:
        bx, by = 0, 0
    else:
        bx, by = frm.ix * 2, frm.iy * 2
    return step_symbol(to.ix - bx, to.iy - by)


def encode_point(g: GridPoint) -> tuple[Direction, ...]:
    """Length-``g.level`` direction string walking from the origin to g.

    The walk passes through the iterated coarsenings of g (one index
    right shift per level), so truncating the string always yields the
    string of the one-level-coarser grid point.  O(1) work per symbol.
    """
    d = g.level
    syms = []
    px, py = 0, 0
    for i in range(1, d + 1):
        s = d - i
        cx = g.ix >> s
        cy = g.iy >> s
        bx, by = (px * 2, py * 2) if i > 1 else (px, py)
        syms.append(step_symbol(cx - bx, cy - by))
        px, py = cx, cy
    return tuple(syms)


def decode_point(symbols: Sequence[Direction]) -> GridPoint:
    """Inverse of encode_point; rejects walks that leave the unit box."""
    ix = iy = 0
    for i, sym in enumerate(symbols, 1):
        dx, dy = STEP[Direction(sym)]
        if i > 1:
            ix *= 2
            iy *= 2
        ix += dx
        iy += dy
        hi = 1 << (i - 1)
        if not (0 <= ix <= hi and 0 <= iy <= hi):
            raise InvalidStringError(
                f"walk leaves the box at symbol {i} ({Direction(sym).name})"
            )
    return GridPoint(len(symbols), ix, iy)


@dataclass(frozen=True)
class DistributionString:
    """Interleaved encoding of a level-d multiset of n grid points."""

    size: int
    level: int
    symbols: tuple[Direction, ...]

    def __post_init__(self) -> None:
        if len(self.symbols) != self.size * self.level:
            raise InvalidStringError(
                f"expected {self.size * self.level} symbols, got {len(self.symbols)}"
            )


def encode_distribution(dist: GridDistribution) -> DistributionString:
    """Sort the member strings lexicographically and emit them column-major."""
    strings = sorted(encode_point(g) for g in dist.members())
    n = len(strings)
    d = dist.level
    symbols = tuple(strings[j][i] for i in range(d) for j in range(n))
    return DistributionString(n, d, symbols)


def format_symbols(symbols: Iterable[Direction]) -> str:
    return ",".join(Direction(s).name for s in symbols)


class LazyStringBuilder:
    """Block-wise construction of a point set's distribution string.

    Each call to :meth:`next_block` snaps every point one level deeper,
    refines the stable sort of the per-point strings on the new column
    (radix behavior), and returns the column in sorted order.  Block d of
    the concatenated output decodes to the level-d nearest-neighbor
    distribution of the point set, and the whole prefix is a valid
    interleaved string (consecutive nearest snaps of a point are always
    one grid step apart).
    """

    def __init__(self, points: Sequence[Point]):
        self.points = list(points)
        self.level = 0
        n = len(self.points)
        self._cur: list[tuple[int, int]] = [(0, 0)] * n
        self._perm = list(range(n))
        self._rank = [0] * n  # equal-prefix group id per sorted position

    def current_grid_points(self) -> list[GridPoint]:
        return [GridPoint(self.level, ix, iy) for ix, iy in self._cur]

    def next_block(self) -> tuple[Direction, ...]:
        d = self.level + 1
        n = len(self.points)
        syms: list[Direction] = [Direction.I] * n
        new_cur: list[tuple[int, int]] = [(0, 0)] * n
        for i, p in enumerate(self.points):
            g = nearest_grid_point(p, d)
            bx, by = self._cur[i] if d == 1 else (
                self._cur[i][0] * 2,
                self._cur[i][1] * 2,
            )
            syms[i] = step_symbol(g.ix - bx, g.iy - by)
            new_cur[i] = (g.ix, g.iy)
        order = sorted(
            range(n), key=lambda pos: (self._rank[pos], syms[self._perm[pos]])
        )
        new_perm = [self._perm[pos] for pos in order]
        block = tuple(syms[i] for i in new_perm)
        new_rank = [0] * n
        for j in range(1, n):
            prev_key = (self._rank[order[j - 1]], block[j - 1])
            key = (self._rank[order[j]], block[j])
            new_rank[j] = new_rank[j - 1] + (key != prev_key)
        self._cur = new_cur
        self._perm = new_perm
        self._rank = new_rank
        self.level = d
        return block

    def sorted_grid_points(self) -> list[tuple[int, int]]:
        """Current-level grid points in the string's sorted order."""
        return [self._cur[i] for i in self._perm]
