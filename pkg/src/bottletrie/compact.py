"""Space-efficient index: one nearest-neighbor string per stored point set.

Each point set contributes a single trie path of depth d_max * |P| (one
sorted symbol column per level).  Queries run a level-synchronous BFS
over the trie; a partially decoded grid distribution survives only if it
can be matched, cell-adjacently, into the query's distribution at that
level.  Feasibility can be tested at every trie node or only at
completed level blocks; both strategies return identical hits.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from enum import Enum

from .encoding import STEP_BY_VALUE, LazyStringBuilder
from .geometry import PointSet, delta, nearest_grid_point
from .matching import matching_flow_value
from .results import QueryResult
from .trie import Trie


class Strategy(str, Enum):
    PER_NODE = "per-node"
    LEAF_ONLY = "leaf-only"
    AUTO = "auto"


class _Mode(Enum):
    NEAREST = "nearest"
    SUBSET = "subset"
    SUPERSET = "superset"


@dataclass
class CompactIndex:
    d_max: int = 20
    tries: dict[int, Trie] = field(default_factory=dict)
    registry: dict[str, PointSet] = field(default_factory=dict)

    def insert(self, P: PointSet) -> None:
        if P.id in self.registry:
            raise ValueError(f"duplicate point set id {P.id!r}")
        n = len(P)
        trie = self.tries.get(n)
        if trie is None:
            trie = self.tries[n] = Trie(n, self.d_max)
        builder = LazyStringBuilder(P.points)
        symbols: list[int] = []
        for _ in range(self.d_max):
            symbols.extend(builder.next_block())
        trie.insert(symbols, P.id)
        self.registry[P.id] = P

    def _cardinality_count(self, k: int) -> int:
        return sum(1 for ps in self.registry.values() if len(ps) == k)

    def _query_levels(self, Q: PointSet) -> list[dict[tuple[int, int], int]]:
        levels: list[dict[tuple[int, int], int]] = [{}]  # index 0 unused
        for d in range(1, self.d_max + 1):
            counts: dict[tuple[int, int], int] = {}
            for p in Q.points:
                g = nearest_grid_point(p, d)
                counts[(g.ix, g.iy)] = counts.get((g.ix, g.iy), 0) + 1
            levels.append(counts)
        return levels

    def query_nearest(self, Q: PointSet, strategy: Strategy = Strategy.AUTO
                      ) -> QueryResult:
        n = len(Q)
        start = time.perf_counter()
        trie = self.tries.get(n)
        if trie is None:
            return QueryResult((), 0, diagnostics={"reason": "no cardinality match"})
        q_levels = self._query_levels(Q)
        per_node = self._resolve_strategy(strategy, n, self._cardinality_count(n))
        diag = _Diag(per_node)
        hits_by_level = self._bfs(trie, n, q_levels, n, _Mode.NEAREST, per_node, diag)
        return self._result(hits_by_level, 4.0, 2.0, diag, start)

    def query_subset(self, Q: PointSet, strategy: Strategy = Strategy.AUTO
                     ) -> QueryResult:
        n = len(Q)
        start = time.perf_counter()
        q_levels = self._query_levels(Q)
        merged: dict[int, set[str]] = {}
        diag = None
        for k, trie in sorted(self.tries.items()):
            if k > n:
                continue
            per_node = self._resolve_strategy(strategy, k, self._cardinality_count(k))
            d = _Diag(per_node)
            hits = self._bfs(trie, k, q_levels, n, _Mode.SUBSET, per_node, d)
            for lvl, ids in hits.items():
                merged.setdefault(lvl, set()).update(ids)
            diag = d if diag is None else diag.merge(d)
        if diag is None:
            diag = _Diag(False)
        return self._result(
            {lvl: sorted(ids) for lvl, ids in merged.items()}, 4.0, 2.0, diag, start
        )

    def query_superset(self, Q: PointSet, strategy: Strategy = Strategy.AUTO
                       ) -> QueryResult:
        n = len(Q)
        start = time.perf_counter()
        q_levels = self._query_levels(Q)
        merged: dict[int, set[str]] = {}
        diag = None
        for k, trie in sorted(self.tries.items()):
            if k < n:
                continue
            per_node = self._resolve_strategy(strategy, k, self._cardinality_count(k))
            d = _Diag(per_node)
            hits = self._bfs(trie, k, q_levels, n, _Mode.SUPERSET, per_node, d)
            for lvl, ids in hits.items():
                merged.setdefault(lvl, set()).update(ids)
            diag = d if diag is None else diag.merge(d)
        if diag is None:
            diag = _Diag(False)
        return self._result(
            {lvl: sorted(ids) for lvl, ids in merged.items()}, 4.0, 2.0, diag, start
        )

    @staticmethod
    def _resolve_strategy(strategy: Strategy, n: int, m: int) -> bool:
        """True for per-node feasibility testing, False for leaf-only."""
        strategy = Strategy(strategy)
        if strategy is Strategy.PER_NODE:
            return True
        if strategy is Strategy.LEAF_ONLY:
            return False
        # cost model from the analysis: per-node ~ 10^n tests per level,
        # leaf-only ~ m tests per level
        return 10 ** n < m

    def _bfs(
        self,
        trie: Trie,
        k: int,
        q_levels: list[dict[tuple[int, int], int]],
        n_query: int,
        mode: _Mode,
        per_node: bool,
        diag: "_Diag",
    ) -> dict[int, list[str]]:
        """Level-synchronous BFS; returns finisher hits per level."""
        hits_by_level: dict[int, list[str]] = {}
        # a state is (node, prev_points, placed); prev_points holds the
        # level-(d-1) grid points in string order, placed the level-d
        # points decoded so far in this block
        states = [(trie.root, ((0, 0),) * k)]
        for d in range(1, self.d_max + 1):
            gq = q_levels[d]
            frontier = [(node, prev, ()) for node, prev in states]
            for i in range(k):
                new_frontier = []
                for node, prev, placed in frontier:
                    bx, by = prev[i]
                    if d > 1:
                        bx *= 2
                        by *= 2
                    for sym, child in sorted(node.children.items()):
                        dx, dy = STEP_BY_VALUE[sym]
                        gp = (bx + dx, by + dy)
                        new_placed = placed + (gp,)
                        diag.explored(d)
                        if per_node and not self._viable(
                            new_placed, gq, d, k, n_query, mode, diag
                        ):
                            continue
                        new_frontier.append((child, prev, new_placed))
                frontier = new_frontier
            survivors = []
            level_hits: list[str] = []
            for node, prev, placed in frontier:
                if per_node:
                    ok = True
                else:
                    ok = self._boundary_ok(placed, gq, d, k, n_query, mode, diag)
                if not ok:
                    continue
                if node.finishers:
                    level_hits.extend(node.finishers)
                survivors.append((node, placed))
            if level_hits:
                hits_by_level[d] = sorted(set(level_hits))
            states = survivors
            if not states:
                break
        return hits_by_level

    def _viable(self, placed, gq, d, k, n_query, mode, diag) -> bool:
        if mode is _Mode.SUPERSET:
            target = n_query - (k - len(placed))
            if target <= 0:
                return True
            diag.matched(d)
            return self._flow(placed, gq, d, target) >= target
        diag.matched(d)
        target = len(placed)
        return self._flow(placed, gq, d, target) == target

    def _boundary_ok(self, placed, gq, d, k, n_query, mode, diag) -> bool:
        diag.matched(d)
        target = n_query if mode is _Mode.SUPERSET else k
        return self._flow(placed, gq, d, target) == target

    @staticmethod
    def _flow(placed, gq, d, target) -> int:
        counts: dict[tuple[int, int], int] = {}
        for gp in placed:
            counts[gp] = counts.get(gp, 0) + 1
        return matching_flow_value(counts, gq, d, stop_at=target)

    @staticmethod
    def _result(hits_by_level, safe_factor, claimed_factor, diag, start) -> QueryResult:
        if not hits_by_level:
            return QueryResult((), 0, diagnostics=diag.as_dict(0.0))
        d_star = max(hits_by_level)
        return QueryResult(
            ids=tuple(sorted(hits_by_level[d_star])),
            level=d_star,
            bound=safe_factor * delta(d_star),
            claimed_bound=claimed_factor * delta(d_star),
            diagnostics=diag.as_dict(time.perf_counter() - start),
        )

    def node_count(self) -> int:
        return sum(t.node_count() for t in self.tries.values())


class _Diag:
    """Per-level explored-state and matching-call counters."""

    def __init__(self, per_node: bool):
        self.per_node = per_node
        self.states: dict[int, int] = {}
        self.match_calls: dict[int, int] = {}

    def explored(self, d: int) -> None:
        self.states[d] = self.states.get(d, 0) + 1

    def matched(self, d: int) -> None:
        self.match_calls[d] = self.match_calls.get(d, 0) + 1

    def merge(self, other: "_Diag") -> "_Diag":
        for d, c in other.states.items():
            self.states[d] = self.states.get(d, 0) + c
        for d, c in other.match_calls.items():
            self.match_calls[d] = self.match_calls.get(d, 0) + c
        return self

    def as_dict(self, wall_time: float) -> dict:
        return {
            "strategy": "per-node" if self.per_node else "leaf-only",
            "states_per_level": dict(sorted(self.states.items())),
            "matching_calls_per_level": dict(sorted(self.match_calls.items())),
            "wall_time": wall_time,
        }
