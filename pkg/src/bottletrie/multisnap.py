"""All-snap-roundings index: every candidate distribution stored per level.

Each stored point set contributes, at every level d up to d_max, the
canonical string of every distinct distribution obtainable by snapping
each point to one of its candidate cell corners.  A query checks, level
by level, whether the query's nearest-neighbor distribution is among the
stored candidate distributions; lookup cost is independent of the
database size, at the price of up to 4^n stored strings per set per
level.
"""

from __future__ import annotations

import itertools
import time
from dataclasses import dataclass, field

from .encoding import encode_distribution, encode_point
from .geometry import (
    GridDistribution,
    GridPoint,
    PointSet,
    delta,
    snap_candidates,
)
from .results import QueryResult
from .trie import Trie, TrieNode

DEFAULT_BUDGET = 1_000_000


class BudgetExceededError(ValueError):
    """Raised when a point set's snap enumeration exceeds the node budget."""

    code = "multisnap-budget-exceeded"

    def __init__(self, set_id: str, cost: int, budget: int):
        super().__init__(
            f"point set {set_id!r}: snap enumeration cost {cost} exceeds "
            f"budget {budget}"
        )
        self.set_id = set_id
        self.cost = cost
        self.budget = budget


@dataclass
class MultiSnapIndex:
    d_max: int = 20
    budget: int = DEFAULT_BUDGET
    tries: dict[int, Trie] = field(default_factory=dict)
    registry: dict[str, PointSet] = field(default_factory=dict)

    def insert(self, P: PointSet) -> None:
        n = len(P)
        cost = (4 ** n) * self.d_max
        if cost > self.budget:
            raise BudgetExceededError(P.id, cost, self.budget)
        if P.id in self.registry:
            raise ValueError(f"duplicate point set id {P.id!r}")
        trie = self.tries.get(n)
        if trie is None:
            trie = self.tries[n] = Trie(n, self.d_max)
        self._insert_levels(trie, P)
        self.registry[P.id] = P

    def _insert_levels(self, trie: Trie, P: PointSet) -> None:
        # Level-wise generation with deduplication: distributions at level
        # d are enumerated as sorted rank strings over the <= 4 candidate
        # corners per point; each new distinct distribution extends the
        # trie path of its one-level-coarser projection by one sorted
        # symbol column (the truncation property of the string encoding).
        #
        # This loop runs up to 4**n * d_max times per set, so keys are
        # bytes of candidate ranks: projecting a key to its parent and
        # mapping ranks to direction symbols are then single translate()
        # calls, and grouping/sorting stays in C.
        pid = P.id
        k = len(P.points)
        prev_nodes: dict[bytes, TrieNode] = {}
        prev_rank_of: dict[tuple[int, int], int] = {}
        node_cls = TrieNode
        for d in range(1, self.d_max + 1):
            per_point = [
                [(g.ix, g.iy) for g in snap_candidates(p, d)]
                for p in P.points
            ]
            distinct = sorted(
                {gp for cands in per_point for gp in cands},
                key=lambda gp: encode_point(GridPoint(d, gp[0], gp[1])),
            )
            if len(distinct) > 255:
                raise BudgetExceededError(pid, len(distinct), 255)
            rank_of = {gp: r for r, gp in enumerate(distinct)}
            idbytes = bytes(range(len(distinct)))
            sym_table = bytes.maketrans(idbytes, bytes(
                encode_point(GridPoint(d, gp[0], gp[1]))[-1] for gp in distinct
            ))
            # One-level coarsening of a grid index is a right shift; the
            # projection of a sorted rank key stays sorted because the
            # string prefix order is monotone in the full string order.
            parent_table = bytes.maketrans(idbytes, bytes(
                prev_rank_of[(gp[0] >> 1, gp[1] >> 1)] if d > 1 else 0
                for gp in distinct
            ))
            cand_ranks = [[rank_of[gp] for gp in cands] for cands in per_point]

            keys = {
                bytes(sorted(combo))
                for combo in itertools.product(*cand_ranks)
            }
            groups: dict[bytes, list[bytes]] = {}
            for key in keys:
                pkey = key.translate(parent_table)
                bucket = groups.get(pkey)
                if bucket is None:
                    groups[pkey] = [key]
                else:
                    bucket.append(key)

            cur_nodes: dict[bytes, TrieNode] = {}
            for pkey, bucket in groups.items():
                parent = trie.root if d == 1 else prev_nodes[pkey]
                bucket.sort()
                stack: list[TrieNode] = [parent] * k
                prev_key = b""
                for key in bucket:
                    syms = key.translate(sym_table)
                    lcp = 0
                    plen = len(prev_key)
                    while lcp < plen and key[lcp] == prev_key[lcp]:
                        lcp += 1
                    node = parent if lcp == 0 else stack[lcp - 1]
                    for i in range(lcp, k):
                        children = node.children
                        sym = syms[i]
                        child = children.get(sym)
                        if child is None:
                            child = node_cls.__new__(node_cls)
                            child.children = {}
                            child.depth = node.depth + 1
                            child.finishers = []
                            children[sym] = child
                        stack[i] = node = child
                    fin = node.finishers
                    if pid not in fin:
                        fin.append(pid)
                    cur_nodes[key] = node
                    prev_key = key
            prev_nodes = cur_nodes
            prev_rank_of = rank_of

    def query_nearest(self, Q: PointSet) -> QueryResult:
        """Per-level canonical string lookups, deepest contiguous hit wins."""
        start = time.perf_counter()
        n = len(Q)
        trie = self.tries.get(n)
        if trie is None:
            return QueryResult((), 0, diagnostics={"reason": "no cardinality match"})
        d_star = 0
        hits: list[str] = []
        levels_walked = 0
        for d in range(1, self.d_max + 1):
            dist = GridDistribution.from_points(Q.points, d)
            s = encode_distribution(dist)
            node, consumed = trie.walk(s.symbols)
            levels_walked = d
            if consumed < len(s.symbols) or not node.finishers:
                break
            d_star = d
            hits = list(node.finishers)
        if d_star == 0:
            return QueryResult((), 0, diagnostics={"reason": "no level-1 hit"})
        return QueryResult(
            ids=tuple(sorted(hits)),
            level=d_star,
            bound=3.0 * delta(d_star),
            claimed_bound=1.5 * delta(d_star),
            diagnostics={
                "levels_walked": levels_walked,
                "wall_time": time.perf_counter() - start,
            },
        )

    def node_count(self) -> int:
        return sum(t.node_count() for t in self.tries.values())
