"""Grid-level matching feasibility and exact bottleneck-distance oracles.

Feasibility between two same-level grid multisets is decided on a small
flow network: one source per stored grid point, one sink per query grid
point, and a center node per grid cell that routes flow between the
corners of that cell.  A standard blocking-flow max-flow (Dinic) solves
it; the value equals the maximum capacitated matching under shared-cell
adjacency.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

from .geometry import GridDistribution, GridPoint, PointSet, delta, l1_dist

_INF = 1 << 60


class SizeMismatchError(ValueError):
    pass


# ---------------------------------------------------------------------------
# Flow network construction (geometry offsets are metadata only)
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class FlowNode:
    kind: str  # source | sink | grid_store | grid_query | center | super_source | super_sink
    grid: GridPoint | None
    pos: tuple[float, float]


@dataclass
class FlowNetwork:
    level: int
    nodes: list[FlowNode]
    edges: list[tuple[int, int, int]]  # (u, v, capacity); _INF marks unlimited
    source: int
    sink: int
    store_total: int
    query_total: int

    def debug_text(self) -> str:
        lines = [f"# flow network, level {self.level}"]
        for i, node in enumerate(self.nodes):
            g = f" grid=({node.grid.ix},{node.grid.iy})" if node.grid else ""
            lines.append(f"node {i} {node.kind} pos=({node.pos[0]:.6g},{node.pos[1]:.6g}){g}")
        for u, v, cap in self.edges:
            c = "inf" if cap >= _INF else str(cap)
            lines.append(f"edge {u} -> {v} cap={c}")
        return "\n".join(lines)


def _incident_cells(ix: int, iy: int, scale: int) -> list[tuple[int, int]]:
    cells = []
    for cx in (ix - 1, ix):
        if 0 <= cx <= scale - 1:
            for cy in (iy - 1, iy):
                if 0 <= cy <= scale - 1:
                    cells.append((cx, cy))
    return cells


def build_flow_network(F: GridDistribution, GQ: GridDistribution) -> FlowNetwork:
    """Cell-center network between a stored multiset F and a query multiset.

    Stored and query occurrences of the same grid point get separate nodes
    so flow cannot pass through a shared corner into a non-adjacent cell.
    Source/sink offsets of delta/3 follow the planar-embedding description
    and carry no combinatorial content.
    """
    if F.level != GQ.level:
        raise ValueError(f"level mismatch: {F.level} vs {GQ.level}")
    d = F.level
    step = delta(d)
    off = step / 3.0
    scale = 1 << (d - 1)

    nodes: list[FlowNode] = []
    edges: list[tuple[int, int, int]] = []

    def add(kind: str, grid: GridPoint | None, pos: tuple[float, float]) -> int:
        nodes.append(FlowNode(kind, grid, pos))
        return len(nodes) - 1

    src = add("super_source", None, (-0.25, 0.5))
    snk = add("super_sink", None, (1.25, 0.5))

    cell_nodes: dict[tuple[int, int], int] = {}

    def cell_node(cx: int, cy: int) -> int:
        idx = cell_nodes.get((cx, cy))
        if idx is None:
            pos = ((cx + 0.5) * step, (cy + 0.5) * step)
            idx = add("center", None, pos)
            cell_nodes[(cx, cy)] = idx
        return idx

    for g, count in sorted(F.counts.items()):
        x, y = g.coords()
        o_p = add("source", g, (x, y + off))
        g_f = add("grid_store", g, (x, y))
        edges.append((src, o_p, count))
        edges.append((o_p, g_f, count))
        for cx, cy in _incident_cells(g.ix, g.iy, scale):
            edges.append((g_f, cell_node(cx, cy), _INF))

    for g, count in sorted(GQ.counts.items()):
        x, y = g.coords()
        g_q = add("grid_query", g, (x, y))
        i_q = add("sink", g, (x, y - off))
        edges.append((g_q, i_q, count))
        edges.append((i_q, snk, count))
        for cx, cy in _incident_cells(g.ix, g.iy, scale):
            edges.append((cell_node(cx, cy), g_q, _INF))

    return FlowNetwork(
        level=d,
        nodes=nodes,
        edges=edges,
        source=src,
        sink=snk,
        store_total=F.total(),
        query_total=GQ.total(),
    )


# ---------------------------------------------------------------------------
# Dinic max flow
# ---------------------------------------------------------------------------


class _Dinic:
    def __init__(self, n: int):
        self.n = n
        self.graph: list[list[list[int]]] = [[] for _ in range(n)]  # [to, cap, rev]

    def add_edge(self, u: int, v: int, cap: int) -> int:
        self.graph[u].append([v, cap, len(self.graph[v])])
        self.graph[v].append([u, 0, len(self.graph[u]) - 1])
        return len(self.graph[u]) - 1

    def max_flow(self, s: int, t: int, stop_at: int | None = None) -> int:
        flow = 0
        limit = _INF if stop_at is None else stop_at
        while flow < limit:
            level = self._bfs(s, t)
            if level is None:
                break
            it = [0] * self.n
            while flow < limit:
                pushed = self._dfs(s, t, limit - flow, level, it)
                if not pushed:
                    break
                flow += pushed
        return flow

    def _bfs(self, s: int, t: int) -> list[int] | None:
        level = [-1] * self.n
        level[s] = 0
        queue = [s]
        for u in queue:
            for e in self.graph[u]:
                if e[1] > 0 and level[e[0]] < 0:
                    level[e[0]] = level[u] + 1
                    queue.append(e[0])
        return level if level[t] >= 0 else None

    def _dfs(self, u: int, t: int, up: int, level: list[int], it: list[int]) -> int:
        if u == t:
            return up
        while it[u] < len(self.graph[u]):
            e = self.graph[u][it[u]]
            v = e[0]
            if e[1] > 0 and level[v] == level[u] + 1:
                pushed = self._dfs(v, t, min(up, e[1]), level, it)
                if pushed:
                    e[1] -= pushed
                    self.graph[v][e[2]][1] += pushed
                    return pushed
            it[u] += 1
        return 0


def solve_max_flow(net: FlowNetwork, stop_at: int | None = None
                   ) -> tuple[int, list[int]]:
    """Max flow on a built network; returns (value, per-edge flow)."""
    dinic = _Dinic(len(net.nodes))
    handles = [dinic.add_edge(u, v, cap) for u, v, cap in net.edges]
    value = dinic.max_flow(net.source, net.sink, stop_at)
    flows = [
        net.edges[i][2] - dinic.graph[net.edges[i][0]][h][1]
        if net.edges[i][2] < _INF
        else _INF - dinic.graph[net.edges[i][0]][h][1]
        for i, h in enumerate(handles)
    ]
    return value, flows


@dataclass
class MatchResult:
    flow_value: int
    assignment: list[tuple[GridPoint, GridPoint, int]] = field(default_factory=list)


def max_matching(F: GridDistribution, GQ: GridDistribution) -> MatchResult:
    """Maximum cell-adjacent matching between two same-level multisets."""
    net = build_flow_network(F, GQ)
    value, flows = solve_max_flow(net)
    # Pair cell inflows with cell outflows; all corners of one cell are
    # mutually adjacent so any within-cell pairing is valid.
    into: dict[int, list[tuple[GridPoint, int]]] = {}
    outof: dict[int, list[tuple[GridPoint, int]]] = {}
    for (u, v, cap), f in zip(net.edges, flows):
        if f <= 0:
            continue
        if net.nodes[v].kind == "center" and net.nodes[u].kind == "grid_store":
            into.setdefault(v, []).append((net.nodes[u].grid, f))
        elif net.nodes[u].kind == "center" and net.nodes[v].kind == "grid_query":
            outof.setdefault(u, []).append((net.nodes[v].grid, f))
    assignment: list[tuple[GridPoint, GridPoint, int]] = []
    for c, sources in into.items():
        sinks = outof.get(c, [])
        si = 0
        for gp, units in sources:
            while units > 0 and si < len(sinks):
                gq, avail = sinks[si]
                take = min(units, avail)
                assignment.append((gp, gq, take))
                units -= take
                if avail - take == 0:
                    si += 1
                else:
                    sinks[si] = (gq, avail - take)
    return MatchResult(value, assignment)


def matching_flow_value(
    store: dict[tuple[int, int], int],
    query: dict[tuple[int, int], int],
    level: int,
    stop_at: int | None = None,
) -> int:
    """Lean feasibility kernel used by index queries (no metadata objects)."""
    scale = 1 << (level - 1)
    n = 2
    f_idx: dict[tuple[int, int], int] = {}
    q_idx: dict[tuple[int, int], int] = {}
    cells: dict[tuple[int, int], int] = {}
    for gp in store:
        f_idx[gp] = n
        n += 1
    for gq in query:
        q_idx[gq] = n
        n += 1
    # pre-scan cells so node count is known before wiring
    for gp in store:
        for cell in _incident_cells(gp[0], gp[1], scale):
            if cell not in cells:
                cells[cell] = n
                n += 1
    dinic = _Dinic(n)
    for gp, count in store.items():
        dinic.add_edge(0, f_idx[gp], count)
        for cell in _incident_cells(gp[0], gp[1], scale):
            dinic.add_edge(f_idx[gp], cells[cell], _INF)
    for gq, count in query.items():
        dinic.add_edge(q_idx[gq], 1, count)
        for cell in _incident_cells(gq[0], gq[1], scale):
            ci = cells.get(cell)
            if ci is not None:
                dinic.add_edge(ci, q_idx[gq], _INF)
    return dinic.max_flow(0, 1, stop_at)


# ---------------------------------------------------------------------------
# Exact bottleneck oracles
# ---------------------------------------------------------------------------


def _hopcroft_karp(adj: Sequence[Sequence[int]], n_left: int, n_right: int) -> int:
    """Maximum bipartite matching size (BFS/DFS phase algorithm)."""
    match_l = [-1] * n_left
    match_r = [-1] * n_right
    result = 0
    while True:
        dist = [-1] * n_left
        queue = [u for u in range(n_left) if match_l[u] < 0]
        for u in queue:
            dist[u] = 0
        found = False
        for u in queue:
            for v in adj[u]:
                w = match_r[v]
                if w < 0:
                    found = True
                elif dist[w] < 0:
                    dist[w] = dist[u] + 1
                    queue.append(w)
        if not found:
            return result

        def try_augment(u: int) -> bool:
            for v in adj[u]:
                w = match_r[v]
                if w < 0 or (dist[w] == dist[u] + 1 and try_augment(w)):
                    match_l[u] = v
                    match_r[v] = u
                    return True
            dist[u] = -1
            return False

        for u in range(n_left):
            if match_l[u] < 0 and try_augment(u):
                result += 1


def exact_bottleneck(P: PointSet, Q: PointSet) -> float:
    """Exact d_B via binary search over the pairwise-distance set.

    Each candidate threshold is tested with a maximum bipartite matching;
    the optimum is always one of the n^2 pairwise L1 distances, so no
    epsilon tolerance is involved.
    """
    if len(P) != len(Q):
        raise SizeMismatchError(f"|P|={len(P)} != |Q|={len(Q)}")
    n = len(P)
    dist = [[l1_dist(p, q) for q in Q.points] for p in P.points]
    candidates = sorted({dist[i][j] for i in range(n) for j in range(n)})

    def feasible(t: float) -> bool:
        adj = [
            [j for j in range(n) if dist[i][j] <= t] for i in range(n)
        ]
        return _hopcroft_karp(adj, n, n) == n

    lo, hi = 0, len(candidates) - 1
    while lo < hi:
        mid = (lo + hi) // 2
        if feasible(candidates[mid]):
            hi = mid
        else:
            lo = mid + 1
    return candidates[lo]


def brute_force_bottleneck(P: PointSet, Q: PointSet) -> float:
    """Exhaustive minimum over all bijections (branch and bound); n <= 8."""
    if len(P) != len(Q):
        raise SizeMismatchError(f"|P|={len(P)} != |Q|={len(Q)}")
    n = len(P)
    if n > 8:
        raise ValueError("brute force oracle is limited to n <= 8")
    dist = [[l1_dist(p, q) for q in Q.points] for p in P.points]
    best = float("inf")
    used = [False] * n

    def recurse(i: int, cur_max: float) -> None:
        nonlocal best
        if cur_max >= best:
            return
        if i == n:
            best = cur_max
            return
        row = dist[i]
        for j in range(n):
            if not used[j] and row[j] < best:
                used[j] = True
                recurse(i + 1, cur_max if cur_max >= row[j] else row[j])
                used[j] = False

    recurse(0, 0.0)
    return best
