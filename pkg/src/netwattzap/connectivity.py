"""Grid-to-grid connectivity graph and all-pairs max-flow machinery.

Nodes are grids; an edge's capacity is the count of IP links whose two
endpoints map to the two grids (same-grid links are excluded). Max flow
uses Edmonds-Karp on the undirected graph; all-pairs values come from a
Gomory-Hu tree built with Gusfield's method, one max-flow call per
non-root node, processed in sorted node order so outputs are
deterministic. Disconnected inputs produce a forest; cross-component
pairs have flow 0.
"""

from __future__ import annotations

import csv
import io
from collections import deque
from dataclasses import dataclass
from typing import Iterable, Iterator, Mapping

from .errors import AllNodesFailed, UnknownNode


@dataclass(frozen=True)
class WasgGraph:
    """Undirected graph with positive integer capacities, no self-loops."""

    nodes: frozenset[str]
    edges: Mapping[tuple[str, str], int]

    def __post_init__(self) -> None:
        for (u, v), capacity in self.edges.items():
            if u == v:
                raise ValueError(f"self-loop on {u!r}")
            if u > v:
                raise ValueError(f"edge key ({u!r}, {v!r}) not in sorted order")
            if u not in self.nodes or v not in self.nodes:
                raise ValueError(f"edge ({u!r}, {v!r}) references unknown node")
            if not isinstance(capacity, int) or capacity <= 0:
                raise ValueError(f"edge ({u!r}, {v!r}) capacity {capacity!r} not a positive integer")

    def adjacency(self) -> dict[str, dict[str, int]]:
        adj: dict[str, dict[str, int]] = {n: {} for n in sorted(self.nodes)}
        for (u, v), capacity in sorted(self.edges.items()):
            adj[u][v] = capacity
            adj[v][u] = capacity
        return adj

    def average_degree(self) -> float:
        return 2 * len(self.edges) / len(self.nodes) if self.nodes else 0.0


def build_graph(
    pair_counts: Mapping[tuple[str, str], int],
    nodes: Iterable[str] | None = None,
) -> WasgGraph:
    """Build the grid graph from unordered pair counts.

    Same-grid entries and zero counts are dropped. ``nodes`` may add
    isolated grids beyond the edge endpoints.
    """
    edges: dict[tuple[str, str], int] = {}
    node_set = set(nodes) if nodes is not None else set()
    for (a, b), count in pair_counts.items():
        if a == b or count <= 0:
            continue
        key = (a, b) if a <= b else (b, a)
        edges[key] = edges.get(key, 0) + int(count)
        node_set.update(key)
    return WasgGraph(nodes=frozenset(node_set), edges=edges)


def _residual(g: WasgGraph) -> dict[str, dict[str, int]]:
    return g.adjacency()


def _bfs_augmenting_path(residual, s: str, t: str) -> dict[str, str] | None:
    parent: dict[str, str] = {s: s}
    queue = deque([s])
    while queue:
        u = queue.popleft()
        if u == t:
            break
        for v, capacity in residual[u].items():
            if capacity > 0 and v not in parent:
                parent[v] = u
                queue.append(v)
    return parent if t in parent else None


def min_cut(g: WasgGraph, s: str, t: str) -> tuple[int, frozenset[str]]:
    """Value of the minimum s-t cut and the s-side node set.

    Raises:
        UnknownNode: s or t not in the graph.
        ValueError: s == t.
    """
    if s not in g.nodes:
        raise UnknownNode(f"no node {s!r}")
    if t not in g.nodes:
        raise UnknownNode(f"no node {t!r}")
    if s == t:
        raise ValueError("source and sink must differ")
    residual = _residual(g)
    flow = 0
    while True:
        parent = _bfs_augmenting_path(residual, s, t)
        if parent is None:
            break
        bottleneck = None
        v = t
        while v != s:
            u = parent[v]
            c = residual[u][v]
            bottleneck = c if bottleneck is None else min(bottleneck, c)
            v = u
        v = t
        while v != s:
            u = parent[v]
            residual[u][v] -= bottleneck
            residual[v][u] = residual[v].get(u, 0) + bottleneck
            v = u
        flow += bottleneck
    reachable = {s}
    queue = deque([s])
    while queue:
        u = queue.popleft()
        for v, capacity in residual[u].items():
            if capacity > 0 and v not in reachable:
                reachable.add(v)
                queue.append(v)
    return flow, frozenset(reachable)


def max_flow(g: WasgGraph, s: str, t: str) -> int:
    """Maximum s-t flow; 0 when s and t lie in different components."""
    return min_cut(g, s, t)[0]


@dataclass(frozen=True)
class GomoryHuTree:
    """Weighted tree (forest, for disconnected inputs) encoding all-pairs min cuts.

    The minimum edge capacity on the tree path between two nodes equals
    their max flow in the source graph; nodes in different trees have
    flow 0.
    """

    nodes: frozenset[str]
    edges: tuple[tuple[str, str, int], ...]

    def _adjacency(self) -> dict[str, list[tuple[str, int]]]:
        adj: dict[str, list[tuple[str, int]]] = {n: [] for n in self.nodes}
        for u, v, w in self.edges:
            adj[u].append((v, w))
            adj[v].append((u, w))
        return adj

    def min_flow(self, s: str, t: str) -> int:
        """Minimum edge weight on the s-t tree path (0 if disconnected)."""
        if s not in self.nodes:
            raise UnknownNode(f"no node {s!r}")
        if t not in self.nodes:
            raise UnknownNode(f"no node {t!r}")
        if s == t:
            raise ValueError("source and sink must differ")
        adj = self._adjacency()
        best: dict[str, int] = {s: 0}
        queue = deque([s])
        while queue:
            u = queue.popleft()
            for v, w in adj[u]:
                if v not in best:
                    best[v] = w if u == s else min(best[u], w)
                    if v == t:
                        return best[v]
                    queue.append(v)
        return 0

    def all_pairs(self) -> Iterator[tuple[str, str, int]]:
        """All unordered pairs (u, v, flow), u < v, in sorted order."""
        ordered = sorted(self.nodes)
        adj = self._adjacency()
        for i, s in enumerate(ordered):
            # One BFS per source carries the running path minimum.
            best: dict[str, int] = {s: 0}
            queue = deque([s])
            while queue:
                u = queue.popleft()
                for v, w in adj[u]:
                    if v not in best:
                        best[v] = w if u == s else min(best[u], w)
                        queue.append(v)
            for t in ordered[i + 1 :]:
                yield s, t, best.get(t, 0)


def _components(g: WasgGraph) -> list[list[str]]:
    adj = g.adjacency()
    seen: set[str] = set()
    components: list[list[str]] = []
    for start in sorted(g.nodes):
        if start in seen:
            continue
        comp = [start]
        seen.add(start)
        queue = deque([start])
        while queue:
            u = queue.popleft()
            for v in adj[u]:
                if v not in seen:
                    seen.add(v)
                    comp.append(v)
                    queue.append(v)
        components.append(sorted(comp))
    return components


def gomory_hu(g: WasgGraph) -> GomoryHuTree:
    """Gusfield's construction: |V|-1 max-flow calls per connected component."""
    edges: list[tuple[str, str, int]] = []
    for comp in _components(g):
        if len(comp) == 1:
            continue
        root = comp[0]
        parent = {n: root for n in comp}
        weight: dict[str, int] = {}
        for s in comp[1:]:
            t = parent[s]
            value, source_side = min_cut(g, s, t)
            weight[s] = value
            for other in comp:
                if other != s and other in source_side and parent[other] == t:
                    parent[other] = s
            grand = parent[t]
            if grand != t and grand in source_side:
                # The cut also separates t from its parent: s takes over
                # t's tree edge and t hangs off s instead.
                parent[s] = grand
                parent[t] = s
                weight[s] = weight[t]
                weight[t] = value
        for n in comp[1:]:
            u, v = sorted((n, parent[n]))
            edges.append((u, v, weight[n]))
    return GomoryHuTree(nodes=g.nodes, edges=tuple(sorted(edges)))


def subgraph(g: WasgGraph, keep: Iterable[str]) -> WasgGraph:
    """Induced subgraph on the kept nodes."""
    kept = frozenset(keep) & g.nodes
    edges = {key: c for key, c in g.edges.items() if key[0] in kept and key[1] in kept}
    return WasgGraph(nodes=kept, edges=edges)


@dataclass(frozen=True)
class PairReduction:
    u: str
    v: str
    flow_before: int
    flow_after: int
    reduction: float


@dataclass
class FlowReductionReport:
    """Mean max-flow reduction over surviving pairs after node failures."""

    failed: tuple[str, ...]
    mean_reduction: float
    pairs: tuple[PairReduction, ...]

    def to_dict(self) -> dict:
        return {
            "failed": list(self.failed),
            "mean_reduction": self.mean_reduction,
            "pairs": [
                {
                    "u": p.u,
                    "v": p.v,
                    "flow_before": p.flow_before,
                    "flow_after": p.flow_after,
                    "reduction": p.reduction,
                }
                for p in self.pairs
            ],
        }


def flow_reduction(g: WasgGraph, failed: Iterable[str]) -> FlowReductionReport:
    """Remove failed nodes and report per-pair and mean max-flow reduction.

    Pairs whose before-failure flow is 0 are excluded from the mean, as
    are pairs touching a failed node; with no qualifying pair the mean
    is 0.0 over an empty table. Reductions are clamped to [0, 1].

    Raises:
        AllNodesFailed: when no graph node survives.
    """
    failed_set = frozenset(failed) & g.nodes
    surviving = sorted(g.nodes - failed_set)
    if not surviving:
        raise AllNodesFailed("failure scenario removes every connectivity-graph node")

    before_tree = gomory_hu(g)
    after_tree = gomory_hu(subgraph(g, surviving))

    pairs: list[PairReduction] = []
    total = 0.0
    for i, u in enumerate(surviving):
        for v in surviving[i + 1 :]:
            before = before_tree.min_flow(u, v)
            if before == 0:
                continue
            after = after_tree.min_flow(u, v)
            reduction = min(1.0, max(0.0, (before - after) / before))
            pairs.append(PairReduction(u=u, v=v, flow_before=before, flow_after=after, reduction=reduction))
            total += reduction
    mean = total / len(pairs) if pairs else 0.0
    return FlowReductionReport(failed=tuple(sorted(failed_set)), mean_reduction=mean, pairs=tuple(pairs))


def graph_to_csv(g: WasgGraph) -> str:
    """Edge list ``u,v,capacity`` in sorted order."""
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(["u", "v", "capacity"])
    for (u, v), capacity in sorted(g.edges.items()):
        writer.writerow([u, v, capacity])
    return out.getvalue()


def tree_to_csv(tree: GomoryHuTree) -> str:
    """Tree edge list ``u,v,capacity`` in sorted order."""
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(["u", "v", "capacity"])
    for u, v, capacity in tree.edges:
        writer.writerow([u, v, capacity])
    return out.getvalue()
