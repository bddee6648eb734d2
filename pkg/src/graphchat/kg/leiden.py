"""Community detection: weighted modularity and a seeded Leiden implementation.

The algorithm follows the classic three-phase structure (queue-based local
moving, refinement inside each community, aggregation on the refined
partition) and optimizes weighted modularity with a resolution parameter.
All stochastic choices (visit order, refinement sampling) come from one
seeded generator, so a given seed always reproduces the same hierarchy.

The hierarchy is built top-down: a converged flat run over the whole graph
gives the coarsest level 0; each community is then re-clustered on its
induced subgraph, recursing while any community keeps splitting. That
construction makes the nesting invariant (every level-(n+1) community
sits inside exactly one level-n community) true by construction.
"""

from __future__ import annotations

import math
import random
import zlib
from collections import deque
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from ..errors import EmptyGraph, InvalidPartition

DEFAULT_RESOLUTION = 1.0
DEFAULT_MAX_LEVELS = 4

# Minimum strict improvement for a local move; keeps float noise from
# causing oscillation.
_GAIN_EPS = 1e-12

# Spread of the randomized refinement merge choice.
_REFINE_THETA = 1e-2


@dataclass(frozen=True)
class WeightedGraph:
    """Undirected weighted graph over hashable node ids, no self-loops."""

    nodes: tuple[str, ...]
    edges: dict[tuple[str, str], float]

    @staticmethod
    def build(nodes: Iterable[str], edges: dict[tuple[str, str], float]) -> "WeightedGraph":
        node_list = tuple(sorted(set(nodes)))
        node_set = set(node_list)
        canon: dict[tuple[str, str], float] = {}
        for (u, v), w in edges.items():
            if u == v:
                raise ValueError(f"self-loop at {u!r}")
            if u not in node_set or v not in node_set:
                raise ValueError(f"edge ({u!r},{v!r}) references unknown node")
            if w <= 0:
                raise ValueError(f"edge ({u!r},{v!r}) must have positive weight")
            key = (u, v) if u < v else (v, u)
            canon[key] = canon.get(key, 0.0) + w
        return WeightedGraph(nodes=node_list, edges=canon)

    def total_weight(self) -> float:
        return sum(self.edges.values())

    def adjacency(self) -> dict[str, dict[str, float]]:
        adj: dict[str, dict[str, float]] = {n: {} for n in self.nodes}
        for (u, v), w in sorted(self.edges.items()):
            adj[u][v] = w
            adj[v][u] = w
        return adj

    def subgraph(self, keep: Iterable[str]) -> "WeightedGraph":
        keep_set = set(keep)
        edges = {
            (u, v): w for (u, v), w in self.edges.items() if u in keep_set and v in keep_set
        }
        return WeightedGraph.build(sorted(keep_set), edges)


@dataclass(frozen=True)
class CommunityAssignment:
    """One community at one hierarchy level (level 0 = coarsest)."""

    level: int
    community_id: str
    members: frozenset[str]
    parent_id: str | None = None


@dataclass
class LeidenResult:
    assignments: list[CommunityAssignment]
    quality_logs: dict[str, list[float]]
    seed: int
    resolution: float

    def levels(self) -> list[int]:
        return sorted({a.level for a in self.assignments})

    def at_level(self, level: int) -> list[CommunityAssignment]:
        return [a for a in self.assignments if a.level == level]

    def membership(self, level: int) -> dict[str, str]:
        out: dict[str, str] = {}
        for a in self.at_level(level):
            for member in a.members:
                out[member] = a.community_id
        return out


def _as_weighted(graph) -> WeightedGraph:
    if isinstance(graph, WeightedGraph):
        return graph
    to_weighted = getattr(graph, "to_weighted", None)
    if to_weighted is None:
        raise TypeError(f"cannot interpret {type(graph).__name__} as a weighted graph")
    return to_weighted()


def modularity(graph, partition: Iterable[Iterable[str]], resolution: float = DEFAULT_RESOLUTION) -> float:
    """Weighted modularity of ``partition``: sum over communities of
    ``w_in/W - resolution * (deg/(2W))^2``.

    ``partition`` must cover every node exactly once.
    """
    wg = _as_weighted(graph)
    if resolution <= 0:
        raise ValueError("resolution must be > 0")
    blocks = [frozenset(block) for block in partition]
    seen: set[str] = set()
    for block in blocks:
        if block & seen:
            raise InvalidPartition(f"nodes assigned twice: {sorted(block & seen)}")
        seen |= block
    if seen != set(wg.nodes):
        missing = set(wg.nodes) - seen
        extra = seen - set(wg.nodes)
        raise InvalidPartition(f"partition mismatch; missing={sorted(missing)} extra={sorted(extra)}")

    total = wg.total_weight()
    if total == 0:
        raise EmptyGraph("modularity undefined for a graph with no edges")

    owner: dict[str, int] = {}
    for ci, block in enumerate(blocks):
        for node in block:
            owner[node] = ci

    w_in = [0.0] * len(blocks)
    deg = [0.0] * len(blocks)
    for (u, v), w in wg.edges.items():
        cu, cv = owner[u], owner[v]
        deg[cu] += w
        deg[cv] += w
        if cu == cv:
            w_in[cu] += w

    q = 0.0
    for ci in range(len(blocks)):
        q += w_in[ci] / total - resolution * (deg[ci] / (2.0 * total)) ** 2
    return q


# ---------------------------------------------------------------------------
# Flat (single-level) Leiden on an aggregate representation
# ---------------------------------------------------------------------------


@dataclass
class _Agg:
    """Aggregate graph: integer nodes, symmetric adjacency, self-loops.

    ``self_loop[i]`` counts once toward internal weight and twice toward
    ``degree[i]`` so that quality is preserved exactly under aggregation.
    """

    n: int
    adj: list[dict[int, float]]
    self_loop: list[float]
    degree: list[float]
    total: float
    members: list[list[str]] = field(default_factory=list)


def _initial_agg(wg: WeightedGraph) -> _Agg:
    order = {name: i for i, name in enumerate(wg.nodes)}
    n = len(wg.nodes)
    adj: list[dict[int, float]] = [dict() for _ in range(n)]
    for (u, v), w in sorted(wg.edges.items()):
        iu, iv = order[u], order[v]
        adj[iu][iv] = adj[iu].get(iv, 0.0) + w
        adj[iv][iu] = adj[iv].get(iu, 0.0) + w
    degree = [sum(neigh.values()) for neigh in adj]
    return _Agg(
        n=n,
        adj=adj,
        self_loop=[0.0] * n,
        degree=degree,
        total=wg.total_weight(),
        members=[[name] for name in wg.nodes],
    )


def _agg_quality(g: _Agg, comm: list[int], resolution: float) -> float:
    if g.total == 0:
        return 0.0
    w_in: dict[int, float] = {}
    deg: dict[int, float] = {}
    for v in range(g.n):
        c = comm[v]
        w_in[c] = w_in.get(c, 0.0) + g.self_loop[v]
        deg[c] = deg.get(c, 0.0) + g.degree[v]
        for u, w in g.adj[v].items():
            if u > v and comm[u] == c:
                w_in[c] += w
    q = 0.0
    two_w = 2.0 * g.total
    for c in w_in:
        q += w_in[c] / g.total - resolution * (deg[c] / two_w) ** 2
    return q


def _local_move(g: _Agg, comm: list[int], resolution: float, rng: random.Random) -> bool:
    """Queue-based local moving; mutates ``comm``. Returns True if any node moved."""
    if g.total == 0:
        return False
    deg_sum: dict[int, float] = {}
    size: dict[int, int] = {}
    for v in range(g.n):
        deg_sum[comm[v]] = deg_sum.get(comm[v], 0.0) + g.degree[v]
        size[comm[v]] = size.get(comm[v], 0) + 1
    next_label = max(comm) + 1 if comm else 0

    order = list(range(g.n))
    rng.shuffle(order)
    queue = deque(order)
    queued = [True] * g.n
    scale = 2.0 * g.total * g.total
    moved_any = False

    while queue:
        v = queue.popleft()
        queued[v] = False
        old = comm[v]
        deg_sum[old] -= g.degree[v]
        size[old] -= 1

        k_to: dict[int, float] = {}
        for u, w in g.adj[v].items():
            cu = comm[u]
            k_to[cu] = k_to.get(cu, 0.0) + w

        def gain(c: int) -> float:
            return k_to.get(c, 0.0) / g.total - resolution * g.degree[v] * deg_sum.get(c, 0.0) / scale

        stay_gain = gain(old)
        best_c = old
        best_gain = stay_gain
        for c in sorted(k_to):
            if c == old:
                continue
            gc = gain(c)
            if gc > best_gain + _GAIN_EPS:
                best_gain = gc
                best_c = c
        # Leaving for a fresh singleton community has gain 0.
        if 0.0 > best_gain + _GAIN_EPS and size[old] > 0:
            best_c = next_label
            next_label += 1
            best_gain = 0.0

        comm[v] = best_c
        deg_sum[best_c] = deg_sum.get(best_c, 0.0) + g.degree[v]
        size[best_c] = size.get(best_c, 0) + 1
        if best_c != old:
            moved_any = True
            for u in g.adj[v]:
                if comm[u] != best_c and not queued[u]:
                    queue.append(u)
                    queued[u] = True
    return moved_any


def _refine(g: _Agg, comm: list[int], resolution: float, rng: random.Random) -> list[int]:
    """Refined partition: singletons merged only within their community.

    A node merges only while still singleton, only into a target with
    positive quality gain, and both node and target must be well connected
    inside the enclosing community. The merge target is sampled among
    positive-gain candidates with weight exp(gain/theta).
    """
    refined = list(range(g.n))
    if g.total == 0:
        return refined
    ref_deg = g.degree[:]
    ref_size = [1] * g.n
    # Edge weight from each refined block to the rest of its community.
    communities: dict[int, list[int]] = {}
    for v in range(g.n):
        communities.setdefault(comm[v], []).append(v)

    scale = 2.0 * g.total * g.total
    for c in sorted(communities):
        nodes = communities[c]
        if len(nodes) < 2:
            continue
        comm_deg = sum(g.degree[v] for v in nodes)
        cut: dict[int, float] = {}
        k_within: dict[int, float] = {}
        for v in nodes:
            kv = sum(w for u, w in g.adj[v].items() if comm[u] == c)
            k_within[v] = kv
            cut[v] = kv

        def well_connected(block: int, block_deg: float) -> bool:
            threshold = resolution * block_deg * (comm_deg - block_deg) / (2.0 * g.total)
            return cut[block] >= threshold - _GAIN_EPS

        order = nodes[:]
        rng.shuffle(order)
        for v in order:
            if ref_size[refined[v]] > 1:
                continue
            if not well_connected(refined[v], ref_deg[refined[v]]):
                continue
            k_to: dict[int, float] = {}
            for u, w in g.adj[v].items():
                if comm[u] == c and refined[u] != refined[v]:
                    k_to[refined[u]] = k_to.get(refined[u], 0.0) + w
            candidates: list[tuple[int, float]] = []
            for block in sorted(k_to):
                if not well_connected(block, ref_deg[block]):
                    continue
                g_merge = k_to[block] / g.total - resolution * g.degree[v] * ref_deg[block] / scale
                if g_merge > _GAIN_EPS:
                    candidates.append((block, g_merge))
            if not candidates:
                continue
            target = _sample_weighted(candidates, rng)
            src = refined[v]
            refined[v] = target
            ref_deg[target] += g.degree[v]
            ref_size[target] += 1
            ref_size[src] -= 1
            cut[target] = cut[target] + cut[src] - 2.0 * k_to[target]
    return refined


def _sample_weighted(candidates: list[tuple[int, float]], rng: random.Random) -> int:
    if len(candidates) == 1:
        return candidates[0][0]
    g_max = max(g for _, g in candidates)
    weights = [math.exp((g - g_max) / _REFINE_THETA) for _, g in candidates]
    total = sum(weights)
    pick = rng.random() * total
    acc = 0.0
    for (block, _), w in zip(candidates, weights):
        acc += w
        if pick <= acc:
            return block
    return candidates[-1][0]


def _aggregate(g: _Agg, refined: list[int], comm: list[int]) -> tuple[_Agg, list[int]]:
    labels: dict[int, int] = {}
    for v in range(g.n):
        if refined[v] not in labels:
            labels[refined[v]] = len(labels)
    new_n = len(labels)
    new_adj: list[dict[int, float]] = [dict() for _ in range(new_n)]
    new_self = [0.0] * new_n
    new_members: list[list[str]] = [[] for _ in range(new_n)]
    new_comm = [0] * new_n

    for v in range(g.n):
        j = labels[refined[v]]
        new_self[j] += g.self_loop[v]
        new_members[j].extend(g.members[v])
        new_comm[j] = comm[v]
        for u, w in g.adj[v].items():
            if u <= v:
                continue
            ju = labels[refined[u]]
            if ju == j:
                new_self[j] += w
            else:
                new_adj[j][ju] = new_adj[j].get(ju, 0.0) + w
                new_adj[ju][j] = new_adj[ju].get(j, 0.0) + w

    new_degree = [2.0 * new_self[j] + sum(new_adj[j].values()) for j in range(new_n)]
    agg = _Agg(
        n=new_n,
        adj=new_adj,
        self_loop=new_self,
        degree=new_degree,
        total=g.total,
        members=new_members,
    )
    return agg, new_comm


def _split_disconnected(wg: WeightedGraph, blocks: list[list[str]]) -> list[list[str]]:
    """Split any disconnected community into its connected components.

    Splitting a disconnected block never lowers modularity (internal
    weight is unchanged, the squared-degree penalty only shrinks), so this
    is a safe final repair.
    """
    adj = wg.adjacency()
    out: list[list[str]] = []
    for block in blocks:
        remaining = set(block)
        while remaining:
            start = min(remaining)
            component = {start}
            frontier = deque([start])
            while frontier:
                node = frontier.popleft()
                for neigh in adj[node]:
                    if neigh in remaining and neigh not in component:
                        component.add(neigh)
                        frontier.append(neigh)
            out.append(sorted(component))
            remaining -= component
    return out


def leiden_flat(
    wg: WeightedGraph, resolution: float, seed: int
) -> tuple[list[list[str]], list[float]]:
    """One converged Leiden run; returns (communities, per-phase quality log)."""
    if not wg.nodes:
        raise EmptyGraph("cannot cluster an empty graph")
    rng = random.Random(seed)
    g = _initial_agg(wg)
    comm = list(range(g.n))
    quality_log: list[float] = []

    if g.total == 0:
        quality_log.append(0.0)
        return [[name] for name in wg.nodes], quality_log

    while True:
        _local_move(g, comm, resolution, rng)
        quality_log.append(_agg_quality(g, comm, resolution))
        n_comms = len(set(comm))
        if n_comms == g.n:
            break
        refined = _refine(g, comm, resolution, rng)
        if len(set(refined)) == g.n:
            break
        g, comm = _aggregate(g, refined, comm)

    grouped: dict[int, list[str]] = {}
    for v in range(g.n):
        grouped.setdefault(comm[v], []).extend(g.members[v])
    blocks = [sorted(members) for members in grouped.values()]
    repaired = _split_disconnected(wg, blocks)
    repaired.sort(key=lambda b: b[0])
    if len(repaired) != len(blocks):
        # Splitting strictly improves modularity, so the log stays monotone.
        quality_log.append(modularity(wg, repaired, resolution))
    return repaired, quality_log


def _subseed(seed: int, level: int, key: str) -> int:
    return (seed * 1_000_003 + level * 101 + zlib.crc32(key.encode("utf-8"))) % (2**31)


def leiden_partition(
    graph,
    resolution: float = DEFAULT_RESOLUTION,
    seed: int = 0,
    max_levels: int = DEFAULT_MAX_LEVELS,
) -> LeidenResult:
    """Hierarchical community detection. Level 0 is the coarsest partition;
    each deeper level re-clusters every community on its induced subgraph
    until nothing splits further (or ``max_levels`` is reached).
    """
    wg = _as_weighted(graph)
    if not wg.nodes:
        raise EmptyGraph("cannot cluster an empty graph")
    if max_levels < 1:
        raise ValueError("max_levels must be >= 1")

    quality_logs: dict[str, list[float]] = {}
    level0_blocks, log0 = leiden_flat(wg, resolution, seed)
    quality_logs["L0"] = log0

    levels: list[list[tuple[list[str], str | None]]] = [
        [(block, None) for block in level0_blocks]
    ]
    assignments: list[CommunityAssignment] = []
    ids_at_level: list[list[str]] = []

    for level_index, blocks in enumerate(levels):
        blocks_sorted = sorted(blocks, key=lambda bp: bp[0][0])
        ids = [f"L{level_index}.{i}" for i in range(len(blocks_sorted))]
        ids_at_level.append(ids)
        for cid, (members, parent) in zip(ids, blocks_sorted):
            assignments.append(
                CommunityAssignment(
                    level=level_index,
                    community_id=cid,
                    members=frozenset(members),
                    parent_id=parent,
                )
            )
        if level_index + 1 >= max_levels:
            break

        next_blocks: list[tuple[list[str], str | None]] = []
        any_split = False
        for cid, (members, _parent) in zip(ids, blocks_sorted):
            if len(members) >= 3:
                sub = wg.subgraph(members)
                sub_blocks, sub_log = leiden_flat(
                    sub, resolution, _subseed(seed, level_index + 1, members[0])
                )
                if len(sub_blocks) > 1:
                    quality_logs[cid] = sub_log
                    any_split = True
                    for sb in sub_blocks:
                        next_blocks.append((sb, cid))
                    continue
            next_blocks.append((members, cid))
        if not any_split:
            break
        levels.append(next_blocks)

    return LeidenResult(
        assignments=assignments,
        quality_logs=quality_logs,
        seed=seed,
        resolution=resolution,
    )


def check_nesting(result: LeidenResult) -> None:
    """Raise InvalidPartition if the hierarchy violates partition/nesting rules."""
    levels = result.levels()
    all_nodes: frozenset[str] | None = None
    for level in levels:
        blocks = result.at_level(level)
        seen: set[str] = set()
        for block in blocks:
            if block.members & seen:
                raise InvalidPartition(f"level {level}: overlapping communities")
            seen |= block.members
        if all_nodes is None:
            all_nodes = frozenset(seen)
        elif seen != all_nodes:
            raise InvalidPartition(f"level {level} does not cover the node set")
    by_id = {a.community_id: a for a in result.assignments}
    for a in result.assignments:
        if a.parent_id is not None:
            parent = by_id[a.parent_id]
            if not a.members <= parent.members:
                raise InvalidPartition(f"{a.community_id} not nested in {a.parent_id}")
