"""Static unit-disk radio topology and min-hop routing."""

from __future__ import annotations

import math
import random
from dataclasses import dataclass

NodeId = int
Position = tuple[float, float]


class NoRouteError(Exception):
    """No path exists between the requested endpoints."""


@dataclass(frozen=True)
class Topology:
    """Immutable node layout plus the adjacency it induces.

    Two nodes are neighbors iff their euclidean distance is <= radio_range
    (the boundary counts). Links are symmetric and loss-free.
    """

    positions: tuple[Position, ...]
    radio_range: float
    adjacency: tuple[frozenset[NodeId], ...]

    @property
    def n(self) -> int:
        return len(self.positions)

    def neighbors(self, node: NodeId) -> frozenset[NodeId]:
        return self.adjacency[node]


def build_topology(positions: list[Position] | tuple[Position, ...], radio_range: float) -> Topology:
    """Compute the unit-disk adjacency for a fixed layout."""
    if radio_range <= 0:
        raise ValueError("radio_range must be positive")
    pts = tuple((float(x), float(y)) for x, y in positions)
    n = len(pts)
    nbrs: list[set[NodeId]] = [set() for _ in range(n)]
    for i in range(n):
        xi, yi = pts[i]
        for j in range(i + 1, n):
            xj, yj = pts[j]
            if math.dist((xi, yi), (xj, yj)) <= radio_range:
                nbrs[i].add(j)
                nbrs[j].add(i)
    return Topology(pts, float(radio_range), tuple(frozenset(s) for s in nbrs))


def random_layout(n: int, side: float, seed: int) -> tuple[Position, ...]:
    """n points drawn uniformly from the [0, side] x [0, side] square."""
    if n < 1:
        raise ValueError("need at least one node")
    rng = random.Random(f"layout:{seed}")
    return tuple((rng.uniform(0.0, side), rng.uniform(0.0, side)) for _ in range(n))


def hop_distances(topo: Topology, target: NodeId) -> list[float]:
    """BFS hop count from every node to target; math.inf where unreachable."""
    dist = [math.inf] * topo.n
    dist[target] = 0
    frontier = [target]
    while frontier:
        nxt: list[NodeId] = []
        for u in frontier:
            for v in topo.adjacency[u]:
                if dist[v] == math.inf:
                    dist[v] = dist[u] + 1
                    nxt.append(v)
        frontier = nxt
    return dist


def shortest_path(topo: Topology, src: NodeId, dst: NodeId) -> tuple[NodeId, ...]:
    """Min-hop route from src to dst as a node-id sequence.

    Among equal-length routes the lexicographically smallest id sequence is
    returned, so routing is reproducible. Raises NoRouteError when the
    endpoints are disconnected.
    """
    if not (0 <= src < topo.n and 0 <= dst < topo.n):
        raise ValueError(f"node id out of range: src={src} dst={dst}")
    if src == dst:
        return (src,)
    dist = hop_distances(topo, dst)
    if dist[src] == math.inf:
        raise NoRouteError(f"no route from {src} to {dst}")
    # walk greedily toward dst, always taking the smallest id that still
    # lies on some min-hop route
    route = [src]
    cur = src
    while cur != dst:
        cur = min(v for v in topo.adjacency[cur] if dist[v] == dist[cur] - 1)
        route.append(cur)
    return tuple(route)
