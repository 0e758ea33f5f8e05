"""Network instance construction: topology, content catalog, and demand.

Builds the three inputs every other module consumes: a seeded power-law
router topology with an all-pairs hop matrix, a rank-ordered Zipf content
catalog, and the per-node per-object request-rate matrix.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "InvalidParameterError",
    "DisconnectedGraphError",
    "Topology",
    "Catalog",
    "DemandMatrix",
    "generate_power_law_topology",
    "all_pairs_hops",
    "bfs_next_hop",
    "shortest_path",
    "zipf_popularity",
    "build_demand",
    "save_topology",
    "load_topology",
    "catalog_to_csv",
    "demand_to_csv",
]


class InvalidParameterError(ValueError):
    """A construction parameter violates its precondition."""


class DisconnectedGraphError(ValueError):
    """Some node pair has no connecting path."""


@dataclass(eq=False)
class Topology:
    """Undirected connected router graph plus a virtual origin attachment.

    The origin server is not a member of the router set: it permanently
    holds every object, consumes no cache budget, and is reachable from
    router ``i`` at ``hop_matrix[i, origin_attach] + origin_penalty`` hops.
    """

    node_count: int
    edges: frozenset
    hop_matrix: np.ndarray
    origin_attach: int
    origin_penalty: int = 3

    def __post_init__(self):
        if self.node_count < 1:
            raise InvalidParameterError("node_count must be positive")
        if self.origin_penalty < 0:
            raise InvalidParameterError("origin_penalty must be nonnegative")
        if not (0 <= self.origin_attach < self.node_count):
            raise InvalidParameterError("origin_attach out of range")

    @property
    def origin_distances(self) -> np.ndarray:
        """Hop count from every router to the virtual origin."""
        return self.hop_matrix[:, self.origin_attach] + self.origin_penalty

    def degrees(self) -> np.ndarray:
        deg = np.zeros(self.node_count, dtype=int)
        for u, v in self.edges:
            deg[u] += 1
            deg[v] += 1
        return deg


@dataclass(eq=False)
class Catalog:
    """Content objects with sizes and rank-ordered Zipf popularity."""

    object_count: int
    sizes: np.ndarray
    alpha: float
    popularity: np.ndarray

    def __post_init__(self):
        if self.object_count < 1:
            raise InvalidParameterError("object_count must be positive")
        if np.any(self.sizes <= 0):
            raise InvalidParameterError("all object sizes must be positive")
        if abs(float(self.popularity.sum()) - 1.0) > 1e-9:
            raise InvalidParameterError("popularity must sum to 1")
        if np.any(np.diff(self.popularity) > 1e-12):
            raise InvalidParameterError("popularity must be non-increasing")

    @classmethod
    def uniform_sizes(cls, object_count: int, alpha: float, size: float = 1.0) -> "Catalog":
        pop = zipf_popularity(object_count, alpha)
        return cls(object_count, np.full(object_count, float(size)), alpha, pop)


@dataclass(eq=False)
class DemandMatrix:
    """Request rates per (router, object), in requests per epoch."""

    rates: np.ndarray

    def __post_init__(self):
        if np.any(self.rates < 0):
            raise InvalidParameterError("rates must be nonnegative")
        if not np.any(self.rates > 0):
            raise InvalidParameterError("at least one rate must be positive")


def _bfs_hops(adjacency: list, source: int) -> np.ndarray:
    n = len(adjacency)
    dist = np.full(n, -1, dtype=int)
    dist[source] = 0
    queue = deque([source])
    while queue:
        u = queue.popleft()
        for v in adjacency[u]:
            if dist[v] < 0:
                dist[v] = dist[u] + 1
                queue.append(v)
    return dist


def _adjacency(node_count: int, edges) -> list:
    adj = [[] for _ in range(node_count)]
    for u, v in sorted(edges):
        adj[u].append(v)
        adj[v].append(u)
    for nbrs in adj:
        nbrs.sort()
    return adj


def all_pairs_hops(node_count: int, edges) -> np.ndarray:
    """Shortest-path hop counts via BFS from every node.

    Raises DisconnectedGraphError if any pair is unreachable.
    """
    adj = _adjacency(node_count, edges)
    hop = np.zeros((node_count, node_count), dtype=int)
    for s in range(node_count):
        dist = _bfs_hops(adj, s)
        if np.any(dist < 0):
            raise DisconnectedGraphError(f"node {s} cannot reach every node")
        hop[s] = dist
    return hop


def bfs_next_hop(node_count: int, edges) -> np.ndarray:
    """next_hop[s, t] = first router on a shortest path from s to t.

    Deterministic: BFS expands neighbors in ascending index order, so the
    returned tree is the lexicographically first shortest-path tree.
    next_hop[s, s] = s.
    """
    adj = _adjacency(node_count, edges)
    nxt = np.empty((node_count, node_count), dtype=int)
    for s in range(node_count):
        parent = np.full(node_count, -1, dtype=int)
        parent[s] = s
        queue = deque([s])
        while queue:
            u = queue.popleft()
            for v in adj[u]:
                if parent[v] < 0:
                    parent[v] = u
                    queue.append(v)
        # walk parents to recover the first hop out of s
        for t in range(node_count):
            if parent[t] < 0:
                raise DisconnectedGraphError(f"node {s} cannot reach node {t}")
            u = t
            while parent[u] != s:
                u = parent[u]
            nxt[s, t] = u if t != s else s
    return nxt


def shortest_path(next_hop: np.ndarray, source: int, target: int) -> list:
    """Node sequence from source to target, endpoints included."""
    path = [source]
    u = source
    while u != target:
        u = int(next_hop[u, target])
        path.append(u)
    return path


def generate_power_law_topology(n: int, m_attach: int, seed: int) -> Topology:
    """Seeded preferential-attachment graph over ``n`` routers.

    Starts from a path over max(2, m_attach) seed nodes; each later node
    attaches ``m_attach`` distinct edges, targets drawn proportionally to
    current degree. The virtual origin attaches at the highest-degree
    router (ties broken toward the lowest index).
    """
    if m_attach < 1:
        raise InvalidParameterError("m_attach must be >= 1")
    if n < max(2, m_attach + 1):
        raise InvalidParameterError(f"n must be >= max(2, m_attach + 1) = {max(2, m_attach + 1)}")
    rng = np.random.default_rng(seed)
    seed_size = max(2, m_attach)
    edges = {(i, i + 1) for i in range(seed_size - 1)}
    # each node appears once per incident edge; sampling from this list is
    # sampling proportionally to degree
    stubs = []
    for u, v in sorted(edges):
        stubs.extend((u, v))
    for new in range(seed_size, n):
        targets: set = set()
        while len(targets) < m_attach:
            targets.add(stubs[rng.integers(len(stubs))])
        for t in sorted(targets):
            edges.add((t, new))
            stubs.extend((t, new))
    hop = all_pairs_hops(n, edges)
    deg = np.zeros(n, dtype=int)
    for u, v in edges:
        deg[u] += 1
        deg[v] += 1
    origin_attach = int(np.argmax(deg))  # argmax takes the lowest index on ties
    expected = (seed_size - 1) + (n - seed_size) * m_attach
    assert len(edges) == expected, "attachment rule fixes the edge count"
    return Topology(n, frozenset(edges), hop, origin_attach)


def zipf_popularity(m: int, alpha: float) -> np.ndarray:
    """Rank-ordered Zipf probabilities p_k proportional to k**(-alpha)."""
    if m < 1:
        raise InvalidParameterError("object count must be >= 1")
    if alpha < 0:
        raise InvalidParameterError("alpha must be nonnegative")
    ranks = np.arange(1, m + 1, dtype=float)
    weights = ranks ** (-alpha)
    return weights / weights.sum()


def build_demand(topology: Topology, catalog: Catalog, per_node_rate: float) -> DemandMatrix:
    """Spatially uniform demand: every router requests at the same total
    rate, split across objects by catalog popularity."""
    if per_node_rate <= 0:
        raise InvalidParameterError("per_node_rate must be positive")
    rates = np.tile(catalog.popularity * per_node_rate, (topology.node_count, 1))
    return DemandMatrix(rates)


# --- plain-text / CSV interchange -----------------------------------------

def save_topology(topology: Topology, path) -> None:
    """Edge-list text format: header 'nodes N origin A penalty P', then one
    'i j' pair per line."""
    with open(path, "w") as fh:
        fh.write(f"nodes {topology.node_count} origin {topology.origin_attach} "
                 f"penalty {topology.origin_penalty}\n")
        for u, v in sorted(topology.edges):
            fh.write(f"{u} {v}\n")


def load_topology(path) -> Topology:
    with open(path) as fh:
        header = fh.readline().split()
        if len(header) != 6 or header[0] != "nodes" or header[2] != "origin" or header[4] != "penalty":
            raise InvalidParameterError(f"bad topology header in {path}")
        n, origin, penalty = int(header[1]), int(header[3]), int(header[5])
        edges = set()
        for line in fh:
            if not line.strip():
                continue
            u, v = map(int, line.split())
            if u == v:
                raise InvalidParameterError("self-loop in edge list")
            edges.add((min(u, v), max(u, v)))
    hop = all_pairs_hops(n, edges)
    return Topology(n, frozenset(edges), hop, origin, penalty)


def catalog_to_csv(catalog: Catalog, path) -> None:
    with open(path, "w") as fh:
        fh.write("object,size,popularity\n")
        for k in range(catalog.object_count):
            fh.write(f"{k},{float(catalog.sizes[k])!r},{float(catalog.popularity[k])!r}\n")


def demand_to_csv(demand: DemandMatrix, path) -> None:
    n, m = demand.rates.shape
    with open(path, "w") as fh:
        fh.write("node,object,rate\n")
        for i in range(n):
            for k in range(m):
                fh.write(f"{i},{k},{float(demand.rates[i, k])!r}\n")
