"""Shared helpers: tiny randomized instances sized for the exhaustive solver."""

import numpy as np

from cachenet.netmodel import Catalog, DemandMatrix, Topology, all_pairs_hops, zipf_popularity
from cachenet.optimizer import Instance


def random_connected_edges(rng, n):
    """Random spanning tree plus a few extra edges."""
    edges = set()
    for v in range(1, n):
        u = int(rng.integers(0, v))
        edges.add((u, v))
    extra = int(rng.integers(0, n))
    for _ in range(extra):
        u, v = rng.choice(n, size=2, replace=False)
        edges.add((min(u, v), max(u, v)))
    return frozenset(edges)


def random_instance(rng, n_max=4, m_max=5, c_max=4, unit_sizes=True):
    """Random tiny instance within the exact solver's guard."""
    n = int(rng.integers(2, n_max + 1))
    m = int(rng.integers(1, m_max + 1))
    while n * m > 20:
        m -= 1
    edges = random_connected_edges(rng, n)
    hop = all_pairs_hops(n, edges)
    topo = Topology(n, edges, hop, origin_attach=int(rng.integers(0, n)),
                    origin_penalty=int(rng.integers(0, 4)))
    alpha = float(rng.uniform(0, 1.5))
    sizes = np.ones(m) if unit_sizes else rng.integers(1, 3, size=m).astype(float)
    catalog = Catalog(m, sizes, alpha, zipf_popularity(m, alpha))
    rates = rng.uniform(0.0, 5.0, size=(n, m))
    rates[int(rng.integers(0, n)), int(rng.integers(0, m))] += 1.0  # keep demand nonzero
    demand = DemandMatrix(rates)
    c_sum = float(rng.integers(0, c_max + 1))
    return Instance(topo, catalog, demand, c_sum)
