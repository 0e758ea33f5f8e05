"""Request-driven simulation of the caching switch fabric.

Routers hold caches (pinned, LRU, or LFU), requests fetch from the nearest
copy over shortest paths, and a telemetry log records per (node, object)
request counts, hits, and served hops. The leave-copy-everywhere schemes
insert the fetched object at every router on the reply path.
"""

from __future__ import annotations

import csv
from collections import OrderedDict
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from . import analytics
from .netmodel import (
    Catalog,
    DemandMatrix,
    InvalidParameterError,
    Topology,
    bfs_next_hop,
    build_demand,
    generate_power_law_topology,
    shortest_path,
)
from .optimizer import (
    ORIGIN,
    Instance,
    Placement,
    check_feasibility,
)

__all__ = [
    "Policy",
    "Scheme",
    "SimConfig",
    "Cache",
    "TelemetryLog",
    "NetworkState",
    "EpochMetrics",
    "MetricsReport",
    "handle_request",
    "apply_placement",
    "run_epoch",
    "run_simulation",
    "metrics_to_csv",
    "telemetry_to_csv",
]


class Policy(Enum):
    PINNED = "pinned"
    LRU = "lru"
    LFU = "lfu"


class Scheme(Enum):
    OPTIMIZED = "OPTIMIZED"
    LCE_LRU = "LCE_LRU"
    LCE_LFU = "LCE_LFU"
    RANDOM_STATIC = "RANDOM_STATIC"
    NO_CACHE = "NO_CACHE"


@dataclass
class SimConfig:
    scheme: Scheme
    nodes: int = 64
    objects: int = 200
    alpha: float = 0.8
    m_attach: int = 2
    origin_penalty: int = 3
    per_node_rate: float = 1.0
    cache_fraction: float = 0.05
    requests_per_epoch: int = 10_000
    epochs: int = 12
    warmup_epochs: int = 2
    seed: int = 0
    deterministic: bool = False
    smoothing: float = 1.0

    def __post_init__(self):
        if isinstance(self.scheme, str):
            self.scheme = Scheme(self.scheme)
        if self.requests_per_epoch < 1:
            raise InvalidParameterError("requests_per_epoch must be positive")
        if self.epochs < 1:
            raise InvalidParameterError("epochs must be positive")
        if not 0 <= self.warmup_epochs < self.epochs:
            raise InvalidParameterError("warmup_epochs must be < epochs")
        if not 0 < self.cache_fraction <= 1:
            raise InvalidParameterError("cache_fraction must be in (0, 1]")
        if self.scheme is not Scheme.NO_CACHE and self.cache_fraction * self.objects < 1:
            raise InvalidParameterError("cache_fraction * objects must be >= 1 unless NO_CACHE")

    @property
    def slots_per_node(self) -> int:
        """Per-router cache size in objects: the configured fraction of the catalog."""
        if self.scheme is Scheme.NO_CACHE:
            return 0
        return int(round(self.cache_fraction * self.objects))

    @property
    def c_sum(self) -> int:
        return self.slots_per_node * self.nodes


class Cache:
    """Single-router cache; sizes are in the catalog's size units."""

    def __init__(self, capacity: float, policy: Policy):
        self.capacity = float(capacity)
        self.policy = policy
        # key -> size for PINNED/LRU (OrderedDict gives recency order),
        # key -> [freq, size] for LFU
        self._items: OrderedDict = OrderedDict()
        self.used = 0.0

    def __contains__(self, obj: int) -> bool:
        return obj in self._items

    def residents(self) -> list:
        return list(self._items)

    def touch(self, obj: int) -> None:
        """Record an access to a resident object (hit bookkeeping)."""
        if self.policy is Policy.LRU:
            self._items.move_to_end(obj)
        elif self.policy is Policy.LFU:
            self._items[obj][0] += 1

    def insert(self, obj: int, size: float) -> list:
        """Insert ``obj``, evicting per policy; returns the evicted objects.

        PINNED caches never insert dynamically. Objects larger than the
        whole cache are not admitted.
        """
        if self.policy is Policy.PINNED or obj in self._items or size > self.capacity:
            return []
        evicted = []
        while self.used + size > self.capacity:
            victim = self._select_victim()
            entry = self._items.pop(victim)
            self.used -= entry if self.policy is Policy.LRU else entry[1]
            evicted.append(victim)
        self._items[obj] = size if self.policy is Policy.LRU else [1, size]
        self.used += size
        return evicted

    def _select_victim(self) -> int:
        if self.policy is Policy.LRU:
            return next(iter(self._items))
        # LFU: lowest frequency, ties toward the lowest object id
        return min(self._items, key=lambda o: (self._items[o][0], o))

    def pin(self, objects, sizes) -> None:
        """Replace contents with a fixed resident set (policy becomes PINNED)."""
        self.policy = Policy.PINNED
        self._items = OrderedDict((int(o), float(sizes[o])) for o in objects)
        self.used = float(sum(self._items.values()))
        if self.used > self.capacity + 1e-9:
            raise InvalidParameterError("pinned residents exceed capacity")


@dataclass(eq=False)
class TelemetryLog:
    """Per (node, object) counters gathered by the switch monitors."""

    request_count: np.ndarray
    hit_count: np.ndarray
    hops_accumulated: np.ndarray

    @classmethod
    def empty(cls, n: int, m: int) -> "TelemetryLog":
        return cls(np.zeros((n, m), dtype=np.int64),
                   np.zeros((n, m), dtype=np.int64),
                   np.zeros((n, m), dtype=np.int64))

    @property
    def total_requests(self) -> int:
        return int(self.request_count.sum())


class NetworkState:
    """Mutable simulation state: caches, holder index, and telemetry."""

    def __init__(self, instance: Instance, capacities, policy: Policy):
        self.instance = instance
        n, m = instance.n, instance.m
        self.caches = [Cache(capacities[i], policy) for i in range(n)]
        self.holders = [set() for _ in range(m)]
        self.telemetry = TelemetryLog.empty(n, m)
        self.next_hop = bfs_next_hop(instance.topology.node_count, instance.topology.edges)
        # python-native copies for the per-request fast path
        self._hop = instance.topology.hop_matrix.tolist()
        self._dorg = [int(d) for d in instance.topology.origin_distances]
        self._sizes = instance.catalog.sizes.tolist()
        self._pinned_resident = None  # bool N x M, set while all caches are pinned

    def all_pinned(self) -> bool:
        return all(c.policy is Policy.PINNED for c in self.caches)

    def resident_matrix(self) -> np.ndarray:
        n, m = self.instance.n, self.instance.m
        x = np.zeros((n, m), dtype=bool)
        for k, hs in enumerate(self.holders):
            for i in hs:
                x[i, k] = True
        return x


def apply_placement(state: NetworkState, placement: Placement) -> None:
    """Install a controller placement: pin residents, set budgets as
    capacities, discard previous contents, keep telemetry."""
    report = check_feasibility(placement, state.instance)
    if not report.ok:
        raise InvalidParameterError(f"infeasible placement: {report.violations}")
    sizes = state.instance.catalog.sizes
    for i, cache in enumerate(state.caches):
        cache.capacity = float(placement.budgets[i])
        cache.pin(np.flatnonzero(placement.x[i]), sizes)
    for k in range(state.instance.m):
        state.holders[k] = set(int(i) for i in np.flatnonzero(placement.x[:, k]))
    state._pinned_resident = placement.x.copy()


def _nearest_supplier(state: NetworkState, node: int, obj: int):
    """(supplier, hops) for a fetch; ties prefer routers, then low indexes."""
    hop_row = state._hop[node]
    best_j = ORIGIN
    best_d = state._dorg[node]
    for j in sorted(state.holders[obj]):
        d = hop_row[j]
        if d < best_d or (d == best_d and best_j == ORIGIN):
            best_d = d
            best_j = j
    return best_j, best_d


def handle_request(state: NetworkState, node: int, obj: int) -> int:
    """Serve one request; returns hops traversed (0 on a local hit).

    Leave-copy-everywhere policies insert the object at every router on
    the reply path, evicting per the cache policy.
    """
    tele = state.telemetry
    tele.request_count[node, obj] += 1
    cache = state.caches[node]
    if obj in cache:
        cache.touch(obj)
        tele.hit_count[node, obj] += 1
        return 0
    supplier, hops = _nearest_supplier(state, node, obj)
    tele.hops_accumulated[node, obj] += hops
    if cache.policy in (Policy.LRU, Policy.LFU):
        size = state._sizes[obj]
        tail = state.instance.topology.origin_attach if supplier == ORIGIN else supplier
        for stop in shortest_path(state.next_hop, node, tail):
            evicted = state.caches[stop].insert(obj, size)
            if obj in state.caches[stop]:
                state.holders[obj].add(stop)
            for victim in evicted:
                state.holders[victim].discard(stop)
    return hops


@dataclass
class EpochMetrics:
    avg_hops: float
    hit_ratio: float
    requests: int


def _pinned_epoch(state: NetworkState, requesters: np.ndarray, objects: np.ndarray) -> EpochMetrics:
    """Vectorized epoch for static placements (no cache mutation)."""
    from .optimizer import service_distances

    x = state._pinned_resident
    if x is None:
        x = state.resident_matrix()
    dist = service_distances(x, state.instance)
    hops = dist[requesters, objects].astype(np.int64)
    hits = x[requesters, objects]
    tele = state.telemetry
    np.add.at(tele.request_count, (requesters, objects), 1)
    np.add.at(tele.hit_count, (requesters[hits], objects[hits]), 1)
    np.add.at(tele.hops_accumulated, (requesters, objects), hops)
    total = len(requesters)
    return EpochMetrics(float(hops.sum()) / total, float(hits.sum()) / total, total)


def run_epoch(config: SimConfig, state: NetworkState, rng: np.random.Generator) -> EpochMetrics:
    """Process one epoch of requests and return its metrics.

    Stochastic mode draws requesters uniformly and objects from the catalog
    popularity. Deterministic mode sweeps every (node, object) pair once
    and weights the metrics by demand, so the measured average hops equals
    the optimizer objective exactly for pinned placements.
    """
    inst = state.instance
    if config.deterministic:
        q = inst.demand.rates
        w_hops = q * inst.catalog.sizes[None, :]
        total_w = 0.0
        hop_w = 0.0
        hit_w = 0.0
        req_w = 0.0
        for i in range(inst.n):
            for k in range(inst.m):
                resident = k in state.caches[i]
                hops = handle_request(state, i, k)
                total_w += w_hops[i, k]
                hop_w += w_hops[i, k] * hops
                req_w += q[i, k]
                if resident:
                    hit_w += q[i, k]
        return EpochMetrics(hop_w / total_w, hit_w / req_w, inst.n * inst.m)

    requesters = rng.integers(0, inst.n, size=config.requests_per_epoch)
    objects = rng.choice(inst.m, size=config.requests_per_epoch, p=inst.catalog.popularity)
    if state.all_pinned():
        return _pinned_epoch(state, requesters, objects)
    total_hops = 0
    hits = 0
    for node, obj in zip(requesters.tolist(), objects.tolist()):
        resident = obj in state.caches[node]
        hops = handle_request(state, node, obj)
        total_hops += hops
        if resident:
            hits += 1
    total = config.requests_per_epoch
    return EpochMetrics(total_hops / total, hits / total, total)


@dataclass(eq=False)
class MetricsReport:
    scheme: Scheme
    config: SimConfig
    epoch_metrics: list
    avg_hops: float
    hit_ratio: float
    total_requests: int
    telemetry: TelemetryLog


def build_instance(config: SimConfig, topo_seed: int) -> Instance:
    topology = generate_power_law_topology(config.nodes, config.m_attach, topo_seed)
    topology.origin_penalty = config.origin_penalty
    catalog = Catalog.uniform_sizes(config.objects, config.alpha)
    demand = build_demand(topology, catalog, config.per_node_rate)
    return Instance(topology, catalog, demand, float(config.c_sum))


def _initial_state(config: SimConfig, instance: Instance, place_rng: np.random.Generator) -> NetworkState:
    n, m = instance.n, instance.m
    slots = config.slots_per_node
    capacities = np.full(n, float(slots))
    if config.scheme is Scheme.NO_CACHE:
        state = NetworkState(instance, np.zeros(n), Policy.PINNED)
        state._pinned_resident = np.zeros((n, m), dtype=bool)
    elif config.scheme in (Scheme.LCE_LRU, Scheme.LCE_LFU):
        policy = Policy.LRU if config.scheme is Scheme.LCE_LRU else Policy.LFU
        state = NetworkState(instance, capacities, policy)
    elif config.scheme is Scheme.RANDOM_STATIC:
        state = NetworkState(instance, capacities, Policy.PINNED)
        x = np.zeros((n, m), dtype=bool)
        for i in range(n):
            x[i, place_rng.choice(m, size=slots, replace=False)] = True
        apply_placement(state, Placement(x, capacities.copy()))
    else:  # OPTIMIZED warms up on an equal split with empty caches
        state = NetworkState(instance, capacities, Policy.PINNED)
        state._pinned_resident = np.zeros((n, m), dtype=bool)
    return state


def run_simulation(config: SimConfig) -> MetricsReport:
    """Full run: build the instance, warm up, then measure.

    The OPTIMIZED scheme closes the control loop: after each epoch the
    controller re-estimates demand from the cumulative telemetry and
    installs a fresh placement for the next epoch.
    """
    ss = np.random.SeedSequence(config.seed)
    topo_ss, req_ss, place_ss = ss.spawn(3)
    instance = build_instance(config, int(topo_ss.generate_state(1)[0]))
    req_rng = np.random.default_rng(req_ss)
    state = _initial_state(config, instance, np.random.default_rng(place_ss))

    epoch_metrics = []
    for epoch in range(config.epochs):
        epoch_metrics.append(run_epoch(config, state, req_rng))
        if config.scheme is Scheme.OPTIMIZED and epoch < config.epochs - 1:
            decision = analytics.controller_epoch(
                state.telemetry, instance.topology, instance.catalog,
                float(config.c_sum), epoch, smoothing=config.smoothing)
            apply_placement(state, decision.placement)

    measured = epoch_metrics[config.warmup_epochs:]
    total = sum(m.requests for m in measured)
    hops = sum(m.avg_hops * m.requests for m in measured)
    hits = sum(m.hit_ratio * m.requests for m in measured)
    return MetricsReport(config.scheme, config, epoch_metrics,
                         hops / total, hits / total, total, state.telemetry)


def metrics_to_csv(reports: list, seeds: list, path) -> None:
    """One row per (scheme, cache_fraction, alpha, seed, epoch)."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["scheme", "cache_fraction", "alpha", "seed", "epoch",
                         "avg_hops", "hit_ratio", "requests"])
        for report, seed in zip(reports, seeds):
            cfg = report.config
            for epoch, em in enumerate(report.epoch_metrics):
                writer.writerow([cfg.scheme.value, repr(cfg.cache_fraction), repr(cfg.alpha),
                                 seed, epoch, repr(em.avg_hops), repr(em.hit_ratio), em.requests])


def telemetry_to_csv(log: TelemetryLog, path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["node", "object", "request_count", "hit_count", "hops_accumulated"])
        nonzero = np.nonzero(log.request_count)
        for i, k in zip(*nonzero):
            writer.writerow([int(i), int(k), int(log.request_count[i, k]),
                             int(log.hit_count[i, k]), int(log.hops_accumulated[i, k])])
