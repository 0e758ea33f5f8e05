"""Joint content placement and cache-budget optimization.

Minimizes total hop-weighted traffic sum_i sum_k q[i,k] * d(i, supplier) * S[k]
subject to: one supplier per (node, object); suppliers must hold the object;
per-node capacity; and a conserved global budget pool. The virtual origin
holds everything, so every placement admits a feasible assignment.

Solvers: exhaustive enumeration (tiny instances, ground truth), lazy greedy
marginal-gain insertion, and a first-improvement swap local search.
"""

from __future__ import annotations

import csv
import hashlib
import heapq
import itertools
import json
from dataclasses import dataclass, field

import numpy as np

from .netmodel import Catalog, DemandMatrix, Topology

__all__ = [
    "ORIGIN",
    "Placement",
    "Assignment",
    "Instance",
    "SolveResult",
    "FeasibilityReport",
    "InstanceTooLargeError",
    "nearest_copy_assignment",
    "service_distances",
    "evaluate_objective",
    "average_hops",
    "check_feasibility",
    "exact_solve",
    "greedy_solve",
    "local_search",
    "solve",
    "placement_to_csv",
    "placement_digest",
]

# supplier sentinel for the virtual origin server
ORIGIN = -1

_EPS = 1e-12


class InstanceTooLargeError(ValueError):
    """Instance exceeds the exhaustive solver's enumeration guard."""


@dataclass(eq=False)
class Placement:
    """Cache membership matrix plus per-node budgets.

    x[i, k] is True when object k is resident at router i. Budgets are in
    size units and must sum to the instance's global pool.
    """

    x: np.ndarray
    budgets: np.ndarray

    def copy(self) -> "Placement":
        return Placement(self.x.copy(), self.budgets.copy())

    @classmethod
    def empty(cls, n: int, m: int, c_sum: float = 0.0) -> "Placement":
        budgets = np.zeros(n)
        budgets[0] = c_sum
        return cls(np.zeros((n, m), dtype=bool), budgets)


@dataclass(eq=False)
class Assignment:
    """supplier[i, k] = router chosen to serve object k to router i, or ORIGIN."""

    supplier: np.ndarray


@dataclass(eq=False)
class Instance:
    topology: Topology
    catalog: Catalog
    demand: DemandMatrix
    c_sum: float

    def __post_init__(self):
        n = self.topology.node_count
        m = self.catalog.object_count
        if self.demand.rates.shape != (n, m):
            raise ValueError("demand shape does not match topology/catalog")
        if self.c_sum < 0:
            raise ValueError("c_sum must be nonnegative")

    @property
    def n(self) -> int:
        return self.topology.node_count

    @property
    def m(self) -> int:
        return self.catalog.object_count

    def distance(self, i: int, j: int) -> float:
        """Hop distance from router i to supplier j (ORIGIN allowed)."""
        if j == ORIGIN:
            return float(self.topology.origin_distances[i])
        return float(self.topology.hop_matrix[i, j])


@dataclass
class Violation:
    constraint: int  # index into the four-constraint list
    detail: str


@dataclass
class FeasibilityReport:
    ok: bool
    violations: list = field(default_factory=list)


@dataclass(eq=False)
class SolveResult:
    placement: Placement
    cost: float
    diagnostics: dict = field(default_factory=dict)


def nearest_copy_assignment(placement: Placement, instance: Instance) -> Assignment:
    """Assign every (node, object) to its closest copy.

    Ties break toward the lowest router index, and a router beats the
    origin at equal distance.
    """
    hop = instance.topology.hop_matrix
    dorg = instance.topology.origin_distances
    n, m = instance.n, instance.m
    supplier = np.full((n, m), ORIGIN, dtype=int)
    for k in range(m):
        holders = np.flatnonzero(placement.x[:, k])
        if holders.size == 0:
            continue
        dists = hop[:, holders]
        best = np.argmin(dists, axis=1)  # argmin keeps the lowest holder index
        best_dist = dists[np.arange(n), best]
        use_router = best_dist <= dorg
        supplier[use_router, k] = holders[best[use_router]]
    return Assignment(supplier)


def service_distances(x: np.ndarray, instance: Instance) -> np.ndarray:
    """dist[i, k] = hops from router i to the nearest copy of object k."""
    hop = instance.topology.hop_matrix
    dorg = instance.topology.origin_distances.astype(float)
    n, m = instance.n, instance.m
    dist = np.tile(dorg[:, None], (1, m))
    for k in range(m):
        holders = np.flatnonzero(x[:, k])
        if holders.size:
            np.minimum(dist[:, k], hop[:, holders].min(axis=1), out=dist[:, k])
    return dist


def evaluate_objective(assignment: Assignment, instance: Instance) -> float:
    """Total hop-weighted traffic of an assignment."""
    hop = instance.topology.hop_matrix
    dorg = instance.topology.origin_distances
    sup = assignment.supplier
    rows = np.arange(instance.n)[:, None]
    dist = np.where(sup == ORIGIN, dorg[:, None], hop[rows, np.where(sup == ORIGIN, 0, sup)])
    return float((instance.demand.rates * dist * instance.catalog.sizes[None, :]).sum())


def placement_cost(placement: Placement, instance: Instance) -> float:
    dist = service_distances(placement.x, instance)
    return float((instance.demand.rates * dist * instance.catalog.sizes[None, :]).sum())


def average_hops(cost: float, instance: Instance) -> float:
    """Objective normalized to the plotted metric: hops per unit of demand."""
    total = float((instance.demand.rates * instance.catalog.sizes[None, :]).sum())
    return cost / total


def check_feasibility(placement: Placement, instance: Instance) -> FeasibilityReport:
    """Verify the capacity (3) and conserved-pool (4) constraints.

    The assignment constraints (1, 2) are satisfiable for any placement
    because the origin can always supply, so they never appear as
    violations.
    """
    violations = []
    sizes = instance.catalog.sizes
    used = placement.x @ sizes
    for i in range(instance.n):
        if used[i] > placement.budgets[i] + 1e-9:
            violations.append(Violation(3, f"node {i}: resident size {used[i]} exceeds budget {placement.budgets[i]}"))
    total = float(placement.budgets.sum())
    if abs(total - instance.c_sum) > 1e-9:
        violations.append(Violation(4, f"budgets sum to {total}, pool is {instance.c_sum}"))
    if np.any(placement.budgets < -1e-9):
        violations.append(Violation(4, "negative budget"))
    return FeasibilityReport(not violations, violations)


def _budgets_from_usage(x: np.ndarray, sizes: np.ndarray, c_sum: float) -> np.ndarray:
    """Budgets equal to used capacity, slack parked at node 0."""
    budgets = (x @ sizes).astype(float)
    budgets[0] += c_sum - budgets.sum()
    return budgets


def exact_solve(instance: Instance) -> SolveResult:
    """Ground-truth solver: enumerate every placement within the pool.

    Guarded to n*m <= 20 and c_sum <= 6. Returns the lexicographically
    smallest optimal membership matrix (flattened row-major).
    """
    n, m, c_sum = instance.n, instance.m, instance.c_sum
    if n * m > 20 or c_sum > 6:
        raise InstanceTooLargeError(f"exact_solve guard: n*m={n * m}, c_sum={c_sum}")
    sizes = [float(s) for s in instance.catalog.sizes]
    q = instance.demand.rates.tolist()
    hop = instance.topology.hop_matrix.tolist()
    dorg = [float(d) for d in instance.topology.origin_distances]
    cells = [(i, k) for i in range(n) for k in range(m)]

    def cost_of(chosen) -> float:
        holders = [[] for _ in range(m)]
        for ci in chosen:
            i, k = cells[ci]
            holders[k].append(i)
        total = 0.0
        for i in range(n):
            qi = q[i]
            hi = hop[i]
            for k in range(m):
                d = dorg[i]
                for j in holders[k]:
                    if hi[j] < d:
                        d = hi[j]
                total += qi[k] * d * sizes[k]
        return total

    min_size = min(sizes)
    max_copies = int(c_sum // min_size)
    best_cost = cost_of(())
    best_bits = (0,) * (n * m)
    for r in range(1, max_copies + 1):
        for combo in itertools.combinations(range(n * m), r):
            if sum(sizes[cells[ci][1]] for ci in combo) > c_sum + 1e-9:
                continue
            c = cost_of(combo)
            if c < best_cost - _EPS:
                best_cost = c
                bits = [0] * (n * m)
                for ci in combo:
                    bits[ci] = 1
                best_bits = tuple(bits)
            elif abs(c - best_cost) <= _EPS:
                bits = [0] * (n * m)
                for ci in combo:
                    bits[ci] = 1
                bits = tuple(bits)
                if bits < best_bits:
                    best_bits = bits
    x = np.array(best_bits, dtype=bool).reshape(n, m)
    placement = Placement(x, _budgets_from_usage(x, instance.catalog.sizes, c_sum))
    return SolveResult(placement, best_cost, {"method": "exact"})


def _insertion_gains(curdist: np.ndarray, instance: Instance) -> np.ndarray:
    """gains[j, k] = objective decrease from adding a copy of k at router j."""
    hop = instance.topology.hop_matrix
    qs = instance.demand.rates * instance.catalog.sizes[None, :]
    # saved[i, j, k] = max(0, curdist[i, k] - hop[i, j])
    saved = np.maximum(0.0, curdist[:, None, :] - hop[:, :, None])
    return np.einsum("ik,ijk->jk", qs, saved)


def greedy_solve(instance: Instance) -> SolveResult:
    """Lazy greedy: repeatedly add the copy with the best gain per size unit.

    Adding a copy of object k only changes distances for k, so cached gains
    for other objects stay exact; stale entries are re-scored when popped
    (gains only shrink as the placement grows).
    """
    n, m = instance.n, instance.m
    hop = instance.topology.hop_matrix
    sizes = instance.catalog.sizes
    qs = instance.demand.rates * sizes[None, :]
    curdist = np.tile(instance.topology.origin_distances.astype(float)[:, None], (1, m))
    x = np.zeros((n, m), dtype=bool)
    pool = float(instance.c_sum)

    gains = _insertion_gains(curdist, instance)
    # heap key: (-gain/size, -gain, i, k) per the deterministic tie-break
    heap = [(-gains[j, k] / sizes[k], -gains[j, k], j, k, 0) for j in range(n) for k in range(m)]
    heapq.heapify(heap)
    generation = [0] * m
    trace = []
    while heap and pool >= sizes.min() - 1e-9:
        neg_rate, neg_gain, j, k, gen = heapq.heappop(heap)
        if x[j, k] or sizes[k] > pool + 1e-9:
            continue
        if gen != generation[k]:
            gain = float(qs[:, k] @ np.maximum(0.0, curdist[:, k] - hop[:, j]))
            heapq.heappush(heap, (-gain / sizes[k], -gain, j, k, generation[k]))
            continue
        gain = -neg_gain
        if gain <= _EPS:
            break
        x[j, k] = True
        pool -= float(sizes[k])
        np.minimum(curdist[:, k], hop[:, j].astype(float), out=curdist[:, k])
        generation[k] += 1
        trace.append({"node": j, "object": k, "gain": gain})
    placement = Placement(x, _budgets_from_usage(x, sizes, instance.c_sum))
    return SolveResult(placement, placement_cost(placement, instance),
                       {"method": "greedy", "iterations": len(trace), "gain_trace": trace})


def local_search(instance: Instance, placement: Placement, max_iters: int) -> SolveResult:
    """First-improvement swap pass: drop one resident copy, add one absent
    copy that fits the freed capacity plus pool slack.

    Scans residents in (node, object) order and applies the first improving
    swap, restarting until no swap improves or ``max_iters`` swaps applied.
    """
    n, m = instance.n, instance.m
    hop = instance.topology.hop_matrix
    dorg = instance.topology.origin_distances.astype(float)
    sizes = instance.catalog.sizes
    qs = instance.demand.rates * sizes[None, :]
    x = placement.x.copy()
    curdist = service_distances(x, instance)
    slack = float(instance.c_sum - (x @ sizes).sum())

    applied = 0
    while applied < max_iters:
        gains = _insertion_gains(curdist, instance)
        found = False
        for i, k in zip(*np.nonzero(x)):
            i, k = int(i), int(k)
            # distances for object k once the copy at i is gone
            others = np.flatnonzero(x[:, k])
            others = others[others != i]
            if others.size:
                dist_wo = np.minimum(dorg, hop[:, others].min(axis=1)).astype(float)
            else:
                dist_wo = dorg.copy()
            loss = float(qs[:, k] @ (dist_wo - curdist[:, k]))
            room = slack + float(sizes[k])
            delta = gains - loss
            # same-object gains must be re-scored against the post-removal distances
            delta[:, k] = qs[:, k] @ np.maximum(0.0, dist_wo[:, None] - hop) - loss
            candidate = ~x & (sizes[None, :] <= room + 1e-9) & (delta > _EPS)
            candidate[i, k] = False  # re-inserting the removed copy is a no-op
            flat = np.flatnonzero(candidate.ravel())
            if flat.size:
                j, k2 = divmod(int(flat[0]), m)
                x[i, k] = False
                x[j, k2] = True
                slack = slack + float(sizes[k]) - float(sizes[k2])
                for obj in {k, k2}:
                    holders = np.flatnonzero(x[:, obj])
                    curdist[:, obj] = dorg if holders.size == 0 else np.minimum(dorg, hop[:, holders].min(axis=1))
                applied += 1
                found = True
                break
        if not found:
            break
    out = Placement(x, _budgets_from_usage(x, sizes, instance.c_sum))
    return SolveResult(out, placement_cost(out, instance),
                       {"method": "local_search", "iterations": applied})


def solve(instance: Instance, max_iters: int | None = None) -> SolveResult:
    """Production pipeline: greedy construction plus swap local search."""
    if max_iters is None:
        max_iters = 10 * instance.n * instance.m
    greedy = greedy_solve(instance)
    refined = local_search(instance, greedy.placement, max_iters)
    diagnostics = {
        "method": "greedy+local_search",
        "greedy_cost": greedy.cost,
        "greedy_iterations": greedy.diagnostics["iterations"],
        "gain_trace": greedy.diagnostics["gain_trace"],
        "swaps": refined.diagnostics["iterations"],
    }
    return SolveResult(refined.placement, refined.cost, diagnostics)


def placement_to_csv(placement: Placement, path) -> None:
    """Resident copies as node,object rows, then budgets as node,budget rows."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["node", "object"])
        for i, k in zip(*np.nonzero(placement.x)):
            writer.writerow([int(i), int(k)])
        writer.writerow(["node", "budget"])
        for i, b in enumerate(placement.budgets):
            writer.writerow([i, repr(float(b))])


def diagnostics_to_json(result: SolveResult, path) -> None:
    with open(path, "w") as fh:
        json.dump({"cost": result.cost, **result.diagnostics}, fh, indent=2)


def placement_digest(placement: Placement) -> str:
    h = hashlib.sha256()
    h.update(np.packbits(placement.x).tobytes())
    h.update(np.asarray(placement.budgets, dtype=float).tobytes())
    return h.hexdigest()
