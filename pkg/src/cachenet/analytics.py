"""Control-layer analytics: demand estimation and the controller epoch.

Closes the loop between the switch telemetry and the placement solver:
per (node, object) request counts become a smoothed demand estimate, the
solver runs on it, and the resulting placement is handed back to the
harness to install at the epoch boundary.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .netmodel import Catalog, DemandMatrix, Topology
from .optimizer import (
    Instance,
    Placement,
    SolveResult,
    check_feasibility,
    placement_digest,
    solve,
)

__all__ = [
    "DemandEstimate",
    "ControllerDecision",
    "EmptyTelemetryError",
    "estimate_demand",
    "controller_epoch",
    "estimate_to_csv",
    "append_decision_log",
]


class EmptyTelemetryError(ValueError):
    """No observations and no smoothing: the estimate would be all-zero."""


@dataclass(eq=False)
class DemandEstimate:
    rates_hat: np.ndarray
    sample_count: int
    smoothing: float


@dataclass(eq=False)
class ControllerDecision:
    placement: Placement
    epoch_index: int
    estimated_cost: float
    solver_diagnostics: dict = field(default_factory=dict)


def estimate_demand(telemetry_log, smoothing: float) -> DemandEstimate:
    """Additive-smoothed per (node, object) request counts.

    rates_hat[i, k] = request_count[i, k] + smoothing, so the estimate sums
    to total_requests + n*m*smoothing.
    """
    if smoothing < 0:
        raise ValueError("smoothing must be nonnegative")
    counts = np.asarray(telemetry_log.request_count, dtype=float)
    total = int(counts.sum())
    if total == 0 and smoothing == 0:
        raise EmptyTelemetryError("empty telemetry with zero smoothing")
    return DemandEstimate(counts + smoothing, total, smoothing)


def controller_epoch(telemetry_log, topology: Topology, catalog: Catalog,
                     c_sum: float, epoch_index: int, smoothing: float = 1.0) -> ControllerDecision:
    """One control-loop turn: estimate demand, solve, emit a directive."""
    estimate = estimate_demand(telemetry_log, smoothing)
    instance = Instance(topology, catalog, DemandMatrix(estimate.rates_hat), c_sum)
    result = solve(instance)
    assert check_feasibility(result.placement, instance).ok
    diagnostics = {k: v for k, v in result.diagnostics.items() if k != "gain_trace"}
    diagnostics["sample_count"] = estimate.sample_count
    return ControllerDecision(result.placement, epoch_index, result.cost, diagnostics)


def estimate_to_csv(estimate: DemandEstimate, path) -> None:
    n, m = estimate.rates_hat.shape
    with open(path, "w") as fh:
        fh.write("node,object,rate_hat\n")
        for i in range(n):
            for k in range(m):
                fh.write(f"{i},{k},{float(estimate.rates_hat[i, k])!r}\n")


def append_decision_log(decision: ControllerDecision, path) -> None:
    """JSON-lines decision log: epoch, estimated cost, placement digest."""
    record = {
        "epoch_index": decision.epoch_index,
        "estimated_cost": decision.estimated_cost,
        "placement_digest": placement_digest(decision.placement),
    }
    with open(path, "a") as fh:
        fh.write(json.dumps(record) + "\n")
