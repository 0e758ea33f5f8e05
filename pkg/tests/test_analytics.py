import json

import numpy as np
import pytest

from cachenet.analytics import (
    ControllerDecision,
    EmptyTelemetryError,
    append_decision_log,
    controller_epoch,
    estimate_demand,
    estimate_to_csv,
)
from cachenet.netmodel import Catalog, DemandMatrix, zipf_popularity
from cachenet.optimizer import Instance, check_feasibility, exact_solve, placement_cost, solve
from cachenet.simnet import TelemetryLog
from util import random_instance


def log_with_counts(counts):
    counts = np.asarray(counts, dtype=np.int64)
    return TelemetryLog(counts, np.zeros_like(counts), np.zeros_like(counts))


class TestEstimateDemand:
    def test_counts_pass_through(self):
        counts = np.zeros((2, 3), dtype=np.int64)
        counts[0, 1] = 10
        est = estimate_demand(log_with_counts(counts), smoothing=0.0)
        assert est.rates_hat[0, 1] == 10
        assert est.rates_hat.sum() == 10
        assert est.sample_count == 10

    def test_uniform_counts_stay_uniform(self):
        est = estimate_demand(log_with_counts(np.full((3, 4), 7)), smoothing=2.5)
        assert np.all(est.rates_hat == 9.5)

    def test_smoothing_floor(self):
        est = estimate_demand(log_with_counts(np.zeros((2, 2))), smoothing=0.5)
        assert np.all(est.rates_hat >= 0.5)

    def test_total_mass(self):
        counts = np.arange(6).reshape(2, 3)
        est = estimate_demand(log_with_counts(counts), smoothing=1.0)
        assert est.rates_hat.sum() == pytest.approx(counts.sum() + 6)

    def test_empty_log_zero_smoothing_rejected(self):
        with pytest.raises(EmptyTelemetryError):
            estimate_demand(log_with_counts(np.zeros((2, 2))), smoothing=0.0)

    def test_negative_smoothing_rejected(self):
        with pytest.raises(ValueError):
            estimate_demand(log_with_counts(np.ones((2, 2))), smoothing=-1.0)

    def test_statistical_consistency_against_zipf(self):
        # tolerance validated by a pre-run over several seeds: worst L1
        # distance at 10^5 samples was well under 0.02
        rng = np.random.default_rng(123)
        m = 200
        p = zipf_popularity(m, 0.8)
        samples = rng.choice(m, size=100_000, p=p)
        counts = np.bincount(samples, minlength=m).reshape(1, m)
        est = estimate_demand(log_with_counts(counts), smoothing=1.0)
        marginal = est.rates_hat.sum(axis=0)
        marginal = marginal / marginal.sum()
        assert np.abs(marginal - p).sum() < 0.05

    def test_scale_consistency(self):
        counts = np.array([[3, 1], [0, 5]])
        a = estimate_demand(log_with_counts(counts), smoothing=0.0)
        b = estimate_demand(log_with_counts(2 * counts), smoothing=0.0)
        assert np.array_equal(2 * a.rates_hat, b.rates_hat)


class TestControllerEpoch:
    def sampled_log(self, instance, total, seed):
        rng = np.random.default_rng(seed)
        q = instance.demand.rates
        p = (q / q.sum()).ravel()
        draws = rng.choice(q.size, size=total, p=p)
        counts = np.bincount(draws, minlength=q.size).reshape(q.shape)
        return log_with_counts(counts)

    def test_converges_to_true_optimum_at_high_sample_count(self):
        rng = np.random.default_rng(31)
        found = 0
        for _ in range(12):
            inst = random_instance(rng, n_max=3, m_max=4, c_max=3)
            if inst.c_sum == 0:
                continue
            log = self.sampled_log(inst, 100_000, seed=1)
            decision = controller_epoch(log, inst.topology, inst.catalog,
                                        inst.c_sum, epoch_index=0, smoothing=1.0)
            exact = exact_solve(inst)
            got = placement_cost(decision.placement, inst)
            assert got == pytest.approx(exact.cost, rel=1e-9)
            found += 1
        assert found >= 3

    def test_zero_budget_empty_placement(self):
        rng = np.random.default_rng(32)
        inst = random_instance(rng)
        inst = Instance(inst.topology, inst.catalog, inst.demand, 0.0)
        log = self.sampled_log(inst, 1000, seed=2)
        decision = controller_epoch(log, inst.topology, inst.catalog, 0.0, 0)
        assert not decision.placement.x.any()
        origin_cost = float((log.request_count + 1.0)
                            .__mul__(inst.topology.origin_distances[:, None]).sum())
        assert decision.estimated_cost == pytest.approx(origin_cost)

    def test_identical_telemetry_identical_decision(self):
        rng = np.random.default_rng(33)
        inst = random_instance(rng, c_max=3)
        log = self.sampled_log(inst, 5000, seed=3)
        a = controller_epoch(log, inst.topology, inst.catalog, inst.c_sum, 0)
        b = controller_epoch(log, inst.topology, inst.catalog, inst.c_sum, 1)
        assert np.array_equal(a.placement.x, b.placement.x)
        assert a.estimated_cost == b.estimated_cost

    def test_decision_always_feasible_and_improving(self):
        rng = np.random.default_rng(34)
        for _ in range(10):
            inst = random_instance(rng, c_max=4)
            log = self.sampled_log(inst, 2000, seed=4)
            decision = controller_epoch(log, inst.topology, inst.catalog, inst.c_sum, 0)
            assert check_feasibility(decision.placement, inst).ok
            est_inst = Instance(inst.topology, inst.catalog,
                                DemandMatrix(estimate_demand(log, 1.0).rates_hat), inst.c_sum)
            from cachenet.optimizer import Placement
            empty_cost = placement_cost(Placement.empty(inst.n, inst.m, inst.c_sum), est_inst)
            assert decision.estimated_cost <= empty_cost + 1e-9

    def test_true_demand_bypass_matches_solver(self):
        rng = np.random.default_rng(35)
        inst = random_instance(rng, c_max=3)
        counts = np.round(inst.demand.rates * 1000).astype(np.int64)
        decision = controller_epoch(log_with_counts(counts), inst.topology,
                                    inst.catalog, inst.c_sum, 0, smoothing=0.0)
        scaled = Instance(inst.topology, inst.catalog, DemandMatrix(counts.astype(float)),
                          inst.c_sum)
        direct = solve(scaled)
        assert decision.estimated_cost == pytest.approx(direct.cost)
        assert np.array_equal(decision.placement.x, direct.placement.x)


class TestExports:
    def test_estimate_csv(self, tmp_path):
        est = estimate_demand(log_with_counts(np.arange(4).reshape(2, 2)), smoothing=0.5)
        path = tmp_path / "estimate.csv"
        estimate_to_csv(est, path)
        lines = path.read_text().splitlines()
        assert lines[0] == "node,object,rate_hat"
        assert lines[1] == "0,0,0.5"

    def test_decision_jsonl(self, tmp_path):
        rng = np.random.default_rng(36)
        inst = random_instance(rng, c_max=3)
        log = log_with_counts(np.round(inst.demand.rates * 100).astype(np.int64))
        decision = controller_epoch(log, inst.topology, inst.catalog, inst.c_sum, 4)
        path = tmp_path / "decisions.jsonl"
        append_decision_log(decision, path)
        append_decision_log(decision, path)
        lines = path.read_text().splitlines()
        assert len(lines) == 2
        record = json.loads(lines[0])
        assert record["epoch_index"] == 4
        assert record["estimated_cost"] == decision.estimated_cost
        assert len(record["placement_digest"]) == 64
        assert lines[0] == lines[1]
