"""Experiment sweeps: run a grid of (sweep value, scheme, seed) simulations
and emit per-run and summary CSVs.

A sweep spec is a flat JSON object; ``sweep`` names the swept field
(``cache_fraction`` or ``alpha``), ``values`` its grid, and the remaining
keys fill in the fixed simulation parameters.
"""

from __future__ import annotations

import csv
import json
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, fields

import numpy as np

from .simnet import Scheme, SimConfig, run_simulation

__all__ = [
    "ExperimentSpec",
    "ConfigError",
    "load_spec",
    "validate_spec",
    "run_experiment",
    "summarize_rows",
    "cache_size_sweep_spec",
    "alpha_sweep_spec",
    "demo_spec",
]

PER_RUN_HEADER = ["sweep_value", "scheme", "seed", "avg_hops", "hit_ratio", "total_requests"]
SUMMARY_HEADER = ["sweep_value", "scheme", "avg_hops_mean", "avg_hops_std", "hit_ratio_mean", "runs"]

SWEEPABLE = ("cache_fraction", "alpha")


class ConfigError(ValueError):
    def __init__(self, diagnostics):
        self.diagnostics = diagnostics
        super().__init__("; ".join(diagnostics))


@dataclass
class ExperimentSpec:
    sweep_variable: str
    sweep_values: list
    schemes: list
    seeds: list
    output_path: str = "results"
    nodes: int = 64
    objects: int = 200
    alpha: float = 0.8
    cache_fraction: float = 0.05
    m_attach: int = 2
    origin_penalty: int = 3
    per_node_rate: float = 1.0
    requests_per_epoch: int = 10_000
    epochs: int = 12
    warmup_epochs: int = 2
    smoothing: float = 1.0

    def config_for(self, value: float, scheme: Scheme, seed: int) -> SimConfig:
        params = dict(
            scheme=scheme, nodes=self.nodes, objects=self.objects, alpha=self.alpha,
            m_attach=self.m_attach, origin_penalty=self.origin_penalty,
            per_node_rate=self.per_node_rate, cache_fraction=self.cache_fraction,
            requests_per_epoch=self.requests_per_epoch, epochs=self.epochs,
            warmup_epochs=self.warmup_epochs, seed=seed, smoothing=self.smoothing,
        )
        params[self.sweep_variable] = value
        return SimConfig(**params)


_SPEC_KEYS = {
    "sweep": "sweep_variable",
    "values": "sweep_values",
    "schemes": "schemes",
    "seeds": "seeds",
    "output": "output_path",
}


def load_spec(path) -> ExperimentSpec:
    """Parse and validate a JSON sweep spec; raises ConfigError with
    field-level diagnostics on any problem."""
    try:
        with open(path) as fh:
            raw = json.load(fh)
    except json.JSONDecodeError as exc:
        raise ConfigError([f"{path}: invalid JSON at line {exc.lineno}: {exc.msg}"]) from exc
    return spec_from_dict(raw)


def spec_from_dict(raw: dict) -> ExperimentSpec:
    diagnostics = []
    known = {f.name for f in fields(ExperimentSpec)}
    kwargs = {}
    for key, value in raw.items():
        name = _SPEC_KEYS.get(key, key)
        if name not in known:
            diagnostics.append(f"unknown field: {key}")
        else:
            kwargs[name] = value
    if "sweep_variable" not in kwargs:
        diagnostics.append("missing field: sweep")
    if diagnostics:
        raise ConfigError(diagnostics)
    kwargs.setdefault("sweep_values", [])
    kwargs.setdefault("schemes", [s.value for s in Scheme])
    kwargs.setdefault("seeds", [0])
    kwargs["sweep_variable"] = str(kwargs["sweep_variable"]).lower()
    spec = ExperimentSpec(**kwargs)
    diagnostics = validate_spec(spec)
    if diagnostics:
        raise ConfigError(diagnostics)
    spec.schemes = [Scheme(s) if isinstance(s, str) else s for s in spec.schemes]
    return spec


def validate_spec(spec: ExperimentSpec) -> list:
    """Full invariant check without running; returns diagnostics, empty if ok."""
    diags = []
    if spec.sweep_variable not in SWEEPABLE:
        diags.append(f"sweep: must be one of {SWEEPABLE}, got {spec.sweep_variable!r}")
    if not spec.sweep_values:
        diags.append("values: must be nonempty")
    elif any(b <= a for a, b in zip(spec.sweep_values, spec.sweep_values[1:])):
        diags.append("values: must be strictly increasing")
    if not spec.seeds:
        diags.append("seeds: must be nonempty")
    elif len(set(spec.seeds)) != len(spec.seeds):
        diags.append("seeds: must be distinct")
    if not spec.schemes:
        diags.append("schemes: must be nonempty")
    for s in spec.schemes:
        try:
            Scheme(s) if isinstance(s, str) else s
        except ValueError:
            diags.append(f"schemes: unknown scheme {s!r}")
    if diags:
        return diags
    # dry-build one config per (value, scheme) to surface SimConfig invariants
    for value in spec.sweep_values:
        for scheme in spec.schemes:
            scheme = Scheme(scheme) if isinstance(scheme, str) else scheme
            try:
                spec.config_for(value, scheme, spec.seeds[0])
            except ValueError as exc:
                diags.append(f"{spec.sweep_variable}={value}, scheme={scheme.value}: {exc}")
    return diags


def _run_cell(args):
    spec_kwargs, value, scheme_name, seed = args
    spec = ExperimentSpec(**spec_kwargs)
    report = run_simulation(spec.config_for(value, Scheme(scheme_name), seed))
    return [value, scheme_name, seed, report.avg_hops, report.hit_ratio, report.total_requests]


def summarize_rows(rows: list) -> list:
    """Aggregate per-run rows into (value, scheme) means and sample stddev."""
    groups = {}
    for value, scheme, _seed, avg_hops, hit_ratio, _total in rows:
        groups.setdefault((value, scheme), []).append((float(avg_hops), float(hit_ratio)))
    summary = []
    for (value, scheme) in sorted(groups, key=lambda g: (g[0], g[1])):
        data = groups[(value, scheme)]
        hops = [h for h, _ in data]
        hit = [r for _, r in data]
        std = float(np.std(hops, ddof=1)) if len(hops) > 1 else 0.0
        summary.append([value, scheme, float(np.mean(hops)), std, float(np.mean(hit)), len(data)])
    return summary


def _write_csv(path, header, rows) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for row in rows:
            writer.writerow([repr(v) if isinstance(v, float) else v for v in row])


def run_experiment(spec: ExperimentSpec, jobs: int = 1, seed_override=None,
                   output_dir=None) -> tuple:
    """Run the full grid; returns (per_run_csv_path, summary_csv_path).

    Output ordering is canonical (sweep value, scheme name, seed) regardless
    of execution order, so reruns are byte-identical.
    """
    seeds = [seed_override] if seed_override is not None else list(spec.seeds)
    out_dir = output_dir if output_dir is not None else spec.output_path
    os.makedirs(out_dir, exist_ok=True)
    spec_kwargs = {f.name: getattr(spec, f.name) for f in fields(spec)}
    spec_kwargs["schemes"] = [s.value if isinstance(s, Scheme) else s for s in spec.schemes]
    cells = [(spec_kwargs, value, (s.value if isinstance(s, Scheme) else s), seed)
             for value in spec.sweep_values
             for s in spec.schemes
             for seed in seeds]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            rows = list(pool.map(_run_cell, cells))
    else:
        rows = [_run_cell(cell) for cell in cells]
    rows.sort(key=lambda r: (r[0], r[1], r[2]))
    per_run_path = os.path.join(out_dir, "per_run.csv")
    summary_path = os.path.join(out_dir, "summary.csv")
    _write_csv(per_run_path, PER_RUN_HEADER, rows)
    _write_csv(summary_path, SUMMARY_HEADER, summarize_rows(rows))
    return per_run_path, summary_path


def cache_size_sweep_spec(**overrides) -> ExperimentSpec:
    """Cache-size sweep: average response hops vs cache fraction 1%..10%."""
    params = dict(
        sweep_variable="cache_fraction",
        sweep_values=[round(0.01 * i, 2) for i in range(1, 11)],
        schemes=list(Scheme),
        seeds=list(range(10)),
        alpha=0.8, nodes=64, objects=200,
    )
    params.update(overrides)
    return ExperimentSpec(**params)


def alpha_sweep_spec(**overrides) -> ExperimentSpec:
    """Popularity sweep at 5% cache: the popularity-aware schemes only,
    since the static schemes' hops are flat in the skew."""
    params = dict(
        sweep_variable="alpha",
        sweep_values=[0.4, 0.6, 0.8, 1.0, 1.2],
        schemes=[Scheme.OPTIMIZED, Scheme.LCE_LRU, Scheme.LCE_LFU],
        seeds=list(range(10)),
        cache_fraction=0.05, nodes=64, objects=200,
    )
    params.update(overrides)
    return ExperimentSpec(**params)


def demo_spec(**overrides) -> ExperimentSpec:
    """Tiny cache-size sweep that finishes in well under a minute."""
    params = dict(
        sweep_variable="cache_fraction",
        sweep_values=[0.05, 0.10],
        schemes=[Scheme.OPTIMIZED, Scheme.LCE_LRU, Scheme.NO_CACHE],
        seeds=[0, 1],
        nodes=16, objects=40, requests_per_epoch=1000, epochs=4, warmup_epochs=1,
        output_path="demo_results",
    )
    params.update(overrides)
    return ExperimentSpec(**params)
