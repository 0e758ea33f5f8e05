"""Run every caching scheme once and compare measured performance.

The OPTIMIZED scheme closes the control loop (telemetry -> demand estimate
-> solver -> new placement each epoch); the others are static or
leave-copy-everywhere baselines.
"""

from cachenet import Scheme, SimConfig, run_simulation

common = dict(nodes=32, objects=100, alpha=0.8, cache_fraction=0.05,
              requests_per_epoch=2000, epochs=6, warmup_epochs=2, seed=1)

print(f"{'scheme':>14}   avg hops   hit ratio")
for scheme in Scheme:
    report = run_simulation(SimConfig(scheme, **common))
    print(f"{scheme.value:>14}   {report.avg_hops:8.3f}   {report.hit_ratio:9.3f}")

print("\nper-epoch OPTIMIZED trajectory (controller kicks in after epoch 0):")
report = run_simulation(SimConfig(Scheme.OPTIMIZED, **common))
for epoch, em in enumerate(report.epoch_metrics):
    marker = " (warmup)" if epoch < common["warmup_epochs"] else ""
    print(f"  epoch {epoch}: {em.avg_hops:.3f} hops, hit ratio {em.hit_ratio:.3f}{marker}")
