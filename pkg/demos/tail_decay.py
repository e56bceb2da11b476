"""Empirical tail probabilities on synthetic quadratics, desk scale.

A reduced-R version of the committed fig1 config: a ring of 10 agents,
heterogeneous quadratics, noisy gradients, step-size 1/(t+1). The fraction of
runs whose mean squared distance to the optimum still exceeds a threshold is
tracked per iteration; on a log scale its decay reads as a straight line, and
the tracked method's tail sits below the vanilla one.

Writes CSV/SVG outputs under out/demo_tails/.
"""

import os

import numpy as np

from gtsim import harness, metrics

cfg = harness.load_config(os.path.join(os.path.dirname(__file__), "..",
                                       "configs", "fig1_synthetic_tails.toml"))
data = dict(cfg.data)
data["experiment"] = dict(data["experiment"], R=40, output_dir="out/demo_tails")
cfg = harness.ExperimentConfig(data=data)

print("running 40 seeded repetitions of both methods (a few minutes single-core)...")
env = harness.run_experiment(cfg)
print(f"config fingerprint {env.fingerprint[:12]}, wall clock {env.wall_clock:.1f}s")

for eps in (0.01, 0.001):
    gt = env.series[f"tail_gt_dsgd_eps{eps:g}"]
    ds = env.series[f"tail_dsgd_eps{eps:g}"]
    t_half_gt = np.argmax(gt.values < 0.5) + 1 if np.any(gt.values < 0.5) else None
    t_half_ds = np.argmax(ds.values < 0.5) + 1 if np.any(ds.values < 0.5) else None
    print(f"eps = {eps:g}: tail first below 0.5 at t = {t_half_gt} (tracked) "
          f"vs t = {t_half_ds} (vanilla); resolution floor 1/R = {gt.meta['floor']:g}")
    try:
        fit = metrics.tail_decay_fit(gt)
        print(f"  log-linear fit of the tracked tail on t in {fit.window}: "
              f"slope {fit.slope:.5f}, R^2 {fit.r_squared:.3f}")
    except ValueError as exc:
        print(f"  fit unavailable: {exc}")

paths = harness.emit_outputs(env, outdir="out/demo_tails")
print("\nwrote:")
for p in paths:
    print(f"  {p}")
print("open out/demo_tails/tail_eps0.01_log.svg to read the decay slope")
