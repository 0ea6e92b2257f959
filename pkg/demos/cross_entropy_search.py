"""Cross-entropy search over Bernoulli masks, step by step.

Instead of improving a single candidate, CE maintains a probability vector p
over dictionary columns, draws whole batches of binary masks from it, and
refits p to the componentwise frequencies of the elite (lowest-cost) samples.
"""

import numpy as np

from sparsekit import (
    CEConfig,
    RngStream,
    draw_samples,
    elite_update,
    gen_dictionary,
    gen_instance,
    run_ce,
    sparse_objective,
)

D = gen_dictionary(n=24, m=48, seed=3)
inst = gen_instance(D, k=4, seed=9)
true = sorted(inst.true_support.tolist())
print(f"planted support: {true}")

# one CE generation by hand: draw, score, refit
cfg = CEConfig(k=4, population=200, elite_ratio=0.05, step_size=0.1, lam=0.05)
p = cfg.initial_params(D.n_cols)
stream = RngStream(2024)
masks = draw_samples(p, cfg.population, stream.child(1))
costs = np.array([sparse_objective(D, inst.signal, y, cfg.lam) for y in masks])
p_next, gamma = elite_update(masks, costs, p, cfg)
print(f"batch 1: best cost {costs.min():.3f}, elite threshold gamma {gamma:.3f}")
print(f"  p mass on true support: before {p[inst.true_support].sum():.3f}, "
      f"after {p_next[inst.true_support].sum():.3f}")

# the full loop, watching the global best improve
print("\nfull run (best cost per batch):")
trace = []
sol = run_ce(
    D,
    inst.signal,
    cfg,
    stream,
    hook=lambda event, **d: trace.append((d["t"], d["best_cost"])),
)
for t, best in trace[:: max(1, len(trace) // 8)]:
    print(f"  batch {t:3d}  best cost {best:.4f}")
print(f"recovered support: {sorted(sol.support.tolist())}  "
      f"(exact: {sorted(sol.support.tolist()) == true})")
print(f"residual {sol.residual_norm:.2e} after {sol.iterations} batches; "
      f"bottom-up transfers: {sol.bottom_up_transfers} (CE never applies the full D^T)")
