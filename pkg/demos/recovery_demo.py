#!/usr/bin/env python3
"""Walkthrough: simulate a linear SEM, fit all three methods, compare metrics.

Small enough to run in under a minute on a laptop.
"""

import numpy as np

from colide.bench import ExperimentConfig, generate_instance
from colide.graphs import GraphModelSpec
from colide.metrics import evaluate, posthoc_noise
from colide.sem import NoiseSpec
from colide.solver import METHODS, fit

# a 20-node ER graph with average degree 2, homoscedastic Gaussian noise
cfg = ExperimentConfig(
    graph=GraphModelSpec(model="ER", d=20, k=2),
    noise=NoiseSpec(family="gaussian", profile="ev", variance=1.0),
    n=1000,
)

W_true, true_sigmas, ds = generate_instance(cfg, seed=0)
print(f"true graph: d={ds.d}, {int(np.count_nonzero(W_true))} edges, "
      f"noise sd {true_sigmas[0]:.2f}")

print(f"\n{'method':<12} {'SHD':>4} {'SHD-C':>6} {'SID':>5} "
      f"{'TPR':>6} {'FDR':>6} {'sigma':>7}")
for method in METHODS:
    res = fit(ds, method=method)
    rep = evaluate(res.W_thresholded, W_true)
    if method == "colide_ev":
        sigma = res.sigma
    elif method == "colide_nv":
        sigma = float(np.sqrt(np.mean(res.sigmas ** 2)))
    else:
        # the baseline has no scale estimate; fall back to residuals
        sigma = posthoc_noise(ds, res.W, profile="ev")
    print(f"{method:<12} {rep.shd:>4} {rep.shd_c:>6} {rep.sid:>5} "
          f"{rep.tpr:>6.2f} {rep.fdr:>6.2f} {sigma:>7.3f}")

print("\nboth concomitant variants should recover (nearly) the exact graph "
      "here, with a noise estimate close to 1.0")
