#!/usr/bin/env python3
"""Stepsize-tuned SGD decay sweep: stable noise vs the gaussian control.

The fitted slope should sit near -gamma/(1+gamma) for stable noise and near
-1/2 for the gaussian control.
"""
import numpy as np

from levylab.convergence import (
    CONVERGENCE_ROW_HEADER,
    ConvergenceConfig,
    GradientNoise,
    estimate_sigma_gamma,
    fitted_rate_slope,
    run_convergence,
)
from levylab.objectives import quadratic
from levylab.rng import RngStream

D = 10
W0_SCALE = 4.0
NOISE_SCALE = 4.0
KS = (100, 1000, 10_000)
REPLICATES = 100

for label, noise, gamma, seed in (
    ("stable a=1.5", GradientNoise("sas", 1.5, NOISE_SCALE), 0.4, 230),
    ("gaussian", GradientNoise("gaussian", 2.0, NOISE_SCALE), 1.0, 231),
):
    spec = quadratic(D)
    w0 = np.full(D, W0_SCALE / np.sqrt(D))
    rng = RngStream(seed)
    sigma_gamma = estimate_sigma_gamma(spec, noise, w0, gamma, rng.substream(0))
    cfg = ConvergenceConfig(
        gamma=gamma, sigma_gamma=sigma_gamma, M=1.0, gap=float(spec.f(w0)),
        ks=KS, replicates=REPLICATES,
    )
    rows = run_convergence(spec, noise, cfg, w0, rng.substream(1))
    print(f"--- {label} (gamma={gamma}, sigma_gamma={sigma_gamma:.3f})")
    print(CONVERGENCE_ROW_HEADER)
    for row in rows:
        print(row.csv_row())
    print(f"fitted slope {fitted_rate_slope(rows):.3f}"
          f"  target {-gamma / (1 + gamma):.3f}")
