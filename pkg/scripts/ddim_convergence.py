#!/usr/bin/env python3
"""Sweep the toy DDIM sampler's step count and report moment errors against
the analytic Gaussian data distribution N(0, 1).

With the closed-form optimal denoiser the eta=0 chain is a linear map, so
the variance deficit shrinks as the discretization gets finer.

Usage: python scripts/ddim_convergence.py [trajectories]
"""

import sys

import numpy as np

from promptlight.diffusion import GaussianDenoiser, ddim_sample, linear_schedule


def main():
    n = int(sys.argv[1]) if len(sys.argv) > 1 else 100_000
    rng = np.random.default_rng(0)
    y_init = rng.standard_normal(n)
    print(f"{'steps':>6s} {'mean':>12s} {'variance':>12s} {'|var-1|':>10s}")
    for steps in (5, 10, 25, 50, 100, 200):
        sched = linear_schedule(steps, 1e-4, 0.02)
        y0 = ddim_sample(y_init, GaussianDenoiser(sched), sched, eta=0.0)
        print(f"{steps:6d} {y0.mean():12.5f} {y0.var():12.5f} "
              f"{abs(y0.var() - 1):10.5f}")


if __name__ == "__main__":
    main()
