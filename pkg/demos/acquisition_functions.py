#!/usr/bin/env python3
"""Acquisition landscapes under a shared posterior.

Fits a noiseless GP to five points of a 1-D function and tabulates PI, EI
(at two exploration margins) and the upper confidence bound along the
domain, marking where each would send the next evaluation.
"""

import numpy as np

from gpbo.acquisition import (
    confidence_bound,
    expected_improvement,
    probability_of_improvement,
)
from gpbo.gp import ObservationSet, fit_posterior, predict
from gpbo.kernels import KernelSpec


def main():
    X = np.array([[-1.8], [-0.7], [0.1], [0.9], [1.7]])
    y = -np.sin(2.0 * X[:, 0])  # maximization target
    obs = ObservationSet(X, y, direction="maximize")
    post = fit_posterior(obs, KernelSpec("sq_exp_iso", length_scales=[0.6]), 0.0)
    f_best = float(np.max(y))

    grid = np.linspace(-2, 2, 41)
    pred = predict(post, grid.reshape(-1, 1))
    sd = np.sqrt(pred.variance)

    pi = probability_of_improvement(pred.mean, sd, f_best, 0.01)
    ei_greedy = expected_improvement(pred.mean, sd, f_best, 0.0)
    ei_explore = expected_improvement(pred.mean, sd, f_best, 0.3)
    ucb = confidence_bound(pred.mean, sd, 2.0, "upper")

    print(f"incumbent f+ = {f_best:.3f}")
    print(f"{'x':>6} {'mean':>7} {'sd':>6} {'PI':>6} {'EI':>7} {'EI xi=.3':>9} {'UCB':>7}")
    for row in zip(grid, pred.mean, sd, pi, ei_greedy, ei_explore, ucb):
        print("{:>6.2f} {:>7.3f} {:>6.3f} {:>6.3f} {:>7.4f} {:>9.4f} {:>7.3f}".format(*row))

    for name, vals in [
        ("PI", pi),
        ("EI (xi=0)", ei_greedy),
        ("EI (xi=0.3)", ei_explore),
        ("UCB", ucb),
    ]:
        print(f"next point under {name:<12}: x = {grid[np.argmax(vals)]:+.2f}")


if __name__ == "__main__":
    main()
