#!/usr/bin/env python3
"""Optimize an objective living in another process.

Launches the reference sphere worker (demos/sphere_worker.py) and drives a
short BO run over the newline-delimited JSON protocol: one
``{"x": [...]}`` request per evaluation, one ``{"y": ...}`` response.
"""

import sys
from pathlib import Path

import numpy as np

from gpbo.external import ExternalObjective
from gpbo.loop import BoConfig, SearchSpace, run_bo
from gpbo.objectives import ObjectiveSpec


def main():
    worker = Path(__file__).with_name("sphere_worker.py")
    spec = ObjectiveSpec(
        kind="external",
        command=(sys.executable, str(worker)),
        mode="persistent",
        timeout=30.0,
    )
    space = SearchSpace([-2.0, -2.0], [2.0, 2.0])
    cfg = BoConfig(budget=20, n_init=6, seed=0)
    with ExternalObjective(spec) as objective:
        trace = run_bo(objective, space, cfg)
        print(f"worker answered {objective.evaluations} requests")
    print(f"best point {np.round(trace.best_x, 4)} -> {trace.best_f:.6f}")


if __name__ == "__main__":
    main()
