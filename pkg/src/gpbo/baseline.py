"""Uniform random search over the box, emitting the same Trace format."""

from __future__ import annotations

import time

import numpy as np

from . import gp
from .loop import ObjectiveFailure, SearchSpace, Trace, TraceRecord, incumbent


def random_search_baseline(
    objective,
    space: SearchSpace,
    budget: int,
    seed: int,
    direction: str = gp.MINIMIZE,
    trace_writer=None,
) -> Trace:
    """budget uniform evaluations in the box; deterministic given seed."""
    if budget < 1:
        raise ValueError("budget must be at least 1")
    rng = np.random.default_rng(seed)
    obs = gp.empty_observations(space.dimension, direction=direction)
    trace = Trace()
    t_start = time.perf_counter()
    for it in range(budget):
        x = rng.uniform(space.lower, space.upper)
        y = float(objective(x))
        if not np.isfinite(y):
            raise ObjectiveFailure(
                f"objective returned non-finite value at iteration {it}", trace
            )
        obs = obs.append(x, y)
        inc_x, inc_f = incumbent(obs)
        rec = TraceRecord(
            iteration=it,
            x=x.copy(),
            y=y,
            incumbent_x=inc_x,
            incumbent_f=inc_f,
            acq_value=float("nan"),
            hypers=None,
            wall_ms=(time.perf_counter() - t_start) * 1e3,
        )
        trace.append(rec)
        if trace_writer is not None:
            trace_writer.write(rec)
    return trace
