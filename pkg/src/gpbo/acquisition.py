"""Improvement-based acquisition scores for a frozen posterior.

All scores follow the internal *maximization* convention: larger latent
values are better and the incumbent ``f_best`` is the largest value seen.
The optimization loop converts minimization problems by negation before
calling in here.

Functions accept scalars or numpy arrays (broadcasting as usual) and are
pure, so candidate sets can be scored in one vectorized call.  The standard
normal CDF is computed through the error function (``scipy.special.ndtr``).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import ndtr

PI = "pi"
EI = "ei"
LCB = "lcb"
UCB = "ucb"
_FAMILIES = (PI, EI, LCB, UCB)

INV_SQRT_2PI = 1.0 / math.sqrt(2.0 * math.pi)


class AcquisitionError(ValueError):
    """Invalid acquisition specification or input."""


@dataclass(frozen=True)
class AcquisitionSpec:
    """Acquisition family plus its knobs.

    ``xi`` is the improvement margin for PI/EI (the paper-style trade-off
    and exploration parameters play the same role, so there is a single
    knob).  ``upsilon`` weights the standard deviation in the confidence
    bounds.  ``xi_decay``, when set, multiplies ``xi`` by ``xi_decay**t``
    at loop iteration t; ``None`` keeps it constant.
    """

    family: str = EI
    xi: float = 0.01
    upsilon: float = 2.0
    xi_decay: float | None = None

    def __post_init__(self):
        if self.family not in _FAMILIES:
            raise AcquisitionError(f"unknown acquisition family {self.family!r}")
        if self.xi < 0 or self.upsilon < 0:
            raise AcquisitionError("xi and upsilon must be nonnegative")
        if self.xi_decay is not None and not (0 < self.xi_decay <= 1):
            raise AcquisitionError("xi_decay must lie in (0, 1]")

    def xi_at(self, iteration: int) -> float:
        if self.xi_decay is None:
            return self.xi
        return self.xi * self.xi_decay**iteration

    def to_json_dict(self) -> dict:
        return {
            "family": self.family,
            "xi": self.xi,
            "upsilon": self.upsilon,
            "xi_decay": self.xi_decay,
        }

    @classmethod
    def from_json_dict(cls, obj: dict) -> "AcquisitionSpec":
        return cls(
            family=obj.get("family", EI),
            xi=obj.get("xi", 0.01),
            upsilon=obj.get("upsilon", 2.0),
            xi_decay=obj.get("xi_decay"),
        )


def _check_finite(*vals) -> None:
    for v in vals:
        if not np.all(np.isfinite(v)):
            raise AcquisitionError("non-finite acquisition input")


def _check_sigma(sigma) -> np.ndarray:
    sigma = np.asarray(sigma, dtype=float)
    if np.any(sigma < 0):
        raise AcquisitionError("sigma must be nonnegative")
    return sigma


def probability_of_improvement(mu, sigma, f_best, xi: float = 0.0):
    """P(latent > f_best + xi) under N(mu, sigma^2).

    The sigma = 0 limit is 1 when mu strictly exceeds f_best + xi, else 0.
    """
    mu = np.asarray(mu, dtype=float)
    sigma = _check_sigma(sigma)
    _check_finite(mu, sigma, f_best, xi)
    gap = mu - f_best - xi
    safe_sigma = np.where(sigma > 0, sigma, 1.0)
    with np.errstate(over="ignore"):  # gap/sigma may overflow; ndtr(inf) is fine
        p = np.where(sigma > 0, ndtr(gap / safe_sigma), (gap > 0).astype(float))
    return p if p.ndim else float(p)


def expected_improvement(mu, sigma, f_best, xi: float = 0.0):
    """E[max(0, latent - f_best - xi)] under N(mu, sigma^2).

    Closed form (mu - f_best - xi) * Phi(Z) + sigma * phi(Z) with
    Z = (mu - f_best - xi) / sigma; degenerates to max(0, mu - f_best - xi)
    at sigma = 0.  Always nonnegative.
    """
    mu = np.asarray(mu, dtype=float)
    sigma = _check_sigma(sigma)
    _check_finite(mu, sigma, f_best, xi)
    gap = mu - f_best - xi
    safe_sigma = np.where(sigma > 0, sigma, 1.0)
    with np.errstate(over="ignore", invalid="ignore"):  # extreme z is benign
        z = gap / safe_sigma
        ei = gap * ndtr(z) + sigma * INV_SQRT_2PI * np.exp(-0.5 * z**2)
        ei = np.where(sigma > 0, ei, np.maximum(gap, 0.0))
    ei = np.maximum(ei, 0.0)
    return ei if ei.ndim else float(ei)


def confidence_bound(mu, sigma, upsilon: float, direction: str = "lower"):
    """mu - upsilon * sigma (lower) or mu + upsilon * sigma (upper)."""
    mu = np.asarray(mu, dtype=float)
    sigma = _check_sigma(sigma)
    _check_finite(mu, sigma, upsilon)
    if upsilon < 0:
        raise AcquisitionError("upsilon must be nonnegative")
    if direction == "lower":
        out = mu - upsilon * sigma
    elif direction == "upper":
        out = mu + upsilon * sigma
    else:
        raise AcquisitionError(f"direction must be 'lower' or 'upper', got {direction!r}")
    return out if out.ndim else float(out)


def score(spec: AcquisitionSpec, mu, sigma, f_best, iteration: int = 0):
    """Score candidates under ``spec`` (maximization convention).

    ``lcb`` and ``ucb`` are the same optimistic confidence-bound strategy
    expressed for minimization and maximization respectively; once a problem
    has been folded into the internal maximization convention both reduce to
    the upper bound mu + upsilon * sigma.
    """
    xi = spec.xi_at(iteration)
    if spec.family == PI:
        return probability_of_improvement(mu, sigma, f_best, xi)
    if spec.family == EI:
        return expected_improvement(mu, sigma, f_best, xi)
    return confidence_bound(mu, sigma, spec.upsilon, "upper")


def ei_monte_carlo_oracle(
    mu: float, sigma: float, f_best: float, xi: float, n_samples: int, seed: int
) -> tuple[float, float]:
    """Sample-mean estimate of E[max(0, g - f_best - xi)], g ~ N(mu, sigma^2).

    Returns (estimate, standard error); deterministic given seed.
    """
    if n_samples < 1:
        raise AcquisitionError("n_samples must be at least 1")
    _check_finite(mu, sigma, f_best, xi)
    if sigma == 0:
        return max(0.0, mu - f_best - xi), 0.0
    rng = np.random.default_rng(seed)
    total = 0.0
    total_sq = 0.0
    remaining = n_samples
    while remaining > 0:  # chunked to bound memory at large n_samples
        chunk = min(remaining, 2_000_000)
        g = mu + sigma * rng.standard_normal(chunk)
        imp = np.maximum(0.0, g - f_best - xi)
        total += float(np.sum(imp))
        total_sq += float(np.sum(imp**2))
        remaining -= chunk
    mean = total / n_samples
    var = max(total_sq / n_samples - mean**2, 0.0)
    se = math.sqrt(var / n_samples)
    return mean, se
