"""Exact Gaussian-process regression.

Posterior inference is done by Cholesky factorization of the Gram matrix
``K + noise * I + jitter * I`` with jitter escalation (starting at
``1e-10 * signal_variance``, doubling up to ``1e-4 * signal_variance``).
The fitted model is frozen: ``alpha`` solves ``(K + noise I) alpha = y - m0``
so the predictive mean is the kernel expansion ``m0 + k(x*, X) @ alpha``.

Predictions report the latent-function variance; observation noise is added
only when explicitly requested.  Hyperparameters are fitted by multi-start
L-BFGS on the log marginal likelihood in log-parameter space.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import cholesky, solve_triangular
from scipy.optimize import minimize

from .kernels import (
    DEFAULT_JITTER_SCALE,
    MAX_JITTER_SCALE,
    SQ_EXP_ISO,
    KernelSpec,
    cross_covariance,
    gram_grad_hyper,
    gram_matrix,
)

MINIMIZE = "minimize"
MAXIMIZE = "maximize"

LOG_2PI = math.log(2.0 * math.pi)


class GpError(ValueError):
    """Invalid observation set or GP operation input."""


class FactorizationError(FloatingPointError):
    """Gram matrix could not be factorized even after jitter escalation."""


@dataclass(frozen=True)
class ObservationSet:
    """Accumulated design: inputs ``X`` (n, d), values ``y`` (n,)."""

    X: np.ndarray
    y: np.ndarray
    direction: str = MINIMIZE

    def __post_init__(self):
        X = np.asarray(self.X, dtype=float)
        if X.ndim == 1:
            X = X.reshape(-1, 1)
        if X.size == 0:
            X = X.reshape(0, X.shape[1] if X.ndim == 2 and X.shape[1] else 1)
        y = np.asarray(self.y, dtype=float).reshape(-1)
        if X.shape[0] != y.shape[0]:
            raise GpError("X and y must have the same number of rows")
        if not (np.all(np.isfinite(X)) and np.all(np.isfinite(y))):
            raise GpError("observations must be finite")
        if self.direction not in (MINIMIZE, MAXIMIZE):
            raise GpError(f"unknown direction {self.direction!r}")
        X.flags.writeable = False
        y.flags.writeable = False
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "y", y)

    def __len__(self) -> int:
        return self.X.shape[0]

    @property
    def dimension(self) -> int:
        return self.X.shape[1]

    def append(self, x, y: float) -> "ObservationSet":
        """Return a new set with (x, y) appended; self is unchanged."""
        x = np.asarray(x, dtype=float).reshape(1, -1)
        if len(self) and x.shape[1] != self.dimension:
            raise GpError("appended point has wrong dimension")
        if not np.isfinite(y):
            raise GpError("appended value must be finite")
        return ObservationSet(
            X=np.vstack([self.X, x]) if len(self) else x,
            y=np.append(self.y, float(y)),
            direction=self.direction,
        )


def empty_observations(dimension: int, direction: str = MINIMIZE) -> ObservationSet:
    return ObservationSet(
        X=np.empty((0, dimension)), y=np.empty(0), direction=direction
    )


@dataclass(frozen=True)
class GpPosterior:
    """Frozen fitted model: Cholesky factor of K + noise I + jitter I."""

    kernel: KernelSpec
    noise_variance: float
    prior_mean: float
    train_X: np.ndarray
    chol: np.ndarray  # lower triangular
    alpha: np.ndarray
    jitter: float

    @property
    def dimension(self) -> int:
        return self.train_X.shape[1]


@dataclass(frozen=True)
class Prediction:
    mean: np.ndarray
    variance: np.ndarray
    covariance: np.ndarray | None = None


def _chol_with_jitter(K: np.ndarray, signal_variance: float) -> tuple[np.ndarray, float]:
    """Lower Cholesky of K + jitter I, escalating jitter on failure.

    The exact matrix is tried first so well-conditioned noiseless fits keep
    zero posterior variance at the training points; the jitter ladder
    (1e-10 to 1e-4 of the signal variance) only kicks in when that fails.
    """
    jitter = 0.0
    max_jitter = MAX_JITTER_SCALE * signal_variance
    while True:
        try:
            L = cholesky(K + jitter * np.eye(K.shape[0]), lower=True)
            return L, jitter
        except np.linalg.LinAlgError:
            pass
        if jitter == 0.0:
            jitter = DEFAULT_JITTER_SCALE * signal_variance
            continue
        if jitter >= max_jitter:
            diag = np.diag(K)
            cond_hint = float(diag.max() / max(diag.min(), 1e-300))
            raise FactorizationError(
                f"Cholesky failed at jitter {jitter:.3e} "
                f"(diagonal ratio estimate {cond_hint:.3e})"
            )
        jitter = min(2.0 * jitter, max_jitter)


def fit_posterior(
    obs: ObservationSet,
    kernel: KernelSpec,
    noise_variance: float,
    prior_mean: float | None = None,
) -> GpPosterior:
    """Factorize the model and solve for the dual weights.

    ``prior_mean`` defaults to the mean of the observed values.
    """
    if len(obs) == 0:
        raise GpError("cannot fit a posterior to an empty observation set")
    if noise_variance < 0 or not np.isfinite(noise_variance):
        raise GpError("noise_variance must be nonnegative and finite")
    kernel.check_dimension(obs.dimension)
    m0 = float(np.mean(obs.y)) if prior_mean is None else float(prior_mean)
    K = gram_matrix(kernel, obs.X)
    K[np.diag_indices_from(K)] += noise_variance
    L, jitter = _chol_with_jitter(K, kernel.signal_variance)
    resid = obs.y - m0
    alpha = solve_triangular(
        L.T, solve_triangular(L, resid, lower=True), lower=False
    )
    return GpPosterior(
        kernel=kernel,
        noise_variance=float(noise_variance),
        prior_mean=m0,
        train_X=obs.X,
        chol=L,
        alpha=alpha,
        jitter=jitter,
    )


def predict(
    post: GpPosterior,
    X_star,
    full_cov: bool = False,
    include_noise: bool = False,
) -> Prediction:
    """Posterior mean and latent-function variance at test points."""
    X_star = np.asarray(X_star, dtype=float)
    if X_star.ndim == 1:
        X_star = X_star.reshape(-1, 1) if post.dimension == 1 else X_star.reshape(1, -1)
    if X_star.shape[0] == 0:
        raise GpError("predict requires at least one test point")
    if X_star.shape[1] != post.dimension:
        raise GpError("test points have wrong dimension")
    k_star = cross_covariance(post.kernel, post.train_X, X_star)  # (n, m)
    mean = post.prior_mean + k_star.T @ post.alpha
    v = solve_triangular(post.chol, k_star, lower=True)  # (n, m)
    if full_cov:
        prior_cov = cross_covariance(post.kernel, X_star, X_star)
        cov = prior_cov - v.T @ v
        cov = 0.5 * (cov + cov.T)
        if include_noise:
            cov[np.diag_indices_from(cov)] += post.noise_variance
        variance = np.maximum(np.diag(cov).copy(), 0.0)
        return Prediction(mean=mean, variance=variance, covariance=cov)
    prior_var = np.full(X_star.shape[0], post.kernel.signal_variance)
    variance = np.maximum(prior_var - np.sum(v**2, axis=0), 0.0)
    if include_noise:
        variance = variance + post.noise_variance
    return Prediction(mean=mean, variance=variance)


def log_marginal_likelihood(
    obs: ObservationSet,
    kernel: KernelSpec,
    noise_variance: float,
    prior_mean: float | None = None,
    with_grad: bool = False,
):
    """log N(y | m0, K + noise I), optionally with its gradient.

    The gradient is taken w.r.t. ``[log signal_variance,
    log length_scales..., log noise_variance]``.
    """
    if len(obs) == 0:
        raise GpError("log_marginal_likelihood requires observations")
    post = fit_posterior(obs, kernel, noise_variance, prior_mean=prior_mean)
    n = len(obs)
    resid = obs.y - post.prior_mean
    lml = (
        -0.5 * resid @ post.alpha
        - np.sum(np.log(np.diag(post.chol)))
        - 0.5 * n * LOG_2PI
    )
    if not with_grad:
        return float(lml)
    # d lml / d theta = 0.5 tr((alpha alpha^T - K^-1) dK/dtheta)
    L = post.chol
    Kinv = solve_triangular(
        L.T, solve_triangular(L, np.eye(n), lower=True), lower=False
    )
    W = np.outer(post.alpha, post.alpha) - Kinv
    kernel_grads = gram_grad_hyper(kernel, obs.X, obs.X)
    grad = np.empty(kernel.n_hypers + 1)
    for i, dK in enumerate(kernel_grads):
        grad[i] = 0.5 * np.sum(W * dK)
    # dK/d log(noise) = noise * I
    grad[-1] = 0.5 * noise_variance * np.trace(W)
    return float(lml), grad


@dataclass(frozen=True)
class HyperBounds:
    """Box bounds (natural scale) for hyperparameter fitting."""

    signal_variance: tuple[float, float] = (1e-4, 1e4)
    length_scale: tuple[float, float] = (1e-3, 1e3)
    noise_variance: tuple[float, float] = (1e-8, 1e2)

    def __post_init__(self):
        for lo, hi in (self.signal_variance, self.length_scale, self.noise_variance):
            if not (0 < lo < hi and np.isfinite(hi)):
                raise GpError("hyperparameter bounds must be finite and ordered")


def optimize_hypers(
    obs: ObservationSet,
    family: str = SQ_EXP_ISO,
    bounds: HyperBounds | None = None,
    n_restarts: int = 8,
    seed: int = 0,
    nu: float | None = None,
    fixed_noise: float | None = None,
    extra_starts: list[tuple[KernelSpec, float]] | None = None,
    maxiter: int = 200,
) -> tuple[KernelSpec, float]:
    """Multi-start maximization of the log marginal likelihood.

    Returns the best ``(KernelSpec, noise_variance)`` found.  When
    ``fixed_noise`` is given the noise variance is held there and excluded
    from the search.  ``extra_starts`` adds warm-start points to the
    log-uniform restarts.  Deterministic given ``seed``.
    """
    if len(obs) < 2:
        raise GpError("optimize_hypers needs at least two observations")
    bounds = bounds or HyperBounds()
    d = obs.dimension
    n_ls = 1 if family == SQ_EXP_ISO else d
    fit_noise = fixed_noise is None

    lo = np.concatenate(
        (
            [math.log(bounds.signal_variance[0])],
            np.full(n_ls, math.log(bounds.length_scale[0])),
            [math.log(bounds.noise_variance[0])] if fit_noise else [],
        )
    )
    hi = np.concatenate(
        (
            [math.log(bounds.signal_variance[1])],
            np.full(n_ls, math.log(bounds.length_scale[1])),
            [math.log(bounds.noise_variance[1])] if fit_noise else [],
        )
    )

    def unpack(z: np.ndarray) -> tuple[KernelSpec, float]:
        spec = KernelSpec(
            family=family,
            signal_variance=math.exp(z[0]),
            length_scales=np.exp(z[1 : 1 + n_ls]),
            nu=nu,
        )
        noise = math.exp(z[-1]) if fit_noise else fixed_noise
        return spec, noise

    def neg_lml(z: np.ndarray) -> tuple[float, np.ndarray]:
        spec, noise = unpack(z)
        try:
            val, grad = log_marginal_likelihood(obs, spec, noise, with_grad=True)
        except FactorizationError:
            return 1e25, np.zeros_like(z)
        grad = grad if fit_noise else grad[:-1]
        return -val, -grad

    rng = np.random.default_rng(seed)
    starts = [rng.uniform(lo, hi) for _ in range(n_restarts)]
    for spec, noise in extra_starts or []:
        z = spec.log_hypers()
        if fit_noise:
            z = np.append(z, math.log(max(noise, bounds.noise_variance[0])))
        starts.append(np.clip(z, lo, hi))

    best_val, best_z = math.inf, None
    for z0 in starts:
        res = minimize(
            neg_lml,
            z0,
            jac=True,
            method="L-BFGS-B",
            bounds=list(zip(lo, hi)),
            options={"maxiter": maxiter},
        )
        if np.isfinite(res.fun) and res.fun < best_val:
            best_val, best_z = res.fun, res.x
    if best_z is None or best_val >= 1e25:
        raise FactorizationError("all hyperparameter restarts failed to factorize")
    return unpack(best_z)


def sample_function(
    mean: np.ndarray,
    covariance: np.ndarray,
    n_draws: int,
    seed: int,
    jitter_scale: float = 1e-12,
) -> np.ndarray:
    """Draw from N(mean, covariance); returns an (n_draws, m) matrix.

    ``mean``/``covariance`` typically come from :func:`predict` with
    ``full_cov=True`` (posterior) or from :func:`gpbo.kernels.gram_matrix`
    with a zero/constant mean (prior).  Deterministic given ``seed``.
    """
    mean = np.asarray(mean, dtype=float).reshape(-1)
    cov = np.asarray(covariance, dtype=float)
    m = mean.size
    if cov.shape != (m, m):
        raise GpError("covariance shape does not match mean length")
    scale = max(float(np.max(np.diag(cov))), 1.0)
    jitter = jitter_scale * scale
    while True:
        try:
            L = cholesky(cov + jitter * np.eye(m), lower=True)
            break
        except np.linalg.LinAlgError:
            if jitter >= MAX_JITTER_SCALE * scale:
                raise FactorizationError("sampling covariance not factorizable")
            jitter *= 2.0
    z = np.random.default_rng(seed).standard_normal((n_draws, m))
    return mean + z @ L.T


def sample_prior(
    kernel: KernelSpec, X, n_draws: int, seed: int, prior_mean: float = 0.0
) -> np.ndarray:
    """Draws from the GP prior at points X."""
    K = gram_matrix(kernel, X)
    mean = np.full(K.shape[0], prior_mean)
    return sample_function(mean, K, n_draws, seed)


def sample_posterior(post: GpPosterior, X, n_draws: int, seed: int) -> np.ndarray:
    """Draws from the fitted posterior at points X."""
    pred = predict(post, X, full_cov=True)
    return sample_function(pred.mean, pred.covariance, n_draws, seed)
