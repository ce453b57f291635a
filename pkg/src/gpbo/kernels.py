"""Covariance (kernel) functions and Gram-matrix construction.

Three stationary families are supported:

* ``sq_exp_iso``  -- squared exponential with a single length-scale,
  ``k(x, x') = sf2 * exp(-r^2 / (2 l^2))``.
* ``sq_exp_ard``  -- squared exponential with one length-scale per input
  dimension (automatic relevance determination).
* ``matern``      -- Matern kernel at half-integer smoothness
  ``nu in {1/2, 3/2, 5/2}`` via the exact closed forms, with anisotropic
  distance ``r = ||(x - x') / theta||``.

All families carry a ``signal_variance`` prefactor so they are
interchangeable during hyperparameter fitting.  Hyperparameter gradients are
taken with respect to *log* parameters, which is also the parameterization
used by the fitting code in :mod:`gpbo.gp`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.spatial.distance import cdist

SQ_EXP_ISO = "sq_exp_iso"
SQ_EXP_ARD = "sq_exp_ard"
MATERN = "matern"

_FAMILIES = (SQ_EXP_ISO, SQ_EXP_ARD, MATERN)
_MATERN_NUS = (0.5, 1.5, 2.5)

#: default diagonal jitter, as a fraction of the signal variance
DEFAULT_JITTER_SCALE = 1e-10
#: jitter escalation cap, as a fraction of the signal variance
MAX_JITTER_SCALE = 1e-4


class KernelError(ValueError):
    """Invalid kernel specification or kernel-evaluation input."""


@dataclass(frozen=True, eq=False)
class KernelSpec:
    """Immutable kernel family + hyperparameters.

    ``length_scales`` has one entry for ``sq_exp_iso`` and one entry per
    input dimension for the ARD and Matern families.  ``nu`` is only
    meaningful for ``matern``.
    """

    family: str
    signal_variance: float = 1.0
    length_scales: np.ndarray = field(default_factory=lambda: np.ones(1))
    nu: float | None = None

    def __eq__(self, other):
        if not isinstance(other, KernelSpec):
            return NotImplemented
        return (
            self.family == other.family
            and self.signal_variance == other.signal_variance
            and np.array_equal(self.length_scales, other.length_scales)
            and self.nu == other.nu
        )

    def __hash__(self):
        return hash(
            (self.family, self.signal_variance, self.length_scales.tobytes(), self.nu)
        )

    def __post_init__(self):
        if self.family not in _FAMILIES:
            raise KernelError(f"unknown kernel family {self.family!r}")
        object.__setattr__(self, "signal_variance", float(self.signal_variance))
        ls = np.atleast_1d(np.asarray(self.length_scales, dtype=float)).copy()
        ls.flags.writeable = False
        object.__setattr__(self, "length_scales", ls)
        if not (self.signal_variance > 0 and np.isfinite(self.signal_variance)):
            raise KernelError("signal_variance must be positive and finite")
        if ls.ndim != 1 or ls.size == 0 or not np.all((ls > 0) & np.isfinite(ls)):
            raise KernelError("length_scales must be a vector of positive reals")
        if self.family == SQ_EXP_ISO and ls.size != 1:
            raise KernelError("sq_exp_iso takes exactly one length-scale")
        if self.family == MATERN:
            if self.nu not in _MATERN_NUS:
                raise KernelError(f"matern nu must be one of {_MATERN_NUS}")
            object.__setattr__(self, "nu", float(self.nu))
        elif self.nu is not None:
            raise KernelError("nu is only valid for the matern family")

    @property
    def n_hypers(self) -> int:
        """Number of log-hyperparameters: signal variance + length-scales."""
        return 1 + self.length_scales.size

    def check_dimension(self, d: int) -> None:
        if self.family != SQ_EXP_ISO and self.length_scales.size != d:
            raise KernelError(
                f"kernel has {self.length_scales.size} length-scales "
                f"but points are {d}-dimensional"
            )

    def with_log_hypers(self, log_hypers: np.ndarray) -> "KernelSpec":
        """Rebuild the spec from a flat log-hyperparameter vector.

        Layout: ``[log signal_variance, log length_scales...]`` (the same
        layout produced by :func:`kernel_grad_hyper`).
        """
        log_hypers = np.asarray(log_hypers, dtype=float)
        if log_hypers.size != self.n_hypers:
            raise KernelError("log-hyperparameter vector has wrong length")
        return KernelSpec(
            family=self.family,
            signal_variance=math.exp(log_hypers[0]),
            length_scales=np.exp(log_hypers[1:]),
            nu=self.nu,
        )

    def log_hypers(self) -> np.ndarray:
        return np.concatenate(
            ([math.log(self.signal_variance)], np.log(self.length_scales))
        )

    def to_json_dict(self) -> dict:
        out = {
            "family": self.family,
            "signal_variance": self.signal_variance,
            "length_scales": self.length_scales.tolist(),
        }
        if self.family == MATERN:
            out["nu"] = self.nu
        return out

    @classmethod
    def from_json_dict(cls, obj: dict) -> "KernelSpec":
        return cls(
            family=obj["family"],
            signal_variance=obj["signal_variance"],
            length_scales=np.asarray(obj["length_scales"], dtype=float),
            nu=obj.get("nu"),
        )


def _as_points(X) -> np.ndarray:
    """Coerce to an (n, d) float array; a single point becomes (1, d)."""
    X = np.asarray(X, dtype=float)
    if X.ndim == 0:
        X = X.reshape(1, 1)
    elif X.ndim == 1:
        X = X.reshape(1, -1)
    elif X.ndim != 2:
        raise KernelError("points must be at most 2-dimensional arrays")
    if not np.all(np.isfinite(X)):
        raise KernelError("non-finite input coordinate")
    return X


def _scaled_sqdists(spec: KernelSpec, X: np.ndarray, Z: np.ndarray) -> np.ndarray:
    """Pairwise squared distances of X vs Z after dividing by length-scales.

    cdist forms per-pair coordinate differences directly; the usual
    norm-expansion trick cancels catastrophically at tiny distances, which
    the Matern families amplify through the square root.
    """
    return cdist(X / spec.length_scales, Z / spec.length_scales, "sqeuclidean")


def _matern_shape(nu: float, r: np.ndarray) -> np.ndarray:
    """Closed-form Matern correlation g(r) at unit length-scale."""
    if nu == 0.5:
        return np.exp(-r)
    if nu == 1.5:
        a = math.sqrt(3.0) * r
        return (1.0 + a) * np.exp(-a)
    a = math.sqrt(5.0) * r
    return (1.0 + a + a**2 / 3.0) * np.exp(-a)


def cross_covariance(spec: KernelSpec, X, Z) -> np.ndarray:
    """Covariance matrix k(X, Z) of shape (n, m)."""
    X = _as_points(X)
    Z = _as_points(Z)
    if X.shape[1] != Z.shape[1]:
        raise KernelError("dimension mismatch between point sets")
    spec.check_dimension(X.shape[1])
    sq = _scaled_sqdists(spec, X, Z)
    if spec.family in (SQ_EXP_ISO, SQ_EXP_ARD):
        return spec.signal_variance * np.exp(-0.5 * sq)
    return spec.signal_variance * _matern_shape(spec.nu, np.sqrt(sq))


def eval_kernel(spec: KernelSpec, x, x_prime) -> float:
    """Scalar covariance between two points."""
    x = _as_points(x)
    xp = _as_points(x_prime)
    if x.shape != xp.shape or x.shape[0] != 1:
        raise KernelError("eval_kernel expects two single points of equal dimension")
    return float(cross_covariance(spec, x, xp)[0, 0])


def gram_matrix(spec: KernelSpec, X, jitter: float = 0.0) -> np.ndarray:
    """Symmetric Gram matrix K[i, j] = k(x_i, x_j) + jitter * delta_ij."""
    X = _as_points(X)
    if X.shape[0] == 0:
        raise KernelError("gram_matrix requires at least one point")
    if jitter < 0:
        raise KernelError("jitter must be nonnegative")
    K = cross_covariance(spec, X, X)
    # enforce exact symmetry against floating asymmetry in the BLAS product
    K = 0.5 * (K + K.T)
    if jitter:
        K[np.diag_indices_from(K)] += jitter
    return K


def kernel_grad_hyper(spec: KernelSpec, x, x_prime) -> np.ndarray:
    """Gradient of ``eval_kernel`` w.r.t. log-hyperparameters.

    Layout: ``[d k / d log(signal_variance), d k / d log(length_scale_j)...]``
    with one length-scale entry for ``sq_exp_iso`` and ``d`` entries
    otherwise.
    """
    G = gram_grad_hyper(spec, _as_points(x), _as_points(x_prime))
    return np.array([g[0, 0] for g in G])


def gram_grad_hyper(spec: KernelSpec, X, Z) -> list[np.ndarray]:
    """Per-log-hyperparameter gradients of ``cross_covariance(spec, X, Z)``.

    Returns ``spec.n_hypers`` matrices in the layout documented by
    :func:`kernel_grad_hyper`.
    """
    X = _as_points(X)
    Z = _as_points(Z)
    K = cross_covariance(spec, X, Z)
    # scaled per-dimension squared differences u_j^2 = ((x_j - z_j)/l_j)^2
    diffs2 = ((X[:, None, :] - Z[None, :, :]) / spec.length_scales) ** 2
    grads = [K.copy()]  # d k / d log sf2 = k
    if spec.family in (SQ_EXP_ISO, SQ_EXP_ARD):
        if spec.family == SQ_EXP_ISO:
            grads.append(K * diffs2.sum(axis=2))
        else:
            for j in range(diffs2.shape[2]):
                grads.append(K * diffs2[:, :, j])
        return grads

    r = np.sqrt(np.maximum(diffs2.sum(axis=2), 0.0))
    # d k / d log l_j = -sf2 * g'(r) * u_j^2 / r, with g the Matern shape
    if spec.nu == 0.5:
        with np.errstate(invalid="ignore", divide="ignore"):
            common = np.where(r > 0, np.exp(-r) / r, 0.0)
    elif spec.nu == 1.5:
        common = 3.0 * np.exp(-math.sqrt(3.0) * r)
    else:
        a = math.sqrt(5.0) * r
        common = (5.0 / 3.0) * (1.0 + a) * np.exp(-a)
    common = spec.signal_variance * common
    for j in range(diffs2.shape[2]):
        grads.append(common * diffs2[:, :, j])
    return grads
