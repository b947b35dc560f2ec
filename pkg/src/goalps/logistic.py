"""Logistic propensity-model primitives shared by every estimator.

The treatment model is logit P(A=1 | X) = X alpha with no intercept, for
standardized covariates. Everything here is a pure function of a Dataset
and a coefficient vector; values are immutable after construction and safe
to share across concurrently running replications.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .exceptions import DimensionMismatchError


@dataclass(frozen=True)
class Dataset:
    """Covariate matrix X (n x p), binary treatment A, continuous outcome Y.

    All arrays are coerced to float64. A must contain only 0 and 1; all
    entries must be finite; X, A, Y must agree on n.
    """

    X: np.ndarray
    A: np.ndarray
    Y: np.ndarray

    def __post_init__(self):
        X = np.ascontiguousarray(self.X, dtype=np.float64)
        A = np.ascontiguousarray(self.A, dtype=np.float64)
        Y = np.ascontiguousarray(self.Y, dtype=np.float64)
        if X.ndim != 2:
            raise DimensionMismatchError("X must be a 2-d matrix")
        if A.ndim != 1 or Y.ndim != 1:
            raise DimensionMismatchError("A and Y must be 1-d vectors")
        n, p = X.shape
        if n < 1 or p < 1:
            raise DimensionMismatchError("need n >= 1 and p >= 1")
        if A.shape[0] != n or Y.shape[0] != n:
            raise DimensionMismatchError(
                f"X has {n} rows but A has {A.shape[0]} and Y has {Y.shape[0]}")
        if not (np.isfinite(X).all() and np.isfinite(A).all() and np.isfinite(Y).all()):
            raise ValueError("dataset entries must all be finite")
        if not np.all((A == 0.0) | (A == 1.0)):
            raise ValueError("treatment indicator A must contain only 0 and 1")
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "Y", Y)

    @property
    def n(self) -> int:
        return self.X.shape[0]

    @property
    def p(self) -> int:
        return self.X.shape[1]


@dataclass(frozen=True)
class FisherInfo:
    """Per-observation Fisher information F (p x p), with the active-set
    block F11 filled in when an active index set was supplied."""

    F: np.ndarray
    F11: np.ndarray | None = None
    active: tuple[int, ...] | None = field(default=None)


def phi(t):
    """log(1 + e^t), overflow-safe on both tails.

    Computed as max(t, 0) + log1p(e^-|t|), which has the exact asymptotes
    phi(t) -> t for large t and phi(t) -> 0 for very negative t.
    """
    t = np.asarray(t, dtype=np.float64)
    return np.maximum(t, 0.0) + np.log1p(np.exp(-np.abs(t)))


def phi1(t):
    """First derivative of phi: the logistic function, in (0, 1)."""
    t = np.asarray(t, dtype=np.float64)
    e = np.exp(-np.abs(t))
    return np.where(t >= 0.0, 1.0 / (1.0 + e), e / (1.0 + e))


def phi2(t):
    """Second derivative of phi: p(1-p) with p = phi1(t), in (0, 1/4]."""
    p = phi1(t)
    return p * (1.0 - p)


def _check_alpha(d: Dataset, alpha: np.ndarray) -> np.ndarray:
    alpha = np.asarray(alpha, dtype=np.float64)
    if alpha.ndim != 1 or alpha.shape[0] != d.p:
        raise DimensionMismatchError(
            f"coefficient vector has length {alpha.shape}, expected ({d.p},)")
    return alpha


def neg_log_likelihood(d: Dataset, alpha: np.ndarray) -> float:
    """sum_i [ -a_i (x_i . alpha) + log(1 + exp(x_i . alpha)) ]; always >= 0."""
    alpha = _check_alpha(d, alpha)
    eta = d.X @ alpha
    return float(np.sum(phi(eta) - d.A * eta))


def score(d: Dataset, alpha: np.ndarray) -> np.ndarray:
    """Gradient of the negative log-likelihood: -X' (a - phi1(X alpha))."""
    alpha = _check_alpha(d, alpha)
    eta = d.X @ alpha
    return d.X.T @ (phi1(eta) - d.A)


def fisher_information(d: Dataset, alpha: np.ndarray,
                       active: "list[int] | np.ndarray | None" = None) -> FisherInfo:
    """Per-observation information (1/n) sum_i phi2(x_i . alpha) x_i x_i'.

    Reported divided by n so it estimates the population curvature matrix;
    symmetry is enforced exactly. When ``active`` is given, the block over
    those indices is extracted as F11 (the caller decides what the active
    set is).
    """
    alpha = _check_alpha(d, alpha)
    eta = d.X @ alpha
    weights = phi2(eta)
    F = (d.X.T * weights) @ d.X / d.n
    F = 0.5 * (F + F.T)
    if active is None:
        return FisherInfo(F=F)
    idx = tuple(int(j) for j in active)
    F11 = F[np.ix_(idx, idx)]
    return FisherInfo(F=F, F11=F11, active=idx)


def propensity(d: Dataset, alpha: np.ndarray) -> np.ndarray:
    """Estimated propensity scores phi1(X alpha), entrywise in (0, 1)."""
    alpha = _check_alpha(d, alpha)
    return phi1(d.X @ alpha)
