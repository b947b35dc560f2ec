"""Outcome-adaptive L1 weights and tuning-parameter schedules.

The per-coefficient weights w_j = |beta_j|^(-gamma) come from an ordinary
least-squares regression of the outcome on treatment and all covariates,
so covariates unrelated to the outcome are penalized increasingly hard as
n grows. The schedule functions produce (lambda1, lambda2) sequences whose
rates keep selection consistent while leaving the active coefficients
asymptotically unpenalized.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .exceptions import DegenerateDesignError, InvalidGammaError
from .logistic import Dataset

LAMBDA1_EXPONENTS = (-10.0, -5.0, -1.0, -0.75, -0.5, -0.25, 0.25, 0.49)


@dataclass(frozen=True)
class OlsFit:
    """Least-squares fit of Y on [A | X]: treatment coefficient, covariate
    coefficients, residual norm, and the numerical rank of the design."""

    beta_A: float
    beta: np.ndarray
    residual_norm: float
    rank: int


def ols_fit(d: Dataset) -> OlsFit:
    """Minimum-norm least squares of Y on the column-augmented design [A | X].

    Full-rank designs give the usual normal-equation solution; rank-deficient
    ones (including p + 1 > n) return the minimum-norm solution via SVD.
    """
    design = np.column_stack([d.A, d.X])
    if design.shape[0] == 0 or not np.any(design != 0.0):
        raise DegenerateDesignError("design matrix is empty or identically zero")
    coef, _, rank, _ = np.linalg.lstsq(design, d.Y, rcond=None)
    resid = d.Y - design @ coef
    return OlsFit(
        beta_A=float(coef[0]),
        beta=coef[1:],
        residual_norm=float(np.linalg.norm(resid)),
        rank=int(rank),
    )


def compute_weights(fit: OlsFit, gamma: float) -> np.ndarray:
    """w_j = |beta_j|^(-gamma); an exactly-zero coefficient maps to +inf,
    meaning the coordinate is pinned to zero by the solver."""
    if not gamma > 1.0:
        raise InvalidGammaError(f"gamma must be > 1, got {gamma}")
    beta = np.abs(fit.beta)
    w = np.full(beta.shape, np.inf)
    nz = beta > 0.0
    w[nz] = beta[nz] ** (-gamma)
    return w


def lambda_schedule(n: int, gamma: float) -> tuple[float, float]:
    """(lambda1, lambda2) = (n^c, n^(1/4)) with c the midpoint of the
    admissible exponent range.

    Selection consistency needs lambda1 / sqrt(n) -> 0 together with
    lambda1 * n^(gamma/2 - 1) -> infinity, i.e. an exponent strictly inside
    (1 - gamma/2, 1/2); c is taken as the midpoint of that interval with the
    lower end floored at 0 so lambda1 never decays with n. For gamma = 3
    this gives c = 1/4. The ridge strength n^(1/4) keeps lambda2 / sqrt(n)
    -> 0.
    """
    if not gamma > 1.0:
        raise InvalidGammaError(f"gamma must be > 1, got {gamma}")
    if n < 1:
        raise ValueError("n must be >= 1")
    c = 0.5 * (0.5 + max(0.0, 1.0 - gamma / 2.0))
    return float(n) ** c, float(n) ** 0.25


def lambda_grid(n: int) -> list[tuple[float, float]]:
    """Default tuning grid: lambda1 = n * n^e over the standard exponent
    ladder, crossed with lambda2 in {0, n^(1/4), 2 n^(1/4)}.

    Deterministic order: lambda2 levels in that order, lambda1 ascending
    within each level. Keeping lambda2 = 0 in the grid leaves the plain
    outcome-adaptive lasso inside the search space, so comparisons between
    the ridge-augmented and plain estimators are fair.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    lam1s = [float(n) * float(n) ** e for e in LAMBDA1_EXPONENTS]
    lam2s = [0.0, float(n) ** 0.25, 2.0 * float(n) ** 0.25]
    return [(l1, l2) for l2 in lam2s for l1 in lam1s]
