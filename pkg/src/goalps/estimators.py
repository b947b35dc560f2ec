"""End-to-end propensity-score estimation and IPTW treatment-effect estimates.

``fit_method`` runs one of the three estimators (GOAL, OAL, LASSO) over a
tuning grid, picks the (lambda1, lambda2) pair whose inverse-probability
weights best balance the outcome-relevant covariates (the wAMD criterion),
and returns the normalized (Hajek) IPTW estimate of the average treatment
effect at the selected fit.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .exceptions import (
    DegenerateArmError,
    NoConvergedCandidateError,
    NonFiniteWeightError,
)
from .logistic import Dataset, propensity
from .solver import FitResult, PenaltySpec, fit
from .weights import OlsFit, compute_weights, ols_fit

METHOD_KINDS = ("GOAL", "OAL", "LASSO")
SUPPORT_TOL = 1e-8   # a coefficient counts as selected when |alpha_j| > 1e-8
PS_CLIP = 1e-6       # propensity truncation before weighting


@dataclass(frozen=True)
class MethodSpec:
    """Estimator choice. gamma feeds the adaptive weights for GOAL and OAL
    and is ignored by LASSO."""

    kind: str
    gamma: float = 3.0

    def __post_init__(self):
        if self.kind not in METHOD_KINDS:
            raise ValueError(f"kind must be one of {METHOD_KINDS}, got {self.kind!r}")
        if not self.gamma > 1.0:
            raise ValueError("gamma must be > 1")


@dataclass(frozen=True)
class AteEstimate:
    """Selected fit for one method on one dataset: the ATE, the chosen
    tuning pair, the selected support (0-based indices), and the truncated
    propensity scores that produced the estimate."""

    ate: float
    method: MethodSpec
    selected: frozenset[int]
    lambda1: float
    lambda2: float
    ps: np.ndarray
    alpha_hat: np.ndarray = field(repr=False, default=None)
    wamd_value: float = float("nan")


def selected_support(alpha: np.ndarray, tol: float = SUPPORT_TOL) -> frozenset[int]:
    """Indices j with |alpha_j| > tol (0-based)."""
    if not tol > 0:
        raise ValueError("tol must be > 0")
    alpha = np.asarray(alpha, dtype=np.float64)
    return frozenset(int(j) for j in np.flatnonzero(np.abs(alpha) > tol))


def _check_ps(d: Dataset, ps: np.ndarray) -> np.ndarray:
    ps = np.asarray(ps, dtype=np.float64)
    if ps.shape != (d.n,):
        raise ValueError(f"ps has shape {ps.shape}, expected ({d.n},)")
    if np.any(ps <= 0.0) or np.any(ps >= 1.0):
        raise NonFiniteWeightError("propensity scores must lie strictly in (0, 1)")
    return ps


def _check_arms(d: Dataset) -> None:
    n1 = float(d.A.sum())
    if n1 == 0.0 or n1 == d.n:
        raise DegenerateArmError("both treatment arms must be non-empty")


def wamd(d: Dataset, ps: np.ndarray, ols: OlsFit) -> float:
    """Weighted absolute mean difference of covariates after IPT weighting.

    With unit weights omega_i = a_i/ps_i + (1-a_i)/(1-ps_i), each covariate's
    weighted treated-vs-control mean difference is standardized by its sample
    standard deviation and weighted by |beta_j| from the outcome regression,
    so imbalance matters in proportion to outcome relevance.
    """
    ps = _check_ps(d, ps)
    _check_arms(d)
    a = d.A
    omega = a / ps + (1.0 - a) / (1.0 - ps)
    wt = omega * a
    wc = omega * (1.0 - a)
    mean_t = (d.X.T @ wt) / wt.sum()
    mean_c = (d.X.T @ wc) / wc.sum()
    sd = d.X.std(axis=0, ddof=1)
    if np.any(sd == 0.0):
        raise ValueError("constant covariate column: standardized difference undefined")
    return float(np.sum(np.abs(ols.beta) * np.abs(mean_t - mean_c) / sd))


def iptw_ate(d: Dataset, ps: np.ndarray) -> float:
    """Normalized (Hajek) IPTW estimate of the average treatment effect.

    Weights sum to one within each arm, which keeps the estimator location
    invariant and far more stable than the unnormalized form when some
    propensity scores are extreme.
    """
    ps = _check_ps(d, ps)
    _check_arms(d)
    a, y = d.A, d.Y
    wt = a / ps
    wc = (1.0 - a) / (1.0 - ps)
    return float((wt @ y) / wt.sum() - (wc @ y) / wc.sum())


def _grid_for_method(m: MethodSpec,
                     grid: "list[tuple[float, float]]") -> list[tuple[float, float]]:
    # OAL and LASSO live on the lam2 = 0 slice; duplicates are dropped for
    # every method (order preserved) so identical pair lists take identical
    # warm-start paths regardless of how the caller built the grid
    pairs: dict[tuple[float, float], None] = {}
    for l1, l2 in grid:
        key = (float(l1), float(l2) if m.kind == "GOAL" else 0.0)
        pairs.setdefault(key, None)
    return list(pairs)


def fit_method(d: Dataset, m: MethodSpec,
               grid: "list[tuple[float, float]]") -> AteEstimate:
    """Run one estimator over a tuning grid and return its ATE estimate.

    Adaptive weights come from the outcome regression (unit weights for
    LASSO). Within each lambda2 level the fits are warm-started from large
    lambda1 downward; the returned pair is the converged fit minimizing the
    wAMD balance criterion, with propensity scores truncated to
    [PS_CLIP, 1 - PS_CLIP] before weighting.
    """
    if not grid:
        raise ValueError("tuning grid must be non-empty")
    _check_arms(d)

    ols = ols_fit(d)
    if m.kind == "LASSO":
        w = np.ones(d.p)
    else:
        w = compute_weights(ols, m.gamma)

    pairs = _grid_for_method(m, grid)

    levels: dict[float, list[tuple[float, float]]] = {}
    for pair in pairs:
        levels.setdefault(pair[1], []).append(pair)

    results: dict[tuple[float, float], FitResult] = {}
    for lam2, level_pairs in levels.items():
        warm = np.zeros(d.p)
        for l1, l2 in sorted(level_pairs, key=lambda t: -t[0]):
            pen = PenaltySpec(lambda1=l1, lambda2=l2, weights=w, gamma=m.gamma)
            res = fit(d, pen, init=warm)
            warm = res.alpha_hat
            results[(l1, l2)] = res

    best = None
    for pair in pairs:  # canonical grid order decides ties deterministically
        res = results[pair]
        if not res.converged:
            continue
        ps = np.clip(propensity(d, res.alpha_hat), PS_CLIP, 1.0 - PS_CLIP)
        value = wamd(d, ps, ols)
        if best is None or value < best[0]:
            best = (value, pair, res, ps)
    if best is None:
        raise NoConvergedCandidateError(
            f"no converged fit among {len(pairs)} grid points for {m.kind}")

    value, (l1, l2), res, ps = best
    return AteEstimate(
        ate=iptw_ate(d, ps),
        method=m,
        selected=selected_support(res.alpha_hat),
        lambda1=l1,
        lambda2=l2,
        ps=ps,
        alpha_hat=res.alpha_hat,
        wamd_value=value,
    )
