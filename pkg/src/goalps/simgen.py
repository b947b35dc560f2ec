"""Seeded synthetic-data generation with blocked coefficient structure.

Covariates are equicorrelated standard Gaussians built by the factor
construction X_ij = sqrt(rho) Z_i0 + sqrt(1 - rho) Z_ij, treatment is
Bernoulli with logit X alpha_star, and the outcome is linear Gaussian
Y = beta_A A + X beta_star + eps with unit noise. Dimensions grow with the
sample size: p = floor(4 sqrt(n) - 5) and block size q = floor(p / 9).

Covariate roles are derived from the zero patterns of (alpha_star,
beta_star): confounders affect both models, pure outcome predictors only
the outcome, pure treatment predictors only the treatment, and spurious
covariates neither. The target support for selection is the confounders
plus the pure outcome predictors.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass

import numpy as np

from .exceptions import ScenarioConfigError
from .logistic import Dataset, phi1

ROLE_CONFOUNDER = "confounder"
ROLE_OUTCOME = "outcome_predictor"
ROLE_TREATMENT = "treatment_predictor"
ROLE_SPURIOUS = "spurious"

# Default per-block coefficient magnitudes, in block order
# (confounder, outcome-only, treatment-only, spurious).
DEFAULT_ALPHA_BLOCKS = (0.6, 0.0, 0.1, 0.0)
DEFAULT_BETA_BLOCKS = (0.6, 0.6, 0.0, 0.0)

_MASK64 = (1 << 64) - 1


def _splitmix64(x: int) -> int:
    x = (x + 0x9E3779B97F4A7C15) & _MASK64
    z = x
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return (z ^ (z >> 31)) & _MASK64


def child_seed(seed: int, r: int) -> int:
    """Per-replication seed: seed XOR hash(r), reproducible individually and
    independent of execution order."""
    return (int(seed) & _MASK64) ^ _splitmix64(int(r))


@dataclass(frozen=True)
class Scenario:
    """Full generative specification of one simulated experiment."""

    n: int
    rho: float
    q: int
    p: int
    alpha_star: np.ndarray
    beta_star: np.ndarray
    beta_A: float
    seed: int

    def __post_init__(self):
        a = np.asarray(self.alpha_star, dtype=np.float64)
        b = np.asarray(self.beta_star, dtype=np.float64)
        if self.n < 2:
            raise ScenarioConfigError("n must be >= 2")
        if not 0.0 <= self.rho < 1.0:
            raise ScenarioConfigError("rho must lie in [0, 1)")
        if self.q < 1:
            raise ScenarioConfigError("q must be >= 1")
        if self.p < 3 * self.q:
            raise ScenarioConfigError(f"p = {self.p} must be >= 3q = {3 * self.q}")
        if a.shape != (self.p,) or b.shape != (self.p,):
            raise ScenarioConfigError("alpha_star and beta_star must have length p")
        if not (np.isfinite(a).all() and np.isfinite(b).all()):
            raise ScenarioConfigError("coefficients must be finite")
        object.__setattr__(self, "alpha_star", a)
        object.__setattr__(self, "beta_star", b)

    @property
    def roles(self) -> list[str]:
        out = []
        for aj, bj in zip(self.alpha_star, self.beta_star):
            if aj != 0.0 and bj != 0.0:
                out.append(ROLE_CONFOUNDER)
            elif bj != 0.0:
                out.append(ROLE_OUTCOME)
            elif aj != 0.0:
                out.append(ROLE_TREATMENT)
            else:
                out.append(ROLE_SPURIOUS)
        return out

    @property
    def active_set(self) -> frozenset[int]:
        """Indices to keep in the propensity model: confounders plus pure
        outcome predictors, i.e. exactly the nonzero outcome coefficients."""
        return frozenset(int(j) for j in np.flatnonzero(self.beta_star != 0.0))

    def content_hash(self) -> str:
        payload = json.dumps({
            "n": self.n, "rho": self.rho, "q": self.q, "p": self.p,
            "alpha_star": self.alpha_star.tolist(),
            "beta_star": self.beta_star.tolist(),
            "beta_A": self.beta_A, "seed": self.seed,
        }, sort_keys=True)
        return hashlib.sha256(payload.encode()).hexdigest()[:12]


def dimensions_for(n: int) -> tuple[int, int]:
    """p = floor(4 sqrt(n) - 5) and q = floor(p / 9)."""
    p = int(np.floor(4.0 * np.sqrt(n) - 5.0))
    if p < 9:
        raise ScenarioConfigError(
            f"n = {n} gives p = {p} < 9; the dimension formula needs a larger n")
    return p, p // 9


def paper_scenario(n: int, rho: float, seed: int,
                   alpha_blocks: tuple[float, float, float, float] = DEFAULT_ALPHA_BLOCKS,
                   beta_blocks: tuple[float, float, float, float] = DEFAULT_BETA_BLOCKS,
                   beta_A: float = 0.0,
                   q: int | None = None,
                   p: int | None = None) -> Scenario:
    """Blocked scenario with growing dimensions.

    The first q covariates are confounders, the next q pure outcome
    predictors, the next q pure treatment predictors, and the remaining
    p - 3q spurious; block magnitudes are overridable so alternative
    coefficient readings are a config change away.
    """
    dp, dq = dimensions_for(n)
    p = dp if p is None else int(p)
    q = dq if q is None else int(q)
    alpha = np.zeros(p)
    beta = np.zeros(p)
    blocks = [slice(0, q), slice(q, 2 * q), slice(2 * q, 3 * q), slice(3 * q, p)]
    for sl, av, bv in zip(blocks, alpha_blocks, beta_blocks):
        alpha[sl] = av
        beta[sl] = bv
    return Scenario(n=n, rho=float(rho), q=q, p=p, alpha_star=alpha,
                    beta_star=beta, beta_A=float(beta_A), seed=int(seed))


def sample_covariates(s: Scenario, rng: np.random.Generator) -> np.ndarray:
    """Rows are independent draws with N(0,1) margins and every pairwise
    correlation exactly rho in population, via one shared factor."""
    z = rng.standard_normal((s.n, s.p + 1))
    return np.sqrt(s.rho) * z[:, :1] + np.sqrt(1.0 - s.rho) * z[:, 1:]


def sample_treatment(X: np.ndarray, alpha_star: np.ndarray,
                     rng: np.random.Generator) -> np.ndarray:
    """A_i ~ Bernoulli(expit(x_i . alpha_star)), independent given X."""
    pr = phi1(X @ alpha_star)
    return (rng.random(X.shape[0]) < pr).astype(np.float64)


def sample_outcome(X: np.ndarray, A: np.ndarray, beta_A: float,
                   beta_star: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    """Y_i = beta_A A_i + x_i . beta_star + eps_i with eps ~ N(0, 1)."""
    return beta_A * A + X @ beta_star + rng.standard_normal(X.shape[0])


def generate_dataset(s: Scenario, replication: int) -> Dataset:
    """Deterministic dataset for one replication index (draw order: X, A, Y)."""
    rng = np.random.default_rng(child_seed(s.seed, replication))
    X = sample_covariates(s, rng)
    A = sample_treatment(X, s.alpha_star, rng)
    Y = sample_outcome(X, A, s.beta_A, s.beta_star, rng)
    return Dataset(X=X, A=A, Y=Y)


# ---------------------------------------------------------------------------
# Scenario config files
# ---------------------------------------------------------------------------

_SCENARIO_KEYS = {"n", "rho", "q", "p", "alpha_star", "beta_star", "beta_A", "seed"}
_BLOCK_KEYS = (ROLE_CONFOUNDER, ROLE_OUTCOME, ROLE_TREATMENT, ROLE_SPURIOUS)


def _as_list(value) -> list:
    return list(value) if isinstance(value, (list, tuple)) else [value]


def _coef_spec(raw, name: str):
    """A coefficient field is either an explicit vector or a per-block map."""
    if raw is None:
        return None
    if isinstance(raw, dict):
        unknown = set(raw) - set(_BLOCK_KEYS)
        if unknown:
            raise ScenarioConfigError(
                f"{name}: unknown block keys {sorted(unknown)}; "
                f"expected {list(_BLOCK_KEYS)}")
        defaults = dict(zip(_BLOCK_KEYS,
                            DEFAULT_ALPHA_BLOCKS if name == "alpha_star"
                            else DEFAULT_BETA_BLOCKS))
        defaults.update({k: float(v) for k, v in raw.items()})
        return tuple(defaults[k] for k in _BLOCK_KEYS)
    return [float(v) for v in _as_list(raw)]


def scenarios_from_config(cfg: dict, seed: int) -> list[Scenario]:
    """Expand a scenario block (grid over n and rho allowed) into scenarios.

    Unknown keys are an error. Explicit alpha_star/beta_star vectors are
    only valid with a single n; the block-map form works across a grid.
    Each scenario gets a distinct deterministic seed derived from ``seed``
    and its grid position.
    """
    if not isinstance(cfg, dict):
        raise ScenarioConfigError("scenario block must be a mapping")
    unknown = set(cfg) - _SCENARIO_KEYS
    if unknown:
        raise ScenarioConfigError(f"unknown scenario keys: {sorted(unknown)}")
    if "n" not in cfg:
        raise ScenarioConfigError("scenario block must set n")
    ns = [int(v) for v in _as_list(cfg["n"])]
    rhos = [float(v) for v in _as_list(cfg.get("rho", 0.0))]
    alpha_spec = _coef_spec(cfg.get("alpha_star"), "alpha_star")
    beta_spec = _coef_spec(cfg.get("beta_star"), "beta_star")
    explicit = isinstance(alpha_spec, list) or isinstance(beta_spec, list)
    if explicit and len(ns) > 1:
        raise ScenarioConfigError(
            "explicit coefficient vectors require a single n; "
            "use the per-block map form for grids")
    beta_A = float(cfg.get("beta_A", 0.0))
    q = cfg.get("q")
    p = cfg.get("p")

    out = []
    idx = 0
    for n in ns:
        for rho in rhos:
            s_seed = child_seed(seed, 1_000_003 + idx) if idx > 0 else int(seed)
            kwargs = dict(beta_A=beta_A, q=q, p=p)
            if isinstance(alpha_spec, tuple):
                kwargs["alpha_blocks"] = alpha_spec
            if isinstance(beta_spec, tuple):
                kwargs["beta_blocks"] = beta_spec
            scen = paper_scenario(n, rho, s_seed, **kwargs)
            if isinstance(alpha_spec, list) or isinstance(beta_spec, list):
                alpha = np.array(alpha_spec if isinstance(alpha_spec, list)
                                 else scen.alpha_star)
                beta = np.array(beta_spec if isinstance(beta_spec, list)
                                else scen.beta_star)
                scen = Scenario(n=scen.n, rho=scen.rho, q=scen.q, p=scen.p,
                                alpha_star=alpha, beta_star=beta,
                                beta_A=beta_A, seed=s_seed)
            out.append(scen)
            idx += 1
    return out
