"""Replicated Monte Carlo experiments, aggregation, and result emission.

Every method within a replication consumes the identical dataset (paired
comparison). Replications run in a thread pool — the hot solver kernels
release the GIL — and are reduced in replication order, so parallel and
serial runs produce identical aggregates. Failed replications are counted
and excluded, never silently dropped, and more than 10% failures for a
method is an error.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import __version__
from ._backend import backend_name
from .estimators import SUPPORT_TOL, MethodSpec, fit_method, selected_support
from .exceptions import GoalpsError, TooManyFailuresError
from .logistic import Dataset, fisher_information
from .simgen import Scenario, child_seed, generate_dataset
from .solver import PenaltySpec, fit
from .weights import compute_weights, lambda_grid, lambda_schedule, ols_fit

REFERENCE_DRAW_SIZE = 100_000  # sample size of the information-matrix reference


@dataclass(frozen=True)
class ReplicationSummary:
    """Aggregates for one (scenario, method) cell.

    ``se`` is the sample standard deviation of the ATE estimates across
    replications (not a mean of per-replication errors), which makes
    mse = bias^2 + se^2 (R-1)/R hold exactly with R = n_replications, the
    number of replications included in the aggregates.
    """

    method: MethodSpec
    scenario: Scenario
    bias: float
    se: float
    mse: float
    selection_prop: np.ndarray
    support_recovery_rate: float
    n_replications: int
    n_failed: int
    ates: np.ndarray


@dataclass(frozen=True)
class OracleDiagnostics:
    """Selection and normality diagnostics for the adaptive estimator under
    a scheduled penalty sequence."""

    scenario: Scenario
    zero_recovery_rate: float
    nonzero_recovery_rate: float
    active_indices: tuple[int, ...]
    z_mean: np.ndarray       # per-active-coordinate mean of sqrt(n)(ahat - a*)
    z_var: np.ndarray        # matching sample variance
    z_se: np.ndarray         # Monte Carlo standard error of z_mean
    ref_var: np.ndarray      # diagonal of the inverse active-block information
    n_replications: int


def _map_replications(worker, R: int, workers: int) -> list:
    reps = range(1, R + 1)
    if workers <= 1:
        return [worker(r) for r in reps]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(worker, reps))


def run_replications(s: Scenario, methods: list[MethodSpec], R: int,
                     workers: int = 1) -> list[ReplicationSummary]:
    """Paired Monte Carlo comparison of the given methods over R datasets."""
    if R < 2:
        raise ValueError("R must be >= 2")
    grid = lambda_grid(s.n)
    active = s.active_set

    def one_rep(r: int):
        data = generate_dataset(s, r)
        out = []
        for m in methods:
            try:
                est = fit_method(data, m, grid)
                out.append((est.ate, est.selected))
            except GoalpsError:
                out.append(None)
        return out

    rows = _map_replications(one_rep, R, workers)

    summaries = []
    for k, m in enumerate(methods):
        ates = np.array([row[k][0] for row in rows if row[k] is not None])
        supports = [row[k][1] for row in rows if row[k] is not None]
        n_failed = R - len(ates)
        if n_failed > R / 10:
            raise TooManyFailuresError(
                f"{m.kind}: {n_failed} of {R} replications failed")
        err = ates - s.beta_A
        bias = float(err.mean())
        se = float(ates.std(ddof=1))
        mse = float(np.mean(err ** 2))
        sel = np.zeros(s.p)
        for sup in supports:
            for j in sup:
                sel[j] += 1.0
        sel /= len(supports)
        exact = sum(1 for sup in supports if sup == active) / len(supports)
        summaries.append(ReplicationSummary(
            method=m, scenario=s, bias=bias, se=se, mse=mse,
            selection_prop=sel, support_recovery_rate=float(exact),
            n_replications=len(ates), n_failed=n_failed,
            ates=ates,
        ))
    return summaries


def reference_information_diag(s: Scenario,
                               n_reference: int = REFERENCE_DRAW_SIZE) -> np.ndarray:
    """diag(F11^-1) at alpha_star from one large Monte Carlo covariate draw.

    There is no elementary closed form for the logistic information under an
    equicorrelated Gaussian design, so the population matrix is estimated at
    n = 100000 (replication index 0, never used by the experiment streams).
    """
    ref = Scenario(n=n_reference, rho=s.rho, q=s.q, p=s.p,
                   alpha_star=s.alpha_star, beta_star=s.beta_star,
                   beta_A=s.beta_A, seed=s.seed)
    rng = np.random.default_rng(child_seed(s.seed, 0))
    from .simgen import sample_covariates

    X = sample_covariates(ref, rng)
    d = Dataset(X=X, A=np.zeros(n_reference), Y=np.zeros(n_reference))
    active = sorted(s.active_set)
    info = fisher_information(d, s.alpha_star, active=active)
    return np.diag(np.linalg.inv(info.F11))


def oracle_diagnostics(s: Scenario, R: int, use_schedule: bool = True,
                       gamma: float = 3.0, workers: int = 1) -> OracleDiagnostics:
    """Fit the adaptive ridge-augmented estimator on R replications and
    summarize support recovery and the distribution of sqrt(n)(ahat - a*).

    With use_schedule the penalties come from lambda_schedule(n, gamma);
    otherwise each replication tunes over the default grid via fit_method.
    """
    if R < 50:
        raise ValueError("R must be >= 50 for oracle diagnostics")
    active = sorted(s.active_set)
    inactive = sorted(set(range(s.p)) - set(active))
    lam1, lam2 = lambda_schedule(s.n, gamma)
    grid = lambda_grid(s.n)

    def one_rep(r: int) -> np.ndarray:
        data = generate_dataset(s, r)
        if use_schedule:
            w = compute_weights(ols_fit(data), gamma)
            pen = PenaltySpec(lambda1=lam1, lambda2=lam2, weights=w, gamma=gamma)
            return fit(data, pen).alpha_hat
        return fit_method(data, MethodSpec("GOAL", gamma), grid).alpha_hat

    alphas = np.array(_map_replications(one_rep, R, workers))

    zero_ok = np.all(np.abs(alphas[:, inactive]) <= SUPPORT_TOL, axis=1) \
        if inactive else np.ones(R, dtype=bool)
    nonzero_ok = np.all(np.abs(alphas[:, active]) > SUPPORT_TOL, axis=1)
    z = math.sqrt(s.n) * (alphas[:, active] - s.alpha_star[active])
    z_var = z.var(axis=0, ddof=1)
    return OracleDiagnostics(
        scenario=s,
        zero_recovery_rate=float(zero_ok.mean()),
        nonzero_recovery_rate=float(nonzero_ok.mean()),
        active_indices=tuple(active),
        z_mean=z.mean(axis=0),
        z_var=z_var,
        z_se=np.sqrt(z_var / R),
        ref_var=reference_information_diag(s),
        n_replications=R,
    )


# ---------------------------------------------------------------------------
# Result files
# ---------------------------------------------------------------------------

def _header_comment(scenario_hash: str, seed: int) -> str:
    return (f"# scenario_hash={scenario_hash} seed={seed} "
            f"rng=PCG64(numpy {np.__version__}) "
            f"backend={backend_name()} goalps={__version__}\n")


def _scenario_tag(s: Scenario) -> str:
    rho = f"{s.rho:g}".replace(".", "p").replace("-", "m")
    return f"n{s.n}_rho{rho}"


def emit_results(summaries: list[ReplicationSummary], out_dir) -> list[Path]:
    """Write the metrics table, one selection table per scenario, and one
    selection plot (SVG) per scenario. Returns the written paths.

    Files are byte-identical across reruns with the same seed: floats are
    written with repr (shortest round-trip) and the SVG is rendered with a
    fixed hash salt and no timestamp.
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written = []

    by_scenario: dict[str, list[ReplicationSummary]] = {}
    order: list[Scenario] = []
    for summ in summaries:
        key = summ.scenario.content_hash()
        if key not in by_scenario:
            by_scenario[key] = []
            order.append(summ.scenario)
        by_scenario[key].append(summ)

    all_hash = "+".join(s.content_hash() for s in order)
    seed = order[0].seed if order else 0

    metrics = out / "metrics.csv"
    with metrics.open("w") as fh:
        fh.write(_header_comment(all_hash, seed))
        fh.write("n,p,card_A,rho,method,bias,se,mse,n_failed\n")
        for s in order:
            for summ in by_scenario[s.content_hash()]:
                fh.write(f"{s.n},{s.p},{len(s.active_set)},{s.rho!r},"
                         f"{summ.method.kind},{summ.bias!r},{summ.se!r},"
                         f"{summ.mse!r},{summ.n_failed}\n")
    written.append(metrics)

    for s in order:
        rows = by_scenario[s.content_hash()]
        roles = s.roles
        sel = out / f"selection_{_scenario_tag(s)}.csv"
        with sel.open("w") as fh:
            fh.write(_header_comment(s.content_hash(), s.seed))
            fh.write("method,covariate_index,role,proportion\n")
            for summ in rows:
                for j in range(s.p):
                    fh.write(f"{summ.method.kind},{j + 1},{roles[j]},"
                             f"{summ.selection_prop[j]!r}\n")
        written.append(sel)
        written.append(_selection_plot(s, rows, out / f"selection_{_scenario_tag(s)}.svg"))

    return written


def _selection_plot(s: Scenario, rows: list[ReplicationSummary],
                    path: Path) -> Path:
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    with plt.rc_context({"svg.hashsalt": "goalps"}):
        fig, ax = plt.subplots(figsize=(7.0, 4.0))
        idx = np.arange(1, s.p + 1)
        markers = {"GOAL": "o", "OAL": "s", "LASSO": "^"}
        for summ in rows:
            ax.plot(idx, summ.selection_prop,
                    marker=markers.get(summ.method.kind, "."),
                    markersize=3, linewidth=1.0, label=summ.method.kind)
        roles = s.roles
        bounds = [j + 1.5 for j in range(s.p - 1) if roles[j] != roles[j + 1]]
        for b in bounds:
            ax.axvline(b, color="grey", linewidth=0.6, linestyle=":")
        seen = []
        for j, role in enumerate(roles):
            if role not in seen:
                seen.append(role)
                ax.text(j + 1, 1.06, role, fontsize=7, color="grey")
        ax.set_xlabel("covariate index")
        ax.set_ylabel("selection proportion")
        ax.set_ylim(-0.02, 1.12)
        ax.set_title(f"n={s.n}, p={s.p}, rho={s.rho:g}")
        ax.legend(loc="center right", fontsize=8)
        fig.tight_layout()
        fig.savefig(path, format="svg", metadata={"Date": None})
        plt.close(fig)
    return path
