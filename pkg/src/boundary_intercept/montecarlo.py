"""Monte Carlo harness: rosters, replications, and summary tables.

One replication draws a design, fits the selection index once by the
average-derivative estimator (shared by every semiparametric entry) and a
probit (feeding only the parametric two-step), then evaluates every roster
entry.  Entry-level failures -- an empty kernel window at a small sample,
say -- are recorded per label and never abort the replication; dataset
level failures (e.g. a first stage that cannot be fit at all) fail every
label that depends on it, with the reason logged.

Replications are embarrassingly parallel.  Results are keyed by
replication index and reduced in sorted order, so the summary table is
byte-identical for any worker count.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from typing import Optional

import numpy as np

from .bandwidth import plugin_bandwidths
from .data import Dataset
from .dgp import SimulationDesign, generate
from .errors import EstimationError
from .estimators import (
    InterceptEstimate,
    local_constant,
    local_linear,
    smoothed_tail_mean,
    tail_mean,
)
from .firststage import average_derivative_beta, heckman_two_step
from .inference import (
    TestResult,
    se_local_constant,
    se_local_linear,
    se_tail_mean,
    t_test,
)
from .kernels import KERNEL_NAMES

__all__ = [
    "CSV_HEADER",
    "DEFAULT_QUANTILES",
    "LabelOutcome",
    "ReplicationResult",
    "RosterEntry",
    "SummaryRow",
    "default_roster",
    "format_summary_csv",
    "gamma_quantile",
    "run_replication",
    "run_study",
    "summarize",
    "write_summary_csv",
]

#: Tail cutoffs, as quantiles of the selected-index distribution.
DEFAULT_QUANTILES = (0.99, 0.95, 0.9, 0.8, 0.7, 0.5)

_METHODS = ("two_step", "tail_mean", "smoothed_tail_mean", "local_constant", "local_linear")


@dataclass(frozen=True)
class RosterEntry:
    """One estimator configuration in a study."""

    label: str
    method: str
    kernel: Optional[str] = None
    quantile: Optional[float] = None
    b: Optional[float] = None

    def __post_init__(self):
        if self.method not in _METHODS:
            raise ValueError(f"method must be one of {_METHODS}, got {self.method!r}")
        if self.method in ("local_constant", "local_linear") and self.kernel is None:
            raise ValueError(f"{self.method} entries need a kernel")
        if self.method in ("tail_mean", "smoothed_tail_mean"):
            if self.quantile is None or not (0.0 < self.quantile < 1.0):
                raise ValueError(
                    f"{self.method} entries need a quantile in (0, 1), got {self.quantile}"
                )


def default_roster(quantiles=DEFAULT_QUANTILES, kernels=KERNEL_NAMES) -> tuple[RosterEntry, ...]:
    """The full comparison roster: two-step, both tail means over the
    quantile grid, and both local fits under every kernel."""
    quantiles = tuple(float(q) for q in quantiles)
    if not all(0.0 < q < 1.0 for q in quantiles):
        raise ValueError(f"quantiles must lie strictly inside (0, 1), got {quantiles}")
    if any(a <= b for a, b in zip(quantiles, quantiles[1:])):
        raise ValueError(f"quantiles must be strictly descending, got {quantiles}")
    entries = [RosterEntry(label="two_step", method="two_step")]
    for q in quantiles:
        entries.append(RosterEntry(label=f"tail_q{q:g}", method="tail_mean", quantile=q))
    for q in quantiles:
        entries.append(
            RosterEntry(label=f"smooth_q{q:g}", method="smoothed_tail_mean", quantile=q, b=1.0)
        )
    for kernel in kernels:
        entries.append(RosterEntry(label=f"lc_{kernel}", method="local_constant", kernel=kernel))
    for kernel in kernels:
        entries.append(RosterEntry(label=f"ll_{kernel}", method="local_linear", kernel=kernel))
    return tuple(entries)


def gamma_quantile(w_selected, q: float) -> float:
    """The ceil(q*m)-th order statistic (1-based) of the selected index.

    A one-part-per-billion guard absorbs floating-point fuzz in q*m, so
    decimal quantiles of round sample sizes hit the mathematically exact
    order statistic.
    """
    w = np.asarray(w_selected, dtype=float)
    if w.ndim != 1 or w.size == 0:
        raise ValueError("w_selected must be a nonempty 1-d array")
    if not np.all(np.isfinite(w)):
        raise ValueError("w_selected contains non-finite values")
    q = float(q)
    if not (0.0 < q < 1.0):
        raise ValueError(f"q must lie in (0, 1), got {q}")
    k = max(math.ceil(q * w.size - 1e-9), 1)
    return float(np.sort(w)[k - 1])


@dataclass(frozen=True)
class LabelOutcome:
    """Either an (estimate, test) pair or an error string, per label."""

    label: str
    estimate: Optional[InterceptEstimate] = None
    test: Optional[TestResult] = None
    error: Optional[str] = None


@dataclass(frozen=True)
class ReplicationResult:
    rep: int
    outcomes: tuple[LabelOutcome, ...]

    @property
    def records(self) -> list[tuple[str, InterceptEstimate, TestResult]]:
        """Successful entries as (label, estimate, test) triples."""
        return [(o.label, o.estimate, o.test) for o in self.outcomes if o.error is None]

    @property
    def failures(self) -> list[tuple[str, str]]:
        return [(o.label, o.error) for o in self.outcomes if o.error is not None]


def run_replication(design: SimulationDesign, rep: int, roster) -> ReplicationResult:
    """Generate replication ``rep`` and evaluate every roster entry."""
    data = generate(design, rep)
    theta = np.empty(0)
    n = data.n

    ade_error: Optional[str] = None
    w_hat = None
    gammas: dict[float, float] = {}
    if any(entry.method != "two_step" for entry in roster):
        try:
            beta = average_derivative_beta(data.d, data.x)
            w_hat = data.x @ beta
        except EstimationError as exc:
            ade_error = f"first-stage index fit failed: {exc}"

    reports: dict[str, object] = {}

    def bandwidth_report(kernel: str):
        if kernel not in reports:
            try:
                reports[kernel] = plugin_bandwidths(data, theta, w_hat, kernel)
            except EstimationError as exc:
                reports[kernel] = f"bandwidth selection failed: {exc}"
        return reports[kernel]

    outcomes = []
    for entry in roster:
        if entry.method != "two_step" and ade_error is not None:
            outcomes.append(LabelOutcome(label=entry.label, error=ade_error))
            continue
        try:
            outcomes.append(_evaluate_entry(entry, data, theta, w_hat, n, gammas, bandwidth_report))
        except EstimationError as exc:
            outcomes.append(LabelOutcome(label=entry.label, error=str(exc)))
    return ReplicationResult(rep=rep, outcomes=tuple(outcomes))


def _evaluate_entry(entry, data, theta, w_hat, n, gammas, bandwidth_report) -> LabelOutcome:
    if entry.method == "two_step":
        fit = heckman_two_step(data)
        estimate = InterceptEstimate(
            mu=fit.mu,
            se=fit.se_mu,
            bandwidth=math.nan,
            method="two_step",
            effective_n=fit.n_selected,
        )
        return LabelOutcome(entry.label, estimate, t_test(fit.mu, fit.se_mu))

    if entry.method in ("tail_mean", "smoothed_tail_mean"):
        if entry.quantile not in gammas:
            gammas[entry.quantile] = gamma_quantile(w_hat[data.d == 1], entry.quantile)
        gamma = gammas[entry.quantile]
        if entry.method == "tail_mean":
            estimate = tail_mean(data, theta, w_hat, gamma)
            se = se_tail_mean(data, theta, w_hat, gamma)
        else:
            estimate = smoothed_tail_mean(data, theta, w_hat, gamma, b=entry.b)
            se = se_tail_mean(data, theta, w_hat, gamma, b=entry.b)
        estimate = replace(estimate, se=se)
        return LabelOutcome(entry.label, estimate, t_test(estimate.mu, se))

    report = bandwidth_report(entry.kernel)
    if isinstance(report, str):
        raise EstimationError(report)
    if entry.method == "local_constant":
        estimate = local_constant(data, theta, w_hat, entry.kernel, report.h_lc)
        se = se_local_constant(report.sigma2, entry.kernel, n, report.h_lc)
    else:
        estimate = local_linear(data, theta, w_hat, entry.kernel, report.h_ll)
        se = se_local_linear(report.sigma2, entry.kernel, n, report.h_ll)
    estimate = replace(estimate, se=se)
    return LabelOutcome(entry.label, estimate, t_test(estimate.mu, se))


def _replication_task(args):
    design, rep, roster = args
    return run_replication(design, rep, roster)


def run_study(
    design: SimulationDesign,
    replications: int,
    roster=None,
    workers: int = 1,
) -> list[ReplicationResult]:
    """Run a study; the result list is always sorted by replication index."""
    if replications < 2:
        raise ValueError(f"need at least 2 replications, got {replications}")
    if workers < 1:
        raise ValueError(f"workers must be >= 1, got {workers}")
    roster = default_roster() if roster is None else tuple(roster)
    if workers == 1:
        results = [run_replication(design, rep, roster) for rep in range(replications)]
    else:
        tasks = [(design, rep, roster) for rep in range(replications)]
        chunksize = max(1, replications // (4 * workers))
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_replication_task, tasks, chunksize=chunksize))
    results.sort(key=lambda r: r.rep)
    return results


@dataclass(frozen=True)
class SummaryRow:
    """One estimator's row of the study table.

    Statistics are computed over successful replications only;
    ``failures`` counts the rest.  ``rmse_ratio`` divides by the baseline
    row, which therefore shows exactly 1.
    """

    estimator: str
    bias: float
    sd: float
    rmse_ratio: float
    rejection_rate: float
    failures: int
    mc_se_bias: float


def summarize(results, mu0: float, baseline_label: str = "two_step") -> tuple[SummaryRow, ...]:
    """Reduce replication results to one row per roster label."""
    if len(results) < 2:
        raise ValueError(f"need at least 2 replications to summarize, got {len(results)}")
    labels = [o.label for o in results[0].outcomes]
    collected: dict[str, list[tuple[float, bool]]] = {label: [] for label in labels}
    counts: dict[str, int] = {label: 0 for label in labels}
    for result in results:
        for outcome in result.outcomes:
            if outcome.label not in collected:
                raise ValueError(
                    f"replication {result.rep} carries unknown label {outcome.label!r}"
                )
            counts[outcome.label] += 1
            if outcome.error is None:
                collected[outcome.label].append(
                    (outcome.estimate.mu, outcome.test.reject_5pct)
                )
    if any(count != len(results) for count in counts.values()):
        raise ValueError("labels are not consistent across replications")
    if baseline_label not in collected:
        raise ValueError(f"baseline label {baseline_label!r} not present in results")

    stats: dict[str, tuple[float, float, float, float, int, float]] = {}
    for label in labels:
        entries = collected[label]
        n_ok = len(entries)
        failures = len(results) - n_ok
        if n_ok >= 2:
            mus = np.array([mu for mu, _ in entries])
            bias = float(mus.mean()) - float(mu0)
            sd = float(mus.std(ddof=1))
            rmse = math.sqrt(bias * bias + sd * sd)
            rejection = float(np.mean([rej for _, rej in entries]))
            mc_se = sd / math.sqrt(n_ok)
        else:
            bias = sd = rmse = rejection = mc_se = math.nan
        stats[label] = (bias, sd, rmse, rejection, failures, mc_se)

    baseline_rmse = stats[baseline_label][2]
    if not math.isfinite(baseline_rmse):
        raise ValueError(
            f"baseline {baseline_label!r} has no usable RMSE ({baseline_rmse})"
        )
    rows = []
    for label in labels:
        bias, sd, rmse, rejection, failures, mc_se = stats[label]
        if label == baseline_label:
            ratio = 1.0  # self-ratio, exact by definition
        elif baseline_rmse > 0:
            ratio = rmse / baseline_rmse
        else:
            ratio = math.nan if rmse == 0 else math.inf
        rows.append(
            SummaryRow(
                estimator=label,
                bias=bias,
                sd=sd,
                rmse_ratio=ratio,
                rejection_rate=rejection,
                failures=failures,
                mc_se_bias=mc_se,
            )
        )
    return tuple(rows)


CSV_HEADER = "estimator,bias,sd,rmse_ratio,rejection_rate,failures,mc_se_bias"


def format_summary_csv(rows) -> str:
    """Fixed six-decimal formatting, '.' separator, LF line endings."""
    lines = [CSV_HEADER]
    for row in rows:
        lines.append(
            f"{row.estimator},{row.bias:.6f},{row.sd:.6f},{row.rmse_ratio:.6f},"
            f"{row.rejection_rate:.6f},{row.failures},{row.mc_se_bias:.6f}"
        )
    return "\n".join(lines) + "\n"


def write_summary_csv(rows, path) -> None:
    with open(path, "w", encoding="utf-8", newline="") as handle:
        handle.write(format_summary_csv(rows))
