"""Command-line interface.

Four subcommands:

``estimate``
    fit one intercept estimator to a CSV dataset and print a JSON object
    with the estimate, the bandwidth report (when a kernel method ran),
    and the 5% t-test;
``simulate``
    run the Monte Carlo study described by a TOML design file, writing one
    summary CSV per design plus a JSON manifest;
``kernels``
    print the kernel-constant catalog;
``calibrate``
    resolve the selection offset c0 for a disturbance family and target
    selection probability.

Exit codes: 0 success, 1 usage error, 2 estimation/data failure.  The
environment variable ``BOUNDARY_INTERCEPT_SEED`` overrides ``--seed``.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import os
import re
import sys
import time
from dataclasses import asdict, is_dataclass, replace

import numpy as np

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from . import __version__
from .bandwidth import plugin_bandwidths
from .data import Dataset
from .dgp import (
    CALIBRATION_DRAWS,
    CALIBRATION_SEED,
    EPS_DISTRIBUTIONS,
    SimulationDesign,
    calibrate_c0,
)
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
    se_local_constant,
    se_local_linear,
    se_tail_mean,
    t_test,
)
from .kernels import (
    KERNEL_NAMES,
    chi,
    ck_local_constant,
    ck_local_linear,
    kappa,
    omega_local_linear,
    omega_q22,
    omega_q33,
)
from .montecarlo import gamma_quantile, run_study, summarize, write_summary_csv

__all__ = ["main"]

SEED_ENV_VAR = "BOUNDARY_INTERCEPT_SEED"

METHOD_CHOICES = ("lc", "ll", "heckman", "as", "twostep")


class _Parser(argparse.ArgumentParser):
    """argparse exits with status 2 on usage errors; the contract is 1."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _build_parser() -> _Parser:
    parser = _Parser(prog="boundary-intercept", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    est = sub.add_parser("estimate", help="estimate the intercept from a CSV dataset")
    est.add_argument("--data", required=True, help="CSV with header y,d,x1..xp[,z1..zq]")
    est.add_argument("--method", choices=METHOD_CHOICES, default="ll")
    est.add_argument("--kernel", choices=KERNEL_NAMES, default="gaussian")
    est.add_argument("--quantile", type=float, default=0.9,
                     help="tail cutoff quantile of the selected index (heckman/as)")
    est.add_argument("--b", type=float, default=1.0, help="smoothing width (as)")
    est.add_argument("--h", type=float, default=None,
                     help="fixed bandwidth overriding the plug-in value (lc/ll)")
    est.add_argument("--beta", default=None,
                     help="comma-separated selection coefficients; skips the ADE fit")
    est.add_argument("--theta", default=None,
                     help="comma-separated outcome slopes (default: zeros)")

    sim = sub.add_parser("simulate", help="run a Monte Carlo study from a TOML design file")
    sim.add_argument("--design", required=True, help="TOML design file")
    sim.add_argument("--reps", type=int, default=None, help="override replication count")
    sim.add_argument("--seed", type=int, default=None, help="override the base seed")
    sim.add_argument("--workers", type=int, default=1)
    sim.add_argument("--out", required=True, help="output directory")

    sub.add_parser("kernels", help="print the kernel-constant catalog")

    cal = sub.add_parser("calibrate", help="resolve the selection offset c0")
    cal.add_argument("--eps-dist", choices=EPS_DISTRIBUTIONS, required=True)
    cal.add_argument("--target-p", type=float, required=True)
    return parser


# ---------------------------------------------------------------- estimate


def _parse_vector(text: str, length: int, name: str) -> np.ndarray:
    try:
        values = np.array([float(tok) for tok in text.split(",")])
    except ValueError as exc:
        raise ValueError(f"could not parse --{name} {text!r}: {exc}") from None
    if values.shape != (length,):
        raise ValueError(f"--{name} needs {length} entries, got {values.size}")
    return values


_COLUMN_RE = re.compile(r"^(x|z)([1-9][0-9]*)$")


def load_dataset_csv(path: str) -> Dataset:
    """Read a dataset from CSV with header y,d,x1..xp[,z1..zq]."""
    with open(path, "r", encoding="utf-8", newline="") as handle:
        reader = csv.reader(handle)
        try:
            header = next(reader)
        except StopIteration:
            raise ValueError("empty dataset: no header row") from None
        header = [name.strip() for name in header]
        if header[:2] != ["y", "d"]:
            raise ValueError(f"header must start with y,d; got {header[:2]}")
        p = q = 0
        for pos, name in enumerate(header[2:], start=3):
            match = _COLUMN_RE.match(name)
            if match is None:
                raise ValueError(f"column {pos} has unexpected name {name!r}")
            kind, index = match.group(1), int(match.group(2))
            if kind == "x":
                if q or index != p + 1:
                    raise ValueError(f"column {pos}: expected x{p + 1}, got {name!r}")
                p += 1
            else:
                if index != q + 1:
                    raise ValueError(f"column {pos}: expected z{q + 1}, got {name!r}")
                q += 1
        if p == 0:
            raise ValueError("need at least one selection regressor column x1")
        rows = []
        for line_no, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != len(header):
                raise ValueError(
                    f"row {line_no} has {len(row)} fields, expected {len(header)}"
                )
            try:
                rows.append([float(tok) for tok in row])
            except ValueError as exc:
                raise ValueError(f"row {line_no}: {exc}") from None
    if not rows:
        raise ValueError("empty dataset: no data rows")
    table = np.array(rows)
    y, d = table[:, 0], table[:, 1]
    if not np.all(np.isin(d, (0.0, 1.0))):
        raise ValueError("column d must contain only 0 and 1")
    x = table[:, 2 : 2 + p]
    z = table[:, 2 + p :]
    return Dataset(y=y, d=d.astype(int), x=x, z=z if q else None)


def _jsonable(value):
    """Convert dataclasses/arrays to JSON types; non-finite floats to None."""
    if is_dataclass(value):
        return _jsonable(asdict(value))
    if isinstance(value, dict):
        return {key: _jsonable(item) for key, item in value.items()}
    if isinstance(value, (list, tuple, np.ndarray)):
        return [_jsonable(item) for item in value]
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        value = float(value)
        return value if math.isfinite(value) else None
    return value


def cmd_estimate(args) -> int:
    data = load_dataset_csv(args.data)
    theta = (
        _parse_vector(args.theta, data.q, "theta")
        if args.theta is not None
        else np.zeros(data.q)
    )
    payload: dict = {"method": args.method}

    if args.method == "twostep":
        fit = heckman_two_step(data)
        estimate = InterceptEstimate(
            mu=fit.mu,
            se=fit.se_mu,
            bandwidth=math.nan,
            method="two_step",
            effective_n=fit.n_selected,
        )
        test = t_test(fit.mu, fit.se_mu)
        payload["beta"] = list(fit.probit_coef)
        report = None
    else:
        if args.beta is not None:
            beta = _parse_vector(args.beta, data.p, "beta")
        else:
            beta = average_derivative_beta(data.d, data.x)
        w_hat = data.x @ beta
        payload["beta"] = list(beta)
        if args.method in ("heckman", "as"):
            if not (0.0 < args.quantile < 1.0):
                raise ValueError(f"--quantile must lie in (0, 1), got {args.quantile}")
            gamma = gamma_quantile(w_hat[data.d == 1], args.quantile)
            if args.method == "heckman":
                estimate = tail_mean(data, theta, w_hat, gamma)
                se = se_tail_mean(data, theta, w_hat, gamma)
            else:
                estimate = smoothed_tail_mean(data, theta, w_hat, gamma, b=args.b)
                se = se_tail_mean(data, theta, w_hat, gamma, b=args.b)
            test = t_test(estimate.mu, se)
            estimate = replace(estimate, se=se)
            report = None
        else:
            report = plugin_bandwidths(data, theta, w_hat, args.kernel)
            if args.method == "lc":
                h = args.h if args.h is not None else report.h_lc
                estimate = local_constant(data, theta, w_hat, args.kernel, h)
                se = se_local_constant(report.sigma2, args.kernel, data.n, h)
            else:
                h = args.h if args.h is not None else report.h_ll
                estimate = local_linear(data, theta, w_hat, args.kernel, h)
                se = se_local_linear(report.sigma2, args.kernel, data.n, h)
            test = t_test(estimate.mu, se)
            estimate = replace(estimate, se=se)

    payload["estimate"] = _jsonable(estimate)
    payload["bandwidth_report"] = _jsonable(report) if report is not None else None
    payload["test"] = _jsonable(test)
    print(json.dumps(payload, indent=2, sort_keys=True))
    return 0


# ---------------------------------------------------------------- simulate

_STUDY_KEYS = {"base_seed", "replications", "mu0"}
_DESIGN_KEYS = {"eps_dist", "selection_prob", "n", "c0"}


def _load_study_config(path: str) -> dict:
    with open(path, "rb") as handle:
        try:
            config = tomllib.load(handle)
        except tomllib.TOMLDecodeError as exc:
            raise ValueError(f"invalid design file {path}: {exc}") from None
    unknown = set(config) - {"study", "designs"}
    if unknown:
        raise ValueError(f"invalid design file: unknown top-level key {sorted(unknown)[0]!r}")
    study = config.get("study", {})
    unknown = set(study) - _STUDY_KEYS
    if unknown:
        raise ValueError(f"invalid design file: unknown study key {sorted(unknown)[0]!r}")
    designs = config.get("designs")
    if not designs:
        raise ValueError("invalid design file: needs at least one [[designs]] block")
    for idx, block in enumerate(designs):
        unknown = set(block) - _DESIGN_KEYS
        if unknown:
            raise ValueError(
                f"invalid design file: unknown key {sorted(unknown)[0]!r} in designs[{idx}]"
            )
        for key in ("eps_dist", "selection_prob", "n"):
            if key not in block:
                raise ValueError(
                    f"invalid design file: designs[{idx}] is missing {key!r}"
                )
    return config


def _design_name(index: int, design: SimulationDesign) -> str:
    return (
        f"design{index + 1:02d}_{design.eps_dist}"
        f"_p{round(design.selection_prob * 100)}_n{design.n}"
    )


def cmd_simulate(args) -> int:
    config = _load_study_config(args.design)
    study = config.get("study", {})
    replications = args.reps if args.reps is not None else study.get("replications", 500)
    if replications < 2:
        raise ValueError(f"need at least 2 replications, got {replications}")
    mu0 = float(study.get("mu0", 0.0))
    base_seed = study.get("base_seed", 0)
    if args.seed is not None:
        base_seed = args.seed
    env_seed = os.environ.get(SEED_ENV_VAR)
    if env_seed is not None:
        base_seed = int(env_seed)

    os.makedirs(args.out, exist_ok=True)
    started = time.monotonic()
    tables = []
    for index, block in enumerate(config["designs"]):
        c0 = block.get("c0")
        if c0 is None:
            c0 = calibrate_c0(block["eps_dist"], block["selection_prob"])
        design = SimulationDesign(
            eps_dist=block["eps_dist"],
            selection_prob=float(block["selection_prob"]),
            c0=float(c0),
            n=int(block["n"]),
            mu0=mu0,
            base_seed=int(base_seed),
        )
        results = run_study(design, replications, workers=args.workers)
        rows = summarize(results, mu0)
        name = _design_name(index, design)
        csv_path = os.path.join(args.out, f"{name}.csv")
        write_summary_csv(rows, csv_path)
        tables.append(
            {
                "name": name,
                "csv": f"{name}.csv",
                "eps_dist": design.eps_dist,
                "selection_prob": design.selection_prob,
                "n": design.n,
                "resolved_c0": design.c0,
                "failures_total": int(sum(row.failures for row in rows)),
            }
        )
        print(csv_path)

    manifest = {
        "design_file": os.path.abspath(args.design),
        "replications": replications,
        "base_seed": int(base_seed),
        "mu0": mu0,
        "workers": args.workers,
        "tables": tables,
        "calibration": {"seed": CALIBRATION_SEED, "draws": CALIBRATION_DRAWS},
        "versions": {
            "package": __version__,
            "python": sys.version.split()[0],
            "numpy": np.__version__,
        },
        "wall_time_s": round(time.monotonic() - started, 3),
    }
    manifest_path = os.path.join(args.out, "manifest.json")
    with open(manifest_path, "w", encoding="utf-8", newline="") as handle:
        json.dump(manifest, handle, indent=2, sort_keys=True)
        handle.write("\n")
    print(manifest_path)
    return 0


# ----------------------------------------------------------------- kernels


def cmd_kernels() -> int:
    columns = (
        ["kernel"]
        + [f"kappa{r}" for r in range(5)]
        + [f"chi{r}" for r in range(5)]
        + ["ck_lc", "ck_ll", "omega_q22", "omega_q33", "omegaL00", "omegaL01", "omegaL11"]
    )
    print(",".join(columns))
    for kernel in KERNEL_NAMES:
        omega = omega_local_linear(kernel)
        values = (
            [kappa(kernel, r) for r in range(5)]
            + [chi(kernel, r) for r in range(5)]
            + [
                ck_local_constant(kernel),
                ck_local_linear(kernel),
                omega_q22(kernel),
                omega_q33(kernel),
                omega[0][0],
                omega[0][1],
                omega[1][1],
            ]
        )
        print(",".join([kernel] + [f"{value:.6g}" for value in values]))
    return 0


# --------------------------------------------------------------- calibrate


def cmd_calibrate(args) -> int:
    if not (0.0 < args.target_p < 1.0):
        raise ValueError(f"--target-p must lie in (0, 1), got {args.target_p}")
    c0 = calibrate_c0(args.eps_dist, args.target_p)
    print(
        json.dumps(
            {
                "eps_dist": args.eps_dist,
                "target_p": args.target_p,
                "c0": c0,
                "calibration_seed": CALIBRATION_SEED,
                "calibration_draws": CALIBRATION_DRAWS,
            },
            indent=2,
            sort_keys=True,
        )
    )
    return 0


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        if args.command == "estimate":
            return cmd_estimate(args)
        if args.command == "simulate":
            return cmd_simulate(args)
        if args.command == "kernels":
            return cmd_kernels()
        return cmd_calibrate(args)
    except (EstimationError, ValueError, OSError) as exc:
        print(json.dumps({"error": str(exc)}))
        return 2


if __name__ == "__main__":
    sys.exit(main())
