"""Batch command-line front end.

Subcommands: ``fit`` (estimate parameters from a CSV sample, JSON out),
``sample`` (generate observations, CSV out), ``moments-check`` (validate
the moment catalog against Monte Carlo), ``sweep`` (bias/variance/RMSE
grid, CSV out) and ``avar`` (analytic asymptotic variances, CSV out).

Exit codes: 0 success, 2 input or validation error, 3 the requested
estimate does not exist, 4 a verification check failed.  Every command is
non-interactive and deterministic given its flags; floating-point output
uses 17 significant digits so values round-trip double precision.
"""

import argparse
import csv
import json
import math
import sys
from dataclasses import dataclass

import numpy as np

from .estimators import ESTIMATOR_TAGS, estimate
from .model import (
    SIMPLEX_TOL,
    DirichletParams,
    MGammaParams,
    RngSpec,
    SampleMatrix,
    sample_dirichlet,
    sample_mgamma,
)
from .moments import (
    covariance_ids,
    has_printed_form,
    mc_moment_estimate,
    moment_value,
    printed_value,
    raw_moment_ids,
)
from .montecarlo import SweepConfig, run_avar_sweep, run_metric_sweep

__all__ = [
    "CliConfig",
    "cmd_avar",
    "cmd_fit",
    "cmd_moments_check",
    "cmd_sample",
    "cmd_sweep",
    "main",
]

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_NO_ESTIMATE = 3
EXIT_CHECK_FAILED = 4

RENORMALIZE_TOL = 1e-6
_Z_LIMIT = 4.0

SWEEP_HEADER = (
    "family,estimator,param_index,sweep_value,n,m_effective,failures,"
    "bias,variance,rmse"
)
AVAR_HEADER = "family,estimator,param_index,sweep_value,avar"
MOMENTS_HEADER = "family,kind,i,j,m,mi,mj,derived,printed,mc,se,z"


@dataclass(frozen=True)
class CliConfig:
    """Parsed command-line request for one subcommand invocation."""

    subcommand: str
    family: str = ""
    method: str = ""
    estimators: tuple = ()
    input_path: str = ""
    output_path: str = ""
    alpha: tuple = ()
    beta: float = None
    n: int = 0
    n_values: tuple = ()
    m: int = 0
    grid: tuple = ()
    param_index: int = 0
    draws: int = 0
    seed: int = 0
    workers: int = 1
    unbiased: bool = False
    renormalize: bool = False
    corrupt_entry: int = None


def _fmt(value) -> str:
    return format(float(value), ".17g")


def _parse_floats(text: str, name: str) -> tuple:
    try:
        values = tuple(float(v) for v in str(text).split(","))
    except ValueError:
        raise ValueError(f"{name} must be a comma-separated list of numbers")
    if not values:
        raise ValueError(f"{name} must be non-empty")
    return values


def _parse_ints(text: str, name: str) -> tuple:
    values = []
    for piece in str(text).split(","):
        try:
            values.append(int(piece))
        except ValueError:
            raise ValueError(f"{name} must be a comma-separated list of integers")
    return tuple(values)


def _parse_grid(text: str) -> tuple:
    text = str(text)
    if ":" in text:
        parts = text.split(":")
        if len(parts) != 3:
            raise ValueError("grid must be 'start:stop:count' or 'v1,v2,...'")
        try:
            start, stop, count = float(parts[0]), float(parts[1]), int(parts[2])
        except ValueError:
            raise ValueError("grid must be 'start:stop:count' or 'v1,v2,...'")
        if count < 1:
            raise ValueError("grid count must be >= 1")
        return tuple(float(v) for v in np.linspace(start, stop, count))
    return _parse_floats(text, "grid")


def _family_params(config: CliConfig):
    if config.family == "dirichlet":
        if config.beta is not None:
            raise ValueError("--beta only applies to the mgamma family")
        return DirichletParams(config.alpha)
    if config.family == "mgamma":
        if config.beta is None:
            raise ValueError("the mgamma family requires --beta")
        return MGammaParams(config.alpha, config.beta)
    raise ValueError(f"unknown family {config.family!r}")


def _write_text(path: str, text: str) -> None:
    if not path or path == "-":
        sys.stdout.write(text)
        return
    with open(path, "w", newline="") as fh:
        fh.write(text)


# ---------------------------------------------------------------------------
# fit
# ---------------------------------------------------------------------------


def _read_matrix(path: str) -> np.ndarray:
    """CSV with header x1..xk, one observation per row."""
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None:
            raise ValueError("input CSV is empty")
        header = [cell.strip() for cell in header]
        k = len(header)
        want = [f"x{i}" for i in range(1, k + 1)]
        if k < 1 or header != want:
            raise ValueError(
                f"CSV header must be x1..x{k} in order, got {','.join(header)!r}"
            )
        rows = []
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != k:
                raise ValueError(
                    f"row {lineno}: expected {k} columns, found {len(row)}"
                )
            values = []
            for name, cell in zip(want, row):
                try:
                    values.append(float(cell))
                except ValueError:
                    raise ValueError(
                        f"row {lineno}, column {name}: could not parse {cell!r}"
                    ) from None
            rows.append(values)
    if not rows:
        raise ValueError("input CSV contains no data rows")
    return np.asarray(rows, dtype=float)


def _check_rows_with_location(data: np.ndarray, family: str) -> None:
    """Support validation that names the offending CSV row."""
    for idx, row in enumerate(data, start=2):
        if not np.all(np.isfinite(row)):
            raise ValueError(f"row {idx}: non-finite entry")
        if family == "dirichlet":
            if np.any(row <= 0.0) or np.any(row >= 1.0):
                raise ValueError(
                    f"row {idx}: entries must lie strictly inside (0, 1)"
                )
            total = float(row.sum())
            if abs(total - 1.0) > SIMPLEX_TOL:
                raise ValueError(
                    f"row {idx}: coordinates sum to {total!r}, not 1"
                )
        else:
            if row[0] <= 0.0 or (row.size > 1 and np.any(np.diff(row) <= 0.0)):
                raise ValueError(
                    f"row {idx}: entries must be positive and strictly increasing"
                )


def cmd_fit(config: CliConfig) -> int:
    if config.family not in ESTIMATOR_TAGS:
        raise ValueError(f"unknown family {config.family!r}")
    method = config.method
    if config.unbiased:
        if config.family != "mgamma" or method != "same":
            raise ValueError("--unbiased applies only to the mgamma 'same' method")
        method = "same_unbiased"
    if method not in ESTIMATOR_TAGS[config.family]:
        raise ValueError(
            f"method {method!r} is not valid for family {config.family!r}"
        )
    data = _read_matrix(config.input_path)
    if config.renormalize:
        if config.family != "dirichlet":
            raise ValueError("--renormalize applies only to the dirichlet family")
        sums = data.sum(axis=1)
        off = np.abs(sums - 1.0)
        bad = np.nonzero(off > RENORMALIZE_TOL)[0]
        if bad.size:
            first = int(bad[0])
            raise ValueError(
                f"row {first + 2}: coordinates sum to {sums[first]!r}, "
                f"beyond the renormalization tolerance {RENORMALIZE_TOL:g}"
            )
        data = data / sums[:, None]
    _check_rows_with_location(data, config.family)
    sample = SampleMatrix(data, config.family)
    report = estimate(sample, method)
    payload = {
        "family": report.family,
        "method": report.method,
        "estimate": None if report.estimate is None else list(report.estimate),
        "exists": report.exists,
        "diagnostics": {
            "iterations": report.iterations,
            "score_norm": report.score_norm,
        },
        "n": report.n,
    }
    sys.stdout.write(json.dumps(payload, indent=2) + "\n")
    return EXIT_OK if report.exists else EXIT_NO_ESTIMATE


# ---------------------------------------------------------------------------
# sample
# ---------------------------------------------------------------------------


def cmd_sample(config: CliConfig) -> int:
    params = _family_params(config)
    if config.n < 1:
        raise ValueError("n must be >= 1")
    sampler = sample_dirichlet if config.family == "dirichlet" else sample_mgamma
    sample = sampler(params, config.n, RngSpec(config.seed))
    lines = [",".join(f"x{i}" for i in range(1, params.k + 1))]
    for row in sample.data:
        lines.append(",".join(_fmt(v) for v in row))
    _write_text(config.output_path, "\n".join(lines) + "\n")
    return EXIT_OK


# ---------------------------------------------------------------------------
# moments-check
# ---------------------------------------------------------------------------


def cmd_moments_check(config: CliConfig) -> int:
    params = _family_params(config)
    if config.draws < 1000:
        raise ValueError("draws must be >= 1000")
    sampler = sample_dirichlet if config.family == "dirichlet" else sample_mgamma
    sample = sampler(params, config.draws, RngSpec(config.seed))
    raw_ids = raw_moment_ids(config.family, params.k)
    ids = raw_ids + covariance_ids(config.family, params.k)
    lines = [MOMENTS_HEADER]
    worst = 0.0
    for pos, mid in enumerate(ids):
        derived = moment_value(params, mid)
        if config.corrupt_entry is not None and pos == config.corrupt_entry % len(ids):
            derived = derived + 1.0 + abs(derived)
        # Raw moments are their own closed form; of the covariances, all but
        # the derived-only entries have an independent printed form to show.
        if pos < len(raw_ids) or has_printed_form(mid):
            printed = _fmt(printed_value(params, mid))
        else:
            printed = ""
        mc, se = mc_moment_estimate(mid, sample)
        if se > 0.0:
            z = (mc - derived) / se
        else:
            z = 0.0 if mc == derived else math.inf
        worst = max(worst, abs(z))
        lines.append(
            ",".join(
                [
                    config.family,
                    mid.kind,
                    str(mid.i),
                    str(mid.j),
                    str(mid.m),
                    str(mid.mi),
                    str(mid.mj),
                    _fmt(derived),
                    printed,
                    _fmt(mc),
                    _fmt(se),
                    _fmt(z),
                ]
            )
        )
    _write_text(config.output_path, "\n".join(lines) + "\n")
    return EXIT_OK if worst <= _Z_LIMIT else EXIT_CHECK_FAILED


# ---------------------------------------------------------------------------
# sweep / avar
# ---------------------------------------------------------------------------


def _sweep_config(config: CliConfig) -> SweepConfig:
    params = _family_params(config)
    return SweepConfig(
        family=config.family,
        params=params,
        param_index=config.param_index,
        grid=config.grid,
        n_values=config.n_values,
        m=config.m,
        estimators=config.estimators,
        seed=config.seed,
    )


def cmd_sweep(config: CliConfig) -> int:
    rows = run_metric_sweep(_sweep_config(config), workers=config.workers)
    lines = [SWEEP_HEADER]
    for r in rows:
        lines.append(
            ",".join(
                [
                    r.family,
                    r.estimator,
                    str(r.param_index),
                    _fmt(r.sweep_value),
                    str(r.n),
                    str(r.m_effective),
                    str(r.failures),
                    _fmt(r.bias),
                    _fmt(r.variance),
                    _fmt(r.rmse),
                ]
            )
        )
    _write_text(config.output_path, "\n".join(lines) + "\n")
    return EXIT_OK


def cmd_avar(config: CliConfig) -> int:
    rows = run_avar_sweep(_sweep_config(config))
    lines = [AVAR_HEADER]
    for r in rows:
        lines.append(
            ",".join(
                [
                    r.family,
                    r.estimator,
                    str(r.param_index),
                    _fmt(r.sweep_value),
                    _fmt(r.avar),
                ]
            )
        )
    _write_text(config.output_path, "\n".join(lines) + "\n")
    return EXIT_OK


# ---------------------------------------------------------------------------
# argument parsing
# ---------------------------------------------------------------------------


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="momentfit",
        description="Closed-form moment estimation for simplex and "
        "increasing-coordinate gamma data.",
    )
    sub = parser.add_subparsers(dest="subcommand", required=True)

    def add_family(p):
        p.add_argument("--family", required=True, choices=("dirichlet", "mgamma"))

    def add_params(p):
        p.add_argument("--alpha", required=True, help="comma-separated shapes")
        p.add_argument("--beta", type=float, default=None, help="mgamma scale")

    def add_output(p):
        p.add_argument("--output", default="-", help="output path ('-' = stdout)")

    fit = sub.add_parser("fit", help="estimate parameters from a CSV sample")
    add_family(fit)
    fit.add_argument("--method", required=True, help="estimator tag")
    fit.add_argument("--input", required=True, help="CSV with header x1..xk")
    fit.add_argument("--unbiased", action="store_true")
    fit.add_argument("--renormalize", action="store_true")

    sample = sub.add_parser("sample", help="generate observations as CSV")
    add_family(sample)
    add_params(sample)
    sample.add_argument("--n", required=True, type=int)
    sample.add_argument("--seed", type=int, default=0)
    add_output(sample)

    check = sub.add_parser(
        "moments-check", help="validate the moment catalog against Monte Carlo"
    )
    add_family(check)
    add_params(check)
    check.add_argument("--draws", type=int, default=1_000_000)
    check.add_argument("--seed", type=int, default=0)
    check.add_argument("--corrupt-entry", type=int, default=None, help=argparse.SUPPRESS)
    add_output(check)

    def add_sweep_args(p, with_sampling):
        add_family(p)
        add_params(p)
        p.add_argument("--param-index", required=True, type=int)
        p.add_argument("--grid", required=True, help="'start:stop:count' or 'v1,v2,...'")
        p.add_argument("--estimators", required=True, help="comma-separated tags")
        p.add_argument("--n", default="20", help="comma-separated sample sizes")
        p.add_argument("--m", type=int, default=10_000, help="replicates per cell")
        p.add_argument("--seed", type=int, default=0)
        if with_sampling:
            p.add_argument("--workers", type=int, default=1)
        add_output(p)

    sweep = sub.add_parser("sweep", help="bias/variance/RMSE sweep as CSV")
    add_sweep_args(sweep, with_sampling=True)

    avar = sub.add_parser("avar", help="analytic asymptotic variance sweep as CSV")
    add_sweep_args(avar, with_sampling=False)

    return parser


def _config_from_args(args: argparse.Namespace) -> CliConfig:
    fields = dict(subcommand=args.subcommand)
    if args.subcommand == "fit":
        fields.update(
            family=args.family,
            method=args.method,
            input_path=args.input,
            unbiased=args.unbiased,
            renormalize=args.renormalize,
        )
    elif args.subcommand == "sample":
        fields.update(
            family=args.family,
            alpha=_parse_floats(args.alpha, "--alpha"),
            beta=args.beta,
            n=args.n,
            seed=args.seed,
            output_path=args.output,
        )
    elif args.subcommand == "moments-check":
        fields.update(
            family=args.family,
            alpha=_parse_floats(args.alpha, "--alpha"),
            beta=args.beta,
            draws=args.draws,
            seed=args.seed,
            corrupt_entry=args.corrupt_entry,
            output_path=args.output,
        )
    else:
        fields.update(
            family=args.family,
            alpha=_parse_floats(args.alpha, "--alpha"),
            beta=args.beta,
            param_index=args.param_index,
            grid=_parse_grid(args.grid),
            estimators=tuple(str(args.estimators).split(",")),
            n_values=_parse_ints(args.n, "--n"),
            m=args.m,
            seed=args.seed,
            output_path=args.output,
        )
        if args.subcommand == "sweep":
            fields.update(workers=args.workers)
    return CliConfig(**fields)


_COMMANDS = {
    "fit": cmd_fit,
    "sample": cmd_sample,
    "moments-check": cmd_moments_check,
    "sweep": cmd_sweep,
    "avar": cmd_avar,
}


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        config = _config_from_args(args)
        return _COMMANDS[config.subcommand](config)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    raise SystemExit(main())
