"""Command-line front end.

Exit codes: 0 success, 2 usage/config/data errors, 3 numerical domain
failures.  The output directory defaults to ``$EQUIVCOV_OUT``.
"""

from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path
from typing import Any, Sequence

import numpy as np

from . import __version__
from .config import SimulationConfig
from .errors import ConfigurationError, DomainError, InvalidDataError, NumericalError
from .io import read_observations, write_csv, write_json
from .models import SpectrumSpec
from .risk import mc_risk
from .shrinkers import EstimatorKind, shrink
from .spectral import assemble, eigh, SymmetricMatrix
from .validation import oracle_suite, quantile_suite, stieltjes_suite

OUT_ENV = "EQUIVCOV_OUT"
EXIT_OK, EXIT_USAGE, EXIT_DOMAIN = 0, 2, 3

_RISK_COLUMNS = ("estimator", "mean_risk", "std_error", "trials", "failures", "excluded")


def _out_path(arg: str | None) -> Path:
    out = arg or os.environ.get(OUT_ENV)
    if not out:
        raise ConfigurationError(f"--out not given and ${OUT_ENV} is not set")
    return Path(out)


def _make_dir(path: Path) -> Path:
    # only called once every result is in memory, so failures leave no output
    path.mkdir(parents=True, exist_ok=True)
    return path


def cmd_estimate(args: argparse.Namespace) -> int:
    out = _out_path(args.out)
    kind = EstimatorKind.parse(args.estimator)
    if kind.is_oracle:
        raise ConfigurationError(f"{kind.value} needs the true covariance and is simulation-only")
    data = read_observations(Path(args.input), skip_header=args.skip_header)
    n_rows, p = data.shape
    n = n_rows
    if args.center:
        data = data - data.mean(axis=0)
        n = n_rows - 1
    if n <= p:
        raise InvalidDataError(f"need more observations than variables (n={n}, p={p})")
    s = SymmetricMatrix((data.T @ data) / n)
    decomp = eigh(s, method=args.method)
    shrunk = shrink(kind, decomp, n)
    matrix = assemble(decomp, shrunk.values) if args.emit_matrix else None

    _make_dir(out)
    config = {
        "command": "estimate", "input": str(args.input), "estimator": kind.value,
        "center": args.center, "method": args.method, "n": n, "p": p, "c": p / n,
    }
    rows = [
        {"index": i + 1, "sample_eigenvalue": l, "shrunk_eigenvalue": v}
        for i, (l, v) in enumerate(zip(decomp.values, shrunk.values))
    ]
    write_csv(out / "eigenvalues.csv", ("index", "sample_eigenvalue", "shrunk_eigenvalue"), rows, config)
    if matrix is not None:
        write_csv(out / "estimate.csv", (), matrix.entries.tolist(), config)
    write_json(out / "diagnostics.json", {"flags": shrunk.diagnostics(), "clustered": decomp.clustered}, config)
    return EXIT_OK


def cmd_simulate(args: argparse.Namespace) -> int:
    out = _out_path(args.out)
    config = SimulationConfig.from_json(args.config)
    if config.trials < 2:
        raise ConfigurationError("trials: at least 2 trials are needed for a standard error")
    if args.threads < 1:
        raise ConfigurationError("--threads must be >= 1")
    table = mc_risk(config, workers=args.threads)
    _make_dir(out)
    echo = {"command": "simulate", **config.to_dict()}
    gap_names = sorted(table.gaps)
    rows = []
    for kind, row in table.rows.items():
        rows.append({
            "estimator": kind.value, "mean_risk": row.mean_risk, "std_error": row.std_error,
            "trials": row.trials, "failures": row.failures, "excluded": row.excluded,
            **table.gaps,
        })
    write_csv(out / "risk_table.csv", _RISK_COLUMNS + tuple(gap_names), rows, echo)
    payload: dict[str, Any] = {
        "rows": {
            k.value: {"mean_risk": r.mean_risk, "std_error": r.std_error,
                      "trials": r.trials, "failures": r.failures, "excluded": r.excluded}
            for k, r in table.rows.items()
        },
        "gaps": table.gaps,
        "gap_normalization": {
            "gap_stein_dispersed_*": "unnormalized Stein loss",
            "gap_stein0_vs_tsai": "normalized Stein loss",
            "gap_sample_vs_tsai": "normalized Stein loss",
        },
        "paired_gaps": {k: {"mean": m, "std_error": se} for k, (m, se) in table.paired_gaps().items()},
    }
    write_json(out / "risk_table.json", payload, echo)
    return EXIT_OK


def _write_rows(path: Path, rows: list[dict[str, Any]], config: dict[str, Any]) -> None:
    columns: list[str] = []
    for r in rows:
        columns.extend(k for k in r if k not in columns)
    write_csv(path, columns, rows, config)


def cmd_validate(args: argparse.Namespace) -> int:
    out = _out_path(args.out)
    c = args.c
    if not 0 < c < 1:
        raise ConfigurationError(f"--c must lie in (0, 1), got {c}")
    outputs: dict[str, tuple[dict[str, Any], Any]] = {}
    echo = {"command": "validate", "suite": args.suite, "c": c, "seed": args.seed}
    if args.suite == "stieltjes":
        p_max = args.p or 800
        ps = tuple(sorted({max(2, p_max // 2**k) for k in range(4)}))
        echo["ps"] = list(ps)
        draws, summary = stieltjes_suite(c=c, ps=ps, master_seed=args.seed)
        outputs["stieltjes_draws.csv"] = (echo, draws)
        outputs["stieltjes_summary.csv"] = (echo, summary)
        outputs["stieltjes.json"] = (echo, {"summary": summary})
    elif args.suite == "quantile":
        p = args.p or 400
        echo["p"] = p
        specs = {
            "identity": SpectrumSpec.identity(p),
            "two_atom": SpectrumSpec.atoms([1.0, 5.0], [0.5, 0.5], p),
        }
        summaries = {}
        for name, spec in specs.items():
            report = quantile_suite(spec, c=c, seed=args.seed)
            spec_echo = {**echo, "spectrum": spec.to_dict(), "n": report.n}
            outputs[f"quantile_{name}.csv"] = (spec_echo, report.rows)
            summaries[name] = {
                "n": report.n,
                "max_abs_gamma_deviation": float(np.nanmax(np.abs(report.column("gamma_deviation")))),
                "max_abs_phi_deviation": float(np.nanmax(np.abs(report.column("phi_deviation")))),
            }
        outputs["quantile.json"] = (echo, {"summary": summaries})
    else:
        p = args.p or 400
        echo["p"] = p
        rows = oracle_suite(c=c, p=p, seed=args.seed)
        outputs["oracle.csv"] = (echo, rows)
        outputs["oracle.json"] = (echo, {"rows": rows})
    _make_dir(out)
    for name, (config, content) in outputs.items():
        if name.endswith(".csv"):
            _write_rows(out / name, content, config)
        else:
            write_json(out / name, content, config)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="equivcov", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    est = sub.add_parser("estimate", help="shrink the sample covariance of a CSV data file")
    est.add_argument("--input", required=True, help="CSV, rows = observations, columns = variables")
    est.add_argument("--estimator", required=True, choices=[k.value for k in EstimatorKind if not k.is_oracle])
    est.add_argument("--center", action="store_true", help="subtract column means (uses n - 1)")
    est.add_argument("--skip-header", action="store_true", help="ignore the first data row")
    est.add_argument("--emit-matrix", action="store_true", help="also write the full estimate")
    est.add_argument("--method", default="auto", choices=["auto", "lapack", "jacobi"])
    est.add_argument("--out")
    est.set_defaults(func=cmd_estimate)

    sim = sub.add_parser("simulate", help="Monte Carlo risk table from a JSON config")
    sim.add_argument("--config", required=True)
    sim.add_argument("--threads", type=int, default=1)
    sim.add_argument("--out")
    sim.set_defaults(func=cmd_simulate)

    val = sub.add_parser("validate", help="spectral validation reports")
    val.add_argument("--suite", required=True, choices=["stieltjes", "quantile", "oracle"])
    val.add_argument("--c", type=float, default=0.5)
    val.add_argument("--p", type=int, default=None)
    val.add_argument("--seed", type=int, default=0)
    val.add_argument("--out")
    val.set_defaults(func=cmd_validate)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ConfigurationError, InvalidDataError) as exc:
        print(f"equivcov: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (DomainError, NumericalError) as exc:
        rule = getattr(exc, "rule", None)
        prefix = f"{rule}: " if rule else ""
        print(f"equivcov: numerical domain error: {prefix}{exc}", file=sys.stderr)
        return EXIT_DOMAIN


def run() -> None:
    sys.exit(main())


if __name__ == "__main__":
    run()
