"""Command-line interface: ``evtrisk {summary,fit,risk,simulate,qq}``.

Exit codes: 0 success, 2 usage error, 3 data error, 4 a fit failed to
converge, 5 some report rows failed (e.g. too few maxima for a scheme).
"""

from __future__ import annotations

import argparse
import dataclasses
import logging
import sys
from pathlib import Path

from . import __version__
from . import config as cfg
from . import report
from .exceptions import DataError, DegenerateDataError, EvtError
from .gev import GevParams
from .ingest import ColumnMap

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_DATA = 3
EXIT_CONVERGENCE = 4
EXIT_PARTIAL = 5

log = logging.getLogger("evtrisk")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def build_parser():
    common = _Parser(add_help=False)
    common.add_argument("--config", type=Path, help=f"YAML run config (default: ${cfg.CONFIG_ENV_VAR})")
    common.add_argument("--input", action="append", type=Path, help="price or return CSV; repeatable")
    common.add_argument("--kind", choices=("prices", "returns"), help="content of --input files")
    common.add_argument("--date-col", help="date column name")
    common.add_argument("--value-col", help="price/return column name")
    common.add_argument("--tail", choices=("upper", "lower", "both"))
    common.add_argument("--scheme", help="month, quarter, semester or count:<m>; comma-separated")
    common.add_argument("--k", help="return periods in blocks, comma-separated")
    common.add_argument("--level", type=float, help="confidence level")
    common.add_argument("--fraction", type=float, help="tail subset fraction for summary/qq")
    common.add_argument("--seed", type=int)
    common.add_argument("--out", type=Path, help="output directory")
    common.add_argument("--format", help="csv, json or csv,json")
    common.add_argument("--normalize", action="store_true", help="omit timestamps for reproducible JSON")
    common.add_argument("-v", "--verbose", action="store_true")

    parser = _Parser(prog="evtrisk", description="Block-maxima GEV tail-risk analysis.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("summary", parents=[common], help="summary statistics for full series and tails")
    sub.add_parser("fit", parents=[common], help="GEV fits with profile intervals")
    risk = sub.add_parser("risk", parents=[common], help="k-block catastrophic risk levels")
    risk.add_argument("--from-fit", type=Path, help="GevFit JSON to evaluate instead of fitting data")
    sim = sub.add_parser("simulate", parents=[common], help="coverage study at known parameters")
    sim.add_argument("--truth", help="shape,scale,location of the generating GEV")
    sim.add_argument("--n-maxima", type=int)
    sim.add_argument("--replications", type=int)
    sim.add_argument("--ci-params", help="parameters to profile, comma-separated")
    sub.add_parser("qq", parents=[common], help="normal QQ data for full series and tails")
    return parser


def resolve_config(args):
    """Config file (flag, else environment) with flag overrides on top."""
    path = args.config or cfg.default_config_path()
    config = cfg.load_config(path) if path else cfg.RunConfig()
    updates = {}
    if args.input:
        columns = config.inputs[0].columns if config.inputs else ColumnMap()
        kind = args.kind or "prices"
        if args.date_col:
            columns = dataclasses.replace(columns, date=args.date_col)
        if args.value_col:
            field = "price" if kind == "prices" else "ret"
            columns = dataclasses.replace(columns, **{field: args.value_col})
        updates["inputs"] = tuple(cfg.InputSpec(path=p, kind=kind, columns=columns) for p in args.input)
    elif args.kind and config.inputs:
        updates["inputs"] = tuple(dataclasses.replace(s, kind=args.kind) for s in config.inputs)
    if args.tail:
        updates["tails"] = cfg.parse_tail(args.tail)
    if args.scheme:
        updates["schemes"] = cfg.parse_schemes(args.scheme)
    if args.k:
        updates["ks"] = cfg.parse_ks(args.k)
    for name in ("level", "fraction", "seed"):
        if getattr(args, name) is not None:
            updates[name] = getattr(args, name)
    if args.out:
        updates["out_dir"] = args.out
    if args.format:
        updates["formats"] = tuple(f.strip() for f in args.format.split(",") if f.strip())
    if args.normalize:
        updates["normalize"] = True
    if args.command == "simulate":
        sim = config.simulate
        sim_updates = {}
        if args.truth:
            try:
                sim_updates["truth"] = GevParams(*(float(v) for v in args.truth.split(",")))
            except (TypeError, ValueError) as exc:
                raise cfg.ConfigError(f"--truth needs shape,scale,location: {exc}") from None
        if args.n_maxima is not None:
            sim_updates["n_maxima"] = args.n_maxima
        if args.replications is not None:
            sim_updates["replications"] = args.replications
        if args.ci_params:
            sim_updates["ci_params"] = tuple(v.strip() for v in args.ci_params.split(","))
        updates["simulate"] = dataclasses.replace(sim, **sim_updates)
    config = dataclasses.replace(config, **updates)
    need_inputs = args.command not in ("simulate",) and not getattr(args, "from_fit", None)
    config.validate(need_inputs=need_inputs)
    if args.command == "simulate":
        if config.simulate.replications < 1 or config.simulate.n_maxima < config.optimizer.min_maxima:
            raise cfg.ConfigError("simulate needs replications >= 1 and n_maxima >= the fit floor")
        bad = set(config.simulate.ci_params) - {"shape", "scale", "location"}
        if bad:
            raise cfg.ConfigError(f"unknown ci params {sorted(bad)}")
    return config


def _emit(config, stem, report_obj, rows, text=None):
    out = Path(config.out_dir)
    if "json" in config.formats:
        report.atomic_write(out / f"{stem}.json", report.dumps_json(report_obj))
    if "csv" in config.formats:
        report.atomic_write(out / f"{stem}.csv", report.rows_to_csv(rows))
    if text is not None:
        report.atomic_write(out / f"{stem}.txt", text)
        sys.stdout.write(text)


def _status_code(rows):
    status = report.worst_status(rows)
    return {"ok": EXIT_OK, "partial": EXIT_PARTIAL, "not_converged": EXIT_CONVERGENCE}[status]


def cmd_summary(config, args):
    rep = report.summary_report(config)
    _emit(config, "summary", rep, rep["rows"])
    return EXIT_OK


def cmd_fit(config, args):
    rep = report.fit_report(config)
    _emit(config, "fit", rep, rep["rows"], report.format_fit_table(rep["rows"]))
    return _status_code(rep["rows"])


def cmd_risk(config, args):
    stored = report.load_stored_fits(args.from_fit) if args.from_fit else None
    rep = report.risk_report(config, stored)
    _emit(config, "risk", rep, rep["rows"], report.format_risk_table(rep["rows"]))
    return _status_code(rep["rows"])


def cmd_simulate(config, args):
    def progress(done, total):
        if done % 50 == 0 or done == total:
            log.info("replication %d/%d", done, total)

    rep = report.simulation_report(config, progress)
    out = Path(config.out_dir)
    if "json" in config.formats:
        report.atomic_write(out / "simulate.json", report.dumps_json(rep))
    if "csv" in config.formats:
        report.atomic_write(out / "simulate_summary.csv", report.rows_to_csv(rep["summary"]))
        report.atomic_write(out / "simulate_replications.csv", report.rows_to_csv(rep["replications"]))
    for row in rep["summary"]:
        cov = "" if row["coverage"] is None else f" coverage={row['coverage']:.3f}"
        bias = "" if row["bias"] is None else f" bias={row['bias']:+.4f} rmse={row['rmse']:.4f}"
        sys.stdout.write(f"{row['quantity']:<14} truth={row['truth']:.4f}{bias}{cov}\n")
    return EXIT_OK


def cmd_qq(config, args):
    rep, panels = report.qq_report(config)
    out = Path(config.out_dir)
    for name, qq in panels.items():
        report.atomic_write(out / name, report.rows_to_csv(
            [{"theoretical": t, "empirical": e} for t, e in qq.points], ["theoretical", "empirical"]))
    if "json" in config.formats:
        report.atomic_write(out / "qq.json", report.dumps_json(rep))
    return EXIT_OK


COMMANDS = {
    "summary": cmd_summary,
    "fit": cmd_fit,
    "risk": cmd_risk,
    "simulate": cmd_simulate,
    "qq": cmd_qq,
}


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                            format="%(levelname)s %(message)s")
        config = resolve_config(args)
    except (UsageError, cfg.ConfigError) as exc:
        sys.stderr.write(f"evtrisk: usage error: {exc}\n")
        return EXIT_USAGE
    try:
        return COMMANDS[args.command](config, args)
    except (DataError, DegenerateDataError, OSError) as exc:
        sys.stderr.write(f"evtrisk: data error: {exc}\n")
        return EXIT_DATA
    except EvtError as exc:
        sys.stderr.write(f"evtrisk: {exc}\n")
        return EXIT_CONVERGENCE
    except ValueError as exc:
        sys.stderr.write(f"evtrisk: data error: {exc}\n")
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
