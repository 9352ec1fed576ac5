"""Report assembly for the command-line pipelines.

Each ``*_report`` function returns a JSON-ready dict with a ``metadata``
block and flat ``rows``; the CSV output is written from the same rows, so
both formats carry identical numbers.  Floats are full precision;
non-finite values (open interval endpoints) become ``null``.
"""

from __future__ import annotations

import csv
import datetime as dt
import io
import json
import math
import os
import tempfile
from pathlib import Path

import numpy as np

from . import __version__
from .blocks import extract_block_maxima
from .descriptive import JB_CRITICAL_CHI2_1, JB_CRITICAL_CHI2_2, qq_normal, summarize, tail_subset
from .exceptions import EvtError
from .gev import GevFit, fit_gev, gev_sample
from .inference import PARAMETERS, attach_param_cis, profile_ci_level, profile_ci_param, return_level
from .ingest import load_csv, log_returns

SCHEMA_VERSION = "1.0"
UNITS = "percent log returns"
K_SEMANTICS = (
    "k counts blocks of the fitted scheme; the k-block level is exceeded by a "
    "block maximum with probability 1/k, i.e. once every k blocks on average"
)
LOWER_TAIL_NOTE = "lower-tail values are magnitudes of losses (negated minima)"


# ---------------------------------------------------------------- output


def clean(obj):
    """Convert numpy scalars and non-finite floats into JSON-safe values."""
    if isinstance(obj, dict):
        return {str(k): clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [clean(v) for v in obj]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        return v if math.isfinite(v) else None
    return obj


def dumps_json(report):
    return json.dumps(clean(report), indent=2, sort_keys=True, allow_nan=False) + "\n"


def _csv_cell(v):
    if v is None:
        return ""
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return repr(v)
    return str(v)


def rows_to_csv(rows, columns=None):
    rows = clean(rows)
    if columns is None:
        columns = []
        for row in rows:
            columns.extend(c for c in row if c not in columns)
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([_csv_cell(row.get(c)) for c in columns])
    return buf.getvalue()


def atomic_write(path, text):
    """Write ``text`` via a temporary file renamed into place."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        # mkstemp creates 0600; match what a plain open() would give
        umask = os.umask(0)
        os.umask(umask)
        os.chmod(tmp, 0o666 & ~umask)
        os.replace(tmp, path)
    except BaseException:
        Path(tmp).unlink(missing_ok=True)
        raise


def metadata(command, config):
    return {
        "schema_version": SCHEMA_VERSION,
        "evtrisk_version": __version__,
        "command": command,
        "seed": config.seed,
        "generated_at": None if config.normalize else dt.datetime.now(dt.timezone.utc).isoformat(),
        "units": UNITS,
        "k_semantics": K_SEMANTICS,
        "lower_tail": LOWER_TAIL_NOTE,
        "config": config.echo(),
    }


# ---------------------------------------------------------------- pipelines


def load_returns(spec):
    series = load_csv(spec.path, kind=spec.kind, columns=spec.columns, label=spec.name)
    return log_returns(series) if spec.kind == "prices" else series


def summary_report(config):
    rows = []
    for spec in config.inputs:
        returns = load_returns(spec)
        subsets = [
            ("full", returns),
            ("upper", tail_subset(returns, "upper", config.fraction)),
            ("lower", tail_subset(returns, "lower", config.fraction)),
        ]
        for name, series in subsets:
            stats = summarize(series)
            rows.append({
                "index": spec.name,
                "subset": name,
                **stats.to_dict(),
                "jb_critical_chi2_1": JB_CRITICAL_CHI2_1,
                "jb_critical_chi2_2": JB_CRITICAL_CHI2_2,
                "jb_reject_5pct": stats.jarque_bera > JB_CRITICAL_CHI2_2,
            })
    return {"metadata": metadata("summary", config), "rows": rows}


def _cells(config):
    for spec in config.inputs:
        returns = load_returns(spec)
        for scheme in config.schemes:
            for tail in config.tails:
                yield spec, returns, scheme, tail


def _fit_cell(returns, scheme, tail, config):
    maxima = extract_block_maxima(returns, scheme, tail, config.min_edge_obs)
    return maxima, fit_gev(maxima, config.optimizer)


def _fit_row(spec, scheme, tail, fit=None, error=None, n_maxima=None):
    row = {"index": spec.name, "scheme": str(scheme), "tail": tail}
    if fit is None:
        row.update(status="error", error=error, n_maxima=n_maxima)
        return row
    row.update(
        status="ok" if fit.converged else "not_converged",
        error=None,
        n_maxima=fit.n_maxima,
        log_lik=fit.log_lik,
        converged=fit.converged,
        gradient_norm=fit.gradient_norm,
        n_evaluations=fit.n_evaluations,
        regular=fit.regular,
    )
    for name in PARAMETERS:
        lo, hi = fit.param_cis.get(name, (None, None))
        row[name] = getattr(fit.params, name)
        row[f"{name}_low"] = lo
        row[f"{name}_high"] = hi
    return row


def fit_report(config):
    rows = []
    for spec, returns, scheme, tail in _cells(config):
        n_maxima = None
        try:
            maxima, fit = _fit_cell(returns, scheme, tail, config)
            n_maxima = len(maxima)
            if fit.converged:
                fit = attach_param_cis(maxima, fit, config.level)
            rows.append(_fit_row(spec, scheme, tail, fit))
        except (EvtError, ValueError) as exc:
            rows.append(_fit_row(spec, scheme, tail, error=str(exc), n_maxima=n_maxima))
    return {"metadata": metadata("fit", config), "rows": rows}


def _risk_row(index, scheme, tail, k, risk=None, estimate=None, error=None, n_maxima=None, status="ok"):
    row = {"index": index, "scheme": None if scheme is None else str(scheme), "tail": tail, "k": k}
    if risk is not None:
        row.update(
            status=status, error=None, n_maxima=n_maxima, estimate=risk.estimate,
            ci_low=risk.ci_low, ci_high=risk.ci_high,
            low_open=risk.low_open, high_open=risk.high_open,
        )
    else:
        row.update(
            status=status if estimate is not None else "error", error=error, n_maxima=n_maxima,
            estimate=estimate, ci_low=None, ci_high=None, low_open=None, high_open=None,
        )
    return row


def risk_report(config, stored_fits=None):
    """Return-level rows; ``stored_fits`` (label, GevFit) pairs skip fitting.

    Without data behind a stored fit only the point estimate is available.
    """
    rows = []
    if stored_fits is not None:
        for label, fit in stored_fits:
            for k in config.ks:
                rows.append(_risk_row(label, fit.scheme, fit.tail, k, estimate=return_level(fit.params, k),
                                      n_maxima=fit.n_maxima or None, status="point_only"))
        return {"metadata": metadata("risk", config), "rows": rows}

    for spec, returns, scheme, tail in _cells(config):
        n_maxima = None
        try:
            maxima, fit = _fit_cell(returns, scheme, tail, config)
            n_maxima = len(maxima)
        except (EvtError, ValueError) as exc:
            for k in config.ks:
                rows.append(_risk_row(spec.name, scheme, tail, k, error=str(exc), n_maxima=n_maxima))
            continue
        for k in config.ks:
            if not fit.converged:
                rows.append(_risk_row(spec.name, scheme, tail, k, estimate=return_level(fit.params, k),
                                      error="fit did not converge", n_maxima=n_maxima, status="not_converged"))
                continue
            try:
                risk = profile_ci_level(maxima, fit, k, config.level)
                rows.append(_risk_row(spec.name, scheme, tail, k, risk=risk, n_maxima=n_maxima))
            except (EvtError, ValueError) as exc:
                rows.append(_risk_row(spec.name, scheme, tail, k, error=str(exc), n_maxima=n_maxima))
    return {"metadata": metadata("risk", config), "rows": rows}


def load_stored_fits(path):
    """Read GevFit JSON: one fit, a list of fits, or a ``fit`` report."""
    with Path(path).open(encoding="utf-8") as fh:
        data = json.load(fh)
    if isinstance(data, dict) and "rows" in data:
        entries = [r for r in data["rows"] if r.get("shape") is not None]
    elif isinstance(data, dict):
        entries = [data]
    else:
        entries = list(data)
    fits = []
    for i, entry in enumerate(entries):
        label = entry.get("index") or entry.get("label") or f"fit{i + 1}"
        fits.append((label, GevFit.from_dict(entry)))
    return fits


def qq_report(config):
    """QQ points and the per-panel CSV files (full, upper, lower per index)."""
    panels = {}
    rows = []
    for spec in config.inputs:
        returns = load_returns(spec)
        for name, series in (
            ("full", returns),
            ("upper", tail_subset(returns, "upper", config.fraction)),
            ("lower", tail_subset(returns, "lower", config.fraction)),
        ):
            qq = qq_normal(series)
            panels[f"qq_{spec.name}_{name}.csv"] = qq
            rows.append({
                "index": spec.name,
                "subset": name,
                "n": len(qq),
                "theoretical": qq.theoretical.tolist(),
                "empirical": qq.empirical.tolist(),
            })
    return {"metadata": metadata("qq", config), "rows": rows}, panels


# ---------------------------------------------------------------- simulation


def _replication_seeds(seed, n):
    return [int(s) for s in np.random.SeedSequence(seed).generate_state(n)]


def simulation_report(config, progress=None):
    """Sample-fit-interval study at known parameters.

    Every replication draws ``n_maxima`` values from ``simulate.truth``,
    fits them and computes profile intervals for ``simulate.ci_params`` and
    every configured ``k``.  Failures are counted per quantity, never fatal.
    """
    sim = config.simulate
    truth = sim.truth
    quantities = {name: getattr(truth, name) for name in PARAMETERS}
    for k in config.ks:
        quantities[f"level_k{k:g}"] = return_level(truth, k)

    rep_rows = []
    for rep, seed in enumerate(_replication_seeds(config.seed, sim.replications)):
        row = {"replication": rep, "seed": seed}
        x = gev_sample(truth, sim.n_maxima, seed)
        try:
            fit = fit_gev(x, config.optimizer)
        except (EvtError, ValueError) as exc:
            row.update(converged=False, error=str(exc))
            rep_rows.append(row)
            continue
        row.update(converged=fit.converged, error=None)
        for name in PARAMETERS:
            row[name] = getattr(fit.params, name)
        for k in config.ks:
            row[f"level_k{k:g}"] = return_level(fit.params, k)
        if fit.converged:
            for name in sim.ci_params:
                try:
                    interval, _ = profile_ci_param(x, fit, name, config.level)
                except (EvtError, ValueError):
                    continue
                row[f"{name}_low"], row[f"{name}_high"] = interval.low, interval.high
                row[f"{name}_covered"] = interval.low <= quantities[name] <= interval.high
            for k in config.ks:
                key = f"level_k{k:g}"
                try:
                    risk = profile_ci_level(x, fit, k, config.level)
                except (EvtError, ValueError):
                    continue
                row[f"{key}_low"], row[f"{key}_high"] = risk.ci_low, risk.ci_high
                row[f"{key}_covered"] = risk.ci_low <= quantities[key] <= risk.ci_high
        rep_rows.append(row)
        if progress is not None:
            progress(rep + 1, sim.replications)

    summary = []
    for key, true_value in quantities.items():
        est = np.array([r[key] for r in rep_rows if r.get(key) is not None], dtype=float)
        covered = [r[f"{key}_covered"] for r in rep_rows if f"{key}_covered" in r]
        has_ci = key in sim.ci_params or key.startswith("level_k")
        summary.append({
            "quantity": key,
            "truth": true_value,
            "n_estimates": int(est.size),
            "n_failed": len(rep_rows) - int(est.size),
            "mean": float(est.mean()) if est.size else None,
            "median": float(np.median(est)) if est.size else None,
            "bias": float(est.mean() - true_value) if est.size else None,
            "rmse": float(np.sqrt(np.mean((est - true_value) ** 2))) if est.size else None,
            "n_intervals": len(covered) if has_ci else None,
            "coverage": (sum(covered) / len(covered)) if has_ci and covered else None,
        })
    meta = metadata("simulate", config)
    meta["simulate"] = {**truth.to_dict(), "n_maxima": sim.n_maxima, "replications": sim.replications,
                        "ci_params": list(sim.ci_params)}
    return {"metadata": meta, "summary": summary, "replications": rep_rows}


# ---------------------------------------------------------------- tables


def _fmt_ci(est, lo, hi, digits):
    def f(v):
        return "open" if v is None or not math.isfinite(v) else f"{v:.{digits}f}"

    return f"{est:.{digits}f} [{f(lo)}, {f(hi)}]"


def format_fit_table(rows):
    """Parameter table: one line per index, scheme and tail."""
    w = max([len("Index")] + [len(r["index"]) for r in rows]) + 2
    lines = [f"{'Index':<{w}}{'Block':<10}{'Tail':<7}{'shape':<26}{'scale':<26}location"]
    for r in rows:
        head = f"{r['index']:<{w}}{r['scheme']:<10}{r['tail']:<7}"
        if r.get("shape") is None:
            lines.append(head + f"error: {r.get('error')}")
            continue
        cells = [_fmt_ci(r[n], r[f"{n}_low"], r[f"{n}_high"], 3) for n in PARAMETERS]
        flag = "" if r["status"] == "ok" else f"  ({r['status']})"
        lines.append(head + "".join(f"{c:<26}" for c in cells).rstrip() + flag)
    return "\n".join(lines) + "\n"


def format_risk_table(rows):
    """Return-level table per k: rows are (index, tail), columns are schemes."""
    out = []
    w = max([len("Index")] + [len(r["index"]) for r in rows]) + 2
    for k in dict.fromkeys(r["k"] for r in rows):
        sub = [r for r in rows if r["k"] == k]
        schemes = list(dict.fromkeys(str(r["scheme"]) for r in sub))
        out.append(f"{k:g}-block catastrophic risk levels")
        out.append(f"{'Index':<{w}}{'Tail':<7}" + "".join(f"{s:<22}" for s in schemes).rstrip())
        for index, tail in dict.fromkeys((r["index"], r["tail"]) for r in sub):
            cells = []
            for s in schemes:
                match = [r for r in sub if r["index"] == index and r["tail"] == tail and str(r["scheme"]) == s]
                if not match or match[0]["estimate"] is None:
                    cells.append("error")
                elif match[0]["ci_low"] is None and match[0]["status"] == "point_only":
                    cells.append(f"{match[0]['estimate']:.2f}")
                else:
                    m = match[0]
                    cells.append(_fmt_ci(m["estimate"], m["ci_low"], m["ci_high"], 2))
            out.append(f"{index:<{w}}{tail:<7}" + "".join(f"{c:<22}" for c in cells).rstrip())
        out.append("")
    return "\n".join(out)


def worst_status(rows):
    """``ok``, ``partial`` (some error rows) or ``not_converged``."""
    statuses = {r.get("status") for r in rows}
    if "not_converged" in statuses:
        return "not_converged"
    if "error" in statuses:
        return "partial"
    return "ok"


__all__ = [
    "atomic_write",
    "dumps_json",
    "fit_report",
    "format_fit_table",
    "format_risk_table",
    "load_stored_fits",
    "qq_report",
    "risk_report",
    "rows_to_csv",
    "simulation_report",
    "summary_report",
    "worst_status",
]
