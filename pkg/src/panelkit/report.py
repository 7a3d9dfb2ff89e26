"""Rendering of pipeline reports to JSON, CSV and plain text.

All renderers work from the JSON-able report dictionary, so a report read
back from ``report.json`` renders exactly like the live one.
"""

from __future__ import annotations

import csv
import io
import json
import math
from pathlib import Path
from typing import Any, Iterable

from .errors import DataError

COEF_COLUMNS = ("variable", "estimate", "std_error", "t_statistic", "p_value",
                "ci_lower", "ci_upper", "significant")
TEXT_HEADERS = ("Variable", "Estimate", "Std. Error", "t-Statistic", "P-Value",
                "CI Lower", "CI Upper", "Sig.")
SIG_MARK = "*"

STAGE_FILES = {
    "pooled_ols_full": "01_ols_full",
    "diagnostics": "02_diagnostics",
    "pca": "03_pca",
    "pooled_ols_pc1": "04_ols_pc1",
    "fixed_effects": "05_fe",
    "ridge_cv": "06_ridge_cv",
    "ridge_final": "07_ridge",
    "adpi": "08_adpi",
}
STAGE_TITLES = {
    "pooled_ols_full": "Pooled OLS, full regressor set",
    "diagnostics": "Multicollinearity diagnostics",
    "pca": "PCA: External Openness index",
    "pooled_ols_pc1": "Pooled OLS with External_Openness_PC1",
    "fixed_effects": "Country fixed effects (within)",
    "ridge_cv": "Ridge cross-validation",
    "ridge_final": "Ridge regression",
    "adpi": "Aid Dependence Pressure Index",
}


class IoError(DataError):
    def __init__(self, path, reason):
        self.path = str(path)
        super().__init__(f"cannot write {path}: {reason}")


# -- JSON ------------------------------------------------------------------------

def _clean(obj):
    if isinstance(obj, float):
        if math.isnan(obj):
            return "nan"
        if math.isinf(obj):
            return "inf" if obj > 0 else "-inf"
        return obj
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if hasattr(obj, "item"):  # numpy scalar
        return _clean(obj.item())
    return obj


def render_json(report) -> str:
    """Canonical JSON: sorted keys, full float precision, non-finite as strings."""
    data = report.to_dict() if hasattr(report, "to_dict") else report
    return json.dumps(_clean(data), sort_keys=True, indent=2, allow_nan=False) + "\n"


def _num(x) -> float:
    if isinstance(x, str):
        return float(x)
    return float("nan") if x is None else float(x)


# -- text --------------------------------------------------------------------------

def format_number(x, decimals: int = 2) -> str:
    """Fixed-point with thousands separators; independent of the locale."""
    x = _num(x)
    if math.isnan(x):
        return "NA"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return f"{x:,.{decimals}f}"


def _table(headers: Iterable[str], rows: list[list[str]], left: int = 1) -> str:
    headers = list(headers)
    widths = [max(len(h), *(len(r[i]) for r in rows)) if rows else len(h)
              for i, h in enumerate(headers)]

    def line(cells):
        out = [c.ljust(w) if i < left else c.rjust(w) for i, (c, w) in enumerate(zip(cells, widths))]
        return "  ".join(out).rstrip()
    sep = "  ".join("-" * w for w in widths)
    return "\n".join([line(headers), sep, *(line(r) for r in rows)])


def format_coefficient_table(records: list[dict[str, Any]]) -> str:
    rows = []
    for r in records:
        rows.append([
            str(r["variable"]),
            format_number(r["estimate"]),
            format_number(r["std_error"]),
            format_number(r["t_statistic"]),
            format_number(r["p_value"]),
            format_number(r["ci_lower"]),
            format_number(r["ci_upper"]),
            SIG_MARK if r.get("significant") else "",
        ])
    return _table(TEXT_HEADERS, rows)


def _text_stage(idx: int, stage: dict[str, Any]) -> str:
    name, status = stage["name"], stage["status"]
    lines = [f"== Stage {idx}: {STAGE_TITLES.get(name, name)} [{status}] =="]
    if stage.get("variables"):
        lines.append("Variables: " + ", ".join(stage["variables"]))
    if status == "skipped":
        lines.append("skipped: " + (stage.get("error") or {}).get("reason", ""))
        return "\n".join(lines)
    if status == "error":
        err = stage["error"]
        lines.append(f"error: {err['type']}: {err['message']}")
        return "\n".join(lines)
    d = stage["data"]
    kind = d["kind"]
    if kind in ("ols", "fe"):
        r2 = d["r_squared"] if kind == "ols" else d["r_squared_within"]
        label = "R-squared" if kind == "ols" else "Within R-squared"
        lines.append(f"Response: {d['response']}   n = {d['n']}   df = {d['df_resid']}   "
                     f"dropped = {d['dropped']}   {label} = {format_number(r2, 4)}")
        if kind == "fe":
            lines.append(f"Groups: {d['n_groups']}   year effects: {'yes' if d['year_effects'] else 'no'}")
        lines.append(format_coefficient_table(d["coefficients"]))
        if d.get("alpha") is not None:
            lines.append(f"{SIG_MARK} p <= {format_number(d['alpha'])}")
        if kind == "fe":
            lines.append("")
            lines.append(_table(("Country", "Intercept"),
                                [[c, format_number(v)] for c, v in d["group_intercepts"].items()]))
    elif kind == "diagnostics":
        corr = d["correlation"]
        lines.append(f"High-correlation pairs (|r| >= {format_number(d['cutoff'])}):")
        if d["high_pairs"]:
            lines.append(_table(("Variable A", "Variable B", "r"),
                                [[p["a"], p["b"], format_number(p["r"])] for p in d["high_pairs"]], left=2))
        else:
            lines.append("  none")
        if corr is not None:
            lines.append("")
            lines.append("Correlation matrix:")
            lines.append(_table(["", *corr["names"]],
                                [[a, *(format_number(x) for x in row)]
                                 for a, row in zip(corr["names"], corr["matrix"])]))
        if d["vif"] is not None:
            lines.append("")
            lines.append(f"VIF (threshold {format_number(d['vif']['threshold'])}):")
            lines.append(_table(("Variable", "VIF", "Flag"),
                                [[e["name"], format_number(e["vif"]), SIG_MARK if e["flagged"] else ""]
                                 for e in d["vif"]["entries"]]))
    elif kind == "pca":
        lines.append(f"n = {d['n']}")
        lines.append(_table(("Component", "Eigenvalue", "Share", "Cumulative"),
                            [[f"PC{s['component']}", format_number(s["eigenvalue"], 4),
                              format_number(100 * _num(s["share"])) + "%",
                              format_number(100 * _num(s["cumulative"])) + "%"] for s in d["scree"]]))
        lines.append("")
        p = len(d["names"])
        lines.append(_table(["Variable", *(f"PC{j + 1}" for j in range(p))],
                            [[nm, *(format_number(x) for x in row)]
                             for nm, row in zip(d["names"], d["loadings"])]))
        if d.get("warning"):
            lines.append("warning: " + d["warning"])
    elif kind == "ridge_cv":
        lines.append(f"folds = {d['folds']}   seed = {d['seed']}   grid points = {len(d['curve'])}")
        lines.append(f"lambda_min = {d['lambda_min']!r}   lambda_1se = {d['lambda_1se']!r}")
    elif kind == "ridge":
        lines.append(f"lambda = {d['lambda']!r} ({d['lambda_source']})")
        lines.append(_table(("Variable", "Estimate", "Standardized"),
                            [[c["variable"], format_number(c["estimate"]),
                              format_number(c["standardized_estimate"])] for c in d["coefficients"]]))
    elif kind == "adpi":
        w = d["weights"]
        lines.append(f"variant = {d['variant']}   weights: oda_gdp {format_number(w['oda_gdp'], 4)}, "
                     f"oda_revenue {format_number(w['oda_revenue'], 4)}, tax_gdp {format_number(w['tax_gdp'], 4)}")
        rk = d["ranking"]
        lines.append(f"Ranking for {rk['year']}:")
        lines.append(_table(("Rank", "Country", "ADPI"),
                            [[str(e["rank"]), e["country"], format_number(e["adpi"], 3)]
                             for e in rk["entries"]], left=2))
    return "\n".join(lines)


def render_text(report) -> str:
    data = json.loads(render_json(report))
    parts = [_text_stage(i, s) for i, s in enumerate(data["stages"], start=1)]
    return "\n\n".join(parts) + "\n"


# -- CSV ---------------------------------------------------------------------------

def _csv(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow(["" if v is None else (repr(v) if isinstance(v, float) else v) for v in r])
    return buf.getvalue()


def stage_csvs(stage: dict[str, Any]) -> dict[str, str]:
    """File stem -> CSV text for one stage (stage tables, not plot-data)."""
    stem = STAGE_FILES.get(stage["name"], stage["name"])
    if stage["status"] != "ok":
        err = stage.get("error") or {}
        return {stem: _csv(("status", "message"),
                           [(stage["status"], err.get("reason") or err.get("message", ""))])}
    d = stage["data"]
    kind = d["kind"]
    if kind in ("ols", "fe"):
        return {stem: _csv(COEF_COLUMNS, [[c[k] for k in COEF_COLUMNS] for c in d["coefficients"]])}
    if kind == "diagnostics":
        out = {stem + "_pairs": _csv(("name_a", "name_b", "r"),
                                     [(p["a"], p["b"], p["r"]) for p in d["high_pairs"]])}
        if d["vif"] is not None:
            out[stem] = _csv(("name", "vif", "flagged"),
                             [(e["name"], e["vif"], e["flagged"]) for e in d["vif"]["entries"]])
        return out
    if kind == "pca":
        p = len(d["names"])
        return {
            stem: _csv(("variable", *(f"PC{j + 1}" for j in range(p))),
                       [(nm, *row) for nm, row in zip(d["names"], d["loadings"])]),
            stem + "_scores": _csv(("country", "year", "External_Openness_PC1"),
                                   [(s["country"], s["year"], s["value"]) for s in d["scores"]]),
        }
    if kind == "ridge_cv":
        return {stem: _csv(("lambda", "log_lambda", "mse_mean", "mse_se"),
                           [(c["lambda"], c["log_lambda"], c["mse_mean"], c["mse_se"]) for c in d["curve"]])}
    if kind == "ridge":
        return {stem: _csv(("variable", "estimate", "standardized_estimate"),
                           [(c["variable"], c["estimate"], c["standardized_estimate"])
                            for c in d["coefficients"]])}
    if kind == "adpi":
        w = d["weights"]
        rk = d["ranking"]
        return {
            stem: _csv(("country", "year", "adpi", "variant", "weight_oda_gdp", "weight_oda_rev", "weight_tax"),
                       [(s["country"], s["year"], s["adpi"], d["variant"], w["oda_gdp"], w["oda_revenue"],
                         w["tax_gdp"]) for s in d["series"]]),
            stem + "_ranking": _csv(("year", "rank", "country", "adpi"),
                                    [(rk["year"], e["rank"], e["country"], e["adpi"]) for e in rk["entries"]]),
        }
    return {}


def plot_csvs(stage: dict[str, Any]) -> dict[str, str]:
    """Plot-data sidecars: heatmap, VIF bars, scree, biplot, CV curve."""
    if stage["status"] != "ok":
        return {}
    d = stage["data"]
    kind = d["kind"]
    out = {}
    if kind == "diagnostics":
        corr = d["correlation"]
        if corr is not None:
            names = corr["names"]
            out["correlation_heatmap"] = _csv(
                ("row_name", "col_name", "r"),
                [(a, b, corr["matrix"][i][j]) for i, a in enumerate(names) for j, b in enumerate(names)])
        if d["vif"] is not None:
            out["vif"] = _csv(("name", "vif", "flagged"),
                              [(e["name"], e["vif"], e["flagged"]) for e in d["vif"]["entries"]])
    elif kind == "pca":
        out["scree"] = _csv(("component", "eigenvalue", "share", "cumulative"),
                            [(s["component"], s["eigenvalue"], s["share"], s["cumulative"]) for s in d["scree"]])
        out["biplot"] = _csv(("kind", "label", "dim1", "dim2"),
                             [(b["kind"], b["label"], b["dim1"], b["dim2"]) for b in d["biplot"]])
    elif kind == "ridge_cv":
        out["cv_curve"] = _csv(("lambda", "log_lambda", "mse_mean", "mse_se"),
                               [(c["lambda"], c["log_lambda"], c["mse_mean"], c["mse_se"]) for c in d["curve"]])
    return out


# -- files -------------------------------------------------------------------------

def _write(path: Path, text: str) -> None:
    try:
        path.write_text(text, encoding="utf-8", newline="")
    except OSError as exc:
        raise IoError(path, exc.strerror) from None


def check_writable(out_dir) -> Path:
    out = Path(out_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
        probe = out / ".panelkit_write_probe"
        probe.write_text("", encoding="utf-8")
        probe.unlink()
    except OSError as exc:
        raise IoError(out, exc.strerror) from None
    return out


def render_report(report, out_dir, formats=("json", "csv", "text")) -> list[Path]:
    """Write the report under ``out_dir`` and return the paths written.

    Stage wall-clock durations go to ``timings.json`` so that ``report.json``
    is byte-identical across runs.
    """
    out = check_writable(out_dir)
    data = json.loads(render_json(report))
    written = []
    if "json" in formats:
        _write(out / "report.json", render_json(data))
        written.append(out / "report.json")
        if hasattr(report, "stages"):
            timings = {s.name: s.duration for s in report.stages}
            _write(out / "timings.json", json.dumps(timings, indent=2) + "\n")
            written.append(out / "timings.json")
    if "csv" in formats:
        plot_dir = out / "plotdata"
        try:
            plot_dir.mkdir(exist_ok=True)
        except OSError as exc:
            raise IoError(plot_dir, exc.strerror) from None
        for stage in data["stages"]:
            for stem, text in stage_csvs(stage).items():
                _write(out / f"{stem}.csv", text)
                written.append(out / f"{stem}.csv")
            for stem, text in plot_csvs(stage).items():
                _write(plot_dir / f"{stem}.csv", text)
                written.append(plot_dir / f"{stem}.csv")
    if "text" in formats:
        _write(out / "report.txt", render_text(data))
        written.append(out / "report.txt")
    return written
