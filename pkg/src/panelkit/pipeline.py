"""End-to-end estimation sequence.

Stages run in a fixed order, each consuming earlier outputs:

1. pooled OLS on the full regressor list
2. correlation matrix, high-correlation pairs and VIFs
3. PCA on the openness block
4. pooled OLS with PC1 replacing the openness block
5. country fixed effects on the stage-4 variables
6. ridge cross-validation on the stage-4 variables
7. ridge at the selected lambda
8. ADPI (only when a column mapping is configured)
"""

from __future__ import annotations

import dataclasses
import logging
import time
from dataclasses import dataclass, field
from typing import Any, Callable

import numpy as np

from . import decomposition, diagnostics, estimators, indices
from .config import PipelineConfig
from .errors import ConfigError, DataError, PanelkitError
from .panel import (
    Panel,
    VariableSpec,
    append_variable,
    drop_variables,
    extract_block,
    extract_design,
    load_panel,
)

log = logging.getLogger(__name__)

STAGES = (
    "pooled_ols_full",
    "diagnostics",
    "pca",
    "pooled_ols_pc1",
    "fixed_effects",
    "ridge_cv",
    "ridge_final",
    "adpi",
)
# a failure here halts the later estimation stages
ESTIMATION = {"pooled_ols_full", "pca", "pooled_ols_pc1", "fixed_effects", "ridge_cv", "ridge_final"}


@dataclass
class StageResult:
    name: str
    status: str  # ok | error | skipped
    variables: list[str] = field(default_factory=list)
    data: dict[str, Any] | None = None
    error: dict[str, Any] | None = None
    duration: float = 0.0
    result: Any = None

    def to_dict(self) -> dict[str, Any]:
        return {"name": self.name, "status": self.status, "variables": list(self.variables),
                "data": self.data, "error": self.error}


@dataclass
class Report:
    stages: list[StageResult] = field(default_factory=list)
    meta: dict[str, Any] = field(default_factory=dict)

    def stage(self, name: str) -> StageResult:
        for s in self.stages:
            if s.name == name:
                return s
        raise KeyError(name)

    @property
    def names(self) -> list[str]:
        return [s.name for s in self.stages]

    def to_dict(self) -> dict[str, Any]:
        return {"meta": self.meta, "stages": [s.to_dict() for s in self.stages]}

    @property
    def exit_code(self) -> int:
        codes = [s.error.get("exit_code", 3) for s in self.stages if s.status == "error"]
        return max(codes, default=0)


# -- serialization of typed results ------------------------------------------------

def coefficient_records(table: estimators.CoefficientTable) -> list[dict[str, Any]]:
    return [{"variable": r.name, "estimate": r.estimate, "std_error": r.se,
             "t_statistic": r.t, "p_value": r.p, "ci_lower": r.ci_lower,
             "ci_upper": r.ci_upper, "significant": r.significant} for r in table.rows]


def ols_payload(fit: estimators.OlsFit, design) -> dict[str, Any]:
    tab = fit.coefficients
    return {"kind": "ols", "response": design.response, "n": tab.n, "df_resid": tab.df_resid,
            "dropped": design.dropped, "r_squared": fit.r_squared, "sigma2": fit.sigma2,
            "alpha": tab.alpha, "coefficients": coefficient_records(tab)}


def fe_payload(fit: estimators.FeFit, design, year_effects: bool) -> dict[str, Any]:
    tab = fit.coefficients
    years = None
    if fit.year_intercepts is not None:
        years = {str(t): v for t, v in fit.year_intercepts.items()}
    return {"kind": "fe", "response": design.response, "n": tab.n, "df_resid": tab.df_resid,
            "dropped": design.dropped, "n_groups": fit.n_groups, "year_effects": year_effects,
            "r_squared_within": fit.r_squared_within, "sigma2": fit.sigma2, "alpha": tab.alpha,
            "coefficients": coefficient_records(tab), "group_intercepts": fit.group_intercepts,
            "year_intercepts": years}


def diagnostics_payload(corr, pairs, vif_table, cutoff) -> dict[str, Any]:
    return {
        "kind": "diagnostics",
        "correlation": None if corr is None else
        {"names": list(corr.names), "matrix": [[float(x) for x in row] for row in corr.R]},
        "cutoff": cutoff,
        "high_pairs": [{"a": a, "b": b, "r": r} for a, b, r in pairs],
        "vif": None if vif_table is None else
        {"threshold": vif_table.threshold,
         "entries": [{"name": e.name, "vif": e.vif, "flagged": e.flagged} for e in vif_table.entries],
         "perfectly_collinear": vif_table.perfectly_collinear},
    }


def pca_payload(eo: indices.ExternalOpenness, block) -> dict[str, Any]:
    m = eo.model
    return {
        "kind": "pca",
        "names": list(m.names),
        "n": m.n_obs,
        "eigenvalues": [float(x) for x in m.eigenvalues],
        "var_explained": [float(x) for x in m.var_explained],
        "loadings": [[float(x) for x in row] for row in m.loadings],
        "scree": [{"component": c, "eigenvalue": e, "share": s, "cumulative": cu}
                  for c, e, s, cu in decomposition.scree_data(m)],
        "biplot": [{"kind": r.kind, "label": r.label, "dim1": r.dim1, "dim2": r.dim2}
                   for r in decomposition.biplot_data(m, block, per_country=True)],
        "scores": [{"country": c, "year": t, "value": float(v)}
                   for (c, t), v in zip(eo.series.keys, eo.series.values)],
        "warning": eo.warning,
    }


def cv_payload(curve: estimators.CvCurve) -> dict[str, Any]:
    return {"kind": "ridge_cv", "folds": curve.fold_count, "seed": curve.seed,
            "lambda_min": curve.lambda_min, "lambda_1se": curve.lambda_1se,
            "curve": [{"lambda": l, "log_lambda": g, "mse_mean": m, "mse_se": s}
                      for l, g, m, s in curve.records()]}


def ridge_payload(fit: estimators.RidgeFit, source: str) -> dict[str, Any]:
    return {"kind": "ridge", "lambda": fit.lam, "lambda_source": source,
            "coefficients": [{"variable": n, "estimate": b, "standardized_estimate": bz}
                             for n, b, bz in fit.as_rows()]}


def adpi_payload(series: indices.AdpiSeries, ranking, year, mapping) -> dict[str, Any]:
    return {"kind": "adpi", "variant": series.variant, "columns": dict(mapping),
            "weights": {"oda_gdp": series.weights[0], "oda_revenue": series.weights[1],
                        "tax_gdp": series.weights[2]},
            "series": [{"country": c, "year": t, "adpi": float(v)}
                       for (c, t), v in zip(series.keys, series.values)],
            "ranking": {"year": year, "entries": [{"rank": e.rank, "country": e.country,
                                                   "adpi": e.value} for e in ranking]}}


# -- running -------------------------------------------------------------------

def schema_for(config: PipelineConfig) -> list[VariableSpec]:
    specs: dict[str, VariableSpec] = {}
    specs[config.response] = VariableSpec(config.response, "response")
    for name in [*config.regressors, *config.openness]:
        specs.setdefault(name, VariableSpec(name, "regressor"))
    if config.adpi:
        for key, name in config.adpi.items():
            specs.setdefault(name, VariableSpec(name, "raw-component", sign_flip=key == "tax"))
    return list(specs.values())


def load_input(config: PipelineConfig) -> Panel:
    try:
        with open(config.input, "rb") as fh:
            return load_panel(fh, schema_for(config), tuple(config.id_columns))
    except OSError as exc:
        raise DataError(f"cannot read input {config.input}: {exc.strerror}") from None


def stage4_regressors(config: PipelineConfig) -> list[str]:
    block = set(config.openness)
    return [indices.PC1_NAME] + [r for r in config.regressors if r not in block]


class _Runner:
    def __init__(self, config: PipelineConfig, panel: Panel):
        self.cfg = config
        self.panel = panel
        self.report = Report(meta={
            "response": config.response,
            "rows": panel.n_rows,
            "seed": config.seed,
            "alpha": config.alpha,
            "corr_cutoff": config.corr_cutoff,
            "vif_threshold": config.vif_threshold,
        })
        self.halted_by: str | None = None
        self.ctx: dict[str, Any] = {}

    def run(self, name: str, variables: list[str], fn: Callable[[], tuple[Any, dict]]):
        if self.halted_by and name in ESTIMATION:
            self.report.stages.append(StageResult(
                name, "skipped", variables,
                error={"reason": f"halted after {self.halted_by} failed"}))
            return None
        t0 = time.perf_counter()
        try:
            result, data = fn()
        except PanelkitError as exc:
            log.error("stage %s failed: %s", name, exc)
            stage = StageResult(name, "error", variables, error={
                "type": type(exc).__name__, "message": str(exc), "exit_code": exc.exit_code})
            if name in ESTIMATION:
                self.halted_by = name
            result = None
        else:
            stage = StageResult(name, "ok", variables, data=data, result=result)
        stage.duration = time.perf_counter() - t0
        self.report.stages.append(stage)
        return result

    def skip(self, name: str, variables: list[str], reason: str):
        self.report.stages.append(StageResult(name, "skipped", variables, error={"reason": reason}))

    # individual stages

    def ols_full(self):
        cfg = self.cfg

        def go():
            d = extract_design(self.panel, cfg.response, cfg.regressors)
            fit = estimators.ols_fit(d)
            fit = _marked(fit, cfg.alpha)
            return fit, ols_payload(fit, d)
        self.run("pooled_ols_full", list(cfg.regressors), go)

    def diagnostics(self):
        cfg = self.cfg

        def go():
            d = extract_design(self.panel, cfg.response, cfg.regressors)
            corr = diagnostics.correlation_matrix(d)
            pairs = diagnostics.high_correlation_pairs(corr, cfg.corr_cutoff)
            table = diagnostics.vif(d, threshold=cfg.vif_threshold) if d.k >= 2 else None
            return (corr, pairs, table), diagnostics_payload(corr, pairs, table, cfg.corr_cutoff)
        self.run("diagnostics", list(cfg.regressors), go)

    def pca(self):
        cfg = self.cfg

        def go():
            eo = indices.build_external_openness(self.panel, cfg.openness)
            block = extract_block(self.panel, cfg.openness)
            return eo, pca_payload(eo, block)
        eo = self.run("pca", list(cfg.openness), go)
        if eo is not None:
            spliced = append_variable(self.panel, indices.PC1_NAME, eo.series.as_dict())
            present = [v for v in cfg.openness if v in spliced.values]
            self.ctx["panel_pc1"] = drop_variables(spliced, present)
        return eo

    def stage4_design(self):
        return extract_design(self.ctx["panel_pc1"], self.cfg.response, stage4_regressors(self.cfg))

    def ols_pc1(self):
        def go():
            d = self.stage4_design()
            fit = _marked(estimators.ols_fit(d), self.cfg.alpha)
            return fit, ols_payload(fit, d)
        self.run("pooled_ols_pc1", stage4_regressors(self.cfg), go)

    def fixed_effects(self, design_fn=None, variables=None):
        if design_fn is None:
            design_fn, variables = self.stage4_design, stage4_regressors(self.cfg)

        def go():
            d = design_fn()
            fit = estimators.fe_fit(d, year_effects=self.cfg.year_effects)
            fit = _marked(fit, self.cfg.alpha)
            return fit, fe_payload(fit, d, self.cfg.year_effects)
        self.run("fixed_effects", variables, go)

    def ridge(self, design_fn=None, variables=None):
        cfg = self.cfg
        if design_fn is None:
            design_fn, variables = self.stage4_design, stage4_regressors(cfg)
        if cfg.lambda_ is not None:
            self.skip("ridge_cv", variables, f"fixed lambda {cfg.lambda_!r} supplied")
            lam, source = cfg.lambda_, "fixed"
        else:
            def go_cv():
                grid = estimators.log_grid(*cfg.lambda_grid)
                curve = estimators.ridge_cv(design_fn(), grid, folds=cfg.cv_folds, seed=cfg.seed)
                return curve, cv_payload(curve)
            curve = self.run("ridge_cv", variables, go_cv)
            lam, source = (curve.lambda_min, "cv_lambda_min") if curve is not None else (None, None)

        def go_fit():
            fit = estimators.ridge_fit(design_fn(), lam)
            return fit, ridge_payload(fit, source)
        if lam is None and not self.halted_by:
            self.skip("ridge_final", variables, "no lambda selected")
        else:
            self.run("ridge_final", variables, go_fit)

    def adpi(self):
        cfg = self.cfg
        if not cfg.adpi:
            self.skip("adpi", [], "no ADPI column mapping configured")
            return
        cols = [cfg.adpi[k] for k in ("oda", "gdp", "revenue", "tax")]

        def go():
            comps = indices.components_from_panel(self.panel, **cfg.adpi)
            series = indices.build_adpi(comps, cfg.adpi_variant, cfg.adpi_standardization)
            year = cfg.adpi_year if cfg.adpi_year is not None else max(t for _, t in series.keys)
            ranking = indices.rank_adpi(series, year)
            return (series, ranking), adpi_payload(series, ranking, year, cfg.adpi)
        self.run("adpi", cols, go)


def _marked(fit, alpha):
    return dataclasses.replace(fit, coefficients=estimators.mark_significance(fit.coefficients, alpha))


def run_pipeline(config: PipelineConfig, panel: Panel | None = None) -> Report:
    """Run all eight stages and return the report; stage failures are recorded."""
    config.validate(needs_cv=config.lambda_ is None)
    panel = panel if panel is not None else load_input(config)
    r = _Runner(config, panel)
    r.ols_full()
    r.diagnostics()
    r.pca()
    if "panel_pc1" in r.ctx:
        r.ols_pc1()
        r.fixed_effects()
        r.ridge()
    else:
        for name in ("pooled_ols_pc1", "fixed_effects", "ridge_cv", "ridge_final"):
            r.report.stages.append(StageResult(name, "skipped", stage4_regressors(config),
                                               error={"reason": "halted after pca failed"}))
    r.adpi()
    return r.report


def run_stage(config: PipelineConfig, command: str, panel: Panel | None = None) -> Report:
    """Run the stage(s) behind one CLI subcommand on the configured regressors."""
    needs_cv = command == "ridge" and config.lambda_ is None
    config.validate(needs_cv=needs_cv)
    panel = panel if panel is not None else load_input(config)
    r = _Runner(config, panel)

    def plain_design():
        return extract_design(panel, config.response, config.regressors)

    if command == "ols":
        r.ols_full()
    elif command == "diagnose":
        r.diagnostics()
    elif command == "pca":
        r.pca()
    elif command == "fe":
        r.fixed_effects(plain_design, list(config.regressors))
    elif command == "ridge":
        r.ridge(plain_design, list(config.regressors))
    elif command == "adpi":
        if not config.adpi:
            raise ConfigError("adpi", "the adpi command needs an oda/gdp/revenue/tax column mapping")
        r.adpi()
    else:
        raise ValueError(f"unknown stage command {command!r}")
    return r.report


def ingest_summary(panel: Panel) -> dict[str, Any]:
    years = sorted(set(panel.years))
    return {
        "rows": panel.n_rows,
        "countries": sorted(set(panel.countries)),
        "years": [years[0], years[-1]] if years else [],
        "n_years": len(years),
        "variables": panel.names,
        "missing": panel.missing_counts(),
        "complete_rows": int((~np.isnan(np.column_stack(list(panel.values.values()))).any(axis=1)).sum())
        if panel.names else panel.n_rows,
    }
