"""Command line interface.

Exit codes: 0 success, 1 usage or configuration error, 2 data error,
3 numeric failure.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys

from . import pipeline, report
from .config import PipelineConfig, load_config, parse_mapping
from .errors import ConfigError, PanelkitError

log = logging.getLogger("panelkit")

COMMANDS = ("pipeline", "ols", "fe", "ridge", "pca", "diagnose", "adpi", "ingest-check")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.format_usage()}{self.prog}: error: {message}")


def _names(text: str) -> list[str]:
    return [p.strip() for p in text.split(",") if p.strip()]


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    g = common.add_argument_group("input and output")
    g.add_argument("--config", help="flat key = value configuration file")
    g.add_argument("--input", help="long-format CSV (overrides config 'input')")
    g.add_argument("--output-dir", help="output directory (fallback: $PANELKIT_OUTPUT_DIR)")
    g.add_argument("--format", dest="formats", type=_names,
                   help="comma-separated subset of json,csv,text")
    g.add_argument("--country-col", help="country id column")
    g.add_argument("--year-col", help="year id column")
    m = common.add_argument_group("model")
    m.add_argument("--response")
    m.add_argument("--regressors", type=_names, help="comma-separated regressor names")
    m.add_argument("--openness", type=_names, help="comma-separated openness block for PCA")
    m.add_argument("--corr-cutoff", type=float)
    m.add_argument("--vif-threshold", type=float)
    m.add_argument("--lambda", dest="lambda_", type=float, help="fixed ridge penalty; skips CV")
    m.add_argument("--folds", dest="cv_folds", type=int)
    m.add_argument("--seed", type=int)
    m.add_argument("--alpha", type=float)
    m.add_argument("--year-fe", dest="year_effects", action="store_true", default=None)
    m.add_argument("--adpi", help="oda=COL,gdp=COL,revenue=COL,tax=COL")
    m.add_argument("--adpi-variant", choices=("mean_of_z", "pca_weighted"))
    m.add_argument("--adpi-year", type=int)
    m.add_argument("-v", "--verbose", action="store_true")

    parser = _Parser(prog="panelkit", description="Country-year panel econometrics pipeline.")
    sub = parser.add_subparsers(dest="command", metavar="COMMAND", parser_class=_Parser)
    helps = {
        "pipeline": "run every stage in order",
        "ols": "pooled OLS on the configured regressors",
        "fe": "country fixed effects on the configured regressors",
        "ridge": "ridge regression (cross-validated unless --lambda)",
        "pca": "External Openness PCA on the openness block",
        "diagnose": "correlation matrix, high pairs and VIFs",
        "adpi": "Aid Dependence Pressure Index and ranking",
        "ingest-check": "load the CSV and summarise coverage",
    }
    for name in COMMANDS:
        sub.add_parser(name, parents=[common], help=helps[name], description=helps[name])
    return parser


def config_from_args(args) -> PipelineConfig:
    cfg = load_config(args.config) if args.config else PipelineConfig()
    changes = {k: getattr(args, k) for k in (
        "input", "output_dir", "response", "regressors", "openness", "corr_cutoff",
        "vif_threshold", "lambda_", "cv_folds", "seed", "alpha", "year_effects",
        "adpi_variant", "adpi_year")}
    if args.formats is not None:
        changes["formats"] = tuple(args.formats)
    if args.adpi is not None:
        changes["adpi"] = parse_mapping("--adpi", args.adpi)
    if args.country_col or args.year_col:
        changes["id_columns"] = (args.country_col or cfg.id_columns[0], args.year_col or cfg.id_columns[1])
    return cfg.replace(**changes)


def _run(args) -> int:
    cfg = config_from_args(args)
    if args.command == "ingest-check":
        if not cfg.input:
            raise ConfigError("input", "an input CSV path is required")
        from .panel import load_panel
        schema = pipeline.schema_for(cfg) if cfg.response else None
        with open(cfg.input, "rb") as fh:
            panel = load_panel(fh, schema, tuple(cfg.id_columns))
        print(json.dumps(pipeline.ingest_summary(panel), indent=2))
        return 0

    out_dir = cfg.resolved_output_dir()
    report.check_writable(out_dir)
    if args.command == "pipeline":
        rep = pipeline.run_pipeline(cfg)
    else:
        rep = pipeline.run_stage(cfg, args.command)
    paths = report.render_report(rep, out_dir, cfg.formats)
    for s in rep.stages:
        msg = (s.error or {}).get("message") or (s.error or {}).get("reason", "")
        print(f"{s.name}: {s.status}" + (f" ({msg})" if msg else ""))
    print(f"wrote {len(paths)} file(s) to {out_dir}")
    return rep.exit_code


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return 1
    except SystemExit as exc:  # --help
        return int(exc.code or 0)
    if not args.command:
        parser.print_usage(sys.stderr)
        return 1
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return _run(args)
    except PanelkitError as exc:
        print(f"panelkit: error: {exc}", file=sys.stderr)
        return exc.exit_code
    except OSError as exc:
        print(f"panelkit: error: {exc.filename}: {exc.strerror}", file=sys.stderr)
        return 2
    except Exception as exc:  # numeric library failures surface as exit 3
        print(f"panelkit: error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
