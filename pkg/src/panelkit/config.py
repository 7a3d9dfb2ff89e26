"""Pipeline configuration: a flat ``key = value`` file.

A section header is optional; keys outside any section are read as if they
sat under ``[panelkit]``.  List values are comma separated.  Example::

    input = synthetic_panel.csv
    id_columns = country, year
    response = Net_ODA
    regressors = GDPperCap, CPI, Exports, Imports, FDI, CurrentAccount
    openness = CurrentAccount, Exports, FDI, Imports
    lambda_grid = 0.001, 1000000, 100
    seed = 42
    adpi = oda=Net_ODA, gdp=GDP_musd, revenue=Gov_Revenue_musd, tax=Tax_Revenue_musd
"""

from __future__ import annotations

import configparser
import dataclasses
import os
from dataclasses import dataclass, field
from pathlib import Path

from .errors import ConfigError

SECTION = "panelkit"
FORMATS = ("json", "csv", "text")
ADPI_KEYS = ("oda", "gdp", "revenue", "tax")
OUTPUT_ENV = "PANELKIT_OUTPUT_DIR"
DEFAULT_OUTPUT_DIR = "panelkit_output"


@dataclass
class PipelineConfig:
    input: str | None = None
    id_columns: tuple[str, str] = ("country", "year")
    response: str | None = None
    regressors: list[str] = field(default_factory=list)
    openness: list[str] = field(default_factory=lambda: ["CurrentAccount", "Exports", "FDI", "Imports"])
    corr_cutoff: float = 0.70
    vif_threshold: float = 5.0
    lambda_grid: tuple[float, float, int] = (1e-3, 1e6, 100)
    lambda_: float | None = None
    cv_folds: int = 10
    seed: int | None = None
    alpha: float = 0.10
    year_effects: bool = False
    adpi: dict[str, str] | None = None
    adpi_variant: str = "mean_of_z"
    adpi_standardization: str = "pooled"
    adpi_year: int | None = None
    output_dir: str | None = None
    formats: tuple[str, ...] = FORMATS

    def validate(self, needs_cv: bool = True) -> "PipelineConfig":
        if not self.input:
            raise ConfigError("input", "an input CSV path is required")
        if not self.response:
            raise ConfigError("response", "a response variable is required")
        if len(self.id_columns) != 2:
            raise ConfigError("id_columns", "expected exactly two names: country, year")
        if not 0.0 < self.corr_cutoff < 1.0:
            raise ConfigError("corr_cutoff", f"must lie in (0, 1), got {self.corr_cutoff}")
        if self.vif_threshold <= 0:
            raise ConfigError("vif_threshold", "must be positive")
        if not 0.0 < self.alpha < 1.0:
            raise ConfigError("alpha", f"must lie in (0, 1), got {self.alpha}")
        lo, hi, count = self.lambda_grid
        if not (0 < lo < hi and count >= 1):
            raise ConfigError("lambda_grid", "expected min, max, count with 0 < min < max, count >= 1")
        if self.lambda_ is not None and self.lambda_ < 0:
            raise ConfigError("lambda", "must be >= 0")
        if self.cv_folds < 2:
            raise ConfigError("cv_folds", "must be >= 2")
        if needs_cv and self.lambda_ is None and self.seed is None:
            raise ConfigError("seed", "a seed is mandatory when cross-validation runs")
        bad = [f for f in self.formats if f not in FORMATS]
        if bad or not self.formats:
            raise ConfigError("formats", f"choose from {', '.join(FORMATS)}")
        if self.adpi is not None:
            missing = [k for k in ADPI_KEYS if k not in self.adpi]
            if missing:
                raise ConfigError("adpi", "missing mapping for " + ", ".join(missing))
        if self.adpi_variant not in ("mean_of_z", "pca_weighted"):
            raise ConfigError("adpi_variant", "must be mean_of_z or pca_weighted")
        if self.adpi_standardization not in ("pooled", "per_year"):
            raise ConfigError("adpi_standardization", "must be pooled or per_year")
        return self

    def resolved_output_dir(self) -> Path:
        return Path(self.output_dir or os.environ.get(OUTPUT_ENV) or DEFAULT_OUTPUT_DIR)

    def replace(self, **changes) -> "PipelineConfig":
        return dataclasses.replace(self, **{k: v for k, v in changes.items() if v is not None})


def _split(text: str) -> list[str]:
    return [p.strip() for p in text.replace("\n", ",").split(",") if p.strip()]


def _bool(key: str, text: str) -> bool:
    low = text.strip().lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise ConfigError(key, f"expected a boolean, got {text!r}")


def _num(key: str, text: str, kind=float):
    try:
        return kind(text.strip())
    except ValueError:
        raise ConfigError(key, f"expected a {kind.__name__}, got {text!r}") from None


def parse_mapping(key: str, text: str) -> dict[str, str]:
    out = {}
    for part in _split(text):
        if "=" not in part:
            raise ConfigError(key, f"expected name=column pairs, got {part!r}")
        k, v = (s.strip() for s in part.split("=", 1))
        if k not in ADPI_KEYS:
            raise ConfigError(f"{key}.{k}", f"unknown component; expected one of {', '.join(ADPI_KEYS)}")
        out[k] = v
    missing = [k for k in ADPI_KEYS if k not in out]
    if out and missing:
        raise ConfigError(key, "missing mapping for " + ", ".join(missing))
    return out


def parse_config(text: str, base_dir: Path | None = None) -> PipelineConfig:
    if not any(line.strip().startswith("[") for line in text.splitlines()):
        text = f"[{SECTION}]\n" + text
    parser = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=("#", ";"))
    parser.optionxform = str
    try:
        parser.read_string(text)
    except configparser.Error as exc:
        raise ConfigError("<file>", str(exc).splitlines()[0]) from None
    if not parser.has_section(SECTION):
        raise ConfigError("<file>", f"missing [{SECTION}] section")
    raw = dict(parser.items(SECTION))
    cfg = PipelineConfig()
    known = {f.name for f in dataclasses.fields(PipelineConfig)} - {"lambda_"} | {"lambda"}
    for key, value in raw.items():
        if key not in known:
            raise ConfigError(key, "unknown configuration key")
        if key == "input":
            path = Path(value)
            if base_dir is not None and not path.is_absolute():
                path = base_dir / path
            cfg.input = str(path)
        elif key == "id_columns":
            cfg.id_columns = tuple(_split(value))
        elif key in ("regressors", "openness"):
            setattr(cfg, key, _split(value))
        elif key in ("corr_cutoff", "vif_threshold", "alpha"):
            setattr(cfg, key, _num(key, value))
        elif key == "lambda":
            cfg.lambda_ = None if value.strip().lower() in ("", "none", "cv") else _num(key, value)
        elif key == "lambda_grid":
            parts = _split(value)
            if len(parts) != 3:
                raise ConfigError(key, "expected min, max, count")
            cfg.lambda_grid = (_num(key, parts[0]), _num(key, parts[1]), _num(key, parts[2], int))
        elif key in ("cv_folds", "seed", "adpi_year"):
            setattr(cfg, key, _num(key, value, int))
        elif key == "year_effects":
            cfg.year_effects = _bool(key, value)
        elif key == "adpi":
            cfg.adpi = parse_mapping(key, value) or None
        elif key == "formats":
            cfg.formats = tuple(_split(value))
        elif key == "output_dir":
            path = Path(value)
            if base_dir is not None and not path.is_absolute():
                path = base_dir / path
            cfg.output_dir = str(path)
        else:
            setattr(cfg, key, value.strip())
    return cfg


def load_config(path) -> PipelineConfig:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError("--config", f"cannot read {path}: {exc.strerror}") from None
    return parse_config(text, base_dir=path.parent)
