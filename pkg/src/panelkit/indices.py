"""Composite indices: the External Openness index and the Aid Dependence
Pressure Index (ADPI), with country rankings."""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .decomposition import PcaModel, ScoreSeries, fit_pca, scores
from .errors import DataError, TooShort, UnknownYear, ZeroVariance
from .panel import Panel, extract_block, standardize

log = logging.getLogger(__name__)

DEFAULT_OPENNESS = ("CurrentAccount", "Exports", "FDI", "Imports")
PC1_NAME = "External_Openness_PC1"
WEAK_PC1_SHARE = 0.4
ADPI_COMPONENTS = ("oda_gdp", "oda_revenue", "tax_gdp")
VARIANTS = ("mean_of_z", "pca_weighted")


@dataclass(frozen=True, eq=False)
class ExternalOpenness:
    series: ScoreSeries
    model: PcaModel
    warning: str | None = None


@dataclass(frozen=True, eq=False)
class AdpiComponents:
    keys: tuple[tuple[str, int], ...]
    oda_gdp: np.ndarray
    oda_revenue: np.ndarray
    tax_gdp: np.ndarray

    def __post_init__(self):
        n = len(self.keys)
        for name in ADPI_COMPONENTS:
            a = np.array(getattr(self, name), dtype=float)
            if a.shape != (n,):
                raise ValueError(f"{name} must have length {n}")
            if not np.isfinite(a).all():
                raise DataError(f"{name} contains non-finite ratios")
            a.setflags(write=False)
            object.__setattr__(self, name, a)
        object.__setattr__(self, "keys", tuple((str(c), int(t)) for c, t in self.keys))

    def matrix(self) -> np.ndarray:
        return np.column_stack([self.oda_gdp, self.oda_revenue, self.tax_gdp])


@dataclass(frozen=True, eq=False)
class AdpiSeries:
    keys: tuple[tuple[str, int], ...]
    values: np.ndarray
    variant: str
    weights: tuple[float, float, float]

    def for_year(self, year: int) -> list[tuple[str, float]]:
        return [(c, float(v)) for (c, t), v in zip(self.keys, self.values) if t == year]


@dataclass(frozen=True)
class RankEntry:
    rank: int
    country: str
    value: float


def build_external_openness(panel: Panel, variable_names: Sequence[str] = DEFAULT_OPENNESS
                            ) -> ExternalOpenness:
    """PC1 scores of the openness block, keyed by (country, year).

    Rows missing any of the block variables are neither fitted nor scored.
    """
    names = list(variable_names)
    if len(names) < 2:
        raise ValueError("openness block needs at least 2 variables")
    block = extract_block(panel, names)
    model = fit_pca(block)
    series = scores(model, block, 1)
    warning = None
    share = float(model.var_explained[0])
    if share < WEAK_PC1_SHARE:
        warning = (f"PC1 explains only {share:.1%} of the block's variance "
                   f"(< {WEAK_PC1_SHARE:.0%}); a single openness index is uninformative")
        log.warning(warning)
    return ExternalOpenness(series=series, model=model, warning=warning)


def components_from_panel(panel: Panel, oda: str, gdp: str, revenue: str, tax: str
                          ) -> AdpiComponents:
    """Form ODA/GDP, ODA/revenue and tax/GDP from raw level columns.

    Rows missing any input are dropped; a zero denominator is a data error.
    """
    cols = {k: panel.column(v) for k, v in
            dict(oda=oda, gdp=gdp, revenue=revenue, tax=tax).items()}
    keep = ~np.any([np.isnan(c) for c in cols.values()], axis=0)
    rows = np.flatnonzero(keep)
    keys = [panel.keys[i] for i in rows]
    sel = {k: c[rows] for k, c in cols.items()}
    for label, name in (("gdp", gdp), ("revenue", revenue)):
        zero = np.flatnonzero(sel[label] == 0)
        if zero.size:
            c, t = keys[zero[0]]
            raise DataError(f"zero denominator in {name!r} at ({c}, {t})")
    log.info("ADPI ratios: %s/%s, %s/%s, %s/%s over %d rows (%d dropped)",
             oda, gdp, oda, revenue, tax, gdp, len(rows), panel.n_rows - len(rows))
    return AdpiComponents(keys=keys, oda_gdp=sel["oda"] / sel["gdp"],
                          oda_revenue=sel["oda"] / sel["revenue"],
                          tax_gdp=sel["tax"] / sel["gdp"])


def _oriented_z(components: AdpiComponents, standardization: str) -> np.ndarray:
    M = components.matrix()
    flips = (False, False, True)
    if standardization == "pooled":
        return np.column_stack([standardize(M[:, j], flips[j], ADPI_COMPONENTS[j])[0]
                                for j in range(3)])
    if standardization != "per_year":
        raise ValueError(f"standardization must be 'pooled' or 'per_year', got {standardization!r}")
    years = np.array([t for _, t in components.keys])
    Z = np.empty_like(M)
    for t in np.unique(years):
        rows = years == t
        for j in range(3):
            Z[rows, j] = standardize(M[rows, j], flips[j], ADPI_COMPONENTS[j])[0]
    return Z


def build_adpi(components: AdpiComponents, variant: str = "mean_of_z",
               standardization: str = "pooled") -> AdpiSeries:
    """Aid Dependence Pressure Index.

    The tax/GDP z-score is negated so that every component rises with aid
    dependence.  ``mean_of_z`` averages the three oriented z-scores;
    ``pca_weighted`` projects them on the first principal component of their
    correlation matrix (ODA/GDP weight positive) and rescales the result to
    unit variance.
    """
    if variant not in VARIANTS:
        raise ValueError(f"variant must be one of {VARIANTS}, got {variant!r}")
    n = len(components.keys)
    if n < 3:
        raise TooShort(f"ADPI needs at least 3 observations, got {n}")
    Z = _oriented_z(components, standardization)
    if variant == "mean_of_z":
        values = Z.mean(axis=1)
        weights = (1 / 3, 1 / 3, 1 / 3)
    else:
        model = fit_pca(Z, ADPI_COMPONENTS)
        w = np.array(model.loadings[:, 0])
        if w[0] < 0:
            w = -w
        raw = np.column_stack([p.apply(Z[:, j]) for j, p in enumerate(model.standardization)]) @ w
        sd = raw.std(ddof=1)
        if not sd > 0:
            raise ZeroVariance("adpi")
        values = raw / sd
        weights = tuple(float(x) for x in w)
    values = np.asarray(values, dtype=float)
    values.setflags(write=False)
    return AdpiSeries(keys=components.keys, values=values, variant=variant, weights=weights)


def rank_adpi(series: AdpiSeries, year: int) -> list[RankEntry]:
    """Competition ranking for one year, most aid-dependent first."""
    entries = series.for_year(year)
    if not entries:
        raise UnknownYear(year)
    entries.sort(key=lambda e: (-e[1], e[0]))
    out, rank = [], 0
    for i, (country, value) in enumerate(entries):
        if i == 0 or value != entries[i - 1][1]:
            rank = i + 1
        out.append(RankEntry(rank, country, value))
    return out
