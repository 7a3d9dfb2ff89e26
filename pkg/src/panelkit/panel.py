"""Country-year panel data model, CSV ingestion and design extraction."""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

import numpy as np

from .errors import (
    DataError,
    DuplicateKey,
    EmptyDesign,
    MissingColumn,
    NameCollision,
    ParseError,
    TooShort,
    UnknownVariable,
    ZeroVariance,
)

ROLES = ("response", "regressor", "raw-component", "id")
MISSING_TOKENS = ("", "NA")

Key = tuple[str, int]


def _frozen(a) -> np.ndarray:
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class VariableSpec:
    name: str
    role: str = "regressor"
    unit: str = ""
    sign_flip: bool = False

    def __post_init__(self):
        if self.role not in ROLES:
            raise ValueError(f"role must be one of {ROLES}, got {self.role!r}")


@dataclass(frozen=True, eq=False)
class Panel:
    """Long-format country-year observations.

    ``values`` maps each registered variable name to a float array aligned
    with ``countries``/``years``; missing cells are NaN.
    """

    countries: tuple[str, ...]
    years: tuple[int, ...]
    variables: tuple[VariableSpec, ...]
    values: Mapping[str, np.ndarray]

    def __post_init__(self):
        n = len(self.countries)
        if len(self.years) != n:
            raise ValueError("countries and years must have equal length")
        seen = set()
        for key in zip(self.countries, self.years):
            if key in seen:
                raise DuplicateKey(*key)
            seen.add(key)
        names = [v.name for v in self.variables]
        if len(set(names)) != len(names):
            dup = next(x for x in names if names.count(x) > 1)
            raise NameCollision(dup)
        if set(names) != set(self.values):
            raise ValueError("values must hold exactly one column per registered variable")
        object.__setattr__(self, "values", {k: _frozen(self.values[k]) for k in names})
        for k, col in self.values.items():
            if col.shape != (n,):
                raise ValueError(f"column {k!r} has shape {col.shape}, expected ({n},)")

    @property
    def n_rows(self) -> int:
        return len(self.countries)

    @property
    def names(self) -> list[str]:
        return [v.name for v in self.variables]

    @property
    def keys(self) -> list[Key]:
        return list(zip(self.countries, self.years))

    def spec(self, name: str) -> VariableSpec:
        for v in self.variables:
            if v.name == name:
                return v
        raise UnknownVariable(name)

    def column(self, name: str) -> np.ndarray:
        try:
            return self.values[name]
        except KeyError:
            raise UnknownVariable(name) from None

    def missing_counts(self) -> dict[str, int]:
        return {k: int(np.isnan(v).sum()) for k, v in self.values.items()}

    def equals(self, other: "Panel") -> bool:
        """Same keys, registry, values and missing pattern."""
        if self.keys != other.keys or self.variables != other.variables:
            return False
        for k in self.names:
            a, b = self.values[k], other.values[k]
            if not np.array_equal(np.isnan(a), np.isnan(b)):
                return False
            m = ~np.isnan(a)
            if not np.array_equal(a[m], b[m]):
                return False
        return True


@dataclass(frozen=True, eq=False)
class DesignMatrix:
    """Response vector and regressor block after listwise deletion.

    ``X`` excludes the intercept column.
    """

    y: np.ndarray
    X: np.ndarray
    names: tuple[str, ...]
    keys: tuple[Key, ...]
    response: str = "y"
    dropped: int = 0

    def __post_init__(self):
        y = _frozen(self.y)
        X = np.array(self.X, dtype=float)
        if X.ndim == 1:
            X = X.reshape(-1, 1) if len(self.names) == 1 else X.reshape(len(y), -1)
        X.setflags(write=False)
        object.__setattr__(self, "y", y)
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "names", tuple(self.names))
        object.__setattr__(self, "keys", tuple((str(c), int(t)) for c, t in self.keys))
        if X.shape != (len(y), len(self.names)):
            raise ValueError(f"X has shape {X.shape}, expected ({len(y)}, {len(self.names)})")
        if len(self.keys) != len(y):
            raise ValueError("keys must align with rows")
        if np.isnan(y).any() or np.isnan(X).any():
            raise ValueError("design contains missing values")

    @property
    def n(self) -> int:
        return len(self.y)

    @property
    def k(self) -> int:
        return len(self.names)

    @property
    def countries(self) -> np.ndarray:
        return np.array([c for c, _ in self.keys], dtype=object)

    @property
    def years(self) -> np.ndarray:
        return np.array([t for _, t in self.keys], dtype=int)

    def subset(self, rows) -> "DesignMatrix":
        rows = np.asarray(rows)
        return DesignMatrix(
            y=self.y[rows],
            X=self.X[rows],
            names=self.names,
            keys=[self.keys[i] for i in rows],
            response=self.response,
        )

    def columns(self, names: Sequence[str]) -> np.ndarray:
        idx = []
        for name in names:
            if name not in self.names:
                raise UnknownVariable(name)
            idx.append(self.names.index(name))
        return self.X[:, idx]


@dataclass(frozen=True)
class StandardizationParams:
    mean: float
    sd: float
    sign_flip: bool = False

    def apply(self, values) -> np.ndarray:
        z = (np.asarray(values, dtype=float) - self.mean) / self.sd
        return -z if self.sign_flip else z

    def invert(self, z) -> np.ndarray:
        z = np.asarray(z, dtype=float)
        if self.sign_flip:
            z = -z
        return z * self.sd + self.mean


# -- operations -------------------------------------------------------------

def _parse_cell(text: str, row: int, column: str) -> float:
    text = text.strip()
    if text in MISSING_TOKENS:
        return math.nan
    try:
        return float(text)
    except ValueError:
        raise ParseError(row, column, text) from None


def load_panel(source, schema: Sequence[VariableSpec] | None = None,
               id_columns: tuple[str, str] = ("country", "year")) -> Panel:
    """Read a long-format CSV into a :class:`Panel`.

    ``source`` may be a path, a text stream or a byte stream.  When
    ``schema`` is None every non-id column is registered as a regressor.
    Row numbers in :class:`ParseError` count the header as row 1.
    """
    if isinstance(source, str) or hasattr(source, "__fspath__"):
        with open(source, encoding="utf-8", newline="") as fh:
            return load_panel(fh, schema, id_columns)
    if isinstance(source, bytes):
        source = io.BytesIO(source)
    stream = source
    if isinstance(stream, (io.BufferedIOBase, io.RawIOBase)) or "b" in getattr(stream, "mode", ""):
        stream = io.TextIOWrapper(stream, encoding="utf-8", newline="")

    reader = csv.reader(stream)
    try:
        header = [h.strip() for h in next(reader)]
    except StopIteration:
        raise DataError("CSV is empty; a header row is required") from None
    country_col, year_col = id_columns
    for col in (country_col, year_col):
        if col not in header:
            raise MissingColumn(col)
    if schema is None:
        schema = [VariableSpec(h) for h in header if h not in (country_col, year_col)]
    schema = list(schema)
    for spec in schema:
        if spec.name not in header:
            raise MissingColumn(spec.name)
    ci, yi = header.index(country_col), header.index(year_col)
    vidx = [header.index(s.name) for s in schema]

    countries, years = [], []
    cols: list[list[float]] = [[] for _ in schema]
    seen = set()
    for rowno, record in enumerate(reader, start=2):
        if not any(cell.strip() for cell in record):
            continue
        if len(record) < len(header):
            record = record + [""] * (len(header) - len(record))
        country = record[ci].strip()
        year_text = record[yi].strip()
        try:
            year = int(year_text)
        except ValueError:
            raise ParseError(rowno, year_col, year_text) from None
        if (country, year) in seen:
            raise DuplicateKey(country, year)
        seen.add((country, year))
        countries.append(country)
        years.append(year)
        for j, (spec, idx) in enumerate(zip(schema, vidx)):
            cols[j].append(_parse_cell(record[idx], rowno, spec.name))

    return Panel(
        countries=tuple(countries),
        years=tuple(years),
        variables=tuple(schema),
        values={s.name: np.array(c, dtype=float) for s, c in zip(schema, cols)},
    )


def write_panel(panel: Panel, target, id_columns: tuple[str, str] = ("country", "year")) -> None:
    """Serialize in the same dialect :func:`load_panel` reads.

    Floats are written with ``repr`` so a reload is bit-exact.
    """
    if isinstance(target, str) or hasattr(target, "__fspath__"):
        with open(target, "w", encoding="utf-8", newline="") as fh:
            write_panel(panel, fh, id_columns)
        return
    writer = csv.writer(target, lineterminator="\n")
    writer.writerow([*id_columns, *panel.names])
    for i, (c, t) in enumerate(panel.keys):
        cells = []
        for name in panel.names:
            v = panel.values[name][i]
            cells.append("NA" if math.isnan(v) else repr(float(v)))
        writer.writerow([c, t, *cells])


def extract_design(panel: Panel, response: str, regressors: Sequence[str],
                   missing_policy: str = "listwise") -> DesignMatrix:
    """Select response and regressors and drop incomplete rows."""
    if missing_policy != "listwise":
        raise ValueError(f"unsupported missing_policy {missing_policy!r}")
    regressors = list(regressors)
    for name in [response, *regressors]:
        panel.column(name)
    if response in regressors:
        raise DataError(f"response {response!r} also listed as a regressor")
    y = panel.values[response]
    X = np.column_stack([panel.values[r] for r in regressors]) if regressors \
        else np.empty((panel.n_rows, 0))
    keep = ~np.isnan(y) & ~np.isnan(X).any(axis=1)
    if not keep.any():
        raise EmptyDesign(f"no complete rows for {response!r} on {len(regressors)} regressor(s)")
    rows = np.flatnonzero(keep)
    keys = panel.keys
    return DesignMatrix(
        y=y[rows],
        X=X[rows],
        names=tuple(regressors),
        keys=[keys[i] for i in rows],
        response=response,
        dropped=int(panel.n_rows - len(rows)),
    )


def extract_block(panel: Panel, names: Sequence[str]) -> DesignMatrix:
    """Complete rows of a variable block with no response (``y`` is zeros)."""
    names = list(names)
    for name in names:
        panel.column(name)
    X = np.column_stack([panel.values[v] for v in names])
    rows = np.flatnonzero(~np.isnan(X).any(axis=1))
    if rows.size == 0:
        raise EmptyDesign("no complete rows for block " + ", ".join(names))
    keys = panel.keys
    return DesignMatrix(y=np.zeros(rows.size), X=X[rows], names=tuple(names),
                        keys=[keys[i] for i in rows], response="",
                        dropped=int(panel.n_rows - rows.size))


def standardize(values, sign_flip: bool = False, name: str | None = None
                ) -> tuple[np.ndarray, StandardizationParams]:
    """Z-score with the sample (n - 1) standard deviation, optionally negated."""
    v = np.asarray(values, dtype=float)
    if v.ndim != 1 or v.size < 2:
        raise TooShort(f"standardize needs at least 2 values, got {v.size}")
    mean = float(v.mean())
    sd = float(v.std(ddof=1))
    if not sd > 0 or sd <= 1e-13 * float(np.abs(v).max()):
        raise ZeroVariance(name)
    params = StandardizationParams(mean=mean, sd=sd, sign_flip=sign_flip)
    return params.apply(v), params


def append_variable(panel: Panel, name: str, keyed_values: Mapping[Key, float] | Iterable[tuple[Key, float]],
                    spec: VariableSpec | None = None) -> Panel:
    """Return a new panel with ``name`` added; uncovered rows are missing."""
    if name in panel.values:
        raise NameCollision(name)
    if not isinstance(keyed_values, Mapping):
        keyed_values = dict(keyed_values)
    lookup = {(str(c), int(t)): float(v) for (c, t), v in keyed_values.items()}
    col = np.array([lookup.get(k, math.nan) for k in panel.keys], dtype=float)
    spec = spec or VariableSpec(name)
    if spec.name != name:
        raise ValueError("spec name must match the appended variable name")
    values = dict(panel.values)
    values[name] = col
    return Panel(panel.countries, panel.years, (*panel.variables, spec), values)


def drop_variables(panel: Panel, names: Iterable[str]) -> Panel:
    names = set(names)
    for n in names:
        panel.column(n)
    keep = tuple(v for v in panel.variables if v.name not in names)
    return Panel(panel.countries, panel.years, keep, {v.name: panel.values[v.name] for v in keep})
