"""Pooled OLS, fixed-effects (within) and ridge estimators."""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy import linalg, stats

from .errors import (
    ConstantWithinGroups,
    FoldTooSmall,
    InsufficientRows,
    RankDeficient,
    SingleGroup,
)
from .panel import DesignMatrix, standardize

INTERCEPT = "(Intercept)"
RANK_TOL = 1e-10


@dataclass(frozen=True)
class CoefficientRow:
    name: str
    estimate: float
    se: float
    t: float
    p: float
    ci_lower: float
    ci_upper: float
    significant: bool | None = None


@dataclass(frozen=True)
class CoefficientTable:
    rows: tuple[CoefficientRow, ...]
    df_resid: int
    n: int
    alpha: float | None = None

    @property
    def names(self) -> list[str]:
        return [r.name for r in self.rows]

    def __getitem__(self, name: str) -> CoefficientRow:
        for r in self.rows:
            if r.name == name:
                return r
        raise KeyError(name)

    def column(self, attr: str) -> np.ndarray:
        return np.array([getattr(r, attr) for r in self.rows], dtype=float)

    @classmethod
    def from_arrays(cls, names, estimate, se, df_resid, n, level=0.95) -> "CoefficientTable":
        estimate = np.asarray(estimate, dtype=float)
        se = np.asarray(se, dtype=float)
        with np.errstate(divide="ignore", invalid="ignore"):
            t = np.where(se > 0, estimate / se, np.nan)
        p = 2.0 * stats.t.sf(np.abs(t), df_resid)
        q = stats.t.ppf(0.5 + level / 2.0, df_resid)
        rows = tuple(
            CoefficientRow(str(nm), float(b), float(s), float(tt), float(pp),
                           float(b - q * s), float(b + q * s))
            for nm, b, s, tt, pp in zip(names, estimate, se, t, p)
        )
        return cls(rows=rows, df_resid=int(df_resid), n=int(n))


@dataclass(frozen=True, eq=False)
class OlsFit:
    coefficients: CoefficientTable
    r_squared: float
    residuals: np.ndarray
    fitted: np.ndarray
    sigma2: float
    cov: np.ndarray
    intercept: bool = True

    @property
    def params(self) -> np.ndarray:
        return self.coefficients.column("estimate")


@dataclass(frozen=True, eq=False)
class FeFit:
    coefficients: CoefficientTable
    group_intercepts: dict[str, float]
    year_intercepts: dict[int, float] | None
    residuals: np.ndarray
    sigma2: float
    r_squared_within: float
    n_groups: int

    @property
    def params(self) -> np.ndarray:
        return self.coefficients.column("estimate")


@dataclass(frozen=True, eq=False)
class RidgeFit:
    """Ridge solution in both standardized and original units.

    ``standardized_coefficients`` are slopes on z-scored regressors with the
    response only centred; ``coefficients`` are back-transformed to the
    response units per original regressor unit.
    """

    lam: float
    names: tuple[str, ...]
    intercept: float
    coefficients: np.ndarray
    standardized_coefficients: np.ndarray
    x_mean: np.ndarray
    x_sd: np.ndarray
    y_mean: float

    def predict(self, X) -> np.ndarray:
        X = np.asarray(X, dtype=float).reshape(-1, len(self.names))
        return self.intercept + X @ self.coefficients

    def as_rows(self) -> list[tuple[str, float, float]]:
        rows = [(INTERCEPT, self.intercept, float("nan"))]
        rows += [(n, float(b), float(bz)) for n, b, bz in
                 zip(self.names, self.coefficients, self.standardized_coefficients)]
        return rows


@dataclass(frozen=True, eq=False)
class CvCurve:
    grid: np.ndarray
    mse_mean: np.ndarray
    mse_se: np.ndarray
    fold_mse: np.ndarray
    fold_count: int
    seed: int
    lambda_min: float
    lambda_1se: float

    def records(self) -> list[tuple[float, float, float, float]]:
        with np.errstate(divide="ignore"):
            logs = np.log(self.grid)
        return [(float(l), float(g), float(m), float(s))
                for l, g, m, s in zip(self.grid, logs, self.mse_mean, self.mse_se)]


# -- least squares core --------------------------------------------------------

def _dependent_columns(A: np.ndarray, names: Sequence[str]) -> list[str] | None:
    """Names taking part in an exact linear dependency, or None if full rank."""
    norms = np.linalg.norm(A, axis=0)
    zero = norms == 0
    if zero.any():
        return [names[j] for j in np.flatnonzero(zero)]
    _, s, Vt = np.linalg.svd(A / norms, full_matrices=False)
    null = s <= RANK_TOL * s[0]
    if not null.any():
        return None
    involved = (np.abs(Vt[null]) > 1e-6).any(axis=0)
    return [names[j] for j in np.flatnonzero(involved)]


def _least_squares(A: np.ndarray, y: np.ndarray, names: Sequence[str]):
    dep = _dependent_columns(A, names)
    if dep is not None:
        raise RankDeficient(dep)
    Q, R = np.linalg.qr(A)
    beta = linalg.solve_triangular(R, Q.T @ y)
    Rinv = linalg.solve_triangular(R, np.eye(R.shape[0]))
    return beta, Rinv @ Rinv.T


def ols_fit(d: DesignMatrix, intercept: bool = True, level: float = 0.95) -> OlsFit:
    """Pooled OLS with classical (homoskedastic) inference.

    The intercept, when present, is the first coefficient row.  P-values are
    two-sided Student-t with ``n - k - 1`` degrees of freedom.
    """
    n, k = d.X.shape
    p = k + int(intercept)
    if p == 0:
        raise ValueError("model has no columns")
    if n <= p:
        raise InsufficientRows(f"need n > {p} rows for inference, got {n}")
    A = np.column_stack([np.ones(n), d.X]) if intercept else np.asarray(d.X)
    names = ([INTERCEPT] if intercept else []) + list(d.names)
    beta, xtx_inv = _least_squares(A, d.y, names)
    fitted = A @ beta
    resid = d.y - fitted
    df = n - p
    rss = float(resid @ resid)
    sigma2 = rss / df
    cov = sigma2 * xtx_inv
    se = np.sqrt(np.diag(cov))
    table = CoefficientTable.from_arrays(names, beta, se, df, n, level)
    yc = d.y - d.y.mean() if intercept else d.y
    tss = float(yc @ yc)
    r2 = 1.0 - rss / tss if tss > 0 else float("nan")
    for a in (resid, fitted, cov):
        a.setflags(write=False)
    return OlsFit(table, r2, resid, fitted, sigma2, cov, intercept)


def _group_index(labels) -> tuple[np.ndarray, list]:
    uniq: dict = {}
    idx = np.array([uniq.setdefault(x, len(uniq)) for x in labels], dtype=int)
    return idx, list(uniq)


def _demean(M: np.ndarray, idx: np.ndarray, G: int) -> np.ndarray:
    counts = np.bincount(idx, minlength=G).astype(float)
    if M.ndim == 1:
        return M - (np.bincount(idx, weights=M, minlength=G) / counts)[idx]
    out = np.empty_like(M)
    for j in range(M.shape[1]):
        out[:, j] = M[:, j] - (np.bincount(idx, weights=M[:, j], minlength=G) / counts)[idx]
    return out


def fe_fit(d: DesignMatrix, year_effects: bool = False, level: float = 0.95) -> FeFit:
    """Country fixed effects via the within transformation.

    Year effects, when requested, enter as year dummies (first year as the
    base) after within-country demeaning, which is exact for unbalanced
    panels.  Degrees of freedom are ``n - k - G - (T - 1)``.
    """
    n, k = d.X.shape
    gidx, groups = _group_index(d.countries)
    G = len(groups)
    if G < 2:
        raise SingleGroup(f"fixed effects need at least 2 groups, got {G}")
    sizes = np.bincount(gidx, minlength=G)
    if sizes.min() < 2:
        small = [groups[g] for g in np.flatnonzero(sizes < 2)]
        raise InsufficientRows("groups with fewer than 2 rows: " + ", ".join(map(str, small)))

    X_dm = _demean(np.asarray(d.X), gidx, G)
    y_dm = _demean(np.asarray(d.y), gidx, G)
    const = [d.names[j] for j in range(k)
             if np.linalg.norm(X_dm[:, j]) <= 1e-10 * np.linalg.norm(d.X[:, j])]
    if const:
        raise ConstantWithinGroups(const)

    years = sorted(set(d.years.tolist()))
    dummy_years = years[1:] if year_effects else []
    D = np.column_stack([(d.years == t).astype(float) for t in dummy_years]) \
        if dummy_years else np.empty((n, 0))
    D_dm = _demean(D, gidx, G) if dummy_years else D
    A = np.column_stack([X_dm, D_dm])
    names = list(d.names) + [f"year[{t}]" for t in dummy_years]
    df = n - k - G - len(dummy_years)
    if df <= 0 or k == 0:
        raise InsufficientRows(f"no residual degrees of freedom (n={n}, k={k}, G={G})")

    beta, xtx_inv = _least_squares(A, y_dm, names)
    resid = y_dm - A @ beta
    rss = float(resid @ resid)
    sigma2 = rss / df
    se = np.sqrt(np.diag(sigma2 * xtx_inv))[:k]
    slopes = beta[:k]
    table = CoefficientTable.from_arrays(d.names, slopes, se, df, n, level)

    gamma = dict(zip(dummy_years, beta[k:].tolist()))
    year_term = np.array([gamma.get(t, 0.0) for t in d.years.tolist()])
    level_resid = d.y - d.X @ slopes - year_term
    alpha = np.bincount(gidx, weights=level_resid, minlength=G) / sizes
    group_intercepts = {groups[g]: float(alpha[g]) for g in range(G)}
    year_intercepts = None
    if year_effects:
        year_intercepts = {years[0]: 0.0, **{t: float(v) for t, v in gamma.items()}}
    tss = float(y_dm @ y_dm)
    resid.setflags(write=False)
    return FeFit(table, group_intercepts, year_intercepts, resid, sigma2,
                 1.0 - rss / tss if tss > 0 else float("nan"), G)


# -- ridge ---------------------------------------------------------------------

class _RidgePath:
    """Standardize once, then solve for any lambda through the SVD of Z."""

    def __init__(self, X: np.ndarray, y: np.ndarray, names: Sequence[str]):
        n, k = X.shape
        if n < 2:
            raise InsufficientRows(f"ridge needs at least 2 rows, got {n}")
        self.names = tuple(names)
        self.y_mean = float(np.mean(y))
        yc = y - self.y_mean
        if k:
            cols, params = zip(*(standardize(X[:, j], name=names[j]) for j in range(k)))
            Z = np.column_stack(cols)
            self.x_mean = np.array([p.mean for p in params])
            self.x_sd = np.array([p.sd for p in params])
            U, self.s, Vt = np.linalg.svd(Z, full_matrices=False)
            self.V = Vt.T
            self.uty = U.T @ yc
        else:
            self.x_mean = self.x_sd = self.s = self.uty = np.empty(0)
            self.V = np.empty((0, 0))

    def fit(self, lam: float) -> RidgeFit:
        lam = float(lam)
        if lam < 0:
            raise ValueError(f"lambda must be >= 0, got {lam}")
        s = self.s
        if lam == 0 and s.size and s[-1] <= RANK_TOL * s[0]:
            involved = (np.abs(self.V[:, s <= RANK_TOL * s[0]]) > 1e-6).any(axis=1)
            raise RankDeficient([self.names[j] for j in np.flatnonzero(involved)])
        bz = self.V @ (s * self.uty / (s * s + lam)) if s.size else np.empty(0)
        b = bz / self.x_sd if s.size else bz
        b0 = self.y_mean - float(b @ self.x_mean) if s.size else self.y_mean
        return RidgeFit(lam, self.names, b0, b, bz, self.x_mean, self.x_sd, self.y_mean)


def ridge_fit(d: DesignMatrix, lam: float) -> RidgeFit:
    """Ridge regression with standardized regressors and an unpenalized intercept."""
    return _RidgePath(np.asarray(d.X), np.asarray(d.y), d.names).fit(lam)


def log_grid(lo: float = 1e-3, hi: float = 1e6, count: int = 100) -> np.ndarray:
    return np.logspace(np.log10(lo), np.log10(hi), int(count))


def fold_assignment(n: int, folds: int, seed: int) -> list[np.ndarray]:
    """Seeded shuffle of ``range(n)`` split into near-equal folds."""
    perm = np.random.default_rng(seed).permutation(n)
    return [np.sort(part) for part in np.array_split(perm, folds)]


def select_lambdas(grid, mse_mean, mse_se) -> tuple[float, float]:
    """Return ``(lambda_min, lambda_1se)`` for an ascending grid.

    Exact ties at the minimum go to the smallest lambda.
    """
    grid = np.asarray(grid, dtype=float)
    mse_mean = np.asarray(mse_mean, dtype=float)
    best = float(mse_mean.min())
    i = int(np.flatnonzero(mse_mean == best)[0])
    bound = best + float(mse_se[i])
    j = int(np.flatnonzero(mse_mean <= bound)[-1])
    return float(grid[i]), float(grid[j])


def ridge_cv(d: DesignMatrix, grid, folds: int = 10, seed: int = 0) -> CvCurve:
    """K-fold cross-validated held-out MSE over a lambda grid.

    Standardization is recomputed on each training fold.
    """
    grid = np.unique(np.asarray(grid, dtype=float))
    if grid.size == 0:
        raise ValueError("lambda grid is empty")
    if (grid < 0).any():
        raise ValueError("lambda grid must be nonnegative")
    n = d.n
    if not 2 <= folds <= n:
        raise ValueError(f"folds must lie in [2, {n}], got {folds}")
    parts = fold_assignment(n, folds, seed)
    if n - max(len(p) for p in parts) < 2:
        raise FoldTooSmall("a training fold has fewer than 2 rows")
    X, y = np.asarray(d.X), np.asarray(d.y)
    mse = np.empty((folds, grid.size))
    for f, test in enumerate(parts):
        train = np.setdiff1d(np.arange(n), test)
        path = _RidgePath(X[train], y[train], d.names)
        for g, lam in enumerate(grid):
            err = y[test] - path.fit(lam).predict(X[test])
            mse[f, g] = float(np.mean(err * err))
    mean = mse.mean(axis=0)
    se = mse.std(axis=0, ddof=1) / np.sqrt(folds)
    lmin, l1se = select_lambdas(grid, mean, se)
    for a in (grid, mean, se, mse):
        a.setflags(write=False)
    return CvCurve(grid, mean, se, mse, int(folds), int(seed), lmin, l1se)


def mark_significance(table: CoefficientTable, alpha: float = 0.10) -> CoefficientTable:
    """Flag rows with ``p <= alpha``; estimates are untouched."""
    rows = tuple(dataclasses.replace(r, significant=bool(r.p <= alpha)) for r in table.rows)
    return dataclasses.replace(table, rows=rows, alpha=float(alpha))
