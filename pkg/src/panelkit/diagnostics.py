"""Multicollinearity diagnostics: correlation screening and variance inflation factors."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import InsufficientRows, ZeroVariance
from .panel import DesignMatrix

PERFECT_R2 = 1.0 - 1e-12


def _block(X, names=None) -> tuple[np.ndarray, tuple[str, ...]]:
    if isinstance(X, DesignMatrix):
        return np.asarray(X.X), X.names
    X = np.asarray(X, dtype=float)
    if X.ndim != 2:
        raise ValueError("regressor block must be 2-D")
    if names is None:
        names = tuple(f"x{j + 1}" for j in range(X.shape[1]))
    return X, tuple(names)


@dataclass(frozen=True, eq=False)
class CorrelationMatrix:
    names: tuple[str, ...]
    R: np.ndarray

    def get(self, a: str, b: str) -> float:
        return float(self.R[self.names.index(a), self.names.index(b)])

    def records(self) -> list[tuple[str, str, float]]:
        """Long-format (row_name, col_name, r) triples for heatmap plot-data."""
        return [(a, b, float(self.R[i, j]))
                for i, a in enumerate(self.names) for j, b in enumerate(self.names)]


@dataclass(frozen=True)
class VifEntry:
    name: str
    vif: float
    flagged: bool

    @property
    def perfectly_collinear(self) -> bool:
        return self.vif == np.inf


@dataclass(frozen=True)
class VifTable:
    entries: tuple[VifEntry, ...]
    threshold: float

    @property
    def flagged(self) -> list[str]:
        return [e.name for e in self.entries if e.flagged]

    @property
    def perfectly_collinear(self) -> list[str]:
        return [e.name for e in self.entries if e.perfectly_collinear]

    def __getitem__(self, name: str) -> float:
        for e in self.entries:
            if e.name == name:
                return e.vif
        raise KeyError(name)


def correlation_matrix(X, names: Sequence[str] | None = None) -> CorrelationMatrix:
    """Pearson correlations between the columns of a regressor block."""
    X, names = _block(X, names)
    n, k = X.shape
    if n < 3:
        raise InsufficientRows(f"correlation needs at least 3 rows, got {n}")
    C = X - X.mean(axis=0)
    ss = np.sqrt((C * C).sum(axis=0))
    scale = np.abs(X).max(axis=0, initial=0.0)
    for j in range(k):
        if not ss[j] > 1e-13 * scale[j] * np.sqrt(n):
            raise ZeroVariance(names[j])
    U = C / ss
    R = U.T @ U
    R = 0.5 * (R + R.T)
    np.fill_diagonal(R, 1.0)
    np.clip(R, -1.0, 1.0, out=R)
    R.setflags(write=False)
    return CorrelationMatrix(names=names, R=R)


def high_correlation_pairs(corr: CorrelationMatrix, cutoff: float = 0.70
                           ) -> list[tuple[str, str, float]]:
    """Unordered pairs with ``|r| >= cutoff``, strongest first."""
    if not 0.0 < cutoff < 1.0:
        raise ValueError(f"cutoff must lie in (0, 1), got {cutoff}")
    k = len(corr.names)
    out = []
    for i in range(k):
        for j in range(i + 1, k):
            r = float(corr.R[i, j])
            if abs(r) >= cutoff:
                out.append((corr.names[i], corr.names[j], r))
    # stable sort keeps upper-triangle order among equal magnitudes
    out.sort(key=lambda p: -abs(p[2]))
    return out


def _aux_r2(target: np.ndarray, others: np.ndarray) -> float:
    n = len(target)
    A = np.column_stack([np.ones(n), others])
    beta, *_ = np.linalg.lstsq(A, target, rcond=None)
    resid = target - A @ beta
    tc = target - target.mean()
    tss = float(tc @ tc)
    return 1.0 - float(resid @ resid) / tss


def vif(X, names: Sequence[str] | None = None, threshold: float = 5.0) -> VifTable:
    """Variance inflation factors from auxiliary regressions with intercept.

    A column explained exactly by the others (auxiliary R^2 within 1e-12 of
    one) is reported with ``vif = inf`` instead of raising.
    """
    X, names = _block(X, names)
    n, k = X.shape
    if k < 2:
        raise ValueError("VIF needs at least 2 regressors")
    if n <= k:
        raise InsufficientRows(f"VIF needs n > k, got n={n}, k={k}")
    scale = np.abs(X).max(axis=0, initial=0.0)
    sd = X.std(axis=0)
    for j in range(k):
        if not sd[j] > 1e-13 * scale[j]:
            raise ZeroVariance(names[j])
    # standardized columns keep the auxiliary solves well scaled; R^2 is affine invariant
    Z = (X - X.mean(axis=0)) / sd
    entries = []
    for j in range(k):
        r2 = _aux_r2(Z[:, j], np.delete(Z, j, axis=1))
        v = np.inf if r2 >= PERFECT_R2 else 1.0 / (1.0 - r2)
        entries.append(VifEntry(name=names[j], vif=float(v), flagged=bool(v > threshold)))
    return VifTable(entries=tuple(entries), threshold=float(threshold))
