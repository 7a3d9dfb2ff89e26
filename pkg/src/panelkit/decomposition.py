"""Correlation-basis principal component analysis."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import ComponentOutOfRange, InsufficientRows, UnknownVariable
from .panel import DesignMatrix, StandardizationParams, standardize

TIE_TOL = 1e-10


@dataclass(frozen=True, eq=False)
class PcaModel:
    """Fitted PCA.

    ``loadings[:, j]`` is the unit-norm eigenvector of component ``j + 1``,
    oriented so its largest-magnitude entry is positive.
    """

    names: tuple[str, ...]
    loadings: np.ndarray
    eigenvalues: np.ndarray
    var_explained: np.ndarray
    standardization: tuple[StandardizationParams, ...]
    n_obs: int

    @property
    def p(self) -> int:
        return len(self.names)

    def correlation(self) -> np.ndarray:
        """Correlation matrix rebuilt from the spectrum."""
        return self.loadings @ np.diag(self.eigenvalues) @ self.loadings.T


@dataclass(frozen=True, eq=False)
class ScoreSeries:
    keys: tuple[tuple[str, int], ...]
    component: int
    values: np.ndarray

    def as_dict(self) -> dict[tuple[str, int], float]:
        return {k: float(v) for k, v in zip(self.keys, self.values)}


@dataclass(frozen=True)
class BiplotRecord:
    kind: str
    label: str
    dim1: float
    dim2: float


def _as_block(X, names=None, keys=None):
    if isinstance(X, DesignMatrix):
        return np.asarray(X.X), tuple(X.names), X.keys
    X = np.asarray(X, dtype=float)
    if X.ndim != 2:
        raise ValueError("block must be 2-D")
    if names is None:
        names = tuple(f"x{j + 1}" for j in range(X.shape[1]))
    if keys is None:
        keys = tuple(("", i) for i in range(X.shape[0]))
    return X, tuple(names), tuple(keys)


def _lead_index(vec: np.ndarray) -> int:
    # first entry within rounding of the maximum magnitude
    mag = np.abs(vec)
    return int(np.flatnonzero(mag >= mag.max() - 1e-12)[0])


def _orient(vec: np.ndarray) -> np.ndarray:
    return -vec if vec[_lead_index(vec)] < 0 else vec


def _canonical_basis(V: np.ndarray) -> np.ndarray:
    """Orthonormal basis of span(V) built from the projected unit vectors in
    input-column order, so a degenerate eigenspace has a unique basis."""
    p, m = V.shape
    P = V @ V.T
    basis: list[np.ndarray] = []
    for j in range(p):
        v = P[:, j].copy()
        for b in basis:
            v -= (b @ v) * b
        norm = np.linalg.norm(v)
        if norm > 1e-6:
            basis.append(v / norm)
            if len(basis) == m:
                break
    return np.column_stack(basis)


def _sorted_spectrum(eigvals: np.ndarray, eigvecs: np.ndarray):
    """Descending eigenvalues; near-equal eigenvalues share a canonical basis
    ordered by input column."""
    idx = np.argsort(-eigvals, kind="stable")
    w, V = eigvals[idx], eigvecs[:, idx].copy()
    scale = max(1.0, float(np.abs(w).max()))
    i = 0
    while i < len(w):
        j = i + 1
        while j < len(w) and abs(w[i] - w[j]) <= TIE_TOL * scale:
            j += 1
        if j - i > 1:
            V[:, i:j] = _canonical_basis(V[:, i:j])
        i = j
    return w, V


def fit_pca(X, names: Sequence[str] | None = None, basis: str = "correlation") -> PcaModel:
    """Eigendecomposition of the sample correlation matrix of ``X``."""
    if basis != "correlation":
        raise ValueError("only the correlation basis is supported")
    X, names, _ = _as_block(X, names)
    n, p = X.shape
    if p < 2:
        raise ComponentOutOfRange(f"PCA needs at least 2 variables, got {p}")
    if n <= p:
        raise InsufficientRows(f"PCA needs n > p, got n={n}, p={p}")
    cols, params = [], []
    for j in range(p):
        z, prm = standardize(X[:, j], name=names[j])
        cols.append(z)
        params.append(prm)
    Z = np.column_stack(cols)
    R = Z.T @ Z / (n - 1)
    R = 0.5 * (R + R.T)
    w, V = np.linalg.eigh(R)
    w, V = _sorted_spectrum(w, V)
    w = np.maximum(w, 0.0)
    V = np.column_stack([_orient(V[:, j]) for j in range(p)])
    share = w / w.sum()
    for a in (V, w, share):
        a.setflags(write=False)
    return PcaModel(names=names, loadings=V, eigenvalues=w, var_explained=share,
                    standardization=tuple(params), n_obs=n)


def _standardized_rows(model: PcaModel, X, names, keys):
    X, names, keys = _as_block(X, names, keys)
    idx = []
    for name in model.names:
        if name not in names:
            raise UnknownVariable(name)
        idx.append(names.index(name))
    X = X[:, idx]
    Z = np.column_stack([prm.apply(X[:, j]) for j, prm in enumerate(model.standardization)])
    return Z, keys


def scores(model: PcaModel, X, component: int = 1, names: Sequence[str] | None = None,
           keys=None) -> ScoreSeries:
    """Project standardized rows of ``X`` onto one component (1-based).

    Columns are matched to the model by name, so ``X`` may carry extra
    variables or a different column order.
    """
    if not 1 <= component <= model.p:
        raise ComponentOutOfRange(f"component {component} outside [1, {model.p}]")
    Z, keys = _standardized_rows(model, X, names, keys)
    vals = Z @ model.loadings[:, component - 1]
    vals.setflags(write=False)
    return ScoreSeries(keys=tuple(keys), component=component, values=vals)


def score_matrix(model: PcaModel, X, names=None) -> np.ndarray:
    Z, _ = _standardized_rows(model, X, names, None)
    return Z @ model.loadings


def scree_data(model: PcaModel) -> list[tuple[int, float, float, float]]:
    cum = np.cumsum(model.var_explained)
    cum[-1] = 1.0 if abs(cum[-1] - 1.0) < 1e-9 else cum[-1]
    return [(j + 1, float(model.eigenvalues[j]), float(model.var_explained[j]), float(cum[j]))
            for j in range(model.p)]


def biplot_data(model: PcaModel, X=None, per_country: bool = False, names=None,
                keys=None) -> list[BiplotRecord]:
    """Arrows for variables and, when ``X`` is given, points for rows.

    Arrows are loadings on components 1-2 scaled by the square root of the
    eigenvalue.  With ``per_country`` the row points are averaged by the
    country part of each key, in first-appearance order.
    """
    if model.p < 2:
        raise ComponentOutOfRange("biplot needs at least 2 components")
    recs = []
    root = np.sqrt(model.eigenvalues[:2])
    for i, name in enumerate(model.names):
        recs.append(BiplotRecord("arrow", name, float(model.loadings[i, 0] * root[0]),
                                 float(model.loadings[i, 1] * root[1])))
    if X is None:
        return recs
    Z, keys = _standardized_rows(model, X, names, keys)
    S = Z @ model.loadings[:, :2]
    if not per_country:
        for (c, t), (d1, d2) in zip(keys, S):
            recs.append(BiplotRecord("point", f"{c} {t}", float(d1), float(d2)))
        return recs
    groups: dict[str, list[int]] = {}
    for i, (c, _) in enumerate(keys):
        groups.setdefault(c, []).append(i)
    for c, rows in groups.items():
        m = S[rows].mean(axis=0)
        recs.append(BiplotRecord("point", c, float(m[0]), float(m[1])))
    return recs
