import numpy as np
import pytest

from panelkit.panel import DesignMatrix


def whiten_recolor(n, R, rng):
    """Data whose sample correlation matrix equals ``R`` up to rounding.

    Centred Gaussian noise is orthonormalised (sample covariance exactly I)
    and then recoloured with the Cholesky factor of ``R``.
    """
    p = R.shape[0]
    E = rng.standard_normal((n, p))
    E -= E.mean(axis=0)
    Q, _ = np.linalg.qr(E)
    W = Q * np.sqrt(n - 1)
    return W @ np.linalg.cholesky(R).T


def design(X, y, names=None, countries=None, years=None):
    X = np.asarray(X, dtype=float)
    if X.ndim == 1:
        X = X[:, None]
    n = X.shape[0]
    names = names or [f"x{j + 1}" for j in range(X.shape[1])]
    if countries is None:
        keys = [("c", i) for i in range(n)]
    else:
        keys = list(zip(countries, years))
    return DesignMatrix(y=y, X=X, names=names, keys=keys, response="y")


def balanced_panel(rng, G=10, T=15, k=4, effects_scale=50.0):
    """Random balanced panel design with country effects in the response."""
    countries = np.repeat([f"C{g:02d}" for g in range(G)], T)
    years = np.tile(np.arange(2009, 2009 + T), G)
    alpha = effects_scale * rng.standard_normal(G)
    gid = np.repeat(np.arange(G), T)
    X = rng.standard_normal((G * T, k)) + rng.standard_normal((G, k))[gid]
    beta = rng.standard_normal(k)
    y = alpha[gid] + X @ beta + rng.standard_normal(G * T)
    return design(X, y, countries=countries, years=years)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
