"""Synthetic country-year panel with planted coefficients.

Ten countries observed 2009-2023.  The response is an exact linear function
of the fifteen regressors plus Gaussian noise, so pooled OLS recovers
``PLANTED_COEFFICIENTS`` as the noise vanishes.  The four openness variables
share a latent factor, which makes them strongly collinear.
"""

from __future__ import annotations

from importlib import resources

import numpy as np

from .panel import Panel, VariableSpec

COUNTRIES = (
    "Ethiopia", "Nigeria", "DRC", "Kenya", "Tanzania",
    "Mozambique", "Uganda", "South Sudan", "Somalia", "Cote D'Ivoire",
)
YEARS = tuple(range(2009, 2024))
RESPONSE = "Net_ODA"
OPENNESS = ("CurrentAccount", "Exports", "FDI", "Imports")

PLANTED_INTERCEPT = 2000.0
PLANTED_COEFFICIENTS = {
    "GDPperCap": 0.8,
    "Corruption_Index": -300.0,
    "CPI": 40.0,
    "FDI": -15.0,
    "Exports": -50.0,
    "Imports": 5.0,
    "CurrentAccount": -2.0,
    "Macroeconomic_Mgmt": -100.0,
    "Property_Rights": 500.0,
    "Political_Stability": 300.0,
    "Voice_and_Accountability": -1500.0,
    "Democracy_Score": 30.0,
    "Poverty_Gap": 60.0,
    "Remittances": -150.0,
    "Tax_Revenue": 100.0,
}
REGRESSORS = tuple(PLANTED_COEFFICIENTS)
ADPI_COLUMNS = {"oda": RESPONSE, "gdp": "GDP_musd", "revenue": "Gov_Revenue_musd",
                "tax": "Tax_Revenue_musd"}

# (country-level mean, country-level spread, within-country sd)
_MARGINALS = {
    "GDPperCap": (1200.0, 500.0, 120.0),
    "Corruption_Index": (-0.8, 0.3, 0.12),
    "CPI": (10.0, 5.0, 4.0),
    "Macroeconomic_Mgmt": (3.2, 0.5, 0.25),
    "Property_Rights": (3.0, 0.4, 0.2),
    "Political_Stability": (-1.2, 0.6, 0.25),
    "Voice_and_Accountability": (-0.9, 0.5, 0.15),
    "Democracy_Score": (4.0, 1.5, 0.6),
    "Poverty_Gap": (15.0, 6.0, 2.5),
    "Remittances": (3.0, 2.0, 0.8),
    "Tax_Revenue": (11.0, 3.0, 1.2),
}


def make_synthetic_panel(seed: int = 2009, noise_sd: float = 150.0) -> Panel:
    rng = np.random.default_rng(seed)
    G, T = len(COUNTRIES), len(YEARS)
    n = G * T
    country_idx = np.repeat(np.arange(G), T)
    t = np.tile(np.arange(T), G) / (T - 1)

    cols: dict[str, np.ndarray] = {}
    for name, (mu, between, within) in _MARGINALS.items():
        level = mu + between * rng.standard_normal(G)
        cols[name] = level[country_idx] + within * rng.standard_normal(n)

    openness = rng.standard_normal(G)[country_idx] + 0.8 * t + 0.5 * rng.standard_normal(n)
    cols["Exports"] = 25.0 + 8.0 * openness + 1.5 * rng.standard_normal(n)
    cols["Imports"] = 35.0 + 10.0 * openness + 2.0 * rng.standard_normal(n)
    cols["FDI"] = 3.0 + 2.0 * openness + 0.8 * rng.standard_normal(n)
    cols["CurrentAccount"] = -6.0 - 3.0 * openness + 1.0 * rng.standard_normal(n)

    y = PLANTED_INTERCEPT + sum(b * cols[k] for k, b in PLANTED_COEFFICIENTS.items())
    y = y + noise_sd * rng.standard_normal(n)

    population = rng.uniform(15.0, 120.0, G)[country_idx]
    gdp = cols["GDPperCap"] * population
    tax = cols["Tax_Revenue"] / 100.0 * gdp
    revenue = tax + rng.uniform(0.03, 0.06, n) * gdp

    values = {RESPONSE: y, **{k: cols[k] for k in REGRESSORS},
              "GDP_musd": gdp, "Gov_Revenue_musd": revenue, "Tax_Revenue_musd": tax}
    variables = (
        VariableSpec(RESPONSE, "response", "million USD, current"),
        *(VariableSpec(k) for k in REGRESSORS),
        VariableSpec("GDP_musd", "raw-component", "million USD, current"),
        VariableSpec("Gov_Revenue_musd", "raw-component", "million USD, current"),
        VariableSpec("Tax_Revenue_musd", "raw-component", "million USD, current", sign_flip=True),
    )
    countries = tuple(COUNTRIES[i] for i in country_idx)
    years = tuple(YEARS[j] for j in np.tile(np.arange(T), G))
    return Panel(countries, years, variables, values)


def bundled_path(name: str = "synthetic_panel.csv"):
    """Filesystem path of a file shipped in ``panelkit/data``."""
    return resources.files("panelkit") / "data" / name
