"""Panel econometrics for country-year data."""

from .decomposition import PcaModel, ScoreSeries, biplot_data, fit_pca, scores, scree_data
from .diagnostics import CorrelationMatrix, VifTable, correlation_matrix, high_correlation_pairs, vif
from .errors import PanelkitError
from .estimators import (
    CoefficientTable,
    CvCurve,
    FeFit,
    OlsFit,
    RidgeFit,
    fe_fit,
    mark_significance,
    ols_fit,
    ridge_cv,
    ridge_fit,
)
from .indices import (
    AdpiComponents,
    AdpiSeries,
    build_adpi,
    build_external_openness,
    components_from_panel,
    rank_adpi,
)
from .panel import (
    DesignMatrix,
    Panel,
    StandardizationParams,
    VariableSpec,
    append_variable,
    extract_design,
    load_panel,
    standardize,
    write_panel,
)

__version__ = "0.1.0"

__all__ = [
    "PcaModel",
    "ScoreSeries",
    "biplot_data",
    "fit_pca",
    "scores",
    "scree_data",
    "CorrelationMatrix",
    "VifTable",
    "correlation_matrix",
    "high_correlation_pairs",
    "vif",
    "PanelkitError",
    "CoefficientTable",
    "CvCurve",
    "FeFit",
    "OlsFit",
    "RidgeFit",
    "fe_fit",
    "mark_significance",
    "ols_fit",
    "ridge_cv",
    "ridge_fit",
    "AdpiComponents",
    "AdpiSeries",
    "build_adpi",
    "build_external_openness",
    "components_from_panel",
    "rank_adpi",
    "DesignMatrix",
    "Panel",
    "StandardizationParams",
    "VariableSpec",
    "append_variable",
    "extract_design",
    "load_panel",
    "standardize",
    "write_panel",
]
