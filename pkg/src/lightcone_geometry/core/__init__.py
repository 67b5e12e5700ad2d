"""Computational core: pseudo-Euclidean algebra, jets, charts, frames, detectors, pairs."""

from .blaschke import (
    PairClassification,
    PairData,
    PairLabel,
    build_pair,
    classify,
    darboux_integrate,
    darboux_symmetry_residual,
    dual_pair,
    trivial_from_point,
)
from .catalog import SurfaceChart, catalog, fundamental_forms, list_catalog, parse_chart, validate_chart
from .detectors import (
    DetectorReport,
    adapt_coordinates,
    detect,
    isothermic_test,
    swillmore_test,
    willmore_energy,
    willmore_residual,
)
from .frame import (
    ConformalFrame,
    canonical_lift,
    frame_at,
    integrability_residuals,
    normalization_residuals,
    reparametrize,
    structure_residuals,
)
from .grid import Grid
from .thomsen import ThomsenResult, recover_spaceform_chart, thomsen_pipeline

__all__ = [
    "ConformalFrame",
    "DetectorReport",
    "Grid",
    "PairClassification",
    "PairData",
    "PairLabel",
    "SurfaceChart",
    "ThomsenResult",
    "adapt_coordinates",
    "build_pair",
    "canonical_lift",
    "catalog",
    "classify",
    "darboux_integrate",
    "darboux_symmetry_residual",
    "detect",
    "dual_pair",
    "frame_at",
    "fundamental_forms",
    "integrability_residuals",
    "isothermic_test",
    "list_catalog",
    "normalization_residuals",
    "parse_chart",
    "recover_spaceform_chart",
    "reparametrize",
    "structure_residuals",
    "swillmore_test",
    "thomsen_pipeline",
    "trivial_from_point",
    "validate_chart",
    "willmore_energy",
    "willmore_residual",
]
