"""Distances between feedback systems on the disk: nu-metric, coprime
factorization, winding diagnostics, and closed-loop stability margins."""

from .factorization import (
    AxisRoot,
    CoprimeFactors,
    GraphSymbol,
    NotCoprime,
    SpectralFactor,
    graph_symbols,
    normalize,
    spectral_factor,
)
from .index import (
    AnnulusIndexResult,
    CurveThroughZero,
    NeedsRefinement,
    ToeplitzIndexResult,
    WindingResult,
    annulus_index,
    circle_winding,
    conjugate_index_check,
    index_product_check,
    toeplitz_index,
    winding_number,
)
from .metric import (
    AnnulusScan,
    ConditionVerdict,
    DelayNotAllowed,
    NuMetricResult,
    OperatorMap,
    RadiusDiagnostic,
    SupNormDetail,
    classical_nu_metric,
    det_handle,
    det_symbol,
    matrix_map,
    mismatch_map,
    nu_metric,
    nu_metric_at,
    sup_norm,
    sup_norm_detail,
    winding_condition,
)
from .plants import (
    CirclePoint,
    CircleSampling,
    Domain,
    DomainError,
    PoleHit,
    TransferFunction,
    UnsupportedDelay,
    ValidationError,
    circle_grid,
    disk_to_half_plane,
    eval_array,
    evaluate,
    half_plane_to_disk,
    poly_roots,
    reduce_fraction,
    sample_circle,
    to_half_plane,
    transplant,
)
from .stability import (
    ClosedLoop,
    DegeneratePair,
    MarginResult,
    RobustnessReport,
    closed_loop,
    is_stabilized,
    margin,
    robustness_report,
)

__version__ = "0.1.0"

__all__ = [
    "AnnulusIndexResult",
    "AnnulusScan",
    "AxisRoot",
    "CirclePoint",
    "CircleSampling",
    "ClosedLoop",
    "ConditionVerdict",
    "CoprimeFactors",
    "CurveThroughZero",
    "DegeneratePair",
    "DelayNotAllowed",
    "Domain",
    "DomainError",
    "GraphSymbol",
    "MarginResult",
    "NeedsRefinement",
    "NotCoprime",
    "NuMetricResult",
    "OperatorMap",
    "PoleHit",
    "RadiusDiagnostic",
    "RobustnessReport",
    "SpectralFactor",
    "SupNormDetail",
    "ToeplitzIndexResult",
    "TransferFunction",
    "UnsupportedDelay",
    "ValidationError",
    "WindingResult",
    "annulus_index",
    "circle_grid",
    "circle_winding",
    "classical_nu_metric",
    "closed_loop",
    "conjugate_index_check",
    "det_handle",
    "det_symbol",
    "disk_to_half_plane",
    "eval_array",
    "evaluate",
    "graph_symbols",
    "half_plane_to_disk",
    "index_product_check",
    "is_stabilized",
    "margin",
    "matrix_map",
    "mismatch_map",
    "normalize",
    "nu_metric",
    "nu_metric_at",
    "poly_roots",
    "reduce_fraction",
    "robustness_report",
    "sample_circle",
    "spectral_factor",
    "sup_norm",
    "sup_norm_detail",
    "to_half_plane",
    "toeplitz_index",
    "transplant",
    "winding_condition",
    "winding_number",
]
