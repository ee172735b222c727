"""Moments of cubic exponential sums over short spectral windows.

The package computes 2s-th moments of S(x) = sum_k a_k e(k x1 + k^2 x2 + k^3 x3)
over [0,1]^2 x [h0, h0 + N^(-sigma)] three independent ways (an exact
tuple-grouping engine, a brute-force reference, and oversampled quadrature),
fits the results against the envelope N^(s-sigma) + N^(2s-6), and checks the
supporting cap geometry of the moment curve (t, t^2, t^3) by exhaustive
sampling. A small CLI (moment / sweep / geometry) persists records, tables,
and run manifests.
"""

from .errors import BudgetError, SpecValidationError
from .expsums import (
    ExpSumSpec,
    FreqInterval,
    Point3,
    band_partition,
    eval_grid,
    eval_partial_sum,
    eval_sum,
    grid_axes,
    phase_row,
)
from .geometry import (
    AffineMap3,
    CanonicalBlock,
    CanonicalConeReport,
    ComparabilityReport,
    ConeReport,
    DecouplingParams,
    OverlapReport,
    ParamBox,
    PartitionReport,
    RescaleReport,
    SmallCap,
    cap_index_of,
    check_cap_frame_comparability,
    check_cone_containment_geo2,
    check_cone_containment_geo3,
    check_overlap_geo1,
    check_partition,
    check_rescale,
    cone_angle,
    cone_map_T,
    cone_radius,
    curve_point,
    default_geo1_scales,
    default_geo2_scales,
    default_geo3_scales,
    defect2,
    defect3,
    frame_coordinates,
    frame_matrix,
    frenet_frame,
    gamma_tilde,
    neighborhood_membership,
    rescale_map_L,
    sample_block,
    sample_neighborhood,
)
from .moments import (
    MomentResult,
    TupleGroupTable,
    build_group_table,
    interval_kernel,
    moment_brute,
    moment_exact,
    vinogradov_count,
)
from .quadrature import (
    PeriodicityReport,
    QuadratureGrid,
    box_power_integral,
    local_moment_quadrature,
    moment_quadrature,
    periodicity_identity_check,
    quadrature_cross_check,
    separation_floor,
    standard_frequency_set,
)
from .records import (
    OutputLayout,
    RunManifest,
    format_number,
    new_manifest,
    write_csv,
    write_json,
)
from .sharpness import (
    COEFF_FAMILIES,
    BroadNarrowReport,
    EnvelopeReport,
    ExponentFit,
    InterferenceReport,
    SweepConfig,
    SweepRow,
    broad_narrow_check,
    coeffs_for,
    constant_coeffs,
    exponent_fit,
    interference_lower_bound,
    random_phase_coeffs,
    random_sign_coeffs,
    verify_maincor,
    verify_mainexp_bound,
)

__all__ = [
    "AffineMap3",
    "BroadNarrowReport",
    "BudgetError",
    "CanonicalBlock",
    "CanonicalConeReport",
    "COEFF_FAMILIES",
    "ComparabilityReport",
    "ConeReport",
    "DecouplingParams",
    "EnvelopeReport",
    "ExponentFit",
    "ExpSumSpec",
    "FreqInterval",
    "InterferenceReport",
    "MomentResult",
    "OutputLayout",
    "OverlapReport",
    "ParamBox",
    "PartitionReport",
    "PeriodicityReport",
    "Point3",
    "QuadratureGrid",
    "RescaleReport",
    "RunManifest",
    "SmallCap",
    "SpecValidationError",
    "SweepConfig",
    "SweepRow",
    "TupleGroupTable",
    "band_partition",
    "box_power_integral",
    "broad_narrow_check",
    "build_group_table",
    "cap_index_of",
    "check_cap_frame_comparability",
    "check_cone_containment_geo2",
    "check_cone_containment_geo3",
    "check_overlap_geo1",
    "check_partition",
    "check_rescale",
    "coeffs_for",
    "cone_angle",
    "cone_map_T",
    "cone_radius",
    "constant_coeffs",
    "curve_point",
    "default_geo1_scales",
    "default_geo2_scales",
    "default_geo3_scales",
    "defect2",
    "defect3",
    "eval_grid",
    "eval_partial_sum",
    "eval_sum",
    "exponent_fit",
    "format_number",
    "frame_coordinates",
    "frame_matrix",
    "frenet_frame",
    "gamma_tilde",
    "grid_axes",
    "interference_lower_bound",
    "interval_kernel",
    "local_moment_quadrature",
    "moment_brute",
    "moment_exact",
    "moment_quadrature",
    "neighborhood_membership",
    "new_manifest",
    "periodicity_identity_check",
    "phase_row",
    "quadrature_cross_check",
    "random_phase_coeffs",
    "random_sign_coeffs",
    "rescale_map_L",
    "sample_block",
    "sample_neighborhood",
    "separation_floor",
    "standard_frequency_set",
    "vinogradov_count",
    "verify_maincor",
    "verify_mainexp_bound",
    "write_csv",
    "write_json",
]
