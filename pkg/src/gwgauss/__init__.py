"""Gromov-Wasserstein quantities between Gaussian measures.

Closed-form bounds and maps live in :mod:`gwgauss.closed_form`; the empirical
side (point-cloud objectives, entropic solver, brute-force oracle) lives in
:mod:`gwgauss.discrete`.
"""

from .closed_form import (
    GwBounds,
    gap_bound,
    ggw2_squared,
    ggw_map,
    gw2_proportional,
    lgw2_squared,
    reduce_degenerate,
    w2_squared,
)
from .constrained import (
    max_cross_cov_frobenius,
    max_trace_rank_one,
    min_decreasing_unit_inner_product,
    sample_feasible_boundary,
)
from .discrete import (
    CouplingPlan,
    SolveReport,
    assignment_slope_data,
    brute_force_gw,
    entropic_gw_solve,
    gw_objective,
    gw_objective_decomposed,
    gw_objective_reference,
    inner_gw_objective,
)
from .errors import (
    DegenerateInput,
    DimError,
    GwGaussError,
    InvalidMatrix,
    InvalidPlan,
    NotCentered,
    NotPositiveDefinite,
    NotPsd,
    OrientationError,
    ScaleError,
    SchemaError,
    SingularBlock,
    TooLarge,
    Unsupported,
)
from .gaussian import (
    AffineMap,
    GaussianMeasure,
    PointCloud,
    isserlis_fourth_moment,
    make_gaussian,
    pca_align,
    push_forward,
    sample,
    squared_coordinate_covariance,
)
from .linalg import PsdClass, SpectralDecomposition, psd_classify, schur_feasible, sorted_eig, sym_sqrt

__version__ = "0.1.0"
