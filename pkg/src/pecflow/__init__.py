"""Principal expectile components for daily traffic-flow profiles."""

__version__ = "0.1.0"

from .analysis import (
    EffectCurves,
    ExtremeLabel,
    effect_curves,
    label_extremes,
    membership_proportions,
    summary_table,
)
from .datagen import SynthSpec, generate
from .errors import (
    ConvergenceError,
    DegenerateDataError,
    InsufficientDataError,
    PecflowError,
    SchemaError,
)
from .expectiles import ExpectileResult, asym_norm, expectile, expectile_value, tau_variance
from .pec import (
    FitOptions,
    PecComponent,
    PecModel,
    ProfileMatrix,
    WeightPartition,
    deflate,
    fit,
    largest_eigenvector,
    pec_first,
    project,
    weighted_center,
    weighted_cov,
)
from .preprocess import (
    FlowProfile,
    RawCountSeries,
    build_matrix,
    filter_zero_runs,
    hourly_equivalent,
    load_counts_csv,
    profiles_from_series,
    smooth_profile,
)
from .splines import SplineBasis, mspline_basis, uniform_knots
