"""Information backflow in local dephasing channels with gapped reservoirs."""

from .asymptotics import (
    ShortTimeCoefficients,
    TailLaw,
    mu_constants,
    short_time_coeffs,
    short_time_gamma,
    tail_eval,
    tail_law,
    tail_laws_for,
)
from .backflow import (
    BackflowInterval,
    MeasureResult,
    find_negative_intervals,
    match_predictions,
    n_bar,
    non_markovianity,
    predict_intervals,
    verify_bounds,
)
from .errors import (
    DegenerateSampleError,
    DomainError,
    GapflowError,
    MomentDivergenceError,
    QuadratureError,
    SpectralDensityError,
    UnresolvedRegimeError,
)
from .phase import PhaseLimit, amplitude_phase, phase_angle, phase_limit
from .quadrature import (
    QuadratureConfig,
    TransformSample,
    coherence,
    dephasing_factor,
    dephasing_rate,
    phi_c,
    phi_s,
    transform_sample,
)
from .sd_model import (
    EdgeProfile,
    GappedSpectralDensity,
    LambdaExpansion,
    check_backflow_condition,
    lambda_expansion,
    lambda_function,
    make_figure_sd,
    make_lorentzian_gap_sd,
    make_power_law_gap_sd,
    make_tabulated_sd,
)

__version__ = "0.1.0"
