"""LQG synthesis for a heated/cooled rod with point actuation and sensing."""

from .spectral_core import (
    ORTHONORMAL,
    PLAIN_COSINE,
    ModalVector,
    SegmentSinusoid,
    convert_basis,
    cos_sin_moment,
    evaluate,
    phi,
)
from .lqr_synthesis import (
    ROOT_QUADRATIC,
    ROOT_SERIES,
    DiagonalRiccati,
    GainField,
    RodConfig,
    gain_field,
    gamma,
    riccati_residual,
    solve_riccati_diagonal,
)
from .spectrum import (
    AreOracleResult,
    SpectralRoot,
    SpectrumResult,
    closed_loop_matching_matrix,
    error_matching_matrix,
    error_spectrum,
    evaluate_piecewise,
    find_spectrum,
    modal_closed_loop_matrix,
    newton_kleinman,
    truncated_are_oracle,
)
from .kalman_synthesis import FilterGains, KernelH, impulse_response, kernel_h, solve_filter_riccati
from .simulator import (
    SimConfig,
    Trajectory,
    decay_rate,
    measure,
    simulate_lqg,
    step_filter,
    step_plant,
)
from .presets import example_config

__all__ = [
    "ORTHONORMAL",
    "PLAIN_COSINE",
    "ROOT_QUADRATIC",
    "ROOT_SERIES",
    "AreOracleResult",
    "DiagonalRiccati",
    "FilterGains",
    "GainField",
    "KernelH",
    "ModalVector",
    "RodConfig",
    "SegmentSinusoid",
    "SimConfig",
    "SpectralRoot",
    "SpectrumResult",
    "Trajectory",
    "closed_loop_matching_matrix",
    "convert_basis",
    "cos_sin_moment",
    "decay_rate",
    "error_matching_matrix",
    "error_spectrum",
    "evaluate",
    "evaluate_piecewise",
    "example_config",
    "find_spectrum",
    "gain_field",
    "gamma",
    "impulse_response",
    "kernel_h",
    "measure",
    "modal_closed_loop_matrix",
    "newton_kleinman",
    "phi",
    "riccati_residual",
    "simulate_lqg",
    "solve_filter_riccati",
    "step_filter",
    "step_plant",
    "truncated_are_oracle",
]

__version__ = "0.1.0"
