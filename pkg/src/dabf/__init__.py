"""Distortion-aware hybrid beamforming for joint communication and sensing."""

from .channel import ChannelRealization, draw_channels, steering_vector
from .config import ConfigError, SolverOptions, SystemConfig, dbm_to_mw, mw_to_dbm, noise_from_snr
from .decomposition import analog_feasibility_check, decompose, match_hybrid_power, refine_digital
from .distortion import (
    DistortionModel,
    bussgang_gain,
    bussgang_gain_diag,
    distortion_covariance,
    power_match_scale,
    radiated_power,
    scale_to_power,
)
from .gradients import euclidean_gradient, moment_targets, penalized_objective
from .metrics import MetricsReport, evaluate_metrics, sensing_sndr, user_sindr, weighted_objective
from .solver import (
    DegeneratePA,
    InfeasibleMomentBudget,
    MoIterate,
    OuterRecord,
    PrecoderState,
    SolveDiagnostics,
    first_mo_trace,
    manifold_cg,
    optimize_full_digital,
    retract,
    riemannian_gradient,
    sphere_radius_sq,
    tangent_project,
    update_quartic_moment,
    update_sextic_moment,
)
from .baselines import mrt_precoder, pa_blind_precoder, rbf_precoder, zf_precoder
from .experiments import (
    ExperimentSpec,
    run_beam_pattern,
    run_convergence,
    run_experiment,
    run_sweep_nonlinearity,
    run_sweep_snr,
)

__all__ = [
    "ChannelRealization",
    "ConfigError",
    "DegeneratePA",
    "DistortionModel",
    "InfeasibleMomentBudget",
    "MetricsReport",
    "MoIterate",
    "OuterRecord",
    "PrecoderState",
    "SolveDiagnostics",
    "SolverOptions",
    "SystemConfig",
    "analog_feasibility_check",
    "bussgang_gain",
    "bussgang_gain_diag",
    "dbm_to_mw",
    "decompose",
    "ExperimentSpec",
    "distortion_covariance",
    "draw_channels",
    "euclidean_gradient",
    "evaluate_metrics",
    "first_mo_trace",
    "manifold_cg",
    "match_hybrid_power",
    "moment_targets",
    "mrt_precoder",
    "mw_to_dbm",
    "noise_from_snr",
    "optimize_full_digital",
    "pa_blind_precoder",
    "penalized_objective",
    "power_match_scale",
    "radiated_power",
    "rbf_precoder",
    "refine_digital",
    "retract",
    "run_beam_pattern",
    "run_convergence",
    "run_experiment",
    "run_sweep_nonlinearity",
    "run_sweep_snr",
    "riemannian_gradient",
    "scale_to_power",
    "sensing_sndr",
    "sphere_radius_sq",
    "steering_vector",
    "tangent_project",
    "update_quartic_moment",
    "update_sextic_moment",
    "user_sindr",
    "weighted_objective",
    "zf_precoder",
]

__version__ = "0.1.0"
