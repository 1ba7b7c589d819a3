from .errors import (
    BlowupLabError,
    ConfigError,
    DomainError,
    ExitStatus,
    NumericError,
    ProbabilityConsistencyError,
    QuadratureConvergenceError,
    ResourceGuardError,
)
from .normal_math import (
    NormalDensityParams,
    exp_times_phi,
    gaussian_exp_integral,
    log_std_normal_cdf,
    normal_pdf,
    std_normal_cdf,
)
from .barrier_crossing import (
    BridgePin,
    Horizon,
    LinearBarrier,
    Orientation,
    bm_crossing_finite,
    bm_crossing_infinite,
    bridge_crossing,
    bridge_crossing_after_pin,
    bridge_crossing_at_pin,
    bridge_crossing_before_pin,
)
from .quadrature import QuadratureResult, integrate
from .blowup_cdf import (
    CdfPoint,
    InitialConditionSpec,
    InitialKind,
    ModelParams,
    PointStatus,
    QuadratureConfig,
    Regime,
    a_of_x,
    barrier_at,
    barrier_intercept,
    barrier_sign_changes,
    barrier_slope,
    blowup_cdf,
    blowup_cdf_curve,
    conditional_crossing,
    deterministic_blowup_time,
    diffusion,
    drift,
    unconditional_cdf,
)
from .monte_carlo import (
    EXPLODED,
    EulerEnsembleResult,
    EulerTrajectory,
    ExplosionRecord,
    PathEnsembleResult,
    PathGrid,
    PathStatus,
    WienerPath,
    empirical_cdf,
    euler_osgood_ensemble,
    euler_osgood_path,
    exact_solution_path,
    exact_tau_ensemble,
    mc_blowup_cdf,
    mc_bm_crossing,
    mc_bridge_crossing,
    sample_pinned_bridge,
    sample_wiener,
    sup_discrepancy,
    wiener_endpoint_moments,
)
from .config import JobConfig, dump_config, load_job

__all__ = [
    "BlowupLabError",
    "ConfigError",
    "DomainError",
    "ExitStatus",
    "NumericError",
    "ProbabilityConsistencyError",
    "QuadratureConvergenceError",
    "ResourceGuardError",
    "NormalDensityParams",
    "exp_times_phi",
    "gaussian_exp_integral",
    "log_std_normal_cdf",
    "normal_pdf",
    "std_normal_cdf",
    "BridgePin",
    "Horizon",
    "LinearBarrier",
    "Orientation",
    "bm_crossing_finite",
    "bm_crossing_infinite",
    "bridge_crossing",
    "bridge_crossing_after_pin",
    "bridge_crossing_at_pin",
    "bridge_crossing_before_pin",
    "QuadratureResult",
    "integrate",
    "CdfPoint",
    "InitialConditionSpec",
    "InitialKind",
    "ModelParams",
    "PointStatus",
    "QuadratureConfig",
    "Regime",
    "a_of_x",
    "barrier_at",
    "barrier_intercept",
    "barrier_sign_changes",
    "barrier_slope",
    "blowup_cdf",
    "blowup_cdf_curve",
    "conditional_crossing",
    "deterministic_blowup_time",
    "diffusion",
    "drift",
    "unconditional_cdf",
    "EXPLODED",
    "EulerEnsembleResult",
    "EulerTrajectory",
    "ExplosionRecord",
    "PathEnsembleResult",
    "PathGrid",
    "PathStatus",
    "WienerPath",
    "empirical_cdf",
    "euler_osgood_ensemble",
    "euler_osgood_path",
    "exact_solution_path",
    "exact_tau_ensemble",
    "mc_blowup_cdf",
    "mc_bm_crossing",
    "mc_bridge_crossing",
    "sample_pinned_bridge",
    "sample_wiener",
    "sup_discrepancy",
    "wiener_endpoint_moments",
    "JobConfig",
    "dump_config",
    "load_job",
]
