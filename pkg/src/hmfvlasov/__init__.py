"""Formal stability and kinetic simulation of stationary states of the HMF model."""

from .elliptic import EllipticPair, complete_elliptic, ek_ratio, elliptic_derivatives, ellipe, ellipk
from .estimators import NormTransformer, StabilityEstimator, VlasovSimulator
from .exceptions import (
    CFLWarning,
    ConfigError,
    ConservationError,
    ConvergenceError,
    DivergenceError,
    DomainError,
    QuadratureError,
    SingularIntegrandError,
)
from .grid import PhaseGrid
from .neighborhood import (
    MuPartition,
    MuRegion,
    SweepProtocol,
    SweepResult,
    delta_I_decomposition,
    inhomogeneous_robustness,
    k_range_check,
    mu2_area,
    scan_phase_diagram,
)
from .norms import NormFamily, NormSpec, hs_norm, inv_ua_lb_norm, lp_norm, norm, ua_weight, w1p_norm
from .pendulum import Region, avg_cos, avg_cos_libration, avg_cos_rotation, classify, modulus, orbit_average
from .stability import (
    MomentumProfile,
    StabilityReport,
    StateKind,
    StationarySpec,
    Verdict,
    build_bump_g,
    build_destabilizer_f1,
    build_initial_condition,
    critical_delta,
    solve_selfconsistent_M,
    stability_functional,
    stability_homogeneous,
    stability_inhomogeneous,
)
from .vlasov import SimConfig, TimeSeries, magnetization, run, step

__version__ = "0.1.0"
