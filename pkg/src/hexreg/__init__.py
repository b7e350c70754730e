"""Integral-action regulation of saturated single-input bilinear systems.

Library + CLI for a family of anti-windup regulators built around a
forwarding Lyapunov design, with an observer-based output-feedback variant
and a certified pure-integral variant, instantiated on a counter-current
heat-exchanger compartment model.
"""

from .analysis import (
    AssumptionReport,
    assumption_report,
    check_assumption1,
    check_assumption3,
    integral_gain_stability_limit,
    linearization_matrix,
    lyapunov_monitors,
    max_monotone_violation,
    observer_monitor_constants,
    saturation_gap,
    spectral_abscissa,
)
from .controllers import (
    FORWARDING,
    INTEGRAL_ONLY,
    OUTPUT_FEEDBACK,
    PI,
    ControllerRuntime,
    forwarding_phi,
    integral_only_phi,
    output_feedback_phi,
    pi_phi,
)
from .design import (
    DesignArtifacts,
    ObserverDesign,
    forwarding_design,
    gain_rank_obstruction,
    hex_analytic_P,
    integral_gain_bound,
    integral_only_design,
    load_artifacts,
    lyapunov_decay_margin,
    observer_design,
    pi_shift_sup,
    save_artifacts,
    sign_dc_gain,
    solve_lyapunov,
)
from .errors import (
    GainAboveBoundWarning,
    HexRegError,
    InfeasibleError,
    MissingObserverStateError,
    NonFiniteError,
    NotHurwitzError,
    NotObservableError,
    ReferenceUnreachableError,
    SchedulesDifferError,
    SingularMatrixError,
    ZeroDCGainError,
)
from .model import (
    BilinearSystem,
    HexParams,
    block_average_sensors,
    build_hex,
    dynamics,
    load_system,
    saturate,
    save_system,
)
from .sim import (
    SimResult,
    SimScenario,
    compare_pi,
    load_scenario,
    run,
    run_metrics,
    scenario_from_dict,
    write_csv,
)
from .steady_state import (
    Equilibrium,
    ReachableSet,
    equilibrium_at,
    invert_reference,
    pi_map,
    reachable_set,
)

__version__ = "0.1.0"

__all__ = [
    "AssumptionReport",
    "BilinearSystem",
    "ControllerRuntime",
    "DesignArtifacts",
    "Equilibrium",
    "FORWARDING",
    "GainAboveBoundWarning",
    "HexParams",
    "HexRegError",
    "INTEGRAL_ONLY",
    "InfeasibleError",
    "MissingObserverStateError",
    "NonFiniteError",
    "NotHurwitzError",
    "NotObservableError",
    "OUTPUT_FEEDBACK",
    "ObserverDesign",
    "PI",
    "ReachableSet",
    "ReferenceUnreachableError",
    "SchedulesDifferError",
    "SimResult",
    "SimScenario",
    "SingularMatrixError",
    "ZeroDCGainError",
    "assumption_report",
    "block_average_sensors",
    "build_hex",
    "check_assumption1",
    "check_assumption3",
    "compare_pi",
    "dynamics",
    "equilibrium_at",
    "forwarding_design",
    "forwarding_phi",
    "hex_analytic_P",
    "integral_gain_bound",
    "integral_gain_stability_limit",
    "integral_only_design",
    "integral_only_phi",
    "invert_reference",
    "linearization_matrix",
    "load_artifacts",
    "load_scenario",
    "load_system",
    "lyapunov_decay_margin",
    "lyapunov_monitors",
    "max_monotone_violation",
    "gain_rank_obstruction",
    "observer_design",
    "observer_monitor_constants",
    "output_feedback_phi",
    "pi_map",
    "pi_phi",
    "pi_shift_sup",
    "reachable_set",
    "run",
    "run_metrics",
    "saturate",
    "saturation_gap",
    "save_artifacts",
    "save_system",
    "scenario_from_dict",
    "sign_dc_gain",
    "solve_lyapunov",
    "spectral_abscissa",
    "write_csv",
]
