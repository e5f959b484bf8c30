"""Spectator-qubit sensing and control of random-telegraph dephasing.

A data qubit dephases under a random telegraph process it cannot escape; a
spectator qubit coupled to the same noise is measured repeatedly, and the
record is folded by complex Bayesian transfer maps into a two-component
A-vector from which adaptive strategies choose the next measurement and the
final corrective phase.  The package provides the noise model and its
characteristic-matrix propagator, the Bayesian filter, greedy and
constant-angle control strategies, closed-form asymptotics (decay rates and
the optimal cap angle), and two independent evaluators of the controlled
coherence: exact record enumeration with sound pruning bounds, and
reproducible parallel Monte Carlo.
"""

from .telegraph import (
    NoiseParams,
    RtpTrajectory,
    char_matrix,
    integrate,
    rate_matrix,
    sample_trajectory,
    steady_state,
)
from .bayes import (
    ControlPhase,
    MeasurementSetting,
    SufficientStats,
    apply_map,
    bayes_map,
    control_and_coherence,
    free_evolve,
    likelihood,
    stationary_avector,
    stats,
    wrap_angle,
)
from .controllers import (
    GreedySearch,
    StrategyConfig,
    StrategyKind,
    greedy_objective,
    next_setting,
    next_setting_greedy,
    next_setting_moaaar,
    one_step_loss,
)
from .analysis import (
    DegenerateDominanceError,
    FixedPointPair,
    RateResult,
    ergodic_rate,
    fit_rate,
    fixed_point,
    h_theta,
    nc_coherence,
    nc_rate,
    null_fixed_points,
    optimize_theta,
    scale_rate,
)
from .engine import (
    EndRule,
    PortraitPoint,
    Schedule,
    phase_portrait,
    run_exact_tree,
    run_monte_carlo,
)

__version__ = "0.1.0"

__all__ = [
    "NoiseParams",
    "RtpTrajectory",
    "char_matrix",
    "integrate",
    "rate_matrix",
    "sample_trajectory",
    "steady_state",
    "ControlPhase",
    "MeasurementSetting",
    "SufficientStats",
    "apply_map",
    "bayes_map",
    "control_and_coherence",
    "free_evolve",
    "likelihood",
    "stationary_avector",
    "stats",
    "wrap_angle",
    "GreedySearch",
    "StrategyConfig",
    "StrategyKind",
    "greedy_objective",
    "next_setting",
    "next_setting_greedy",
    "next_setting_moaaar",
    "one_step_loss",
    "DegenerateDominanceError",
    "FixedPointPair",
    "RateResult",
    "ergodic_rate",
    "fit_rate",
    "fixed_point",
    "h_theta",
    "nc_coherence",
    "nc_rate",
    "null_fixed_points",
    "optimize_theta",
    "scale_rate",
    "EndRule",
    "PortraitPoint",
    "Schedule",
    "phase_portrait",
    "run_exact_tree",
    "run_monte_carlo",
    "__version__",
]
