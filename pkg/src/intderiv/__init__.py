"""Nonlinear continuous integral-derivative observer.

Estimates the multiple integrals and derivatives of a signal from one noisy
measurement, with the stability checks needed to pick admissible gains.
"""

from .analysis import RunMetrics, compute_metrics, cumulative_simpson, cumulative_trapezoid, drift_fit
from .errors import ConfigError, IntegrationDiverged
from .observer import Diagnostic, ObserverConfig, Variant, check, make_variant, observer_rhs, validate
from .ode import StateTrace, StepScheme, simulate, step
from .scenarios import (
    PidGains,
    PlantState,
    ScenarioSpec,
    experiment1_spec,
    experiment2_spec,
    load_scenario,
    reference_noise,
    parse_scenario,
    run_drift_study,
    run_epsilon_sweep,
    run_pid_closed_loop,
    run_scenario,
    run_signal_tracking,
)
from .signals import Constant, Cosine, NoiseSpec, Polynomial, Sum, eval_signal, sample_noise
from .stability import (
    ExponentChain,
    RouthTable,
    Verdict,
    alpha_chain,
    lemma1_feasible,
    observer_char_poly,
    power_sign,
    routh_hurwitz,
)

__version__ = "0.1.0"

__all__ = [
    "ConfigError",
    "Constant",
    "Cosine",
    "Diagnostic",
    "ExponentChain",
    "IntegrationDiverged",
    "NoiseSpec",
    "ObserverConfig",
    "PidGains",
    "PlantState",
    "Polynomial",
    "RouthTable",
    "RunMetrics",
    "ScenarioSpec",
    "StateTrace",
    "StepScheme",
    "Sum",
    "Variant",
    "Verdict",
    "alpha_chain",
    "check",
    "compute_metrics",
    "cumulative_simpson",
    "cumulative_trapezoid",
    "drift_fit",
    "eval_signal",
    "experiment1_spec",
    "experiment2_spec",
    "lemma1_feasible",
    "load_scenario",
    "make_variant",
    "observer_char_poly",
    "observer_rhs",
    "parse_scenario",
    "power_sign",
    "reference_noise",
    "routh_hurwitz",
    "run_drift_study",
    "run_epsilon_sweep",
    "run_pid_closed_loop",
    "run_scenario",
    "run_signal_tracking",
    "sample_noise",
    "simulate",
    "step",
    "validate",
]
