"""Fish School Search family for constrained continuous optimization.

Provides the base school operators, the link-based niching layer, the
two-phase constrained engine with its epsilon / gradient-probe / penalty
variants, the CEC 2010 benchmark subset at 10D, and a reproducible
experiment harness with a CLI.
"""

from .constraint_handling import (
    EpsilonSchedule,
    deb_better,
    epsilon_leq,
    epsilon_less,
    initial_epsilon,
    normalized_feeding,
    penalized_fitness,
)
from .engine import EngineParams, PhaseController, RunRecord, Variant, decide_phase, run
from .gradient import ProbeConfig, forward_gradient, pick_direction, probe_move
from .niching import LinkGraph, instinctive_with_leader, link_formator, volitive_with_leader
from .problem import Evaluation, EvaluationError, Problem, clamp, evaluate, evaluate_many, relax_equalities
from .school import (
    Fish,
    School,
    StepSchedule,
    collective_instinctive,
    collective_volitive,
    feeding,
    individual_movement,
)

__version__ = "0.1.0"

__all__ = [
    "__version__",
    "Problem",
    "Evaluation",
    "EvaluationError",
    "evaluate",
    "evaluate_many",
    "relax_equalities",
    "clamp",
    "Fish",
    "School",
    "StepSchedule",
    "individual_movement",
    "feeding",
    "collective_instinctive",
    "collective_volitive",
    "LinkGraph",
    "link_formator",
    "instinctive_with_leader",
    "volitive_with_leader",
    "deb_better",
    "epsilon_less",
    "epsilon_leq",
    "EpsilonSchedule",
    "initial_epsilon",
    "penalized_fitness",
    "normalized_feeding",
    "ProbeConfig",
    "forward_gradient",
    "pick_direction",
    "probe_move",
    "Variant",
    "EngineParams",
    "PhaseController",
    "RunRecord",
    "decide_phase",
    "run",
]
