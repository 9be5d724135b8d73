"""Comparators and schedules for constrained search.

Contains the feasibility-first comparison rules (Deb), the epsilon comparison
with its decay schedule, the additive penalty objective, and the normalized
feeding rule that maps objective values onto fish weights.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .problem import Evaluation

__all__ = [
    "deb_better",
    "best_index",
    "epsilon_less",
    "epsilon_leq",
    "EpsilonSchedule",
    "initial_epsilon",
    "penalized_fitness",
    "normalized_feeding",
    "RunningExtremes",
]


def deb_better(a: Evaluation, b: Evaluation) -> bool:
    """True when ``a`` is strictly preferred over ``b`` under feasibility rules.

    Feasible beats infeasible; two feasible points compare by fitness
    (minimization); two infeasible points compare by violation. Exact ties are
    not "better".
    """
    if a.feasible and not b.feasible:
        return True
    if b.feasible and not a.feasible:
        return False
    if a.feasible:
        return a.fitness < b.fitness
    return a.violation < b.violation


def best_index(fitness: np.ndarray, violation: np.ndarray) -> int:
    """Index of the feasibility-rules best entry of a population."""
    feasible = violation == 0.0
    if feasible.any():
        idx = np.flatnonzero(feasible)
        return int(idx[np.argmin(fitness[idx])])
    return int(np.argmin(violation))


def epsilon_less(a: Evaluation, b: Evaluation, eps: float) -> bool:
    """Strict epsilon comparison of (fitness, violation) pairs.

    Compares by fitness when both violations are within ``eps`` or when the
    violations are exactly equal, and by violation otherwise. ``math.inf``
    reduces it to a plain fitness comparison, and ``0`` to the feasibility
    rules.
    """
    if (a.violation <= eps and b.violation <= eps) or a.violation == b.violation:
        return a.fitness < b.fitness
    return a.violation < b.violation


def epsilon_leq(a: Evaluation, b: Evaluation, eps: float) -> bool:
    """Non-strict variant of :func:`epsilon_less`."""
    if (a.violation <= eps and b.violation <= eps) or a.violation == b.violation:
        return a.fitness <= b.fitness
    return a.violation <= b.violation


def epsilon_less_arrays(
    f1: np.ndarray, v1: np.ndarray, f2: np.ndarray, v2: np.ndarray, eps: float
) -> np.ndarray:
    """Vectorized :func:`epsilon_less` over parallel arrays."""
    by_fitness = ((v1 <= eps) & (v2 <= eps)) | (v1 == v2)
    return np.where(by_fitness, f1 < f2, v1 < v2)


def initial_epsilon(violations: np.ndarray) -> float:
    """Starting epsilon from the initial population violations.

    Half of (mean violation + minimum violation).
    """
    violations = np.asarray(violations, dtype=float)
    if violations.size == 0:
        raise ValueError("initial_epsilon requires a nonempty violation list")
    return 0.5 * (float(violations.mean()) + float(violations.min()))


@dataclass(frozen=True)
class EpsilonSchedule:
    """Decaying tolerance: eps0 * (1 - t/cutoff)**cp until the cutoff, then 0.

    ``cp`` is max(cp_min, (-5 - log10(eps0)) / log10(0.05)); with eps0 = 0 the
    schedule is identically zero and cp falls back to cp_min.
    """

    eps0: float
    cutoff: int
    cp_min: float = 3.0
    cp: float = field(init=False)

    def __post_init__(self):
        if self.eps0 < 0.0:
            raise ValueError(f"eps0 must be non-negative, got {self.eps0}")
        if self.cutoff < 0:
            raise ValueError(f"cutoff must be non-negative, got {self.cutoff}")
        if self.cp_min <= 0.0:
            raise ValueError(f"cp_min must be positive, got {self.cp_min}")
        if self.eps0 > 0.0:
            cp = max(self.cp_min, (-5.0 - math.log10(self.eps0)) / math.log10(0.05))
        else:
            cp = self.cp_min
        object.__setattr__(self, "cp", cp)

    def value_at(self, t: int) -> float:
        if t < 0:
            raise ValueError(f"iteration must be non-negative, got {t}")
        if t >= self.cutoff or self.eps0 == 0.0:
            return 0.0
        if t == 0:
            return self.eps0
        return self.eps0 * (1.0 - t / self.cutoff) ** self.cp


def penalized_fitness(e: Evaluation) -> float:
    """Fitness plus violation; leaves feasible points unchanged."""
    return e.fitness + e.violation


def normalized_feeding(
    values: np.ndarray, running_min: float, running_max: float, w_scale: float
) -> np.ndarray:
    """Map objective values onto weights in [1, w_scale], best value highest.

    w = w_scale + (1 - w_scale) * (value - min) / (max - min), so the running
    minimum maps to w_scale and the running maximum to 1. A degenerate range
    (max == min) yields w_scale / 2 for every fish.
    """
    if running_min > running_max:
        raise ValueError("running_min must not exceed running_max")
    values = np.asarray(values, dtype=float)
    if running_max == running_min:
        return np.full(values.shape, w_scale / 2.0)
    frac = (values - running_min) / (running_max - running_min)
    return w_scale + (1.0 - w_scale) * frac


class RunningExtremes:
    """Minimum and maximum of every value seen so far."""

    def __init__(self):
        self.min = math.inf
        self.max = -math.inf

    def update(self, values: np.ndarray) -> None:
        values = np.asarray(values, dtype=float)
        if values.size:
            self.min = min(self.min, float(values.min()))
            self.max = max(self.max, float(values.max()))

    @property
    def seen_any(self) -> bool:
        return self.min <= self.max
