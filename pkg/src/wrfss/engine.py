"""Two-phase constrained search engine and its variant assembly.

Each iteration re-evaluates the school, decides the active phase from the
feasible proportion (phase 1 minimizes the violation measure, phase 2 the
fitness), runs the individual movement under the variant's acceptance rule,
feeds weights by normalizing the active objective against its running
extremes, then applies the leader-aware instinctive and volitive movements
around the link structure. Step sizes get a one-off boost at every phase 1
to phase 2 transition.

Variants share one code path so that degenerate parameter choices reproduce
the base behavior exactly (same random stream, same decisions): the epsilon
variant only swaps the acceptance comparison, the gradient variant only adds
a probability-gated probe, and the penalty variant only changes the phase-2
objective to fitness + violation.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .constraint_handling import (
    EpsilonSchedule,
    RunningExtremes,
    best_index,
    epsilon_less_arrays,
    initial_epsilon,
    normalized_feeding,
)
from .gradient import ProbeConfig
from .niching import (
    LinkGraph,
    leader_instinctive_step,
    leader_volitive_step,
    link_formator,
)
from .problem import EvaluationError, Problem, evaluate_many
from .school import School, StepSchedule

__all__ = [
    "VARIANT_KINDS",
    "Variant",
    "EngineParams",
    "PhaseController",
    "RunRecord",
    "decide_phase",
    "run",
]

VARIANT_KINDS = ("base", "epsilon", "gradient", "penalty")


@dataclass(frozen=True)
class Variant:
    """Which constraint-handling mechanism runs on top of the base engine.

    ``epsilon0`` fixes the starting tolerance of the epsilon variant; None
    derives it from the initial school violations. ``tc_fraction`` is the
    fraction of the iteration budget after which the tolerance is zero.
    """

    kind: str = "base"
    tc_fraction: float = 0.6
    cp_min: float = 3.0
    epsilon0: float | None = None
    probe: ProbeConfig | None = None

    def __post_init__(self):
        if self.kind not in VARIANT_KINDS:
            raise ValueError(f"variant kind must be one of {VARIANT_KINDS}, got {self.kind!r}")
        if self.kind == "epsilon":
            if not 0.0 < self.tc_fraction <= 1.0:
                raise ValueError(f"tc_fraction must lie in (0, 1], got {self.tc_fraction}")
            if self.epsilon0 is not None and self.epsilon0 < 0.0:
                raise ValueError(f"epsilon0 must be non-negative, got {self.epsilon0}")
        if self.kind == "gradient" and self.probe is None:
            object.__setattr__(self, "probe", ProbeConfig(k_directions=200, p_g=0.1))


@dataclass(frozen=True)
class EngineParams:
    """Engine parameters; step sizes are fractions of the per-dimension range."""

    n_fish: int = 30
    iterations: int = 5000
    sigma: float = 0.05
    tau: float = 0.01
    w_scale: float = 5000.0
    step_ind_initial: float = 0.10
    step_ind_final: float = 0.0001
    step_vol_initial: float = 0.20
    step_vol_final: float = 0.0002
    sar_alpha0: float = 0.8
    sar_decay: float = 0.007

    def __post_init__(self):
        if self.n_fish < 1:
            raise ValueError(f"n_fish must be >= 1, got {self.n_fish}")
        if self.iterations < 0:
            raise ValueError(f"iterations must be >= 0, got {self.iterations}")
        if not 0.0 <= self.sigma <= 1.0:
            raise ValueError(f"sigma must lie in [0, 1], got {self.sigma}")
        if self.tau < 0.0:
            raise ValueError(f"tau must be non-negative, got {self.tau}")
        if self.w_scale <= 1.0:
            raise ValueError(f"w_scale must exceed 1, got {self.w_scale}")


def decide_phase(violations: np.ndarray, sigma: float) -> int:
    """Phase 2 when the feasible proportion reaches ``sigma``, else phase 1."""
    feasible_fraction = float((np.asarray(violations) == 0.0).mean())
    return 2 if feasible_fraction >= sigma else 1


@dataclass
class PhaseController:
    """Tracks the active phase and applies the step boost once per 1->2 switch."""

    sigma: float
    tau: float
    phase: int = 1

    def step(self, violations: np.ndarray, schedule: StepSchedule, t: int) -> int:
        new_phase = decide_phase(violations, self.sigma)
        if new_phase == 2 and self.phase == 1:
            schedule.boost(self.tau, t)
        self.phase = new_phase
        return new_phase


@dataclass
class RunRecord:
    """Per-iteration best-fish trace plus final statistics for one run.

    The trace has one row per iteration index 0..iterations, where row 0 is
    the initial school. The recorded best is the historical best under the
    feasibility rules, so the violation column is non-increasing and, once
    zero, the fitness column is non-increasing too.
    """

    seed: int
    variant_kind: str
    n_fish: int
    iterations: int
    trace_iteration: np.ndarray
    trace_best_fitness: np.ndarray
    trace_best_violation: np.ndarray
    trace_phase: np.ndarray
    trace_feasible_count: np.ndarray
    best_fitness: float
    best_violation: float
    best_position: np.ndarray
    eval_count: int
    probe_count: int
    wall_time: float
    aborted: bool = False
    error: str = ""

    @property
    def best_feasible(self) -> bool:
        return self.best_violation == 0.0


class _BestTracker:
    """Historical best fish under the feasibility rules."""

    def __init__(self):
        self.fitness = math.inf
        self.violation = math.inf
        self.position: np.ndarray | None = None

    def merge_school(self, fitness: np.ndarray, violation: np.ndarray, positions: np.ndarray):
        i = best_index(fitness, violation)
        f, v = float(fitness[i]), float(violation[i])
        cur_feas = self.violation == 0.0
        new_feas = v == 0.0
        better = (
            (new_feas and not cur_feas)
            or (new_feas and cur_feas and f < self.fitness)
            or (not new_feas and not cur_feas and v < self.violation)
        )
        if self.position is None or better:
            self.fitness, self.violation = f, v
            self.position = positions[i].copy()


def _active_objective(
    fitness: np.ndarray, violation: np.ndarray, phase: int, variant: Variant
) -> np.ndarray:
    if phase == 1:
        return violation
    if variant.kind == "penalty":
        return fitness + violation
    return fitness


def run(
    problem: Problem,
    variant: Variant = Variant(),
    params: EngineParams = EngineParams(),
    seed: int = 0,
    observer: Callable[[int, School, LinkGraph], None] | None = None,
) -> RunRecord:
    """Execute one seeded run and return its record.

    A fixed seed makes the whole run a deterministic function of the
    configuration. ``observer``, when given, is called after every iteration
    with (iteration, school, links) read-only views. An evaluation error
    aborts the run and is reported on the record instead of raising.
    """
    t_start = time.perf_counter()
    rng = np.random.default_rng(seed)
    n, d = params.n_fish, problem.dimension
    lower, upper, width = problem.lower, problem.upper, problem.range_width

    schedule = StepSchedule(
        params.step_ind_initial,
        params.step_ind_final,
        params.step_vol_initial,
        params.step_vol_final,
        horizon=params.iterations,
    )
    controller = PhaseController(sigma=params.sigma, tau=params.tau)
    tracker = _BestTracker()
    extremes = {1: RunningExtremes(), 2: RunningExtremes()}
    probe = variant.probe
    e_vec = probe.resolve_perturbation(problem) if probe is not None else None

    trace_it: list[int] = []
    trace_f: list[float] = []
    trace_v: list[float] = []
    trace_phase: list[int] = []
    trace_feas: list[int] = []
    eval_count = 0
    probe_count = 0
    aborted = False
    error = ""

    positions = lower + rng.random((n, d)) * width
    try:
        fitness, violation = evaluate_many(problem, positions)
        eval_count += n
    except EvaluationError as exc:
        return RunRecord(
            seed=seed,
            variant_kind=variant.kind,
            n_fish=n,
            iterations=params.iterations,
            trace_iteration=np.array([], dtype=np.int64),
            trace_best_fitness=np.array([]),
            trace_best_violation=np.array([]),
            trace_phase=np.array([], dtype=np.int64),
            trace_feasible_count=np.array([], dtype=np.int64),
            best_fitness=math.nan,
            best_violation=math.nan,
            best_position=np.full(d, math.nan),
            eval_count=eval_count,
            probe_count=0,
            wall_time=time.perf_counter() - t_start,
            aborted=True,
            error=str(exc),
        )

    school = School.initial(positions, fitness, violation, params.w_scale)
    tracker.merge_school(school.fitness, school.violation, school.positions)
    links = LinkGraph.empty(n)

    eps_schedule = None
    if variant.kind == "epsilon":
        eps0 = variant.epsilon0
        if eps0 is None:
            eps0 = initial_epsilon(school.violation)
        cutoff = int(round(variant.tc_fraction * params.iterations))
        eps_schedule = EpsilonSchedule(eps0=eps0, cutoff=cutoff, cp_min=variant.cp_min)

    trace_it.append(0)
    trace_f.append(tracker.fitness)
    trace_v.append(tracker.violation)
    trace_phase.append(decide_phase(school.violation, params.sigma))
    trace_feas.append(int((school.violation == 0.0).sum()))

    use_probe = variant.kind == "gradient" and probe is not None and probe.p_g > 0.0

    try:
        for t in range(params.iterations):
            # Start-of-iteration evaluation of the current positions (the
            # collective movements of the previous iteration are unscored
            # until here).
            school.fitness, school.violation = evaluate_many(problem, school.positions)
            eval_count += n
            tracker.merge_school(school.fitness, school.violation, school.positions)

            phase = controller.step(school.violation, schedule, t)
            step_ind_frac, step_vol_frac = schedule.at(t)
            step_ind = step_ind_frac * width
            step_vol = step_vol_frac * width
            alpha = params.sar_alpha0 * math.exp(-params.sar_decay * t)
            eps = eps_schedule.value_at(t) if eps_schedule is not None else 0.0
            active = _active_objective(school.fitness, school.violation, phase, variant)

            # Individual movement: candidates, then acceptance.
            if use_probe:
                gate = rng.random(n)
                candidates = np.empty_like(school.positions)
                for i in range(n):
                    x = school.positions[i]
                    if gate[i] < probe.p_g:
                        pts = np.concatenate([x[None, :], x[None, :] + np.diag(e_vec)])
                        _, probe_viol = evaluate_many(problem, pts)
                        eval_count += d + 1
                        probe_count += 1
                        grad = (probe_viol[1:] - probe_viol[0]) / e_vec
                        u = rng.normal(size=(probe.k_directions, d))
                        u /= np.linalg.norm(u, axis=1, keepdims=True)
                        derivs = u @ grad
                        j = int(np.argmin(derivs)) if phase == 1 else int(np.argmin(np.abs(derivs)))
                        magnitude = rng.random()
                        candidates[i] = x + step_ind * magnitude * u[j]
                    else:
                        candidates[i] = x + rng.uniform(-1.0, 1.0, d) * step_ind
                np.clip(candidates, lower, upper, out=candidates)
            else:
                offsets = rng.uniform(-1.0, 1.0, (n, d))
                candidates = np.clip(school.positions + offsets * step_ind, lower, upper)

            cand_fitness, cand_violation = evaluate_many(problem, candidates)
            eval_count += n

            cand_active = _active_objective(cand_fitness, cand_violation, phase, variant)
            if variant.kind == "epsilon":
                better = epsilon_less_arrays(
                    cand_fitness, cand_violation, school.fitness, school.violation, eps
                )
            else:
                better = cand_active < active
            sar = rng.random(n)
            accept = better | (sar < alpha)

            school.delta_f = np.where(accept, active - cand_active, 0.0)
            school.delta_x = np.where(accept[:, None], candidates - school.positions, 0.0)
            school.positions = np.where(accept[:, None], candidates, school.positions)
            school.fitness = np.where(accept, cand_fitness, school.fitness)
            school.violation = np.where(accept, cand_violation, school.violation)
            tracker.merge_school(school.fitness, school.violation, school.positions)

            # Feeding: normalize the active objective against its running extremes.
            active = _active_objective(school.fitness, school.violation, phase, variant)
            extremes[phase].update(active)
            school.weights = normalized_feeding(
                active, extremes[phase].min, extremes[phase].max, params.w_scale
            )
            total_weight = school.total_weight

            # Collective-instinctive movement (leader-aware, ramped by rho),
            # reading the links formed in the previous iteration.
            rho = t / params.iterations
            has_leader = links.leader >= 0
            num = school.delta_x * school.delta_f[:, None]
            den = school.delta_f.copy()
            if has_leader.any():
                li = links.leader[has_leader]
                num[has_leader] += school.delta_x[li] * school.delta_f[li, None]
                den[has_leader] += school.delta_f[li]
            drift = np.zeros_like(school.positions)
            np.divide(num, den[:, None], out=drift, where=den[:, None] != 0.0)
            school.positions = np.clip(school.positions + rho * drift, lower, upper)

            # Link maintenance with the fresh weights.
            links = link_formator(school.weights, links, rng)

            # Collective-volitive movement around per-fish pair barycenters.
            increased = total_weight > school.prev_total_weight
            school.prev_total_weight = total_weight
            r = rng.random((n, d))
            followers = np.flatnonzero(links.leader >= 0)
            if followers.size:
                li = links.leader[followers]
                wf = school.weights[followers]
                wl = school.weights[li]
                pair_b = (
                    school.positions[followers] * wf[:, None]
                    + school.positions[li] * wl[:, None]
                ) / (wf + wl)[:, None]
                diff = school.positions[followers] - pair_b
                dist = np.linalg.norm(diff, axis=1)
                moving = dist > 0.0
                if moving.any():
                    tgt = followers[moving]
                    sign = -1.0 if increased else 1.0
                    step = sign * step_vol * r[tgt] * diff[moving] / dist[moving, None]
                    school.positions[tgt] = np.clip(
                        school.positions[tgt] + step, lower, upper
                    )

            trace_it.append(t + 1)
            trace_f.append(tracker.fitness)
            trace_v.append(tracker.violation)
            trace_phase.append(phase)
            trace_feas.append(int((school.violation == 0.0).sum()))
            if observer is not None:
                observer(t, school, links)
    except EvaluationError as exc:
        aborted = True
        error = str(exc)

    return RunRecord(
        seed=seed,
        variant_kind=variant.kind,
        n_fish=n,
        iterations=params.iterations,
        trace_iteration=np.array(trace_it, dtype=np.int64),
        trace_best_fitness=np.array(trace_f),
        trace_best_violation=np.array(trace_v),
        trace_phase=np.array(trace_phase, dtype=np.int64),
        trace_feasible_count=np.array(trace_feas, dtype=np.int64),
        best_fitness=tracker.fitness,
        best_violation=tracker.violation,
        best_position=tracker.position.copy() if tracker.position is not None else np.full(d, math.nan),
        eval_count=eval_count,
        probe_count=probe_count,
        wall_time=time.perf_counter() - t_start,
        aborted=aborted,
        error=error,
    )
