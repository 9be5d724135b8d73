"""Batch runner, presets, statistics and report files.

An experiment is a problem/variant pair plus every engine parameter, executed
over ``run_count`` independent seeded runs (seed = base_seed + run index).
Reports are a per-run convergence trace CSV, a human-readable and a
machine-readable summary including published reference values, and a manifest
from which the whole batch can be reproduced byte-for-byte.
"""

from __future__ import annotations

import configparser
import dataclasses
import json
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import cec2010
from .engine import EngineParams, RunRecord, Variant, run
from .gradient import ProbeConfig
from .problem import Problem

__all__ = [
    "VARIANT_NAMES",
    "ExperimentConfig",
    "SummaryStats",
    "paper_preset",
    "list_presets",
    "prepare_output_dir",
    "run_single",
    "run_batch",
    "emit_reports",
    "config_from_manifest",
    "read_config_file",
]

# CLI/report variant names mapped onto engine variant kinds.
VARIANT_NAMES = {
    "wrfss": "base",
    "wrfsse": "epsilon",
    "wrfssg": "gradient",
    "wrfssp": "penalty",
}

PAPER_ITERATIONS = 80000
DESK_ITERATIONS = 5000

# Per-problem preset knobs: epsilon decay sharpness and probe direction count
# differ between the loosely and the heavily constrained problems.
_PRESET_CP_MIN = {"C01": 3.0, "C07": 3.0, "C08": 3.0, "C03": 8.0, "C04": 8.0, "C06": 8.0, "C09": 8.0}
_PRESET_K = {"C01": 200, "C07": 200, "C08": 200, "C03": 50, "C04": 50, "C06": 50, "C09": 50}
# (sigma, tau) per variant.
_PRESET_SIGMA_TAU = {
    "wrfss": (0.05, 0.01),
    "wrfsse": (0.05, 0.30),
    "wrfssg": (0.50, 0.01),
    "wrfssp": (0.05, 0.30),
}


@dataclass(frozen=True)
class ExperimentConfig:
    """Everything needed to reproduce a batch; all fields are primitives."""

    problem_id: str
    variant: str
    run_count: int = 30
    base_seed: int = 1000
    output_dir: str = "out"
    data_dir: str | None = None
    data_source: str | None = None
    delta: float = 1e-4
    violation_exponent: float = 1.0
    n_fish: int = 30
    iterations: int = DESK_ITERATIONS
    sigma: float = 0.05
    tau: float = 0.01
    w_scale: float = 5000.0
    step_ind_initial: float = 0.10
    step_ind_final: float = 0.0001
    step_vol_initial: float = 0.20
    step_vol_final: float = 0.0002
    sar_alpha0: float = 0.8
    sar_decay: float = 0.007
    tc_fraction: float = 0.60
    cp_min: float = 3.0
    epsilon0: float | None = None
    p_g: float = 0.10
    k_directions: int = 200
    perturbation: float | None = None

    def __post_init__(self):
        if self.variant not in VARIANT_NAMES:
            raise ValueError(
                f"variant must be one of {sorted(VARIANT_NAMES)}, got {self.variant!r}"
            )
        if self.run_count < 1:
            raise ValueError(f"run_count must be >= 1, got {self.run_count}")

    def engine_params(self) -> EngineParams:
        return EngineParams(
            n_fish=self.n_fish,
            iterations=self.iterations,
            sigma=self.sigma,
            tau=self.tau,
            w_scale=self.w_scale,
            step_ind_initial=self.step_ind_initial,
            step_ind_final=self.step_ind_final,
            step_vol_initial=self.step_vol_initial,
            step_vol_final=self.step_vol_final,
            sar_alpha0=self.sar_alpha0,
            sar_decay=self.sar_decay,
        )

    def engine_variant(self) -> Variant:
        kind = VARIANT_NAMES[self.variant]
        if kind == "epsilon":
            return Variant(
                kind=kind,
                tc_fraction=self.tc_fraction,
                cp_min=self.cp_min,
                epsilon0=self.epsilon0,
            )
        if kind == "gradient":
            return Variant(
                kind=kind,
                probe=ProbeConfig(
                    k_directions=self.k_directions,
                    p_g=self.p_g,
                    perturbation=self.perturbation,
                ),
            )
        return Variant(kind=kind)

    def load_problem(self) -> Problem:
        bench = cec2010.load_problem(
            self.problem_id,
            data_dir=self.data_dir,
            source=self.data_source,
            delta=self.delta,
            violation_exponent=self.violation_exponent,
        )
        return bench.problem

    def resolved_data_source(self) -> str:
        bench = cec2010.load_problem(
            self.problem_id, data_dir=self.data_dir, source=self.data_source
        )
        return bench.data_source


def paper_preset(
    problem_id: str,
    variant: str,
    desk: bool = False,
    run_count: int = 30,
    base_seed: int = 1000,
    output_dir: str = "out",
) -> ExperimentConfig:
    """Published protocol parameters for one problem/variant pair.

    ``desk`` scales the iteration budget from 80000 down to 5000 so a batch
    finishes in minutes.
    """
    if variant not in VARIANT_NAMES:
        raise ValueError(f"variant must be one of {sorted(VARIANT_NAMES)}, got {variant!r}")
    if problem_id not in cec2010.PROBLEM_IDS:
        raise ValueError(
            f"unknown problem id {problem_id!r}; choose one of {cec2010.PROBLEM_IDS}"
        )
    sigma, tau = _PRESET_SIGMA_TAU[variant]
    return ExperimentConfig(
        problem_id=problem_id,
        variant=variant,
        run_count=run_count,
        base_seed=base_seed,
        output_dir=output_dir,
        iterations=DESK_ITERATIONS if desk else PAPER_ITERATIONS,
        sigma=sigma,
        tau=tau,
        tc_fraction=0.60,
        cp_min=_PRESET_CP_MIN[problem_id],
        p_g=0.10,
        k_directions=_PRESET_K[problem_id],
    )


def list_presets(desk: bool = False) -> list[ExperimentConfig]:
    """All problem/variant preset combinations."""
    return [
        paper_preset(pid, variant, desk=desk)
        for pid in cec2010.PROBLEM_IDS
        for variant in VARIANT_NAMES
    ]


@dataclass(frozen=True)
class SummaryStats:
    """Batch statistics over the completed runs' final best fish."""

    fitness_mean: float
    fitness_sd: float
    fitness_min: float
    fitness_max: float
    violation_mean: float
    violation_sd: float
    violation_min: float
    violation_max: float
    feasible_runs: int
    completed_runs: int
    failed_runs: int

    @classmethod
    def from_records(cls, records: list[RunRecord]) -> "SummaryStats":
        done = [r for r in records if not r.aborted]
        failed = len(records) - len(done)
        if not done:
            nan = math.nan
            return cls(nan, nan, nan, nan, nan, nan, nan, nan, 0, 0, failed)
        f = np.array([r.best_fitness for r in done])
        v = np.array([r.best_violation for r in done])
        return cls(
            fitness_mean=float(f.mean()),
            fitness_sd=float(f.std()),
            fitness_min=float(f.min()),
            fitness_max=float(f.max()),
            violation_mean=float(v.mean()),
            violation_sd=float(v.std()),
            violation_min=float(v.min()),
            violation_max=float(v.max()),
            feasible_runs=int((v == 0.0).sum()),
            completed_runs=len(done),
            failed_runs=failed,
        )


def prepare_output_dir(path: str | Path) -> Path:
    """Create the output directory and fail fast when it is not writable."""
    out = Path(path)
    out.mkdir(parents=True, exist_ok=True)
    if not os.access(out, os.W_OK):
        raise OSError(f"output directory is not writable: {out}")
    return out


def run_single(
    config: ExperimentConfig, seed: int, problem: Problem | None = None
) -> RunRecord:
    """One seeded run of the configured experiment."""
    if problem is None:
        problem = config.load_problem()
    return run(
        problem,
        variant=config.engine_variant(),
        params=config.engine_params(),
        seed=seed,
    )


def _batch_worker(payload: tuple[dict, int]) -> RunRecord:
    config_dict, seed = payload
    return run_single(ExperimentConfig(**config_dict), seed)


def run_batch(
    config: ExperimentConfig,
    problem: Problem | None = None,
    n_jobs: int = 1,
) -> tuple[SummaryStats, list[RunRecord]]:
    """Execute the batch and aggregate statistics.

    Runs are independent; with ``n_jobs`` > 1 they execute in worker
    processes (the problem is then rebuilt from the config in each worker, so
    a custom ``problem`` object forces single-process execution). Failed runs
    are excluded from the statistics and counted in ``failed_runs``.
    """
    seeds = [config.base_seed + i for i in range(config.run_count)]
    if n_jobs > 1 and problem is None and config.run_count > 1:
        payloads = [(dataclasses.asdict(config), s) for s in seeds]
        with ProcessPoolExecutor(max_workers=n_jobs) as pool:
            records = list(pool.map(_batch_worker, payloads))
    else:
        if problem is None:
            problem = config.load_problem()
        records = [run_single(config, s, problem=problem) for s in seeds]
    return SummaryStats.from_records(records), records


def _fmt(x: float) -> str:
    return repr(float(x))


def _write_trace(path: Path, record: RunRecord) -> None:
    lines = ["iteration,best_fitness,best_violation,phase,feasible_count"]
    for i in range(record.trace_iteration.shape[0]):
        lines.append(
            f"{record.trace_iteration[i]},{_fmt(record.trace_best_fitness[i])},"
            f"{_fmt(record.trace_best_violation[i])},{record.trace_phase[i]},"
            f"{record.trace_feasible_count[i]}"
        )
    path.write_text("\n".join(lines) + "\n")


def emit_reports(
    config: ExperimentConfig,
    stats: SummaryStats,
    records: list[RunRecord],
    out_dir: str | Path | None = None,
) -> dict[str, Path]:
    """Write trace files, both summary flavors, and the batch manifest.

    All emitted files are deterministic functions of the configuration and
    seeds (no timestamps), so re-running the same batch reproduces them
    byte-for-byte.
    """
    out = prepare_output_dir(config.output_dir if out_dir is None else out_dir)
    paths: dict[str, Path] = {}

    for i, record in enumerate(records):
        trace_path = out / f"trace_run{i:03d}.csv"
        _write_trace(trace_path, record)
        paths[f"trace_run{i:03d}"] = trace_path

    try:
        data_source = config.resolved_data_source()
    except Exception:
        data_source = "unavailable"
    reference = (
        cec2010.known_reference_values(config.problem_id)
        if config.problem_id in cec2010.PROBLEM_IDS
        else {}
    )

    summary = {
        "problem": config.problem_id,
        "variant": config.variant,
        "data_source": data_source,
        "stats": dataclasses.asdict(stats),
        "runs": [
            {
                "seed": r.seed,
                "best_fitness": None if math.isnan(r.best_fitness) else r.best_fitness,
                "best_violation": None if math.isnan(r.best_violation) else r.best_violation,
                "feasible": bool(r.best_violation == 0.0),
                "eval_count": r.eval_count,
                "probe_count": r.probe_count,
                "aborted": r.aborted,
                "error": r.error,
            }
            for r in records
        ],
        "reference_fitness": reference,
    }
    summary_json = out / "summary.json"
    summary_json.write_text(json.dumps(summary, indent=2, sort_keys=True) + "\n")
    paths["summary_json"] = summary_json

    lines = [
        f"problem {config.problem_id}  variant {config.variant}  "
        f"runs {config.run_count}  iterations {config.iterations}  fish {config.n_fish}",
        f"data source: {data_source}"
        + (
            ""
            if data_source.startswith("files")
            else "  [fallback data: results not comparable to published values]"
        ),
        "",
        f"final best fitness   mean {stats.fitness_mean:.6g}  sd {stats.fitness_sd:.6g}  "
        f"min {stats.fitness_min:.6g}  max {stats.fitness_max:.6g}",
        f"final best violation mean {stats.violation_mean:.6g}  sd {stats.violation_sd:.6g}  "
        f"min {stats.violation_min:.6g}  max {stats.violation_max:.6g}",
        f"feasible runs {stats.feasible_runs}/{stats.completed_runs}"
        + (f"  (failed: {stats.failed_runs})" if stats.failed_runs else ""),
    ]
    if reference:
        lines += ["", "reference fitness means (published, full-scale protocol):"]
        for algo, ref in reference.items():
            lines.append(f"  {algo:<9} mean {ref['mean']:.3e}  sd {ref['sd']:.3e}")
    summary_txt = out / "summary.txt"
    summary_txt.write_text("\n".join(lines) + "\n")
    paths["summary_txt"] = summary_txt

    manifest = {
        "config": dataclasses.asdict(config),
        "seeds": [r.seed for r in records],
        "resolved_data_source": data_source,
    }
    manifest_path = out / "manifest.json"
    manifest_path.write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    paths["manifest"] = manifest_path
    return paths


def config_from_manifest(path: str | Path) -> ExperimentConfig:
    """Rebuild the experiment configuration stored in a batch manifest."""
    data = json.loads(Path(path).read_text())
    return ExperimentConfig(**data["config"])


_CONFIG_SECTIONS = {
    "problem": {
        "id": ("problem_id", str),
        "delta": ("delta", float),
        "violation_exponent": ("violation_exponent", float),
        "data_dir": ("data_dir", str),
        "data_source": ("data_source", str),
    },
    "engine": {
        "n_fish": ("n_fish", int),
        "iterations": ("iterations", int),
        "sigma": ("sigma", float),
        "tau": ("tau", float),
        "w_scale": ("w_scale", float),
        "step_ind_initial": ("step_ind_initial", float),
        "step_ind_final": ("step_ind_final", float),
        "step_vol_initial": ("step_vol_initial", float),
        "step_vol_final": ("step_vol_final", float),
        "sar_alpha0": ("sar_alpha0", float),
        "sar_decay": ("sar_decay", float),
    },
    "variant": {
        "name": ("variant", str),
        "tc_fraction": ("tc_fraction", float),
        "cp_min": ("cp_min", float),
        "epsilon0": ("epsilon0", float),
        "p_g": ("p_g", float),
        "k_directions": ("k_directions", int),
        "perturbation": ("perturbation", float),
    },
    "batch": {
        "run_count": ("run_count", int),
        "base_seed": ("base_seed", int),
    },
    "output": {
        "directory": ("output_dir", str),
    },
}


def read_config_file(path: str | Path) -> dict:
    """Parse an INI experiment file into ExperimentConfig keyword arguments.

    Sections: [problem], [engine], [variant], [batch], [output]. Every key is
    optional; unknown keys are rejected. Empty values mean "use the default".
    """
    parser = configparser.ConfigParser()
    read = parser.read(path)
    if not read:
        raise OSError(f"cannot read config file: {path}")
    kwargs: dict = {}
    for section in parser.sections():
        if section not in _CONFIG_SECTIONS:
            raise ValueError(f"unknown config section [{section}] in {path}")
        known = _CONFIG_SECTIONS[section]
        for key, raw in parser.items(section):
            if key not in known:
                raise ValueError(f"unknown key {key!r} in section [{section}] of {path}")
            field, cast = known[key]
            if raw.strip() == "":
                continue
            kwargs[field] = cast(raw)
    return kwargs
