"""Seven constrained benchmark problems from the CEC 2010 competition set.

The suite instantiates C01, C03, C04, C06, C07, C08 and C09 at 10 dimensions.
Problem bodies follow the official competition definitions; the shift vectors
(and rotation matrices for C06/C08) come from data files.

Data directory layout: one plain-text file per problem named ``<id>.txt``
holding whitespace-separated decimal numbers, the first D being the shift
vector and, for rotated problems, the next D*D the rotation matrix in row
order. An optional ``manifest.json`` maps file names to sha256 digests and is
verified when present. The directory may also be pointed to by the
``WRFSS_CEC2010_DATA`` environment variable.

Without official data two fallback sources exist, both clearly labeled
non-conformant (results are not comparable to published figures): a
deterministic ``surrogate`` source with fixed pseudo-random shifts/rotations,
and a ``zero`` source (zero shift, identity rotation) for unit tests.
"""

from __future__ import annotations

import hashlib
import json
import math
import os
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .problem import Problem, evaluate_many

__all__ = [
    "PROBLEM_IDS",
    "DATA_ENV_VAR",
    "BenchDataError",
    "BenchProblem",
    "load_problem",
    "feasible_ratio",
    "known_reference_values",
    "write_data_dir",
]

PROBLEM_IDS = ("C01", "C03", "C04", "C06", "C07", "C08", "C09")
DATA_ENV_VAR = "WRFSS_CEC2010_DATA"

DIMENSION = 10
_ROTATION_OFFSET = 483.6106156535  # pre-rotation shift used by C06

# id -> (lower, upper, equality count, inequality count, published feasible ratio at 10D)
_TABLE1 = {
    "C01": (0.0, 10.0, 0, 2, 0.997689),
    "C03": (-1000.0, 1000.0, 1, 0, 0.000000),
    "C04": (-50.0, 50.0, 4, 0, 0.000000),
    "C06": (-600.0, 600.0, 2, 0, 0.000000),
    "C07": (-140.0, 140.0, 0, 1, 0.505123),
    "C08": (-140.0, 140.0, 0, 1, 0.379512),
    "C09": (-500.0, 500.0, 1, 0, 0.000000),
}

_ROTATED = {"C06", "C08"}

# Half-width of the surrogate shift distribution per problem; C01 uses a
# small strictly negative band so the shifted coordinates stay positive over
# the box (the bump-function denominator only vanishes at z = 0).
_SURROGATE_SHIFT = {
    "C01": (-0.40, -0.05),
    "C03": (-50.0, 50.0),
    "C04": (-5.0, 5.0),
    "C06": (-60.0, 60.0),
    "C07": (-10.0, 10.0),
    "C08": (-10.0, 10.0),
    "C09": (-50.0, 50.0),
}
_SURROGATE_SEED = 20100731


class BenchDataError(RuntimeError):
    """A benchmark data file is missing, corrupt, or fails its checksum."""


@dataclass(frozen=True)
class BenchProblem:
    """One suite entry: the evaluable problem plus its published metadata."""

    pid: str
    problem: Problem
    equality_count: int
    inequality_count: int
    published_ratio: float
    data_source: str
    shift: np.ndarray
    rotation: np.ndarray | None


def _mean(v):
    return v.mean(axis=-1)


def _build_problem(pid: str, shift: np.ndarray, rotation: np.ndarray | None,
                   delta: float, exponent: float) -> Problem:
    o = np.asarray(shift, dtype=float)
    m = None if rotation is None else np.asarray(rotation, dtype=float)
    d = DIMENSION
    lo, hi, _, _, _ = _TABLE1[pid]
    idx = np.arange(1, d + 1, dtype=float)

    def rosenbrock(z):
        a, b = z[..., :-1], z[..., 1:]
        return (100.0 * (a**2 - b) ** 2 + (a - 1.0) ** 2).sum(axis=-1)

    if pid == "C01":
        def objective(x):
            z = x - o
            c = np.cos(z)
            num = (c**4).sum(axis=-1) - 2.0 * (c**2).prod(axis=-1)
            den = np.sqrt((idx * z * z).sum(axis=-1))
            return -np.abs(num / den)

        inequalities = (
            lambda x: 0.75 - (x - o).prod(axis=-1),
            lambda x: (x - o).sum(axis=-1) - 7.5 * d,
        )
        equalities = ()
    elif pid == "C03":
        objective = lambda x: rosenbrock(x - o)
        inequalities = ()
        equalities = (lambda x: (np.diff(x - o, axis=-1) ** 2).sum(axis=-1),)
    elif pid == "C04":
        half = d // 2
        objective = lambda x: (x - o).max(axis=-1)
        inequalities = ()
        equalities = (
            lambda x: _mean((x - o) * np.cos(np.sqrt(np.abs(x - o)))),
            lambda x: (np.diff((x - o)[..., :half], axis=-1) ** 2).sum(axis=-1),
            lambda x: (
                ((x - o)[..., half:-1] ** 2 - (x - o)[..., half + 1:]) ** 2
            ).sum(axis=-1),
            lambda x: (x - o).sum(axis=-1),
        )
    elif pid == "C06":
        def rotated(x):
            return (x - o + _ROTATION_OFFSET) @ m - _ROTATION_OFFSET

        def h_sin(x):
            y = rotated(x)
            return _mean(-y * np.sin(np.sqrt(np.abs(y))))

        def h_cos(x):
            y = rotated(x)
            return _mean(-y * np.cos(0.5 * np.sqrt(np.abs(y))))

        objective = lambda x: (x - o).max(axis=-1)
        inequalities = ()
        equalities = (h_sin, h_cos)
    elif pid in ("C07", "C08"):
        if pid == "C07":
            transform = lambda x: x - o
        else:
            transform = lambda x: (x - o) @ m

        def constraint(x):
            y = transform(x)
            return (
                0.5
                - np.exp(-0.1 * np.sqrt(_mean(y * y)))
                - 3.0 * np.exp(_mean(np.cos(0.1 * y)))
                + math.e
            )

        objective = lambda x: rosenbrock(x + 1.0 - o)
        inequalities = (constraint,)
        equalities = ()
    elif pid == "C09":
        objective = lambda x: rosenbrock(x + 1.0 - o)
        inequalities = ()
        equalities = (
            lambda x: ((x - o) * np.sin(np.sqrt(np.abs(x - o)))).sum(axis=-1),
        )
    else:
        raise ValueError(f"unknown problem id {pid!r}; choose one of {PROBLEM_IDS}")

    return Problem(
        dimension=d,
        lower=np.full(d, lo),
        upper=np.full(d, hi),
        objective=objective,
        inequalities=inequalities,
        equalities=equalities,
        delta=delta,
        violation_exponent=exponent,
        vectorized=True,
        name=pid,
    )


def _surrogate_data(pid: str) -> tuple[np.ndarray, np.ndarray | None]:
    """Deterministic stand-in shift/rotation, fixed per problem id."""
    rng = np.random.default_rng([_SURROGATE_SEED, PROBLEM_IDS.index(pid)])
    lo, hi = _SURROGATE_SHIFT[pid]
    shift = rng.uniform(lo, hi, DIMENSION)
    rotation = None
    if pid in _ROTATED:
        a = rng.normal(size=(DIMENSION, DIMENSION))
        q, r = np.linalg.qr(a)
        rotation = q @ np.diag(np.sign(np.diag(r)))
    return shift, rotation


def _read_data_file(pid: str, data_dir: Path) -> tuple[np.ndarray, np.ndarray | None]:
    path = data_dir / f"{pid}.txt"
    if not path.is_file():
        raise BenchDataError(f"missing benchmark data file: {path}")
    manifest = data_dir / "manifest.json"
    if manifest.is_file():
        try:
            digests = json.loads(manifest.read_text())["sha256"]
        except (json.JSONDecodeError, KeyError) as exc:
            raise BenchDataError(f"corrupt checksum manifest: {manifest}") from exc
        expected = digests.get(path.name)
        if expected is not None:
            actual = hashlib.sha256(path.read_bytes()).hexdigest()
            if actual != expected:
                raise BenchDataError(f"checksum mismatch for data file: {path}")
    try:
        values = np.array([float(tok) for tok in path.read_text().split()])
    except ValueError as exc:
        raise BenchDataError(f"corrupt benchmark data file: {path}") from exc
    d = DIMENSION
    need = d + d * d if pid in _ROTATED else d
    if values.size != need:
        raise BenchDataError(
            f"corrupt benchmark data file: {path} (expected {need} numbers, found {values.size})"
        )
    shift = values[:d]
    rotation = values[d:].reshape(d, d) if pid in _ROTATED else None
    return shift, rotation


def load_problem(
    pid: str,
    data_dir: str | Path | None = None,
    source: str | None = None,
    delta: float = 1e-4,
    violation_exponent: float = 1.0,
) -> BenchProblem:
    """Build one suite problem at 10D with the equality tolerance applied.

    ``source`` selects where shift/rotation data comes from: "files" (the
    given ``data_dir`` or the directory named by WRFSS_CEC2010_DATA),
    "surrogate", or "zero". With source=None, files are used when a directory
    is known and the surrogate otherwise.
    """
    if pid not in PROBLEM_IDS:
        raise ValueError(f"unknown problem id {pid!r}; choose one of {PROBLEM_IDS}")
    if source not in (None, "files", "surrogate", "zero"):
        raise ValueError(f"source must be files, surrogate or zero, got {source!r}")

    if data_dir is None and source in (None, "files"):
        env = os.environ.get(DATA_ENV_VAR)
        if env:
            data_dir = env
    if source is None:
        source = "files" if data_dir is not None else "surrogate"

    if source == "files":
        if data_dir is None:
            raise BenchDataError(
                f"no benchmark data directory given (set {DATA_ENV_VAR} or pass data_dir)"
            )
        shift, rotation = _read_data_file(pid, Path(data_dir))
        source_label = f"files:{data_dir}"
    elif source == "surrogate":
        shift, rotation = _surrogate_data(pid)
        source_label = "surrogate"
    else:
        shift = np.zeros(DIMENSION)
        rotation = np.eye(DIMENSION) if pid in _ROTATED else None
        source_label = "zero"

    problem = _build_problem(pid, shift, rotation, delta, violation_exponent)
    lo, hi, n_eq, n_ineq, ratio = _TABLE1[pid]
    assert problem.n_equalities == n_eq and problem.n_inequalities == n_ineq
    assert float(problem.lower[0]) == lo and float(problem.upper[0]) == hi
    return BenchProblem(
        pid=pid,
        problem=problem,
        equality_count=n_eq,
        inequality_count=n_ineq,
        published_ratio=ratio,
        data_source=source_label,
        shift=shift,
        rotation=rotation,
    )


def feasible_ratio(
    problem: Problem, samples: int, seed: int = 0, batch: int = 65536
) -> float:
    """Monte Carlo estimate of the feasible fraction of the box.

    Deterministic for a given seed; standard error scales as 1/sqrt(samples).
    Equality-constrained problems give exactly zero for any finite sample.
    """
    if samples < 1:
        raise ValueError(f"samples must be >= 1, got {samples}")
    rng = np.random.default_rng(seed)
    width = problem.range_width
    feasible = 0
    remaining = samples
    while remaining > 0:
        n = min(batch, remaining)
        pts = problem.lower + rng.random((n, problem.dimension)) * width
        _, violation = evaluate_many(problem, pts)
        feasible += int((violation == 0.0).sum())
        remaining -= n
    return feasible / samples


def write_data_dir(
    path: str | Path, source: str = "surrogate", problems=PROBLEM_IDS
) -> Path:
    """Write a data directory in the documented layout, with its manifest.

    Useful for tests and as a template when converting official data files.
    The written numbers come from the chosen fallback source and remain
    non-conformant.
    """
    path = Path(path)
    path.mkdir(parents=True, exist_ok=True)
    digests = {}
    for pid in problems:
        if source == "surrogate":
            shift, rotation = _surrogate_data(pid)
        elif source == "zero":
            shift = np.zeros(DIMENSION)
            rotation = np.eye(DIMENSION) if pid in _ROTATED else None
        else:
            raise ValueError(f"source must be surrogate or zero, got {source!r}")
        lines = [" ".join(repr(float(v)) for v in shift)]
        if rotation is not None:
            lines.extend(" ".join(repr(float(v)) for v in row) for row in rotation)
        file = path / f"{pid}.txt"
        file.write_text("\n".join(lines) + "\n")
        digests[file.name] = hashlib.sha256(file.read_bytes()).hexdigest()
    (path / "manifest.json").write_text(
        json.dumps({"sha256": digests}, indent=2, sort_keys=True) + "\n"
    )
    return path


# Published mean/standard deviation of the final fitness over 30 runs, per
# algorithm, used as reference columns in reports. eDEg, Co-CLPSO and E-ABC
# are external comparison methods and are reference data only.
_REFERENCE = {
    "C01": {
        "wrFSS": (-5.91e-01, 4.83e-02),
        "wrFSSe": (-4.03e-01, 1.17e-01),
        "wrFSSg": (-5.76e-01, 3.16e-02),
        "wrFSSp": (-6.93e-01, 1.64e-02),
        "eDEg": (-7.47e-01, 1.32e-03),
        "Co-CLPSO": (-7.34e-01, 1.78e-02),
        "E-ABC": (-7.16e-01, 2.69e-02),
    },
    "C03": {
        "wrFSS": (6.33e12, 5.54e12),
        "wrFSSe": (4.01e09, 8.37e09),
        "wrFSSg": (5.20e13, 1.46e14),
        "wrFSSp": (7.71e12, 1.45e13),
        "eDEg": (0.00e00, 0.00e00),
        "Co-CLPSO": (3.55e-01, 1.78e00),
        "E-ABC": (2.45e12, 1.01e12),
    },
    "C04": {
        "wrFSS": (2.23e00, 5.37e00),
        "wrFSSe": (5.60e00, 7.16e00),
        "wrFSSg": (1.88e00, 4.64e00),
        "wrFSSp": (1.55e00, 4.24e00),
        "eDEg": (-9.92e-06, 1.55e-07),
        "Co-CLPSO": (-9.34e-06, 1.07e-06),
        "E-ABC": (8.56e-01, 3.01e00),
    },
    "C06": {
        "wrFSS": (2.92e02, 9.40e01),
        "wrFSSe": (-5.65e02, 3.55e00),
        "wrFSSg": (-5.20e00, 1.51e02),
        "wrFSSp": (3.04e02, 8.60e01),
        "eDEg": (-5.79e02, 3.63e-03),
        "Co-CLPSO": (-5.79e02, 5.73e-04),
        "E-ABC": (4.38e02, 8.60e01),
    },
    "C07": {
        "wrFSS": (5.09e05, 3.17e05),
        "wrFSSe": (5.01e00, 6.63e00),
        "wrFSSg": (5.88e09, 4.23e09),
        "wrFSSp": (4.32e05, 2.40e05),
        "eDEg": (0.00e00, 0.00e00),
        "Co-CLPSO": (7.97e-01, 1.63e00),
        "E-ABC": (7.16e01, 5.19e01),
    },
    "C08": {
        "wrFSS": (4.16e09, 2.13e09),
        "wrFSSe": (6.04e01, 1.60e01),
        "wrFSSg": (7.34e09, 3.76e09),
        "wrFSSp": (4.19e09, 2.25e09),
        "eDEg": (6.73e00, 5.56e00),
        "Co-CLPSO": (6.09e-01, 1.43e00),
        "E-ABC": (4.11e02, 9.36e02),
    },
    "C09": {
        "wrFSS": (4.57e12, 2.06e12),
        "wrFSSe": (3.61e06, 1.40e07),
        "wrFSSg": (9.52e12, 4.89e12),
        "wrFSSp": (4.39e12, 1.79e12),
        "eDEg": (0.00e00, 0.00e00),
        "Co-CLPSO": (1.99e10, 9.97e10),
        "E-ABC": (2.02e12, 1.81e12),
    },
}


def known_reference_values(pid: str) -> dict[str, dict[str, float]]:
    """Published per-algorithm fitness statistics for one problem."""
    if pid not in _REFERENCE:
        raise ValueError(f"unknown problem id {pid!r}; choose one of {PROBLEM_IDS}")
    return {
        algo: {"mean": mean, "sd": sd} for algo, (mean, sd) in _REFERENCE[pid].items()
    }
