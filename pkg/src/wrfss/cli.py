"""Command-line interface.

Subcommands:
    run      one experiment (single seed) from flags and/or a config file
    batch    a grid of problems x variants, many seeds each
    table1   Monte Carlo estimate of the feasible-region ratios
    presets  list the published per-problem protocol parameters

Exit codes: 0 on success, 1 on runtime failure, 2 on usage errors.
"""

from __future__ import annotations

import argparse
import dataclasses
import sys
from pathlib import Path

from . import cec2010, harness

_OVERRIDE_FLAGS = [
    # (flag, ExperimentConfig field, type)
    ("--iterations", "iterations", int),
    ("--n-fish", "n_fish", int),
    ("--sigma", "sigma", float),
    ("--tau", "tau", float),
    ("--w-scale", "w_scale", float),
    ("--step-ind-initial", "step_ind_initial", float),
    ("--step-ind-final", "step_ind_final", float),
    ("--step-vol-initial", "step_vol_initial", float),
    ("--step-vol-final", "step_vol_final", float),
    ("--sar-alpha0", "sar_alpha0", float),
    ("--sar-decay", "sar_decay", float),
    ("--tc-fraction", "tc_fraction", float),
    ("--cp-min", "cp_min", float),
    ("--epsilon0", "epsilon0", float),
    ("--p-g", "p_g", float),
    ("--k-directions", "k_directions", int),
    ("--perturbation", "perturbation", float),
    ("--delta", "delta", float),
    ("--violation-exponent", "violation_exponent", float),
]


def _add_common(sub: argparse.ArgumentParser) -> None:
    sub.add_argument("--problem", help="problem id, e.g. C01")
    sub.add_argument(
        "--variant", choices=sorted(harness.VARIANT_NAMES), help="algorithm variant"
    )
    sub.add_argument("--preset", choices=["paper"], help="use the published protocol parameters")
    sub.add_argument(
        "--desk", action="store_true", help="scale the preset budget down to 5000 iterations"
    )
    sub.add_argument("--config", help="INI experiment file; flags override its values")
    sub.add_argument("--data-dir", help="benchmark data directory (official files)")
    sub.add_argument(
        "--data-source",
        choices=["files", "surrogate", "zero"],
        help="where shift/rotation data comes from (default: files if a directory is known, else surrogate)",
    )
    sub.add_argument("--out", help="output directory")
    for flag, _, typ in _OVERRIDE_FLAGS:
        sub.add_argument(flag, type=typ)


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="wrfss",
        description="Fish-school search for constrained optimization, with a benchmark harness.",
    )
    subs = parser.add_subparsers(dest="command", required=True)

    p_run = subs.add_parser("run", help="run one experiment with a single seed")
    _add_common(p_run)
    p_run.add_argument("--seed", type=int, default=1000)

    p_batch = subs.add_parser("batch", help="run a problem x variant grid")
    _add_common(p_batch)
    p_batch.add_argument("--problems", help="comma-separated problem ids (overrides --problem)")
    p_batch.add_argument("--variants", help="comma-separated variants (overrides --variant)")
    p_batch.add_argument("--runs", type=int, default=30)
    p_batch.add_argument("--base-seed", type=int, default=1000)
    p_batch.add_argument("--jobs", type=int, default=1, help="worker processes per batch")
    p_batch.add_argument("--from-manifest", help="re-run the batch described by a manifest file")

    p_table = subs.add_parser("table1", help="estimate feasible-region ratios by sampling")
    p_table.add_argument("--samples", type=int, default=1_000_000)
    p_table.add_argument("--seed", type=int, default=7)
    p_table.add_argument("--data-dir")
    p_table.add_argument("--data-source", choices=["files", "surrogate", "zero"])

    subs.add_parser("presets", help="list the published protocol parameters")
    return parser


def _merge_config(args: argparse.Namespace, parser: argparse.ArgumentParser,
                  problem: str, variant: str, run_count: int, base_seed: int,
                  output_dir: str) -> harness.ExperimentConfig:
    kwargs: dict = {}
    if args.preset == "paper":
        if not problem or not variant:
            parser.error("--preset paper requires --problem and --variant")
        preset = harness.paper_preset(problem, variant, desk=args.desk)
        kwargs.update(dataclasses.asdict(preset))
    if args.config:
        kwargs.update(harness.read_config_file(args.config))
    kwargs["problem_id"] = kwargs.get("problem_id", problem) if problem is None else problem
    kwargs["variant"] = kwargs.get("variant", variant) if variant is None else variant
    kwargs.update(
        run_count=run_count,
        base_seed=base_seed,
        output_dir=output_dir,
    )
    if args.data_dir:
        kwargs["data_dir"] = args.data_dir
    if args.data_source:
        kwargs["data_source"] = args.data_source
    for flag, field, _ in _OVERRIDE_FLAGS:
        value = getattr(args, field)
        if value is not None:
            kwargs[field] = value
    if not kwargs.get("problem_id") or not kwargs.get("variant"):
        parser.error("a problem and a variant are required (flags, preset, or config file)")
    return harness.ExperimentConfig(**kwargs)


def _execute_batch(config: harness.ExperimentConfig, jobs: int) -> None:
    harness.prepare_output_dir(config.output_dir)
    stats, records = harness.run_batch(config, n_jobs=jobs)
    paths = harness.emit_reports(config, stats, records)
    print(paths["summary_txt"].read_text(), end="")
    print(f"reports written to {Path(config.output_dir).resolve()}")


def _cmd_run(args, parser) -> int:
    config = _merge_config(
        args,
        parser,
        problem=args.problem,
        variant=args.variant,
        run_count=1,
        base_seed=args.seed,
        output_dir=args.out or "out",
    )
    _execute_batch(config, jobs=1)
    return 0


def _cmd_batch(args, parser) -> int:
    if args.from_manifest:
        config = harness.config_from_manifest(args.from_manifest)
        if args.out:
            config = dataclasses.replace(config, output_dir=args.out)
        _execute_batch(config, jobs=args.jobs)
        return 0
    problems = (args.problems or args.problem or "").split(",") if (args.problems or args.problem) else []
    variants = (args.variants or args.variant or "").split(",") if (args.variants or args.variant) else []
    problems = [p.strip() for p in problems if p.strip()]
    variants = [v.strip() for v in variants if v.strip()]
    if not problems or not variants:
        parser.error("batch requires problems and variants (flags, or --from-manifest)")
    base_out = Path(args.out or "out")
    for pid in problems:
        for variant in variants:
            out_dir = base_out / f"{pid}_{variant}" if len(problems) * len(variants) > 1 else base_out
            config = _merge_config(
                args,
                parser,
                problem=pid,
                variant=variant,
                run_count=args.runs,
                base_seed=args.base_seed,
                output_dir=str(out_dir),
            )
            _execute_batch(config, jobs=args.jobs)
    return 0


def _cmd_table1(args) -> int:
    print(f"{'problem':<8}{'estimated':>12}{'published':>12}{'abs diff':>12}  data source")
    used_fallback = False
    for pid in cec2010.PROBLEM_IDS:
        bench = cec2010.load_problem(pid, data_dir=args.data_dir, source=args.data_source)
        used_fallback = used_fallback or not bench.data_source.startswith("files")
        est = cec2010.feasible_ratio(bench.problem, samples=args.samples, seed=args.seed)
        diff = abs(est - bench.published_ratio)
        print(
            f"{pid:<8}{est:>12.6f}{bench.published_ratio:>12.6f}{diff:>12.6f}  {bench.data_source}"
        )
    if used_fallback:
        print("note: fallback data in use; published ratios assume the official data files")
    return 0


def _cmd_presets() -> int:
    print(
        f"{'problem':<8}{'variant':<8}{'sigma':>7}{'tau':>7}{'Tc':>7}{'cp_min':>8}"
        f"{'P_g':>7}{'K':>6}  iterations"
    )
    for config in harness.list_presets():
        kind = harness.VARIANT_NAMES[config.variant]
        tc = f"{config.tc_fraction:.2f}" if kind == "epsilon" else "-"
        cp = f"{config.cp_min:g}" if kind == "epsilon" else "-"
        pg = f"{config.p_g:.2f}" if kind == "gradient" else "-"
        k = f"{config.k_directions}" if kind == "gradient" else "-"
        print(
            f"{config.problem_id:<8}{config.variant:<8}{config.sigma:>7.2f}{config.tau:>7.2f}"
            f"{tc:>7}{cp:>8}{pg:>7}{k:>6}  {config.iterations}"
        )
    return 0


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "run":
            return _cmd_run(args, parser)
        if args.command == "batch":
            return _cmd_batch(args, parser)
        if args.command == "table1":
            return _cmd_table1(args)
        if args.command == "presets":
            return _cmd_presets()
    except (cec2010.BenchDataError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 2


if __name__ == "__main__":
    sys.exit(main())
