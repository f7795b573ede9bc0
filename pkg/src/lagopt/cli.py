"""Command-line experiment runner.

Subcommands:
    run <config>          execute one experiment configuration
    reproduce <figN>      run the shipped presets for one of the five figures
    eigen <config>        principal eigenpair for a configuration
    classify <config>     persistence/extinction verdict from thresholds alone
    verify <suite>        run an acceptance suite: eigen | schemes | theorems
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from concurrent.futures import ThreadPoolExecutor

from . import analysis, runner, verification
from .config import (
    ExperimentConfig,
    config_hash,
    load_config,
    load_preset,
    parse_config,
    with_overrides,
)
from .errors import ConfigError

PRESET_VARIANTS = {
    "fig1": ("fig1",),
    "fig2": ("fig2",),  # limit-scheme companion added at run time
    "fig3": ("fig3_fast", "fig3_slow"),
    "fig4": ("fig4_z12", "fig4_z8", "fig4_z4", "fig4_z0"),
    "fig5": ("fig5",),
}


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--out", default=None, help="output directory")
    p.add_argument("--threads", type=int, default=1, help="parallel experiment workers")
    p.add_argument("--dt", type=float, default=None, help="override the time step")
    p.add_argument("--nx", type=int, default=None, help="override the grid node count")
    p.add_argument(
        "--snapshot-times", default=None,
        help="comma-separated snapshot times, overriding the config",
    )


def _apply_overrides(cfg: ExperimentConfig, args) -> ExperimentConfig:
    snap = None
    if args.snapshot_times is not None:
        snap = tuple(float(s) for s in args.snapshot_times.split(",") if s.strip())
    return with_overrides(cfg, nx=args.nx, dt=args.dt, snapshot_times=snap)


def _out_dir(cfg: ExperimentConfig, args, default: str) -> str:
    return args.out or cfg.output.directory or default


def cmd_run(args) -> int:
    cfg = _apply_overrides(load_config(args.config), args)
    out = _out_dir(cfg, args, "out")
    runner.execute(cfg, out)
    print(f"wrote artifacts for config {config_hash(cfg)} to {out}")
    return 0


def cmd_reproduce(args) -> int:
    names = PRESET_VARIANTS[args.figure]
    base = args.out or os.path.join("out", args.figure)
    jobs: list[tuple[ExperimentConfig, str]] = []
    for name in names:
        cfg = _apply_overrides(parse_config(load_preset(name)), args)
        jobs.append((cfg, os.path.join(base, name)))
        if args.figure == "fig2":
            jobs.append((runner.fig2_limit_variant(cfg), os.path.join(base, f"{name}_limit")))
    if args.threads > 1:
        with ThreadPoolExecutor(max_workers=args.threads) as pool:
            list(pool.map(lambda job: runner.execute(*job), jobs))
    else:
        for job in jobs:
            runner.execute(*job)
    for cfg, out in jobs:
        print(f"{out}: config {config_hash(cfg)}")
    return 0


def cmd_eigen(args) -> int:
    cfg = _apply_overrides(load_config(args.config), args)
    if cfg.eigen is None:
        raise ConfigError("eigen", "configuration has no [eigen] section")
    out = _out_dir(cfg, args, "out")
    pair = runner.run_eigen(cfg, runner._ensure_dir(out))
    print(f"lambda = {pair.eigenvalue:.12g} (residual {pair.residual:.2e}) -> {out}")
    return 0


def cmd_classify(args) -> int:
    cfg = load_config(args.config)
    verdict = analysis.classify(cfg.landscape, cfg.shift)
    record = {
        "config": config_hash(cfg),
        "case": cfg.case,
        "kind": verdict.kind,
        "dominant_points": list(verdict.dominant_points),
        "thresholds": verdict.thresholds,
        "notes": list(verdict.notes),
    }
    print(json.dumps(record, sort_keys=True))
    if args.out:
        runner._ensure_dir(args.out)
        with open(os.path.join(args.out, "verdicts.jsonl"), "a", encoding="utf-8") as fh:
            fh.write(json.dumps(record, sort_keys=True) + "\n")
    return 0


def cmd_verify(args) -> int:
    results = verification.run_suite(args.suite)
    for res in results:
        print(res.line())
    failed = [r for r in results if not r.passed]
    print(f"{len(results) - len(failed)}/{len(results)} checks passed")
    return 1 if failed else 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="lagopt", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="execute one experiment configuration")
    p.add_argument("config")
    _add_common(p)
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("reproduce", help="run the shipped figure presets")
    p.add_argument("figure", choices=sorted(PRESET_VARIANTS))
    _add_common(p)
    p.set_defaults(func=cmd_reproduce)

    p = sub.add_parser("eigen", help="principal eigenpair for a configuration")
    p.add_argument("config")
    _add_common(p)
    p.set_defaults(func=cmd_eigen)

    p = sub.add_parser("classify", help="threshold verdict for a configuration")
    p.add_argument("config")
    p.add_argument("--out", default=None, help="append the verdict to OUT/verdicts.jsonl")
    p.set_defaults(func=cmd_classify)

    p = sub.add_parser("verify", help="run an acceptance suite")
    p.add_argument("suite", choices=sorted(verification.SUITES))
    p.set_defaults(func=cmd_verify)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # solver errors surface as nonzero exit codes
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    raise SystemExit(main())
