"""Executes experiment configurations and writes their artifacts to disk.

Every run directory receives the delimited output (CSV with hash-carrying
headers), a resolved copy of the configuration, rendered figures, and for
density runs a JSON-lines verdict log.
"""

from __future__ import annotations

import dataclasses
import json
import os

import numpy as np

from . import __version__, analysis, eigen, fd, hj, plotting
from .config import (
    ExperimentConfig,
    build_initial_density,
    build_initial_logfield,
    config_hash,
    serialize_config,
)
from .csvio import standard_comments, write_csv


def _ensure_dir(path: str) -> str:
    os.makedirs(path, exist_ok=True)
    return path


def _write_resolved(cfg: ExperimentConfig, out: str) -> None:
    with open(os.path.join(out, "config.resolved.cfg"), "w", encoding="utf-8") as fh:
        fh.write(serialize_config(cfg))


def _verdict_record(cfg: ExperimentConfig, result: fd.SimulationResult | None) -> dict:
    verdict = analysis.classify(cfg.landscape, cfg.shift)
    record = {
        "config": config_hash(cfg),
        "case": cfg.case,
        "kind": verdict.kind,
        "dominant_points": list(verdict.dominant_points),
        "thresholds": verdict.thresholds,
        "notes": list(verdict.notes),
        "measured_comoving_argmax": None,
        "argmax_discrepancy": None,
        "rho_final": None,
    }
    if result is not None:
        diag = result.diagnostics
        record["rho_final"] = float(diag.rho[-1])
        eps = cfg.shift.epsilon
        t = float(diag.times[-1])
        measured = [
            float(diag.argmax_x[-1] - eps * v * t) for _, v in diag.tracked
        ]
        record["measured_comoving_argmax"] = measured
        if verdict.kind == analysis.PERSIST and verdict.dominant_points and measured:
            best = min(
                abs(m - p) for m in measured for p in verdict.dominant_points
            )
            record["argmax_discrepancy"] = float(best)
    return record


def _append_verdict(record: dict, out: str) -> None:
    with open(os.path.join(out, "verdicts.jsonl"), "a", encoding="utf-8") as fh:
        fh.write(json.dumps(record, sort_keys=True) + "\n")


def run_density(cfg: ExperimentConfig, out: str) -> fd.SimulationResult:
    grid = cfg.grid.build()
    n0 = build_initial_density(cfg, grid)
    kwargs = dict(
        dt=cfg.time.dt,
        record_stride=cfg.output.stride,
        snapshot_times=cfg.output.snapshot_times,
    )
    if cfg.case == "single-speed":
        result = fd.simulate_case1(cfg.landscape, cfg.shift, n0, grid, cfg.time.t_final, **kwargs)
    else:
        result = fd.simulate_case2(cfg.landscape, cfg.shift, n0, grid, cfg.time.t_final, **kwargs)

    diag = result.diagnostics
    comments = standard_comments(__version__, config_hash(cfg))
    share_cols = [
        (f"share_peak{k + 1}", diag.shares[:, k]) for k in range(diag.shares.shape[1])
    ]
    write_csv(
        os.path.join(out, "diagnostics.csv"),
        [("t", diag.times), ("rho", diag.rho), ("argmax_x", diag.argmax_x), *share_cols],
        comments,
    )
    for t, values in result.snapshots:
        write_csv(
            os.path.join(out, f"snapshot_t{t:g}.csv"),
            [("x", grid.nodes), ("n", values)],
            comments + [f"snapshot t = {t!r}"],
        )
    write_csv(
        os.path.join(out, "final_field.csv"),
        [("x", grid.nodes), ("n", result.final.values)],
        comments + [f"t = {result.final.time!r}"],
    )
    plotting.save_diagnostics(
        os.path.join(out, "diagnostics.png"),
        diag.times, diag.rho, diag.argmax_x, diag.shares,
        title=f"{cfg.case} density run",
    )
    if result.snapshots:
        plotting.save_profiles(
            os.path.join(out, "profiles.png"), grid.nodes, result.snapshots
        )
    _append_verdict(_verdict_record(cfg, result), out)
    return result


def run_logdensity(cfg: ExperimentConfig, out: str) -> hj.HJRun:
    grid = cfg.grid.build()
    eps = cfg.shift.epsilon
    u0 = build_initial_logfield(cfg, grid, eps)
    if cfg.solver == "hj-eps":
        run = hj.run_ap(
            cfg.landscape, cfg.shift.c, eps, u0, grid, cfg.time.t_final,
            cfg.time.dt, snapshot_times=cfg.output.snapshot_times,
        )
    else:
        run = hj.run_limit(
            cfg.landscape, cfg.shift.c, np.zeros_like(u0), grid, cfg.time.t_final,
            cfg.time.dt, snapshot_times=cfg.output.snapshot_times,
        )
    comments = standard_comments(__version__, config_hash(cfg), [f"kind {run.kind}"])
    write_csv(
        os.path.join(out, "series.csv"),
        [("n", np.arange(len(run.series))), ("rho_or_P", run.series)],
        comments + [f"dt = {run.times[1] - run.times[0]!r}"],
    )
    for t, values in run.snapshots:
        write_csv(
            os.path.join(out, f"u_tau{t:g}.csv"),
            [("x", grid.nodes), ("u", values)],
            comments + [f"tau = {t!r}"],
        )
    if run.snapshots:
        plotting.save_profiles(
            os.path.join(out, "u_profiles.png"), grid.nodes, run.snapshots,
            ylabel="log-density u", title=cfg.solver,
        )
    plotting.save_series(
        os.path.join(out, "series.png"),
        run.times[1:] if run.kind == "pressure" else run.times,
        run.series[1:] if run.kind == "pressure" else run.series,
        ylabel="pressure P" if run.kind == "pressure" else "total mass rho",
    )
    return run


def run_eigen(cfg: ExperimentConfig, out: str) -> eigen.EigenPair:
    spec = cfg.eigen
    land = cfg.combined_landscape
    pair = eigen.principal_eigenpair(
        land.value, cfg.shift.c, cfg.shift.epsilon, spec.radius, spec.nodes,
        center=spec.center,
    )
    p_hat = eigen.weighted_rescale(pair, cfg.shift.c, cfg.shift.epsilon)
    comments = standard_comments(
        __version__, config_hash(cfg), [f"lambda = {pair.eigenvalue!r}"]
    )
    write_csv(
        os.path.join(out, "eigenvector.csv"),
        [("x", pair.nodes), ("p", pair.vector), ("p_hat", p_hat)],
        comments,
    )
    plotting.save_eigenvector(
        os.path.join(out, "eigenvector.png"), pair.nodes, pair.vector, p_hat,
        title=f"lambda = {pair.eigenvalue:.6f}",
    )
    if spec.eps_list and spec.radii:
        table = eigen.eigenvalue_convergence_table(
            land, cfg.shift.c, list(spec.eps_list), list(spec.radii),
            center=spec.center, require_monotone=False,
        )
        rows_r, rows_e, rows_l = [], [], []
        for i, r in enumerate(table.radii):
            for j, e in enumerate(table.eps_values):
                rows_r.append(r)
                rows_e.append(e)
                rows_l.append(table.eigenvalues[i, j])
        write_csv(
            os.path.join(out, "lambda_table.csv"),
            [("R", np.asarray(rows_r)), ("eps", np.asarray(rows_e)),
             ("lambda", np.asarray(rows_l))],
            comments + [f"monotone_in_radius {table.monotone_in_radius}"],
        )
        plotting.save_lambda_curves(
            os.path.join(out, "lambda_table.png"),
            table.radii, table.eps_values, table.eigenvalues,
        )
    return pair


def execute(cfg: ExperimentConfig, out_dir: str) -> None:
    """Run one configuration, writing all artifacts under ``out_dir``."""
    out = _ensure_dir(out_dir)
    _write_resolved(cfg, out)
    if cfg.solver == "fd":
        run_density(cfg, out)
    elif cfg.solver in ("hj-eps", "hj-limit"):
        run_logdensity(cfg, out)
    elif cfg.solver == "eigen":
        run_eigen(cfg, out)
    else:  # pragma: no cover - config parsing rejects unknown solvers
        raise ValueError(f"unknown solver {cfg.solver!r}")


def fig2_limit_variant(cfg: ExperimentConfig) -> ExperimentConfig:
    """The limit-scheme companion of an eps > 0 log-density configuration."""
    return dataclasses.replace(cfg, solver="hj-limit")
