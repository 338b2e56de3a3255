"""Instance generation, selector runs and the benchmark protocol.

Instances are prediction sets drawn i.i.d. uniform over the box with NumPy's
PCG64 generator. Benchmark cells seed each instance from
``SeedSequence([suite_seed, env_index, regime_index, instance_index])``.
"""

from __future__ import annotations

import csv
import hashlib
import json
import logging
import math
import os
import statistics
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from . import kernels
from .covariance import Box, CovarianceModel, as_points
from .selection import ProblemInstance, SelectionReport, centroid_greedy, grid_greedy, matched_rho

log = logging.getLogger(__name__)

DEFAULT_MODEL = CovarianceModel(sigma0=12.87, length_scale=8.33, noise_var=0.0361)
ENVIRONMENTS = {"small": 40.0, "med": 120.0, "large": 600.0}
REGIMES = {"sparse": (20, 8), "moderate": (300, 75), "dense": (1000, 200)}
INSTANCE_DISTRIBUTION = "iid uniform over the box, numpy PCG64"

ROW_FIELDS = ["env", "regime", "seed", "method", "rho", "ground_set", "k", "objective", "mse", "seconds"]
ESCALATION_FIELDS = [
    "env", "regime", "seed", "rho_start", "rho_final", "grid_objective", "centroid_objective",
    "grid_seconds", "centroid_seconds", "time_ratio", "status",
]


class HarnessIOError(OSError):
    """File input/output failed; the message carries the path."""


@dataclass
class RunConfig:
    method: str = "centroid"
    rho: int | None = None
    matched_resource: bool = False
    seed: int = 0
    repeats: int = 1
    output_path: str | None = None

    def __post_init__(self):
        if self.method not in ("grid", "centroid", "both"):
            raise ValueError(f"unknown method {self.method!r}")
        if self.method in ("grid", "both") and self.rho is None and not self.matched_resource:
            raise ValueError("grid method needs --rho or --matched")
        if self.rho is not None and self.rho < 1:
            raise ValueError("rho must be a positive integer")
        if self.repeats < 1:
            raise ValueError("repeats must be positive")
        if self.seed < 0:
            raise ValueError("seed must be non-negative")


@dataclass
class BenchmarkSuite:
    environments: dict = field(default_factory=lambda: dict(ENVIRONMENTS))
    regimes: dict = field(default_factory=lambda: dict(REGIMES))
    model: CovarianceModel = DEFAULT_MODEL
    instances_per_cell: int = 10
    seed: int = 0
    rho_cap: int = 512
    parity: float = 0.999

    @classmethod
    def from_dict(cls, data: dict) -> "BenchmarkSuite":
        data = dict(data)
        if "model" in data:
            data["model"] = CovarianceModel(**data["model"])
        if "regimes" in data:
            data["regimes"] = {k: tuple(v) for k, v in data["regimes"].items()}
        unknown = set(data) - set(cls.__dataclass_fields__)
        if unknown:
            raise ValueError(f"unknown suite keys: {sorted(unknown)}")
        return cls(**data)

    @classmethod
    def from_file(cls, path) -> "BenchmarkSuite":
        try:
            with open(path) as fh:
                return cls.from_dict(json.load(fh))
        except OSError as exc:
            raise HarnessIOError(f"cannot read suite file {path}: {exc}") from exc

    def to_dict(self) -> dict:
        out = asdict(self)
        out["model"] = self.model.to_dict()
        out["regimes"] = {k: list(v) for k, v in self.regimes.items()}
        return out


def generate_instance(box: Box, n_pred: int, budget: int, model: CovarianceModel, seed: int) -> ProblemInstance:
    if n_pred < 1:
        raise ValueError("n_pred must be at least 1")
    rng = np.random.Generator(np.random.PCG64(seed))
    lo, hi = np.asarray(box.lo), np.asarray(box.hi)
    omega = lo + (hi - lo) * rng.random((n_pred, box.dim))
    return ProblemInstance(box=box, omega=omega, budget=budget, model=model)


def instance_hash(instance: ProblemInstance) -> str:
    blob = json.dumps(instance.to_dict(), sort_keys=True).encode()
    return hashlib.sha256(blob).hexdigest()[:16]


def load_omega_csv(path) -> np.ndarray:
    """Read prediction points from a CSV with header ``x,y[,z...]``."""
    try:
        with open(path, newline="") as fh:
            rows = list(csv.reader(fh))
    except OSError as exc:
        raise HarnessIOError(f"cannot read omega file {path}: {exc}") from exc
    if not rows:
        raise ValueError(f"{path}: empty file")
    header = [h.strip() for h in rows[0]]
    try:
        pts = [[float(v) for v in row] for row in rows[1:] if row]
    except ValueError as exc:
        raise ValueError(f"{path}: non-numeric entry ({exc})") from exc
    if not pts or any(len(p) != len(header) for p in pts):
        raise ValueError(f"{path}: expected at least one row with {len(header)} columns")
    return as_points(pts, len(header))


def write_omega_csv(path, omega) -> None:
    omega = as_points(omega)
    names = ["x", "y", "z"][: omega.shape[1]] if omega.shape[1] <= 3 else [f"x{i}" for i in range(omega.shape[1])]
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(names)
        w.writerows([[repr(float(v)) for v in p] for p in omega])


def _timed_min(fn, repeats: int) -> SelectionReport:
    report = fn()
    for _ in range(repeats - 1):
        report.elapsed = min(report.elapsed, fn().elapsed)
    return report


def run(config: RunConfig, instance: ProblemInstance) -> list[SelectionReport]:
    """Run the configured selector(s); elapsed is the minimum over ``repeats``."""
    reports = []
    if config.method in ("centroid", "both"):
        rep = _timed_min(lambda: centroid_greedy(instance), config.repeats)
        if config.rho is not None or config.matched_resource:
            rep.notes.append("rho ignored: centroid selection never uses a grid")
        reports.append(rep)
    if config.method in ("grid", "both"):
        rho = matched_rho(instance.omega.shape[0]) if config.matched_resource else config.rho
        reports.append(_timed_min(lambda: grid_greedy(instance, rho), config.repeats))
    return reports


def run_document(config: RunConfig, instance: ProblemInstance, reports) -> dict:
    return {
        "instance_hash": instance_hash(instance),
        "instance": instance.to_dict(),
        "config": asdict(config),
        "backend": kernels.BACKEND,
        "reports": [r.to_dict() for r in reports],
    }


# ---------------------------------------------------------------------------
# benchmark protocol

_warmed = False


def _warm_up():
    global _warmed
    if not _warmed:
        inst = generate_instance(Box.square(40.0), 20, 4, DEFAULT_MODEL, seed=12345)
        centroid_greedy(inst)
        grid_greedy(inst, 5)
        _warmed = True


def cell_seed(base: int, env_idx: int, regime_idx: int, i: int) -> int:
    return int(np.random.SeedSequence([base, env_idx, regime_idx, i]).generate_state(1)[0])


def _bench_task(task) -> tuple[list[dict], dict]:
    env, side, regime, n_pred, budget, seed, suite = task
    _warm_up()
    inst = generate_instance(Box.square(side), n_pred, budget, suite.model, seed)
    cen = centroid_greedy(inst)
    rho0 = matched_rho(n_pred)
    grid = grid_greedy(inst, rho0)
    rows = [_row(env, regime, seed, r, budget) for r in (cen, grid)]

    rho = rho0
    status = "parity"
    while grid.objective < suite.parity * cen.objective:
        if rho >= suite.rho_cap:
            status = "parity_not_reached"
            break
        rho = min(2 * rho, suite.rho_cap)
        grid = grid_greedy(inst, rho)
    esc = {
        "env": env, "regime": regime, "seed": seed, "rho_start": rho0, "rho_final": rho,
        "grid_objective": grid.objective, "centroid_objective": cen.objective,
        "grid_seconds": grid.elapsed, "centroid_seconds": cen.elapsed,
        "time_ratio": grid.elapsed / cen.elapsed if cen.elapsed > 0 else math.inf,
        "status": status,
    }
    log.info("%s/%s seed=%d: centroid mse %.4g, grid mse %.4g, parity rho %d (%s)",
             env, regime, seed, cen.total_mse, rows[1]["mse"], rho, status)
    return rows, esc


def _row(env, regime, seed, report: SelectionReport, k) -> dict:
    return {
        "env": env, "regime": regime, "seed": seed, "method": report.method,
        "rho": report.rho if report.rho is not None else "", "ground_set": report.ground_set_size,
        "k": k, "objective": report.objective, "mse": report.total_mse, "seconds": report.elapsed,
    }


def _fmt(v):
    return repr(v) if isinstance(v, float) else v


def _write_csv(path: Path, fields, rows):
    with open(path, "w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=fields)
        w.writeheader()
        for r in rows:
            w.writerow({k: _fmt(r[k]) for k in fields})


def _mean_std(values):
    values = list(values)
    if not values:
        return None, None
    return statistics.fmean(values), (statistics.stdev(values) if len(values) > 1 else 0.0)


def bench(suite: BenchmarkSuite, out_dir, jobs: int = 1) -> dict:
    """Run every (environment, regime, instance) cell and write the results.

    Writes ``rows.csv`` (one row per run), ``escalation.csv`` (grid resolution
    needed to match the centroid objective) and ``summary.json`` (per-cell
    aggregates). Returns the summary.
    """
    out = Path(out_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise HarnessIOError(f"cannot create output directory {out}: {exc}") from exc

    tasks = []
    for e_idx, (env, side) in enumerate(suite.environments.items()):
        for r_idx, (regime, (n_pred, budget)) in enumerate(suite.regimes.items()):
            for i in range(suite.instances_per_cell):
                seed = cell_seed(suite.seed, e_idx, r_idx, i)
                tasks.append((env, float(side), regime, int(n_pred), int(budget), seed, suite))

    t0 = time.perf_counter()
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_bench_task, tasks))
    else:
        results = [_bench_task(t) for t in tasks]
    wall = time.perf_counter() - t0

    rows = sorted((r for rs, _ in results for r in rs),
                  key=lambda r: (r["env"], r["regime"], r["seed"], r["method"]))
    escalations = sorted((e for _, e in results), key=lambda e: (e["env"], e["regime"], e["seed"]))

    cells = {}
    for env in suite.environments:
        for regime in suite.regimes:
            cell = {}
            for method in ("centroid", "grid"):
                sel = [r for r in rows if r["env"] == env and r["regime"] == regime and r["method"] == method]
                mse_mean, mse_std = _mean_std(r["mse"] for r in sel)
                sec_mean, sec_std = _mean_std(r["seconds"] for r in sel)
                cell[method] = {"n": len(sel), "mse_mean": mse_mean, "mse_std": mse_std,
                                "seconds_mean": sec_mean, "seconds_std": sec_std}
            esc = [e for e in escalations if e["env"] == env and e["regime"] == regime]
            cell["escalation"] = {
                "n": len(esc),
                "parity_reached": sum(e["status"] == "parity" for e in esc),
                "grid_not_faster": sum(e["grid_seconds"] >= e["centroid_seconds"] for e in esc),
                "time_ratio_mean": _mean_std(e["time_ratio"] for e in esc)[0],
            }
            cells[f"{env}/{regime}"] = cell

    summary = {
        "suite": suite.to_dict(),
        "instance_distribution": INSTANCE_DISTRIBUTION,
        "backend": kernels.BACKEND,
        "jobs": jobs,
        "wall_seconds": wall,
        "cells": cells,
    }
    try:
        _write_csv(out / "rows.csv", ROW_FIELDS, rows)
        _write_csv(out / "escalation.csv", ESCALATION_FIELDS, escalations)
        with open(out / "summary.json", "w") as fh:
            json.dump(summary, fh, indent=2)
    except OSError as exc:
        raise HarnessIOError(f"cannot write results to {out}: {exc}") from exc
    return summary


def default_jobs() -> int:
    return max(1, min(8, os.cpu_count() or 1))
