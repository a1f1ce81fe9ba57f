"""
Monte-Carlo harness: certification rates per noise level and constraint set,
and error statistics of the SDP method against the linear baseline.
"""

from __future__ import annotations

import csv
import io
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from .baseline import calibrate_linear
from .constraints import ConstraintConfig
from .geometry import rotation_geodesic_error
from .io import FormatError, trajectory_config_from_dict, trajectory_config_to_dict
from .problem import GroundTruth
from .sdp import ExtrinsicEstimate, SolverOptions, calibrate
from .synth import InstanceSpec, NoiseConfig, TrajectoryConfig, random_instance

CSV_COLUMNS = ["trial", "noise_pct", "rot_sigma", "constraints", "method", "certified", "gap",
               "rot_err_rad", "trans_err", "scale_err", "cost", "time_s"]
METHODS = ("dual_sdp", "linear")
QUANTILES = (0.1, 0.25, 0.5, 0.75, 0.9)


@dataclass
class ExperimentConfig:
    trials: int = 100
    noise_levels: list[float] = field(default_factory=lambda: [0.0, 1.0])
    rotation_sigma: list[float] = field(default_factory=lambda: [0.01])
    constraint_configs: list[str] = field(default_factory=lambda: ["R"])
    trajectory: TrajectoryConfig = field(default_factory=TrajectoryConfig)
    methods: list[str] = field(default_factory=lambda: ["dual_sdp"])
    seed: int = 0
    scale_range: tuple[float, float] | None = (0.2, 5.0)
    scale_known: bool = False
    histogram_bins: int = 20
    workers: int = 1

    def __post_init__(self):
        if self.trials < 1:
            raise ValueError("trials must be at least 1")
        if any(n < 0 for n in self.noise_levels) or any(s < 0 for s in self.rotation_sigma):
            raise ValueError("noise levels must be non-negative")
        bad = set(self.methods) - set(METHODS)
        if bad:
            raise ValueError(f"unknown method(s) {sorted(bad)}")
        for label in self.constraint_configs:
            ConstraintConfig.from_label(label)

    @classmethod
    def from_json(cls, obj: dict) -> "ExperimentConfig":
        obj = dict(obj)
        allowed = {f for f in cls.__dataclass_fields__}
        unknown = set(obj) - allowed
        if unknown:
            raise FormatError(f"experiment config: unknown field(s) {sorted(unknown)}")
        if "trajectory" in obj:
            obj["trajectory"] = trajectory_config_from_dict(obj["trajectory"])
        rs = obj.get("rotation_sigma")
        if rs is not None and not isinstance(rs, list):
            obj["rotation_sigma"] = [rs]
        if obj.get("scale_range") is not None:
            obj["scale_range"] = tuple(obj["scale_range"])
        try:
            return cls(**obj)
        except (TypeError, ValueError) as exc:
            raise FormatError(f"experiment config: {exc}") from exc

    def to_json(self) -> dict:
        d = asdict(self)
        d["trajectory"] = trajectory_config_to_dict(self.trajectory)
        d["scale_range"] = list(self.scale_range) if self.scale_range else None
        return d


@dataclass
class TrialRecord:
    trial: int
    noise_pct: float
    rot_sigma: float
    constraints: str
    method: str
    certified: bool
    gap: float
    rot_err_rad: float
    trans_err: float
    scale_err: float
    cost: float
    time_s: float


def estimate_error(est: ExtrinsicEstimate, gt: GroundTruth) -> tuple[float, float, float]:
    """Geodesic rotation error, translation error and absolute scale error."""
    rot = rotation_geodesic_error(est.rotation, gt.rotation)
    trans = float(np.linalg.norm(np.asarray(est.translation) - gt.translation))
    scale = 0.0 if est.scale is None else abs(est.scale - gt.scale)
    return rot, trans, scale


def grid(config: ExperimentConfig) -> list[tuple[float, float, str, str]]:
    """Cells ``(noise_pct, rot_sigma, constraints, method)`` in output order."""
    cells = []
    for n in config.noise_levels:
        for rs in config.rotation_sigma:
            if "dual_sdp" in config.methods:
                cells += [(n, rs, c, "dual_sdp") for c in config.constraint_configs]
            if "linear" in config.methods:
                cells.append((n, rs, "-", "linear"))
    return cells


def _run_trial(args) -> list[TrialRecord]:
    config, n, rs, trial = args
    spec = InstanceSpec(trajectory=config.trajectory, noise=NoiseConfig(n, rs),
                        scale_range=config.scale_range, scale_known=config.scale_known)
    data = random_instance(spec, config.seed + trial)
    rows = []
    for n_, rs_, label, method in grid(config):
        if (n_, rs_) != (n, rs):
            continue
        start = time.perf_counter()
        try:
            if method == "dual_sdp":
                est = calibrate(data, ConstraintConfig.from_label(label), SolverOptions())
            else:
                est = calibrate_linear(data)
        except (RuntimeError, ValueError):
            rows.append(TrialRecord(trial, n, rs, label, method, False, float("nan"),
                                    float("nan"), float("nan"), float("nan"), float("nan"),
                                    time.perf_counter() - start))
            continue
        elapsed = time.perf_counter() - start
        rot, trans, scale = estimate_error(est, data.ground_truth)
        cert = est.certificate
        rows.append(TrialRecord(trial, n, rs, label, method, bool(est.certified),
                                cert.relative_gap if cert else float("nan"),
                                rot, trans, scale, est.primal_cost, elapsed))
    return rows


def run_experiment(config: ExperimentConfig) -> list[TrialRecord]:
    jobs = [(config, n, rs, k) for n in config.noise_levels for rs in config.rotation_sigma
            for k in range(config.trials)]
    if config.workers > 1:
        with ProcessPoolExecutor(config.workers) as pool:
            chunks = list(pool.map(_run_trial, jobs))
    else:
        chunks = [_run_trial(j) for j in jobs]
    order = {cell: i for i, cell in enumerate(grid(config))}
    rows = [r for chunk in chunks for r in chunk]
    rows.sort(key=lambda r: (order[(r.noise_pct, r.rot_sigma, r.constraints, r.method)], r.trial))
    return rows


def _fmt(v) -> str:
    if isinstance(v, bool):
        return "1" if v else "0"
    if isinstance(v, float):
        return repr(v)
    return str(v)


def records_to_csv(rows: list[TrialRecord], include_time: bool = True) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    for r in rows:
        d = asdict(r)
        if not include_time:
            d["time_s"] = 0.0
        w.writerow([_fmt(d[c]) for c in CSV_COLUMNS])
    return buf.getvalue()


def summarize(rows: list[TrialRecord], config: ExperimentConfig) -> dict:
    cells = []
    for n, rs, label, method in grid(config):
        sel = [r for r in rows if (r.noise_pct, r.rot_sigma, r.constraints, r.method) == (n, rs, label, method)]
        peers = [r for r in rows if (r.noise_pct, r.rot_sigma) == (n, rs)]
        cell = {"noise_pct": n, "rot_sigma": rs, "constraints": label, "method": method,
                "trials": len(sel),
                "failures": int(sum(np.isnan(r.cost) for r in sel))}
        cell["certified_rate"] = (float(np.mean([r.certified for r in sel]))
                                  if method == "dual_sdp" and sel else None)
        cell["quantiles"], cell["histograms"] = {}, {}
        for metric in ("rot_err_rad", "trans_err", "scale_err"):
            vals = np.array([getattr(r, metric) for r in sel], dtype=float)
            vals = vals[np.isfinite(vals)]
            everything = np.array([getattr(r, metric) for r in peers], dtype=float)
            everything = everything[np.isfinite(everything)]
            top = float(everything.max()) if everything.size and everything.max() > 0 else 1.0
            edges = np.linspace(0.0, top, config.histogram_bins + 1)
            counts, _ = np.histogram(vals, bins=edges)
            cell["quantiles"][metric] = (dict(zip([str(q) for q in QUANTILES],
                                                  np.quantile(vals, QUANTILES).tolist()))
                                         if vals.size else None)
            cell["histograms"][metric] = {"edges": edges.tolist(), "counts": counts.tolist()}
        cells.append(cell)
    return {"config": config.to_json(), "cells": cells}
