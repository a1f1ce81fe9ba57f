"""
Command-line interface.

Exit codes: 0 success (certified / observable), 2 uncertified or not
observable, 1 error.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

import numpy as np

from .baseline import AmbiguousMinimizerError, calibrate_linear
from .constraints import ConstraintConfig
from .experiment import ExperimentConfig, estimate_error, records_to_csv, run_experiment, summarize
from .geometry import rotation_to_quat
from .io import (
    FormatError,
    GeneratorConfig,
    dumps,
    read_dataset,
    read_json,
    write_dataset,
    write_json,
    write_trajectory,
)
from .problem import UnderExcitedError, observability_check
from .sdp import CalibrationError, ExtrinsicEstimate, SolverOptions, calibrate
from .synth import InstanceSpec, generate_trajectory, random_instance

EXIT_OK, EXIT_ERROR, EXIT_UNCERTIFIED = 0, 1, 2

log = logging.getLogger("handeye_sdp")


def _emit(obj, out: str | None) -> None:
    if out:
        write_json(out, obj)
    else:
        sys.stdout.write(dumps(obj))


def estimate_to_json(est: ExtrinsicEstimate, data) -> dict:
    out = {
        "method": est.method,
        "rotation": est.rotation.tolist(),
        "quaternion": rotation_to_quat(est.rotation).tolist(),
        "translation": np.asarray(est.translation).tolist(),
        "scale": est.scale,
        "primal_cost": est.primal_cost,
        "solve_time_s": est.solve_time,
    }
    if est.certificate is not None:
        c = est.certificate
        out["certificate"] = {
            "certified": c.certified, "relative_gap": c.relative_gap,
            "nullspace_dim": c.nullspace_dim, "rotation_nullity": c.rotation_nullity,
            "translation_nullity": c.translation_nullity,
            "min_singular_value": c.min_singular_value,
            "orthogonality_residual": c.orthogonality_residual, "reasons": c.reasons,
        }
    if est.dual is not None:
        s = est.dual.stats
        out["dual"] = {"objective": est.dual.objective, "iterations": s.iterations,
                       "runtime_s": s.runtime, "termination": s.termination}
    if data.ground_truth is not None:
        rot, trans, scale = estimate_error(est, data.ground_truth)
        out["error"] = {"rot_err_rad": rot, "trans_err": trans, "scale_err": scale}
    return out


def cmd_gen(args) -> int:
    cfg = GeneratorConfig.from_json(read_json(args.config)) if args.config else GeneratorConfig()
    spec = InstanceSpec(cfg.trajectory, cfg.noise, cfg.scale_range, cfg.scale_known)
    poses = generate_trajectory(cfg.trajectory)
    data = random_instance(spec, args.seed)
    out = Path(args.out)
    generator = cfg.to_json()
    generator["seed"] = args.seed
    write_dataset(out, data, generator=generator)
    write_trajectory(out.with_name(out.stem + ".trajectory.json"), poses)
    return EXIT_OK


def _solver_options(args) -> SolverOptions:
    return SolverOptions(max_iterations=args.max_iter, objective_tolerance=args.solver_tol)


def _load(args):
    data = read_dataset(args.input)
    if args.known_scale:
        data = data.with_scale_known(True)
    return data


def cmd_calibrate(args) -> int:
    data = _load(args)
    est = calibrate(data, ConstraintConfig.from_label(args.constraints), _solver_options(args))
    _emit(estimate_to_json(est, data), args.out)
    if not est.certified:
        log.warning("solution NOT certified: %s", "; ".join(est.certificate.reasons))
        return EXIT_UNCERTIFIED
    return EXIT_OK


def cmd_baseline(args) -> int:
    data = _load(args)
    est = calibrate_linear(data)
    _emit(estimate_to_json(est, data), args.out)
    return EXIT_OK


def cmd_check(args) -> int:
    data = read_dataset(args.input)
    if args.reference == "ground-truth":
        if data.ground_truth is None:
            raise FormatError("dataset has no ground truth")
        R_ref = data.ground_truth.rotation
    elif args.reference == "estimate":
        try:
            R_ref = calibrate_linear(data).rotation
        except (AmbiguousMinimizerError, UnderExcitedError, ValueError):
            R_ref = np.eye(3)
    else:
        R_ref = np.eye(3)
    rep = observability_check(data, R_ref)
    _emit({"ok": rep.ok, "best_pair": rep.best_pair, "axis_angle_between": rep.axis_angle_between,
           "span_margin": rep.span_margin, "reference": args.reference, "messages": rep.messages},
          args.out)
    return EXIT_OK if rep.ok else EXIT_UNCERTIFIED


def cmd_experiment(args) -> int:
    cfg = ExperimentConfig.from_json(read_json(args.config))
    if args.seed is not None:
        cfg.seed = args.seed
    if args.workers is not None:
        cfg.workers = args.workers
    rows = run_experiment(cfg)
    out = Path(args.out)
    out.write_text(records_to_csv(rows, include_time=not args.no_timing), encoding="utf-8")
    summary_path = Path(args.summary) if args.summary else out.with_suffix(".summary.json")
    write_json(summary_path, summarize(rows, cfg))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="handeye-sdp",
                                description="Certifiably optimal hand-eye calibration")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gen", help="generate a synthetic dataset")
    g.add_argument("--config", help="generator config JSON (defaults if omitted)")
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--out", required=True)
    g.set_defaults(func=cmd_gen)

    def solve_flags(sp):
        sp.add_argument("input")
        sp.add_argument("--known-scale", action="store_true")
        sp.add_argument("--out")

    c = sub.add_parser("calibrate", help="certifiable SDP calibration")
    solve_flags(c)
    c.add_argument("--constraints", default="RCH", choices=["R", "RC", "RH", "RCH"])
    c.add_argument("--solver-tol", type=float, default=SolverOptions.objective_tolerance)
    c.add_argument("--max-iter", type=int, default=SolverOptions.max_iterations)
    c.set_defaults(func=cmd_calibrate)

    b = sub.add_parser("baseline", help="linear least-squares baseline")
    solve_flags(b)
    b.set_defaults(func=cmd_baseline)

    k = sub.add_parser("check", help="observability (excitation) check")
    k.add_argument("input")
    k.add_argument("--reference", default="estimate", choices=["estimate", "identity", "ground-truth"],
                   help="rotation at which the translation span condition is evaluated")
    k.add_argument("--out")
    k.set_defaults(func=cmd_check)

    e = sub.add_parser("experiment", help="Monte-Carlo certification / accuracy study")
    e.add_argument("config")
    e.add_argument("--out", required=True, help="trial table (CSV)")
    e.add_argument("--summary", help="summary JSON (default: next to the CSV)")
    e.add_argument("--seed", type=int)
    e.add_argument("--workers", type=int)
    e.add_argument("--no-timing", action="store_true", help="write time_s as 0 for reproducible output")
    e.set_defaults(func=cmd_experiment)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s: %(message)s")
    try:
        return args.func(args)
    except (FormatError, OSError) as exc:
        log.error("input: %s", exc)
    except CalibrationError as exc:
        log.error("%s", exc)
    except (AmbiguousMinimizerError, UnderExcitedError) as exc:
        log.error("baseline: %s", exc)
    except ValueError as exc:
        log.error("%s", exc)
    return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
