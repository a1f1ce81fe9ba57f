"""Certifiably optimal hand-eye calibration with unknown monocular scale."""

from .baseline import AmbiguousMinimizerError, calibrate_linear
from .constraints import ConstraintConfig, ConstraintSet, build_constraints
from .geometry import RigidTransform
from .problem import (
    EgomotionDataset,
    GroundTruth,
    UnderExcitedError,
    build_cost,
    evaluate_cost_residual,
    observability_check,
)
from .sdp import (
    CalibrationError,
    Certificate,
    ExtrinsicEstimate,
    SolverOptions,
    calibrate,
    certify,
    extract_primal,
    solve_dual,
)
from .synth import InstanceSpec, NoiseConfig, TrajectoryConfig, generate_trajectory, random_instance

__all__ = [
    "AmbiguousMinimizerError", "CalibrationError", "Certificate", "ConstraintConfig", "ConstraintSet",
    "EgomotionDataset", "ExtrinsicEstimate", "GroundTruth", "InstanceSpec", "NoiseConfig",
    "RigidTransform", "SolverOptions", "TrajectoryConfig", "UnderExcitedError", "build_constraints",
    "build_cost", "calibrate", "calibrate_linear", "certify", "evaluate_cost_residual",
    "extract_primal", "generate_trajectory", "observability_check", "random_instance", "solve_dual",
]
