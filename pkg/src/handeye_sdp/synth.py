"""
Synthetic ground-truth trajectories and egomotion measurements.

Sensor ``a`` drives along a planar curve draped over the height field
``z = A sin(wx x) sin(wy y)``.  Its x-axis follows the direction of travel
and its z-axis the surface normal.  Sensor ``b`` is rigidly attached through
the extrinsic transform ``Theta = T_ba``, so ``T_wa = T_wb Theta``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .geometry import RigidTransform, exp_so3, random_rotation, rotation_to_axis_angle
from .problem import EgomotionDataset, GroundTruth


class TrajectoryError(ValueError):
    pass


@dataclass(frozen=True)
class TrajectoryConfig:
    num_steps: int = 51
    path: str = "circle"                      # "circle" | "lissajous" | "line"
    radius: float = 4.0
    lissajous_amplitude: tuple[float, float] = (4.0, 3.0)
    lissajous_frequency: tuple[float, float] = (1.0, 2.0)
    step_length: float = 0.5
    start_phase: float = 0.0
    amplitude: float = 0.5
    frequency: tuple[float, float] = (1.0, 1.0)
    rotation_range: tuple[float, float] | None = (0.05, 0.3)
    gt_extrinsic: RigidTransform | None = None
    gt_scale: float = 1.0

    def __post_init__(self):
        if self.num_steps < 3:
            raise TrajectoryError("num_steps must be at least 3")
        if not self.gt_scale > 0:
            raise TrajectoryError("gt_scale must be positive")
        if self.path not in ("circle", "lissajous", "line"):
            raise TrajectoryError(f"unknown path {self.path!r}")
        if self.step_length <= 0:
            raise TrajectoryError("step_length must be positive")


@dataclass(frozen=True)
class NoiseConfig:
    translation_sigma: float = 0.0            # percent of |t| or absolute length
    rotation_sigma: float = 0.0               # radians, per axis
    translation_mode: str = "relative_percent"
    seed: int = 0

    def __post_init__(self):
        if self.translation_sigma < 0 or self.rotation_sigma < 0:
            raise ValueError("noise standard deviations must be non-negative")
        if self.translation_mode not in ("relative_percent", "absolute"):
            raise ValueError(f"unknown translation noise mode {self.translation_mode!r}")


def _curve(cfg: TrajectoryConfig, s):
    """Planar curve and its derivative at parameter values ``s``."""
    if cfg.path == "circle":
        th = s + cfg.start_phase
        xy = cfg.radius * np.stack([np.cos(th), np.sin(th)], axis=-1)
        dxy = cfg.radius * np.stack([-np.sin(th), np.cos(th)], axis=-1)
    elif cfg.path == "lissajous":
        (ax, ay), (fx, fy) = cfg.lissajous_amplitude, cfg.lissajous_frequency
        th = s + cfg.start_phase
        xy = np.stack([ax * np.sin(fx * th), ay * np.sin(fy * th)], axis=-1)
        dxy = np.stack([ax * fx * np.cos(fx * th), ay * fy * np.cos(fy * th)], axis=-1)
    else:
        d = np.array([np.cos(cfg.start_phase), np.sin(cfg.start_phase)])
        xy = s[:, None] * d
        dxy = np.broadcast_to(d, xy.shape)
    return xy, dxy


def _height(cfg: TrajectoryConfig, xy):
    wx, wy = cfg.frequency
    x, y = xy[..., 0], xy[..., 1]
    h = cfg.amplitude * np.sin(wx * x) * np.sin(wy * y)
    hx = cfg.amplitude * wx * np.cos(wx * x) * np.sin(wy * y)
    hy = cfg.amplitude * wy * np.sin(wx * x) * np.cos(wy * y)
    return h, hx, hy


def _arc_length_parameters(cfg: TrajectoryConfig) -> np.ndarray:
    """Curve parameters spaced by ``step_length`` of 3D arc length."""
    total = cfg.step_length * (cfg.num_steps - 1)
    if cfg.path == "line":
        # arc length on the surface is not linear in s; integrate numerically like the others
        s_max = 2.0 * total + 1.0
    else:
        speed = cfg.radius if cfg.path == "circle" else min(
            a * f for a, f in zip(cfg.lissajous_amplitude, cfg.lissajous_frequency))
        s_max = 2.0 * total / max(speed, 1e-9) + 1.0
    while True:
        s = np.linspace(0.0, s_max, 20000 * cfg.num_steps // 50 + 2000)
        xy, dxy = _curve(cfg, s)
        _, hx, hy = _height(cfg, xy)
        dz = hx * dxy[:, 0] + hy * dxy[:, 1]
        speed = np.sqrt(np.sum(dxy**2, axis=1) + dz**2)
        arc = np.concatenate([[0.0], np.cumsum(0.5 * (speed[1:] + speed[:-1]) * np.diff(s))])
        if arc[-1] >= total:
            break
        s_max *= 2.0
    targets = cfg.step_length * np.arange(cfg.num_steps)
    return np.interp(targets, arc, s)


def generate_trajectory(cfg: TrajectoryConfig) -> list[RigidTransform]:
    """Absolute poses ``T_{w a_t}`` of sensor ``a`` along the configured path."""
    s = _arc_length_parameters(cfg)
    xy, dxy = _curve(cfg, s)
    h, hx, hy = _height(cfg, xy)
    pos = np.column_stack([xy, h])
    tangent = np.column_stack([dxy, hx * dxy[:, 0] + hy * dxy[:, 1]])
    normal = np.column_stack([-hx, -hy, np.ones_like(h)])
    poses = []
    for p, tx, nz in zip(pos, tangent, normal):
        nz = nz / np.linalg.norm(nz)
        tx = tx - (tx @ nz) * nz
        norm_t = np.linalg.norm(tx)
        if norm_t < 1e-9:
            raise TrajectoryError("path tangent is parallel to the surface normal")
        tx = tx / norm_t
        ty = np.cross(nz, tx)
        poses.append(RigidTransform(np.column_stack([tx, ty, nz]), p))

    if cfg.rotation_range is not None:
        lo, hi = cfg.rotation_range
        angles = relative_rotation_angles(poses)
        if angles.min() < lo or angles.max() > hi:
            raise TrajectoryError(
                f"relative rotation angles span [{angles.min():.3g}, {angles.max():.3g}] rad, "
                f"outside the configured range [{lo}, {hi}]")
    return poses


def relative_motions(poses: list[RigidTransform]) -> list[RigidTransform]:
    return [p.inverse() @ q for p, q in zip(poses[:-1], poses[1:])]


def relative_rotation_angles(poses: list[RigidTransform]) -> np.ndarray:
    return np.array([rotation_to_axis_angle(m.rotation)[1] for m in relative_motions(poses)])


def degenerate_trajectory(kind: str, num_steps: int = 51,
                          rng: np.random.Generator | None = None) -> list[RigidTransform]:
    """
    Poses that leave the calibration unobservable.

    ``"single_axis"`` drives a random planar path while rotating only about the
    world z axis; ``"pure_translation"`` keeps a fixed orientation throughout.
    """
    rng = np.random.default_rng() if rng is None else rng
    steps = rng.uniform(-1.0, 1.0, size=(num_steps - 1, 3))
    if kind == "single_axis":
        steps[:, 2] = 0.0
        headings = np.r_[0.0, np.cumsum(rng.uniform(0.1, 0.3, num_steps - 1))]
        rotations = [exp_so3([0.0, 0.0, h]) for h in headings]
    elif kind == "pure_translation":
        R0 = random_rotation(rng)
        rotations = [R0] * num_steps
    else:
        raise ValueError(f"unknown degenerate trajectory {kind!r}")
    positions = np.vstack([np.zeros(3), np.cumsum(steps, axis=0)])
    return [RigidTransform(R, p) for R, p in zip(rotations, positions)]


def random_extrinsic(rng: np.random.Generator, box: float = 1.0) -> RigidTransform:
    """Uniform random rotation with a translation uniform in a cube of side ``box``."""
    return RigidTransform(random_rotation(rng), rng.uniform(-box / 2, box / 2, size=3))


def derive_egomotion(poses_a: list[RigidTransform], extrinsic: RigidTransform,
                     scale: float = 1.0, scale_known: bool = False) -> EgomotionDataset:
    """
    Noise-free relative motions of both sensors.

    The camera translations are reported in the camera's own (unknown) units:
    the metric translation equals ``scale`` times the reported one, so the
    stored ``tb`` is the metric translation divided by ``scale``.
    """
    if not scale > 0:
        raise ValueError("scale must be positive")
    theta_inv = extrinsic.inverse()
    poses_b = [p @ theta_inv for p in poses_a]
    motions_a = relative_motions(poses_a)
    motions_b = [RigidTransform(m.rotation, m.translation / scale) for m in relative_motions(poses_b)]
    gt = GroundTruth(extrinsic.rotation, extrinsic.translation, float(scale))
    return EgomotionDataset.from_transforms(motions_a, motions_b, scale_known=scale_known,
                                            ground_truth=gt)


def _perturb(R, t, noise: NoiseConfig, rng: np.random.Generator):
    if noise.translation_mode == "relative_percent":
        sigma = noise.translation_sigma / 100.0 * np.linalg.norm(t, axis=1, keepdims=True)
    else:
        sigma = noise.translation_sigma
    t_noisy = t + sigma * rng.standard_normal(t.shape)
    phi = noise.rotation_sigma * rng.standard_normal((len(R), 3))
    R_noisy = np.array([exp_so3(p) @ Rk for p, Rk in zip(phi, R)])
    return R_noisy, t_noisy


def add_noise(dataset: EgomotionDataset, noise: NoiseConfig) -> EgomotionDataset:
    """Gaussian translation noise and left-perturbation rotation noise on both sensors."""
    if noise.translation_sigma == 0 and noise.rotation_sigma == 0:
        return dataset
    rng = np.random.default_rng(noise.seed)
    Ra, ta = _perturb(dataset.Ra, dataset.ta, noise, rng)
    Rb, tb = _perturb(dataset.Rb, dataset.tb, noise, rng)
    return EgomotionDataset(Ra, ta, Rb, tb, scale_known=dataset.scale_known,
                            ground_truth=dataset.ground_truth)


@dataclass(frozen=True)
class InstanceSpec:
    """Everything needed to regenerate one random synthetic trial."""

    trajectory: TrajectoryConfig = field(default_factory=TrajectoryConfig)
    noise: NoiseConfig = field(default_factory=NoiseConfig)
    scale_range: tuple[float, float] | None = None
    scale_known: bool = False


def random_instance(spec: InstanceSpec, seed: int) -> EgomotionDataset:
    """
    Draw one trial: random extrinsic (unless pinned), optional random scale,
    then noise seeded from ``seed``.
    """
    rng = np.random.default_rng(seed)
    cfg = spec.trajectory
    extrinsic = cfg.gt_extrinsic if cfg.gt_extrinsic is not None else random_extrinsic(rng)
    if spec.scale_range is not None:
        scale = float(np.exp(rng.uniform(*np.log(spec.scale_range))))
    else:
        scale = cfg.gt_scale
    data = derive_egomotion(generate_trajectory(cfg), extrinsic, scale, scale_known=spec.scale_known)
    noise_seed = int(rng.integers(2**32))
    return add_noise(data, NoiseConfig(spec.noise.translation_sigma, spec.noise.rotation_sigma,
                                       spec.noise.translation_mode, noise_seed))
