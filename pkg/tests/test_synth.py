import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from handeye_sdp.geometry import is_rotation, log_so3
from handeye_sdp.problem import EgomotionDataset, evaluate_cost_residual
from handeye_sdp.synth import (
    InstanceSpec,
    NoiseConfig,
    TrajectoryConfig,
    TrajectoryError,
    add_noise,
    degenerate_trajectory,
    derive_egomotion,
    generate_trajectory,
    random_extrinsic,
    random_instance,
    relative_rotation_angles,
)

from conftest import make_instance


@pytest.mark.parametrize("path", ["circle", "lissajous"])
def test_trajectory_shape_and_excitation(path):
    cfg = TrajectoryConfig(path=path, rotation_range=None)
    poses = generate_trajectory(cfg)
    assert len(poses) == cfg.num_steps
    assert all(is_rotation(p.rotation) for p in poses)
    steps = np.linalg.norm(np.diff([p.translation for p in poses], axis=0), axis=1)
    assert np.allclose(steps, cfg.step_length, rtol=0.15)
    angles = relative_rotation_angles(poses)
    assert angles.min() > 0


def test_default_trajectory_respects_rotation_range():
    cfg = TrajectoryConfig()
    angles = relative_rotation_angles(generate_trajectory(cfg))
    lo, hi = cfg.rotation_range
    assert lo <= angles.min() and angles.max() <= hi


def test_rotation_range_violation_raises():
    with pytest.raises(TrajectoryError):
        generate_trajectory(TrajectoryConfig(rotation_range=(1.0, 2.0)))


def test_frames_follow_surface():
    cfg = TrajectoryConfig(rotation_range=None)
    for p in generate_trajectory(cfg)[:10]:
        x, y = p.translation[:2]
        A, (wx, wy) = cfg.amplitude, cfg.frequency
        assert p.translation[2] == pytest.approx(A * np.sin(wx * x) * np.sin(wy * y))
        grad = np.array([A * wx * np.cos(wx * x) * np.sin(wy * y), A * wy * np.sin(wx * x) * np.cos(wy * y)])
        normal = np.r_[-grad, 1.0] / np.linalg.norm(np.r_[-grad, 1.0])
        assert np.allclose(p.rotation[:, 2], normal, atol=1e-9)


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 10**6), st.floats(0.1, 10.0))
def test_noise_free_egomotion_is_consistent(seed, scale):
    rng = np.random.default_rng(seed)
    X = random_extrinsic(rng)
    data = derive_egomotion(generate_trajectory(TrajectoryConfig()), X, scale)
    assert evaluate_cost_residual(data, X.rotation, X.translation, scale) < 1e-18 * max(1, scale**2) + 1e-20
    for Ra, Rb in zip(data.Ra, data.Rb):
        assert np.allclose(X.rotation @ Ra, Rb @ X.rotation, atol=1e-12)


def test_scale_divides_camera_translations():
    X = random_extrinsic(np.random.default_rng(5))
    poses = generate_trajectory(TrajectoryConfig())
    one, two = derive_egomotion(poses, X, 1.0), derive_egomotion(poses, X, 2.0)
    assert np.allclose(2.0 * two.tb, one.tb, atol=1e-14)
    assert np.array_equal(one.Rb, two.Rb) and np.array_equal(one.ta, two.ta)


def test_instances_are_deterministic():
    a = make_instance(17, translation_pct=1.0, rotation_sigma=0.01)
    b = make_instance(17, translation_pct=1.0, rotation_sigma=0.01)
    assert np.array_equal(a.tb, b.tb) and np.array_equal(a.Rb, b.Rb)
    assert not np.array_equal(a.tb, make_instance(18, translation_pct=1.0, rotation_sigma=0.01).tb)


def test_scale_is_log_uniform_in_range():
    scales = np.array([random_instance(InstanceSpec(scale_range=(0.2, 5.0)), s).ground_truth.scale
                       for s in range(100)])
    assert scales.min() >= 0.2 and scales.max() <= 5.0
    assert abs(np.median(np.log(scales))) < 0.4         # log-uniform median is log(1) = 0


def _many(n):
    I = np.tile(np.eye(3), (n, 1, 1))
    t = np.tile([3.0, 4.0, 0.0], (n, 1))                 # |t| = 5
    return EgomotionDataset(I, t.copy(), I, t.copy())


def test_translation_noise_statistics():
    noisy = add_noise(_many(5000), NoiseConfig(translation_sigma=2.0, seed=1))
    d = noisy.tb - 5.0 * np.array([0.6, 0.8, 0.0])
    assert np.allclose(d.std(axis=0), 0.02 * 5.0, rtol=0.1)      # 2% of |t| per component
    assert np.abs(d.mean(axis=0)).max() < 0.01
    assert not np.allclose(noisy.ta, noisy.tb)                   # both sensors perturbed


def test_rotation_noise_statistics():
    noisy = add_noise(_many(5000), NoiseConfig(rotation_sigma=0.05, seed=2))
    phi = np.array([log_so3(R) for R in noisy.Rb])
    assert np.allclose(phi.std(axis=0), 0.05, rtol=0.1)


def test_zero_noise_is_identity():
    data = make_instance(1)
    assert add_noise(data, NoiseConfig()) is data


@pytest.mark.parametrize("kind", ["single_axis", "pure_translation"])
def test_degenerate_trajectories(kind):
    poses = degenerate_trajectory(kind, 12, np.random.default_rng(0))
    angles = relative_rotation_angles(poses)
    if kind == "pure_translation":
        assert np.allclose(angles, 0)
    else:
        assert np.all(angles > 0.05)
    with pytest.raises(ValueError):
        degenerate_trajectory("spiral")
