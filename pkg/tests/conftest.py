import numpy as np
import pytest
from hypothesis import strategies as st

from handeye_sdp.geometry import quat_to_rotation
from handeye_sdp.synth import InstanceSpec, NoiseConfig, TrajectoryConfig, random_instance

finite = st.floats(-10.0, 10.0, allow_nan=False, allow_infinity=False)
vectors3 = st.tuples(finite, finite, finite).map(np.array)


@st.composite
def rotations(draw):
    """Uniform-ish rotations from a drawn quaternion direction."""
    q = np.array(draw(st.tuples(*[st.floats(-1, 1, allow_nan=False)] * 4)))
    if np.linalg.norm(q) < 1e-3:
        q = np.array([1.0, 0.0, 0.0, 0.0])
    return quat_to_rotation(q / np.linalg.norm(q))


seeds = st.integers(0, 2**31 - 1)


def make_instance(seed=0, translation_pct=0.0, rotation_sigma=0.0, scale_range=(0.2, 5.0),
                  scale_known=False, **traj):
    spec = InstanceSpec(TrajectoryConfig(**traj), NoiseConfig(translation_pct, rotation_sigma),
                        scale_range=scale_range, scale_known=scale_known)
    return random_instance(spec, seed)


@pytest.fixture
def clean_instance():
    return make_instance(seed=7)


@pytest.fixture
def noisy_instance():
    return make_instance(seed=11, translation_pct=1.0, rotation_sigma=0.01)


# ---------------------------------------------------------------------------
# acceptance report: one line per criterion, printed after the test session

ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
