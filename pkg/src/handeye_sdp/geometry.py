"""
Rotation and rigid-transform primitives.

Conventions:
- Rotations act on column vectors: v' = R @ v.
- ``vec`` stacks columns (Fortran order), so ``A @ X @ B`` has
  ``vec(A X B) = kron(B.T, A) @ vec(X)``.
- Quaternions are scalar-first ``(w, x, y, z)``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

ORTHO_TOL = 1e-9


def hat(v) -> np.ndarray:
    """Skew-symmetric matrix such that ``hat(v) @ s == cross(v, s)``."""
    v = np.asarray(v, dtype=float).reshape(3)
    return np.array([
        [0.0, -v[2], v[1]],
        [v[2], 0.0, -v[0]],
        [-v[1], v[0], 0.0],
    ])


def vee(S: np.ndarray) -> np.ndarray:
    return np.array([S[2, 1], S[0, 2], S[1, 0]])


def vec(M) -> np.ndarray:
    """Column-major vectorization of a matrix."""
    return np.asarray(M, dtype=float).reshape(-1, order="F")


def unvec(r, shape=(3, 3)) -> np.ndarray:
    return np.asarray(r, dtype=float).reshape(shape, order="F")


def exp_so3(phi) -> np.ndarray:
    """Rodrigues formula for the SO(3) exponential of a rotation vector."""
    phi = np.asarray(phi, dtype=float).reshape(3)
    theta = np.linalg.norm(phi)
    K = hat(phi)
    if theta < 1e-8:
        # second-order Taylor expansion; error O(theta^3)
        return np.eye(3) + K + 0.5 * K @ K
    a = np.sin(theta) / theta
    b = (1.0 - np.cos(theta)) / theta**2
    return np.eye(3) + a * K + b * K @ K


def log_so3(R: np.ndarray) -> np.ndarray:
    """Rotation vector of ``R`` with angle in [0, pi]."""
    axis, angle = rotation_to_axis_angle(R)
    return axis * angle


def rotation_to_axis_angle(R: np.ndarray) -> tuple[np.ndarray, float]:
    """Axis-angle decomposition. Returns ``(e3, 0.0)`` for the identity."""
    R = np.asarray(R, dtype=float)
    w = vee(R - R.T)
    # atan2 stays accurate at small angles where arccos of the trace does not
    angle = float(np.arctan2(np.linalg.norm(w) / 2.0, (np.trace(R) - 1.0) / 2.0))
    if angle < 1e-15:
        return np.array([0.0, 0.0, 1.0]), 0.0
    if angle > np.pi - 1e-6:
        # sin(angle) ~ 0: read the axis off the symmetric part R + I = 2 a a^T (approx.)
        B = 0.5 * (R + R.T) + np.eye(3)
        k = int(np.argmax(np.diag(B)))
        axis = B[:, k] / np.linalg.norm(B[:, k])
        if w @ axis < 0:
            axis = -axis
        return axis, angle
    return w / np.linalg.norm(w), angle


def is_rotation(R, tol: float = ORTHO_TOL) -> bool:
    R = np.asarray(R, dtype=float)
    if R.shape != (3, 3) or not np.all(np.isfinite(R)):
        return False
    return (np.linalg.norm(R.T @ R - np.eye(3)) <= tol
            and abs(np.linalg.det(R) - 1.0) <= tol)


def nearest_rotation(M) -> np.ndarray:
    """
    Closest rotation to ``M`` in Frobenius norm.

    SVD with determinant correction, so the result is proper even when
    ``det(M) < 0``.

    Raises:
        ValueError: if two or more singular values vanish, in which case the
            projection is not unique.
    """
    M = np.asarray(M, dtype=float)
    U, s, Vt = np.linalg.svd(M)
    if s[0] == 0.0 or s[1] < 1e-12 * s[0]:
        raise ValueError("nearest rotation is not unique: matrix has rank < 2")
    d = np.sign(np.linalg.det(U @ Vt))
    return U @ np.diag([1.0, 1.0, d]) @ Vt


def rotation_geodesic_error(R1, R2) -> float:
    """Angle in [0, pi] of the relative rotation ``R1.T @ R2``."""
    D = np.asarray(R1).T @ np.asarray(R2)
    # atan2 keeps full precision for both small and near-pi angles
    s = np.linalg.norm(vee(D - D.T)) / 2.0
    c = (np.trace(D) - 1.0) / 2.0
    return float(np.arctan2(s, c))


def random_rotation(rng: np.random.Generator) -> np.ndarray:
    """Uniform rotation from a normalized Gaussian quaternion."""
    q = rng.standard_normal(4)
    return quat_to_rotation(q / np.linalg.norm(q))


def quat_to_rotation(q) -> np.ndarray:
    w, x, y, z = np.asarray(q, dtype=float) / np.linalg.norm(q)
    return np.array([
        [1 - 2 * (y * y + z * z), 2 * (x * y - w * z), 2 * (x * z + w * y)],
        [2 * (x * y + w * z), 1 - 2 * (x * x + z * z), 2 * (y * z - w * x)],
        [2 * (x * z - w * y), 2 * (y * z + w * x), 1 - 2 * (x * x + y * y)],
    ])


def rotation_to_quat(R) -> np.ndarray:
    """Unit quaternion (w, x, y, z) with w >= 0 (Shepperd's method)."""
    R = np.asarray(R, dtype=float)
    tr = np.trace(R)
    cands = np.array([tr, R[0, 0], R[1, 1], R[2, 2]])
    k = int(np.argmax(cands))
    if k == 0:
        s = 2.0 * np.sqrt(1.0 + tr)
        q = np.array([0.25 * s, (R[2, 1] - R[1, 2]) / s,
                      (R[0, 2] - R[2, 0]) / s, (R[1, 0] - R[0, 1]) / s])
    elif k == 1:
        s = 2.0 * np.sqrt(1.0 + 2 * R[0, 0] - tr)
        q = np.array([(R[2, 1] - R[1, 2]) / s, 0.25 * s,
                      (R[0, 1] + R[1, 0]) / s, (R[0, 2] + R[2, 0]) / s])
    elif k == 2:
        s = 2.0 * np.sqrt(1.0 + 2 * R[1, 1] - tr)
        q = np.array([(R[0, 2] - R[2, 0]) / s, (R[0, 1] + R[1, 0]) / s,
                      0.25 * s, (R[1, 2] + R[2, 1]) / s])
    else:
        s = 2.0 * np.sqrt(1.0 + 2 * R[2, 2] - tr)
        q = np.array([(R[1, 0] - R[0, 1]) / s, (R[0, 2] + R[2, 0]) / s,
                      (R[1, 2] + R[2, 1]) / s, 0.25 * s])
    q /= np.linalg.norm(q)
    return -q if q[0] < 0 else q


@dataclass(frozen=True)
class AxisAngle:
    axis: np.ndarray
    angle: float

    @classmethod
    def from_rotation(cls, R) -> "AxisAngle":
        axis, angle = rotation_to_axis_angle(R)
        return cls(axis, angle)

    def to_rotation(self) -> np.ndarray:
        return exp_so3(np.asarray(self.axis) * self.angle)


@dataclass(frozen=True)
class RigidTransform:
    """Element of SE(3) as a rotation and a translation."""

    rotation: np.ndarray
    translation: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "rotation", np.asarray(self.rotation, dtype=float).reshape(3, 3))
        object.__setattr__(self, "translation", np.asarray(self.translation, dtype=float).reshape(3))

    @classmethod
    def identity(cls) -> "RigidTransform":
        return cls(np.eye(3), np.zeros(3))

    @classmethod
    def from_matrix(cls, T) -> "RigidTransform":
        T = np.asarray(T, dtype=float)
        return cls(T[:3, :3], T[:3, 3])

    def as_matrix(self) -> np.ndarray:
        T = np.eye(4)
        T[:3, :3] = self.rotation
        T[:3, 3] = self.translation
        return T

    def inverse(self) -> "RigidTransform":
        Rt = self.rotation.T
        return RigidTransform(Rt, -Rt @ self.translation)

    def __matmul__(self, other: "RigidTransform") -> "RigidTransform":
        return RigidTransform(self.rotation @ other.rotation,
                              self.rotation @ other.translation + self.translation)
