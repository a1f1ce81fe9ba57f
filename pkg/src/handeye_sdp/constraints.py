"""
Homogenized quadratic constraints describing SO(3) / O(3) membership.

Every constraint is a symmetric 10x10 matrix ``A`` acting on
``r~ = [vec(R), y]`` with target ``r~^T A r~ = 0``; the homogenizer
``A_y = e10 e10^T`` has target 1.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .problem import Y_INDEX

_UPPER = [(0, 0), (0, 1), (0, 2), (1, 1), (1, 2), (2, 2)]
_CYCLIC = [(0, 1, 2), (1, 2, 0), (2, 0, 1)]
_LEVI = np.zeros((3, 3, 3))
for _i, _j, _k in _CYCLIC:
    _LEVI[_i, _j, _k] = 1.0
    _LEVI[_i, _k, _j] = -1.0


def _idx(row: int, col: int) -> int:
    """Position of R[row, col] in the column-major vec(R)."""
    return 3 * col + row


@dataclass(frozen=True)
class ConstraintConfig:
    """Which SO(3) constraint families to include; the default is all three."""

    row_orth: bool = True
    col_orth: bool = True
    handedness: bool = True

    def __post_init__(self):
        if not (self.row_orth or self.col_orth):
            raise ValueError("at least one of row or column orthogonality is required")

    @classmethod
    def from_label(cls, label: str) -> "ConstraintConfig":
        """Parse labels such as ``R``, ``RC``, ``R+C+H`` or ``CH``."""
        letters = set(label.upper().replace("+", ""))
        if not letters or letters - set("RCH"):
            raise ValueError(f"unknown constraint configuration {label!r}")
        return cls(row_orth="R" in letters, col_orth="C" in letters, handedness="H" in letters)

    @property
    def label(self) -> str:
        return "+".join(c for c, on in zip("RCH", (self.row_orth, self.col_orth, self.handedness)) if on)


@dataclass(frozen=True)
class ConstraintSet:
    matrices: np.ndarray          # (m, 10, 10), target 0
    homogenizer: np.ndarray       # (10, 10), target 1
    labels: tuple[str, ...]
    config: ConstraintConfig

    def __len__(self) -> int:
        return len(self.matrices)

    @property
    def num_multipliers(self) -> int:
        return len(self.matrices) + 1


def _orthogonality(kind: str) -> tuple[list[np.ndarray], list[str]]:
    mats, labels = [], []
    for a, b in _UPPER:
        A = np.zeros((10, 10))
        for c in range(3):
            if kind == "row":    # (R R^T)_{ab} = sum_c R[a, c] R[b, c]
                p, q = _idx(a, c), _idx(b, c)
            else:                # (R^T R)_{ab} = sum_c R[c, a] R[c, b]
                p, q = _idx(c, a), _idx(c, b)
            A[p, q] += 0.5
            A[q, p] += 0.5
        if a == b:
            A[Y_INDEX, Y_INDEX] = -1.0
        mats.append(A)
        labels.append(f"{kind}({a + 1},{b + 1})")
    return mats, labels


def _handedness() -> tuple[list[np.ndarray], list[str]]:
    # (R^(i) x R^(j))_m - y R[m, k] = 0
    mats, labels = [], []
    for i, j, k in _CYCLIC:
        for m in range(3):
            A = np.zeros((10, 10))
            for p in range(3):
                for q in range(3):
                    e = _LEVI[m, p, q]
                    if e:
                        u, v = _idx(p, i), _idx(q, j)
                        A[u, v] += 0.5 * e
                        A[v, u] += 0.5 * e
            w = _idx(m, k)
            A[w, Y_INDEX] -= 0.5
            A[Y_INDEX, w] -= 0.5
            mats.append(A)
            labels.append(f"hand({i + 1}{j + 1}{k + 1})[{'xyz'[m]}]")
    return mats, labels


def build_constraints(config: ConstraintConfig = ConstraintConfig()) -> ConstraintSet:
    mats, labels = [], []
    if config.row_orth:
        m, l = _orthogonality("row")
        mats += m
        labels += l
    if config.col_orth:
        m, l = _orthogonality("col")
        mats += m
        labels += l
    if config.handedness:
        m, l = _handedness()
        mats += m
        labels += l
    A_y = np.zeros((10, 10))
    A_y[Y_INDEX, Y_INDEX] = 1.0
    return ConstraintSet(np.array(mats), A_y, tuple(labels), config)


def homogenized(R, y: float = 1.0) -> np.ndarray:
    return np.r_[np.asarray(R, dtype=float).reshape(-1, order="F"), y]


def constraint_residuals(cset: ConstraintSet, r_tilde) -> np.ndarray:
    """``(r~^T A_k r~)_k`` followed by ``r~^T A_y r~ - 1``."""
    r_tilde = np.asarray(r_tilde, dtype=float).reshape(10)
    res = np.einsum("i,kij,j->k", r_tilde, cset.matrices, r_tilde)
    return np.r_[res, r_tilde @ cset.homogenizer @ r_tilde - 1.0]
