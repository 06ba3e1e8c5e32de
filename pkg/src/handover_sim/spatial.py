"""Rotation matrices, Euler-angle rate maps, and homogeneous transforms.

Convention used everywhere: roll-pitch-yaw means the extrinsic X-Y-Z
composition R = Rz(yaw) @ Ry(pitch) @ Rx(roll).  The rate map N relates
roll-pitch-yaw rates to the angular velocity expressed in the inertial
frame, omega_inertial = N @ rpy_dot, and is singular exactly where
cos(pitch) = 0.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import NearSingularError

# |cos(pitch)| below this counts as a representation singularity.
SINGULARITY_EPS = 1e-3


@dataclass(frozen=True)
class EulerAnglesRPY:
    """Roll-pitch-yaw attitude, radians."""

    roll: float
    pitch: float
    yaw: float

    def __post_init__(self):
        if not all(math.isfinite(v) for v in (self.roll, self.pitch, self.yaw)):
            raise ValueError("Euler angles must be finite")

    @property
    def near_singular(self) -> bool:
        return abs(math.cos(self.pitch)) < SINGULARITY_EPS

    def as_array(self) -> np.ndarray:
        return np.array([self.roll, self.pitch, self.yaw], dtype=float)


def _rpy_array(angles) -> np.ndarray:
    if isinstance(angles, EulerAnglesRPY):
        return angles.as_array()
    arr = np.asarray(angles, dtype=float)
    if arr.shape[-1] != 3:
        raise ValueError("expected roll-pitch-yaw triple")
    return arr


def rpy_to_rotation(angles) -> np.ndarray:
    """Rotation matrix Rz(yaw) @ Ry(pitch) @ Rx(roll).

    Accepts an EulerAnglesRPY or any (..., 3) array of angle triples and
    broadcasts over leading axes.
    """
    rpy = _rpy_array(angles)
    r, p, y = np.moveaxis(rpy, -1, 0)
    cr, sr = np.cos(r), np.sin(r)
    cp, sp = np.cos(p), np.sin(p)
    cy, sy = np.cos(y), np.sin(y)
    R = np.empty(np.broadcast(cr, cp, cy).shape + (3, 3))
    R[..., 0, 0] = cy * cp
    R[..., 0, 1] = cy * sp * sr - sy * cr
    R[..., 0, 2] = cy * sp * cr + sy * sr
    R[..., 1, 0] = sy * cp
    R[..., 1, 1] = sy * sp * sr + cy * cr
    R[..., 1, 2] = sy * sp * cr - cy * sr
    R[..., 2, 0] = -sp
    R[..., 2, 1] = cp * sr
    R[..., 2, 2] = cp * cr
    return R


def rpy_from_rotation(R: np.ndarray) -> np.ndarray:
    """Extract roll-pitch-yaw from a rotation matrix, pitch in (-pi/2, pi/2)."""
    R = np.asarray(R, dtype=float)
    pitch = np.arctan2(-R[..., 2, 0], np.hypot(R[..., 2, 1], R[..., 2, 2]))
    roll = np.arctan2(R[..., 2, 1], R[..., 2, 2])
    yaw = np.arctan2(R[..., 1, 0], R[..., 0, 0])
    return np.stack([roll, pitch, yaw], axis=-1)


def euler_rate_map(angles) -> np.ndarray:
    """Map N with omega_inertial = N @ rpy_dot.

    Columns are the inertial-frame rotation axes that each angle rate
    drives: [Rz(yaw) Ry(pitch) x_hat, Rz(yaw) y_hat, z_hat].  Raises
    NearSingularError when |cos(pitch)| < SINGULARITY_EPS, where the map
    stops being invertible.
    """
    rpy = _rpy_array(angles)
    p, y = np.moveaxis(rpy, -1, 0)[1:]
    cp, sp = np.cos(p), np.sin(p)
    if np.any(np.abs(cp) < SINGULARITY_EPS):
        raise NearSingularError(
            f"pitch within {SINGULARITY_EPS} of the representation singularity"
        )
    cy, sy = np.cos(y), np.sin(y)
    N = np.zeros(np.broadcast(cp, cy).shape + (3, 3))
    N[..., 0, 0] = cy * cp
    N[..., 0, 1] = -sy
    N[..., 1, 0] = sy * cp
    N[..., 1, 1] = cy
    N[..., 2, 0] = -sp
    N[..., 2, 2] = 1.0
    return N


def body_rate_map(angles) -> np.ndarray:
    """Map Q = R^T N with omega_body = Q @ rpy_dot."""
    rpy = _rpy_array(angles)
    R = rpy_to_rotation(rpy)
    N = euler_rate_map(rpy)
    return np.swapaxes(R, -1, -2) @ N


def rotation_and_rate_maps(rpy: np.ndarray):
    """R and N from one trig evaluation; the hot-loop form of the two maps.

    Matches rpy_to_rotation / euler_rate_map exactly, including the
    NearSingularError guard.
    """
    c = np.cos(rpy)
    s = np.sin(rpy)
    cr, cp, cy = c[..., 0], c[..., 1], c[..., 2]
    sr, sp, sy = s[..., 0], s[..., 1], s[..., 2]
    if np.min(np.abs(cp)) < SINGULARITY_EPS:
        raise NearSingularError(
            f"pitch within {SINGULARITY_EPS} of the representation singularity"
        )
    shape = rpy.shape[:-1]
    cycp = cy * cp
    sycp = sy * cp
    spsr = sp * sr
    spcr = sp * cr
    R = np.empty(shape + (3, 3))
    R[..., 0, 0] = cycp
    R[..., 0, 1] = cy * spsr - sy * cr
    R[..., 0, 2] = cy * spcr + sy * sr
    R[..., 1, 0] = sycp
    R[..., 1, 1] = sy * spsr + cy * cr
    R[..., 1, 2] = sy * spcr - cy * sr
    R[..., 2, 0] = -sp
    R[..., 2, 1] = cp * sr
    R[..., 2, 2] = cp * cr
    N = np.zeros(shape + (3, 3))
    N[..., 0, 0] = cycp
    N[..., 0, 1] = -sy
    N[..., 1, 0] = sycp
    N[..., 1, 1] = cy
    N[..., 2, 0] = -sp
    N[..., 2, 2] = 1.0
    return R, N


def rate_map_only(rpy: np.ndarray) -> np.ndarray:
    """N alone, same guard as euler_rate_map; hot-loop form."""
    p = rpy[..., 1]
    y = rpy[..., 2]
    cp, sp = np.cos(p), np.sin(p)
    if np.min(np.abs(cp)) < SINGULARITY_EPS:
        raise NearSingularError(
            f"pitch within {SINGULARITY_EPS} of the representation singularity"
        )
    cy, sy = np.cos(y), np.sin(y)
    N = np.zeros(rpy.shape[:-1] + (3, 3))
    N[..., 0, 0] = cy * cp
    N[..., 0, 1] = -sy
    N[..., 1, 0] = sy * cp
    N[..., 1, 1] = cy
    N[..., 2, 0] = -sp
    N[..., 2, 2] = 1.0
    return N


def rate_map_inverse(rpy: np.ndarray) -> np.ndarray:
    """Closed-form N^{-1} (rpy_dot = N^{-1} omega), same singularity guard."""
    p = rpy[..., 1]
    y = rpy[..., 2]
    cp, sp = np.cos(p), np.sin(p)
    if np.min(np.abs(cp)) < SINGULARITY_EPS:
        raise NearSingularError(
            f"pitch within {SINGULARITY_EPS} of the representation singularity"
        )
    cy, sy = np.cos(y), np.sin(y)
    tn = sp / cp
    M = np.zeros(rpy.shape[:-1] + (3, 3))
    M[..., 0, 0] = cy / cp
    M[..., 0, 1] = sy / cp
    M[..., 1, 0] = -sy
    M[..., 1, 1] = cy
    M[..., 2, 0] = cy * tn
    M[..., 2, 1] = sy * tn
    M[..., 2, 2] = 1.0
    return M


def skew(v) -> np.ndarray:
    """Cross-product matrix, skew(v) @ w == cross(v, w). Broadcasts."""
    v = np.asarray(v, dtype=float)
    S = np.zeros(v.shape[:-1] + (3, 3))
    S[..., 0, 1] = -v[..., 2]
    S[..., 0, 2] = v[..., 1]
    S[..., 1, 0] = v[..., 2]
    S[..., 1, 2] = -v[..., 0]
    S[..., 2, 0] = -v[..., 1]
    S[..., 2, 1] = v[..., 0]
    return S


@dataclass(frozen=True)
class HomogeneousTransform:
    """Rigid transform (rotation, translation); bottom row [0 0 0 1] implied."""

    rotation: np.ndarray
    translation: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "rotation", np.asarray(self.rotation, dtype=float).reshape(3, 3))
        object.__setattr__(self, "translation", np.asarray(self.translation, dtype=float).reshape(3))

    @staticmethod
    def identity() -> "HomogeneousTransform":
        return HomogeneousTransform(np.eye(3), np.zeros(3))

    @staticmethod
    def from_rpy(translation, rpy) -> "HomogeneousTransform":
        return HomogeneousTransform(rpy_to_rotation(_rpy_array(rpy)), translation)

    def as_matrix(self) -> np.ndarray:
        M = np.eye(4)
        M[:3, :3] = self.rotation
        M[:3, 3] = self.translation
        return M

    def apply(self, point) -> np.ndarray:
        return self.rotation @ np.asarray(point, dtype=float) + self.translation

    def inverse(self) -> "HomogeneousTransform":
        Rt = self.rotation.T
        return HomogeneousTransform(Rt, -Rt @ self.translation)

    def validate(self, tol: float = 1e-12) -> None:
        R = self.rotation
        if not np.all(np.isfinite(R)) or not np.all(np.isfinite(self.translation)):
            raise ValueError("transform has non-finite entries")
        if np.max(np.abs(R.T @ R - np.eye(3))) > tol:
            raise ValueError("rotation block is not orthonormal")
        if abs(np.linalg.det(R) - 1.0) > tol:
            raise ValueError("rotation block has determinant != +1")


def compose(a: HomogeneousTransform, b: HomogeneousTransform) -> HomogeneousTransform:
    """Transform composition: (a o b).apply(p) == a.apply(b.apply(p))."""
    return HomogeneousTransform(a.rotation @ b.rotation, a.rotation @ b.translation + a.translation)
