"""Rigid transforms (unit quaternion + translation), millimetre units."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.spatial.transform import Rotation

QUAT_TOL = 1e-9


def _unit(v: np.ndarray) -> np.ndarray:
    n = np.linalg.norm(v)
    if n < 1e-12:
        raise ValueError("cannot normalize near-zero vector")
    return v / n


@dataclass(frozen=True)
class RigidTransform:
    """Rotation (quaternion, xyzw order as scipy uses) followed by translation."""

    quat: np.ndarray = field(default_factory=lambda: np.array([0.0, 0.0, 0.0, 1.0]))
    trans: np.ndarray = field(default_factory=lambda: np.zeros(3))

    def __post_init__(self):
        q = np.asarray(self.quat, dtype=float).reshape(4)
        t = np.asarray(self.trans, dtype=float).reshape(3)
        n = np.linalg.norm(q)
        if abs(n - 1.0) > 1e-6:
            raise ValueError(f"quaternion norm {n} too far from 1")
        if abs(n - 1.0) > QUAT_TOL:
            q = q / n
        object.__setattr__(self, "quat", q)
        object.__setattr__(self, "trans", t)

    @staticmethod
    def identity() -> "RigidTransform":
        return RigidTransform()

    @classmethod
    def from_rotation(cls, rot: Rotation, trans=(0.0, 0.0, 0.0)) -> "RigidTransform":
        return cls(rot.as_quat(), np.asarray(trans, dtype=float))

    @classmethod
    def from_euler(cls, xyz_deg, trans=(0.0, 0.0, 0.0)) -> "RigidTransform":
        return cls.from_rotation(Rotation.from_euler("xyz", xyz_deg, degrees=True), trans)

    @classmethod
    def from_matrix(cls, rot3x3: np.ndarray, trans=(0.0, 0.0, 0.0)) -> "RigidTransform":
        return cls.from_rotation(Rotation.from_matrix(rot3x3), trans)

    @classmethod
    def look_at(cls, eye, target, up=(0.0, 0.0, 1.0)) -> "RigidTransform":
        """Camera-to-world pose: +z toward target, +x right, +y down."""
        eye = np.asarray(eye, dtype=float)
        z = _unit(np.asarray(target, dtype=float) - eye)
        x = _unit(np.cross(-np.asarray(up, dtype=float), z))
        y = np.cross(z, x)
        return cls.from_matrix(np.stack([x, y, z], axis=1), eye)

    @property
    def rotation(self) -> Rotation:
        return Rotation.from_quat(self.quat)

    @property
    def matrix3(self) -> np.ndarray:
        return self.rotation.as_matrix()

    def apply(self, pts: np.ndarray) -> np.ndarray:
        """Transform points (..., 3) from local to parent frame."""
        return np.asarray(pts, dtype=float) @ self.matrix3.T + self.trans

    def rotate(self, vecs: np.ndarray) -> np.ndarray:
        """Rotate direction vectors (..., 3), ignoring translation."""
        return np.asarray(vecs, dtype=float) @ self.matrix3.T

    def inverse(self) -> "RigidTransform":
        rinv = self.rotation.inv()
        return RigidTransform.from_rotation(rinv, -rinv.apply(self.trans))

    def compose(self, other: "RigidTransform") -> "RigidTransform":
        """self o other: applies `other` first, then self."""
        rot = self.rotation * other.rotation
        return RigidTransform.from_rotation(rot, self.rotation.apply(other.trans) + self.trans)

    def perturbed(self, euler_deg, dtrans) -> "RigidTransform":
        """Extra rotation about this pose's own origin plus a translation offset."""
        rot = Rotation.from_euler("xyz", euler_deg, degrees=True) * self.rotation
        return RigidTransform.from_rotation(rot, self.trans + np.asarray(dtrans, dtype=float))

    def almost_equal(self, other: "RigidTransform", tol: float = 1e-12) -> bool:
        qd = min(np.abs(self.quat - other.quat).max(), np.abs(self.quat + other.quat).max())
        return qd <= tol and np.abs(self.trans - other.trans).max() <= tol


def rotation_between(a: np.ndarray, b: np.ndarray) -> Rotation:
    """Minimal rotation taking direction a to direction b."""
    a = _unit(np.asarray(a, dtype=float))
    b = _unit(np.asarray(b, dtype=float))
    axis = np.cross(a, b)
    s = np.linalg.norm(axis)
    c = float(np.dot(a, b))
    if s < 1e-12:
        if c > 0:
            return Rotation.identity()
        # antiparallel: rotate 180 deg about any perpendicular axis
        helper = np.array([1.0, 0.0, 0.0]) if abs(a[0]) < 0.9 else np.array([0.0, 1.0, 0.0])
        axis = _unit(np.cross(a, helper))
        return Rotation.from_rotvec(np.pi * axis)
    return Rotation.from_rotvec(axis / s * np.arctan2(s, c))
