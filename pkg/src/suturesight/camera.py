"""Pinhole camera model and projection / back-projection helpers.

Conventions used throughout the package:

* camera frame: +x right, +y down, +z along the optical axis into the scene
* pixel (u, v) indexes the image array as ``img[v, u]``; rays are cast through
  the raw integer coordinates, so back-projection is ``X = (u - cx) z / fx``
  with no half-pixel offset
* depth maps store z-depth (distance along the optical axis, millimetres),
  not Euclidean ray length; 0 is the no-hit sentinel
"""

from __future__ import annotations

from dataclasses import dataclass, asdict

import numpy as np


@dataclass(frozen=True)
class CameraModel:
    width: int
    height: int
    fx: float
    fy: float
    cx: float
    cy: float
    near: float = 20.0
    far: float = 300.0

    def __post_init__(self):
        if self.width <= 0 or self.height <= 0:
            raise ValueError("image dimensions must be positive")
        if self.fx <= 0 or self.fy <= 0:
            raise ValueError("focal lengths must be positive")
        if not (0 < self.near < self.far):
            raise ValueError("need 0 < near < far")

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "CameraModel":
        return cls(**d)

    def scaled(self, sx: float, sy: float) -> "CameraModel":
        """Intrinsics after resizing the image by (sx, sy)."""
        return CameraModel(
            width=int(round(self.width * sx)),
            height=int(round(self.height * sy)),
            fx=self.fx * sx,
            fy=self.fy * sy,
            cx=self.cx * sx,
            cy=self.cy * sy,
            near=self.near,
            far=self.far,
        )

    def cropped(self, x0: int, y0: int, width: int, height: int) -> "CameraModel":
        """Intrinsics after cropping a (width, height) window at (x0, y0)."""
        return CameraModel(
            width=width,
            height=height,
            fx=self.fx,
            fy=self.fy,
            cx=self.cx - x0,
            cy=self.cy - y0,
            near=self.near,
            far=self.far,
        )


def pixel_ray_dirs(camera: CameraModel) -> np.ndarray:
    """Unit ray directions in the camera frame, shape (H, W, 3)."""
    u = np.arange(camera.width, dtype=np.float64)
    v = np.arange(camera.height, dtype=np.float64)
    uu, vv = np.meshgrid(u, v)
    dirs = np.stack([(uu - camera.cx) / camera.fx, (vv - camera.cy) / camera.fy, np.ones_like(uu)], axis=-1)
    return dirs / np.linalg.norm(dirs, axis=-1, keepdims=True)


def backproject_pixels(u, v, z, camera: CameraModel) -> np.ndarray:
    """Lift pixels with z-depth into camera-frame 3D points, shape (..., 3)."""
    u = np.asarray(u, dtype=np.float64)
    v = np.asarray(v, dtype=np.float64)
    z = np.asarray(z, dtype=np.float64)
    return np.stack([(u - camera.cx) * z / camera.fx, (v - camera.cy) * z / camera.fy, z], axis=-1)


def project_points(pts: np.ndarray, camera: CameraModel):
    """Project camera-frame points to pixels.

    Returns (u, v, in_front) where in_front flags z > 0; points behind the
    camera get NaN pixel coordinates.
    """
    pts = np.asarray(pts, dtype=np.float64)
    z = pts[..., 2]
    in_front = z > 0
    with np.errstate(divide="ignore", invalid="ignore"):
        u = np.where(in_front, camera.fx * pts[..., 0] / z + camera.cx, np.nan)
        v = np.where(in_front, camera.fy * pts[..., 1] / z + camera.cy, np.nan)
    return u, v, in_front
