"""Lifting depth + segmentation into labeled camera-frame point clouds."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .camera import CameraModel, backproject_pixels
from .scene import CLASS_INSTRUMENT, CLASS_NEEDLE


@dataclass
class LabeledPointCloud:
    """Camera-frame points (mm) grouped by class; pixel coordinates kept for
    round-trip checks. Background points are held separately for pad-plane
    fitting."""

    needle: np.ndarray          # (N, 3)
    instrument: np.ndarray      # (M, 3)
    background: np.ndarray      # (K, 3)
    needle_uv: np.ndarray       # (N, 2) as (u, v)
    instrument_uv: np.ndarray
    background_uv: np.ndarray


def _lift(depth: np.ndarray, mask: np.ndarray, camera: CameraModel, stride: int = 1):
    if stride > 1:
        keep = np.zeros_like(mask)
        keep[::stride, ::stride] = True
        mask = mask & keep
    v, u = np.nonzero(mask)
    pts = backproject_pixels(u, v, depth[v, u], camera)
    return pts.reshape(-1, 3), np.stack([u, v], axis=-1).reshape(-1, 2)


def backproject(
    depth_mm: np.ndarray,
    seg: np.ndarray,
    camera: CameraModel,
    background_stride: int = 1,
) -> LabeledPointCloud:
    """Back-project every pixel with valid depth: X = (u - cx) z / fx,
    Y = (v - cy) z / fy, Z = z. Background (class 0) pixels may be subsampled
    with background_stride; foreground classes always use every pixel."""
    if depth_mm.shape != seg.shape:
        raise ValueError("depth and seg must be aligned")
    valid = depth_mm > 0
    needle, needle_uv = _lift(depth_mm, valid & (seg == CLASS_NEEDLE), camera)
    inst, inst_uv = _lift(depth_mm, valid & (seg == CLASS_INSTRUMENT), camera)
    bg, bg_uv = _lift(depth_mm, valid & (seg == 0), camera, background_stride)
    return LabeledPointCloud(
        needle=needle,
        instrument=inst,
        background=bg,
        needle_uv=needle_uv,
        instrument_uv=inst_uv,
        background_uv=bg_uv,
    )
