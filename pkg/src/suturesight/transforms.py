"""Geometric preprocessing applied identically to RGB / segmentation / depth.

Resizing is aspect-preserving to a target height; RGB is interpolated
bilinearly while segmentation and depth use nearest-neighbour so labels stay
in {0,1,2} and metric depth values are never rescaled. Camera intrinsics are
updated alongside so back-projection stays consistent on transformed frames.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import cv2
import numpy as np

from .camera import CameraModel
from .imageio import read_depth, read_rgb, read_seg
from .manifest import DatasetManifest, SampleRecord
from .render import RenderSample
from .seeding import CROP_STREAM, derive_rng


@dataclass
class LoadedSample:
    """One sample with pixel data in memory."""

    rgb: np.ndarray            # (H, W, 3) uint8
    seg: np.ndarray            # (H, W) uint8
    depth: np.ndarray | None   # (H, W) float32 mm, None for real frames
    camera: CameraModel | None = None
    record: SampleRecord | None = None
    crop_x: int | None = None  # offset applied by random_crop_width

    @property
    def height(self) -> int:
        return self.rgb.shape[0]

    @property
    def width(self) -> int:
        return self.rgb.shape[1]

    @property
    def provenance(self) -> str:
        return self.record.provenance if self.record else ("synthetic" if self.depth is not None else "real")


def load_sample(record: SampleRecord, manifest: DatasetManifest) -> LoadedSample:
    rgb = read_rgb(manifest.resolve(record.rgb_path))
    seg = read_seg(manifest.resolve(record.seg_path))
    depth = read_depth(manifest.resolve(record.depth_path)) if record.depth_path else None
    return LoadedSample(rgb=rgb, seg=seg, depth=depth, camera=record.camera, record=record)


def sample_from_render(sample: RenderSample) -> LoadedSample:
    return LoadedSample(
        rgb=sample.rgb, seg=sample.seg, depth=sample.depth, camera=sample.camera
    )


def resize_to_height(sample: LoadedSample, target_height: int) -> LoadedSample:
    """Scale to the target height, width rounded to preserve aspect ratio."""
    if target_height <= 0:
        raise ValueError("target_height must be positive")
    h, w = sample.rgb.shape[:2]
    if h == target_height:
        return replace(sample)
    new_w = int(round(w * target_height / h))
    size = (new_w, target_height)
    rgb = cv2.resize(sample.rgb, size, interpolation=cv2.INTER_LINEAR)
    seg = cv2.resize(sample.seg, size, interpolation=cv2.INTER_NEAREST)
    depth = None
    if sample.depth is not None:
        depth = cv2.resize(sample.depth, size, interpolation=cv2.INTER_NEAREST)
    camera = sample.camera.scaled(new_w / w, target_height / h) if sample.camera else None
    return replace(sample, rgb=rgb, seg=seg, depth=depth, camera=camera)


def crop_width_at(sample: LoadedSample, crop_width: int, offset: int) -> LoadedSample:
    """Crop all maps to [offset, offset + crop_width) along x."""
    w = sample.width
    if crop_width > w:
        raise ValueError(f"crop_width {crop_width} exceeds image width {w}")
    if not 0 <= offset <= w - crop_width:
        raise ValueError("crop offset out of range")
    sl = slice(offset, offset + crop_width)
    camera = sample.camera.cropped(offset, 0, crop_width, sample.height) if sample.camera else None
    return replace(
        sample,
        rgb=sample.rgb[:, sl],
        seg=sample.seg[:, sl],
        depth=sample.depth[:, sl] if sample.depth is not None else None,
        camera=camera,
        crop_x=offset,
    )


def random_crop_width(sample: LoadedSample, crop_width: int, seed: int) -> LoadedSample:
    """Crop at an x-offset drawn uniformly from [0, width - crop_width]."""
    w = sample.width
    if crop_width > w:
        raise ValueError(f"crop_width {crop_width} exceeds image width {w}")
    rng = derive_rng(seed, CROP_STREAM)
    offset = int(rng.integers(0, w - crop_width + 1))
    return crop_width_at(sample, crop_width, offset)


def center_crop_to_multiple(sample: LoadedSample, multiple: int) -> LoadedSample:
    """Center-crop both dimensions down to the nearest multiple (used at
    inference so arbitrary frames fit the network's stride)."""
    h, w = sample.rgb.shape[:2]
    nh, nw = (h // multiple) * multiple, (w // multiple) * multiple
    if nh == 0 or nw == 0:
        raise ValueError(f"image {h}x{w} smaller than stride {multiple}")
    if (nh, nw) == (h, w):
        return sample
    y0, x0 = (h - nh) // 2, (w - nw) // 2
    sl_y, sl_x = slice(y0, y0 + nh), slice(x0, x0 + nw)
    camera = sample.camera.cropped(x0, y0, nw, nh) if sample.camera else None
    return replace(
        sample,
        rgb=sample.rgb[sl_y, sl_x],
        seg=sample.seg[sl_y, sl_x],
        depth=sample.depth[sl_y, sl_x] if sample.depth is not None else None,
        camera=camera,
    )
