"""Sphere-traced rendering of the posed scene.

Produces photometrically simple but geometrically exact frames: depth and
segmentation come straight from the first ray hit on the analytic distance
field, RGB is a single directional light plus ambient over per-class base
colors. Sensor noise is additive Gaussian on RGB only, applied last, so depth
and segmentation are bit-identical between noisy and noise-free renders.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .camera import CameraModel, pixel_ray_dirs
from .scene import (
    CLASS_BACKGROUND,
    InstrumentSpec,
    NeedleSpec,
    PadSpec,
    RandomizationConfig,
    SceneField,
    ScenePose,
)
from .seeding import LIGHT_STREAM, NOISE_STREAM, derive_rng

MARCH_TOL = 1e-3   # mm; hit when the scene SDF drops below this
MAX_STEPS = 256

AMBIENT = 0.35
DIFFUSE = 0.65
BASE_COLORS = np.array(
    [
        [0.90, 0.62, 0.52],  # 0: silicone pad
        [0.78, 0.80, 0.84],  # 1: needle (bright steel)
        [0.34, 0.37, 0.42],  # 2: instrument (dark metal)
    ]
)
VOID_COLOR = np.array([0.07, 0.08, 0.09])
WOUND_COLOR = np.array([0.45, 0.13, 0.13])
WOUND_HALF_WIDTH = 1.5  # mm


@dataclass
class RenderSample:
    """One rendered frame with pixel-exact ground truth."""

    rgb: np.ndarray    # (H, W, 3) uint8
    depth: np.ndarray  # (H, W) float32, z-depth in mm, 0 where no surface was hit
    seg: np.ndarray    # (H, W) uint8 class ids {0 background/pad, 1 needle, 2 instrument}
    camera: CameraModel
    poses: ScenePose
    seed: int

    def validate(self) -> None:
        h, w = self.depth.shape
        if self.rgb.shape != (h, w, 3) or self.seg.shape != (h, w):
            raise ValueError("rgb/depth/seg spatial dimensions disagree")
        if not np.isin(self.seg, [0, 1, 2]).all():
            raise ValueError("segmentation contains unknown class ids")
        fg = self.seg != CLASS_BACKGROUND
        zf = self.depth[fg]
        if fg.any() and not ((zf > self.camera.near) & (zf < self.camera.far)).all():
            raise ValueError("foreground pixel with depth outside (near, far)")


def _march(field: SceneField, origin, dirs_world, dirz_cam, near, far,
           tol: float, max_steps: int):
    """Sphere-trace all rays at once; returns (z_depth, class, hit) flat arrays."""
    n = dirs_world.shape[0]
    t = near / dirz_cam  # parameter along the (unit) ray; start at the near plane
    active = np.ones(n, dtype=bool)
    hit = np.zeros(n, dtype=bool)
    cls = np.zeros(n, dtype=np.uint8)
    for _ in range(max_steps):
        idx = np.nonzero(active)[0]
        if idx.size == 0:
            break
        p = origin + dirs_world[idx] * t[idx, None]
        dists = field.class_distances(p)
        d = dists.min(axis=-1)
        c = dists.argmin(axis=-1)
        hit_now = d < tol
        hit_idx = idx[hit_now]
        hit[hit_idx] = True
        cls[hit_idx] = c[hit_now]
        active[hit_idx] = False
        adv = idx[~hit_now]
        t[adv] += d[~hit_now]
        beyond = active & (t * dirz_cam > far)
        active[beyond] = False
    z = np.where(hit, t * dirz_cam, 0.0)
    ok = hit & (z > near) & (z < far)
    z[~ok] = 0.0
    cls[~ok] = 0
    return z, cls, ok


def _normals(field: SceneField, pts: np.ndarray, h: float = 1e-2) -> np.ndarray:
    g = np.empty_like(pts)
    for axis in range(3):
        e = np.zeros(3)
        e[axis] = h
        g[:, axis] = field.sdf(pts + e)[0] - field.sdf(pts - e)[0]
    norm = np.linalg.norm(g, axis=-1, keepdims=True)
    norm[norm < 1e-12] = 1.0
    return g / norm


def render(
    poses: ScenePose,
    camera: CameraModel,
    needle: NeedleSpec,
    instrument: InstrumentSpec,
    pad: PadSpec,
    rand: RandomizationConfig,
    with_noise: bool = True,
    tol: float = MARCH_TOL,
    max_steps: int = MAX_STEPS,
) -> RenderSample:
    """Render one frame. Deterministic in poses.seed; lighting and noise draw
    from streams derived from that seed, and noise touches RGB only."""
    field = SceneField(poses, needle, instrument, pad)
    h, w = camera.height, camera.width

    dirs_cam = pixel_ray_dirs(camera).reshape(-1, 3)
    dirs_world = poses.camera.rotate(dirs_cam)
    origin = poses.camera.trans

    z, cls, hit = _march(field, origin, dirs_world, dirs_cam[:, 2],
                         camera.near, camera.far, tol, max_steps)

    light_rng = derive_rng(poses.seed, LIGHT_STREAM)
    az_lo, az_hi = rand.light_azimuth_deg
    el_lo, el_hi = rand.light_elevation_deg
    az = np.radians(light_rng.uniform(az_lo, az_hi) if az_hi > az_lo else az_lo)
    el = np.radians(light_rng.uniform(el_lo, el_hi) if el_hi > el_lo else el_lo)
    light = np.array([np.cos(el) * np.cos(az), np.cos(el) * np.sin(az), np.sin(el)])

    rgb = np.tile(VOID_COLOR, (h * w, 1))
    if hit.any():
        pts = origin + dirs_world[hit] * (z[hit] / dirs_cam[hit, 2])[:, None]
        normals = _normals(field, pts)
        albedo = BASE_COLORS[cls[hit]]
        pad_px = cls[hit] == CLASS_BACKGROUND
        if pad_px.any():
            wd = field.wound_distance(pts[pad_px])
            stripe = np.clip(1.0 - wd / WOUND_HALF_WIDTH, 0.0, 1.0)[:, None]
            albedo = albedo.copy()
            albedo[pad_px] = (1 - 0.85 * stripe) * albedo[pad_px] + 0.85 * stripe * WOUND_COLOR
        shade = AMBIENT + DIFFUSE * np.clip(normals @ light, 0.0, None)
        rgb[hit] = np.clip(albedo * shade[:, None], 0.0, 1.0)

    if with_noise and rand.noise_sigma > 0:
        noise_rng = derive_rng(poses.seed, NOISE_STREAM)
        rgb = np.clip(rgb + noise_rng.normal(0.0, rand.noise_sigma, rgb.shape), 0.0, 1.0)

    return RenderSample(
        rgb=(rgb.reshape(h, w, 3) * 255.0).round().astype(np.uint8),
        depth=z.reshape(h, w).astype(np.float32),
        seg=cls.reshape(h, w),
        camera=camera,
        poses=poses,
        seed=poses.seed,
    )
