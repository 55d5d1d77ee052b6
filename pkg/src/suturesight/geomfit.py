"""Robust geometric fitting: 3D circle (needle), axis (instrument), plane (pad).

Circle and plane fits are RANSAC over minimal point subsets followed by
least-squares refinement; all randomness is seed-injected. The circle fit can
compensate for points lying on a tube *around* the target curve (the needle
cloud comes from the wire surface, not the centreline) via ``tube_radius``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .seeding import RANSAC_STREAM, derive_rng

TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class RansacConfig:
    iterations: int = 500
    circle_tol_mm: float = 1.0
    plane_tol_mm: float = 2.0
    min_inlier_fraction: float = 0.3
    seed: int = 0

    def __post_init__(self):
        if self.iterations < 1:
            raise ValueError("iterations must be >= 1")
        if min(self.circle_tol_mm, self.plane_tol_mm) <= 0:
            raise ValueError("tolerances must be positive")


@dataclass
class CircleFit3D:
    center: np.ndarray        # (3,) mm
    normal: np.ndarray        # (3,) unit
    radius: float
    basis_u: np.ndarray       # in-plane orthonormal basis spanning the circle plane
    basis_v: np.ndarray
    arc_start: float          # the arc covers angles [arc_start, arc_end], CCW in
    arc_end: float            # the (u, v) basis; arc_end > arc_start (unwrapped)
    inlier_fraction: float
    low_confidence: bool

    @property
    def arc_span(self) -> float:
        return self.arc_end - self.arc_start

    def point_at(self, theta) -> np.ndarray:
        theta = np.asarray(theta, dtype=float)
        return (
            self.center
            + self.radius * np.cos(theta)[..., None] * self.basis_u
            + self.radius * np.sin(theta)[..., None] * self.basis_v
        )

    def tangent_at(self, theta) -> np.ndarray:
        theta = np.asarray(theta, dtype=float)
        t = -np.sin(theta)[..., None] * self.basis_u + np.cos(theta)[..., None] * self.basis_v
        return t / np.linalg.norm(t, axis=-1, keepdims=True)

    def curve_distance(self, pts: np.ndarray) -> np.ndarray:
        """Distance from points to the (full) circle curve."""
        rel = np.asarray(pts, dtype=float) - self.center
        axial = rel @ self.normal
        radial = np.linalg.norm(rel - axial[..., None] * self.normal, axis=-1)
        return np.hypot(axial, radial - self.radius)

    def closest_curve_points(self, pts: np.ndarray) -> np.ndarray:
        rel = np.asarray(pts, dtype=float) - self.center
        axial = (rel @ self.normal)[..., None] * self.normal
        in_plane = rel - axial
        norms = np.linalg.norm(in_plane, axis=-1, keepdims=True)
        norms[norms < 1e-12] = 1.0
        return self.center + self.radius * in_plane / norms


@dataclass
class AxisFit:
    point: np.ndarray       # (3,) centroid
    direction: np.ndarray   # (3,) unit
    tip: np.ndarray         # (3,) extreme point at the working end
    low_confidence: bool


@dataclass
class PlaneFit:
    normal: np.ndarray  # (3,) unit; plane is normal . x = offset
    offset: float
    inlier_fraction: float = 1.0
    low_confidence: bool = False

    def distance(self, pts: np.ndarray) -> np.ndarray:
        return np.abs(np.asarray(pts, dtype=float) @ self.normal - self.offset)

    @property
    def point(self) -> np.ndarray:
        return self.normal * self.offset


def _circle_through(a: np.ndarray, b: np.ndarray, c: np.ndarray):
    """Circumcircle of three 3D points; None when nearly collinear."""
    v1, v2 = b - a, c - a
    normal = np.cross(v1, v2)
    n2 = float(normal @ normal)
    scale = max(float(v1 @ v1), float(v2 @ v2))
    if n2 < 1e-12 * scale * scale:
        return None
    v11, v22, v12 = float(v1 @ v1), float(v2 @ v2), float(v1 @ v2)
    common = 2.0 * (v11 * v22 - v12 * v12)
    lam1 = v22 * (v11 - v12) / common
    lam2 = v11 * (v22 - v12) / common
    center = a + lam1 * v1 + lam2 * v2
    radius = float(np.linalg.norm(center - a))
    return center, normal / math.sqrt(n2), radius


def _curve_residuals(pts, center, normal, radius):
    rel = pts - center
    axial = rel @ normal
    radial = np.linalg.norm(rel - axial[:, None] * normal, axis=-1)
    return np.hypot(axial, radial - radius)


def _plane_basis(normal: np.ndarray):
    helper = np.array([1.0, 0.0, 0.0]) if abs(normal[0]) < 0.9 else np.array([0.0, 1.0, 0.0])
    u = np.cross(normal, helper)
    u /= np.linalg.norm(u)
    return u, np.cross(normal, u)


def _pca_plane(pts: np.ndarray):
    centroid = pts.mean(axis=0)
    _, svals, vt = np.linalg.svd(pts - centroid, full_matrices=False)
    return centroid, vt[-1], svals


def _kasa_fit(xy: np.ndarray):
    """Algebraic 2D circle fit: minimises sum((x^2+y^2) - 2ax - 2by - c)^2."""
    a_mat = np.column_stack([2.0 * xy[:, 0], 2.0 * xy[:, 1], np.ones(len(xy))])
    rhs = (xy ** 2).sum(axis=1)
    sol, *_ = np.linalg.lstsq(a_mat, rhs, rcond=None)
    center = sol[:2]
    radius = math.sqrt(max(float(sol[2] + center @ center), 0.0))
    return center, radius


def _refine_circle(pts: np.ndarray, tube_radius: float):
    """Plane via PCA, then algebraic circle fit in-plane. With a tube radius,
    points are first shifted onto the estimated centreline."""
    centroid, normal, _ = _pca_plane(pts)
    u, v = _plane_basis(normal)
    xy = np.column_stack([(pts - centroid) @ u, (pts - centroid) @ v])
    c2, radius = _kasa_fit(xy)
    center = centroid + c2[0] * u + c2[1] * v

    if tube_radius > 0.0:
        fit = CircleFit3D(center, normal, radius, u, v, 0.0, TWO_PI, 1.0, False)
        on_curve = fit.closest_curve_points(pts)
        offsets = pts - on_curve
        norms = np.linalg.norm(offsets, axis=-1, keepdims=True)
        norms[norms < 1e-12] = 1.0
        shifted = pts - tube_radius * offsets / norms
        centroid, normal, _ = _pca_plane(shifted)
        u, v = _plane_basis(normal)
        xy = np.column_stack([(shifted - centroid) @ u, (shifted - centroid) @ v])
        c2, radius = _kasa_fit(xy)
        center = centroid + c2[0] * u + c2[1] * v

    return center, normal, radius, u, v


def _arc_interval(angles: np.ndarray):
    """Angular interval covered by the samples: complement of the largest gap."""
    ang = np.sort(np.mod(angles, TWO_PI))
    gaps = np.diff(ang, append=ang[0] + TWO_PI)
    j = int(np.argmax(gaps))
    start = ang[(j + 1) % len(ang)]
    return float(start), float(start + (TWO_PI - gaps[j]))


def fit_circle_3d(
    points: np.ndarray,
    cfg: RansacConfig = RansacConfig(),
    tube_radius: float = 0.0,
) -> CircleFit3D:
    """RANSAC 3-point circle hypotheses, least-squares refinement, arc
    endpoints from the extremal in-plane angles of the inliers.

    Points within cfg.circle_tol_mm of the curve (offset by tube_radius when
    the cloud samples a tube surface) count as inliers; a final inlier
    fraction below cfg.min_inlier_fraction only sets low_confidence.
    """
    pts = np.asarray(points, dtype=float).reshape(-1, 3)
    n = len(pts)
    if n < 3:
        raise ValueError(f"need at least 3 points, got {n}")

    rng = derive_rng(cfg.seed, RANSAC_STREAM)
    best_inliers = None
    best_count = -1
    for _ in range(cfg.iterations):
        idx = rng.choice(n, 3, replace=False) if n > 3 else np.arange(3)
        hypo = _circle_through(*pts[idx])
        if hypo is None:
            continue
        center, normal, radius = hypo
        res = np.abs(_curve_residuals(pts, center, normal, radius) - tube_radius)
        inliers = res < cfg.circle_tol_mm
        count = int(inliers.sum())
        if count > best_count:
            best_count = count
            best_inliers = inliers
    if best_inliers is None or best_count < 3:
        raise ValueError("degenerate point set: no non-collinear circle hypothesis found")

    inliers = best_inliers
    center = normal = radius = u = v = None
    for _ in range(2):
        center, normal, radius, u, v = _refine_circle(pts[inliers], tube_radius)
        res = np.abs(_curve_residuals(pts, center, normal, radius) - tube_radius)
        new_inliers = res < cfg.circle_tol_mm
        if new_inliers.sum() < 3:
            break
        inliers = new_inliers

    rel = pts[inliers] - center
    ang = np.arctan2(rel @ v, rel @ u)
    arc_start, arc_end = _arc_interval(ang)
    frac = float(inliers.mean())
    return CircleFit3D(
        center=center,
        normal=normal,
        radius=float(radius),
        basis_u=u,
        basis_v=v,
        arc_start=arc_start,
        arc_end=arc_end,
        inlier_fraction=frac,
        low_confidence=frac < cfg.min_inlier_fraction,
    )


def fit_axis(points: np.ndarray, toward: np.ndarray | None = None) -> AxisFit:
    """Principal axis of a point cloud: centroid + dominant direction.

    The tip is the extreme point along the axis; when ``toward`` is given
    (e.g. the needle centroid) the extreme end nearer that reference wins.
    A top-two singular value ratio below 1.5 flags an isotropic cloud.
    """
    pts = np.asarray(points, dtype=float).reshape(-1, 3)
    if len(pts) < 2:
        raise ValueError("need at least 2 points")
    centroid = pts.mean(axis=0)
    centered = pts - centroid
    _, svals, vt = np.linalg.svd(centered, full_matrices=False)
    if svals[0] < 1e-12:
        raise ValueError("all points coincide; no axis")
    direction = vt[0]
    low_confidence = bool(len(pts) > 2 and svals[1] > 0 and svals[0] / svals[1] < 1.5)

    proj = centered @ direction
    ends = pts[[int(np.argmin(proj)), int(np.argmax(proj))]]
    if toward is not None:
        ref = np.asarray(toward, dtype=float)
        tip = ends[int(np.argmin(np.linalg.norm(ends - ref, axis=-1)))]
    else:
        tip = ends[1]
    return AxisFit(point=centroid, direction=direction, tip=tip, low_confidence=low_confidence)


def fit_pad_plane(points: np.ndarray, cfg: RansacConfig = RansacConfig()) -> PlaneFit:
    """RANSAC dominant plane over background points, SVD-refined on inliers."""
    pts = np.asarray(points, dtype=float).reshape(-1, 3)
    n = len(pts)
    if n < 3:
        raise ValueError(f"need at least 3 points, got {n}")

    rng = derive_rng(cfg.seed, RANSAC_STREAM + 1)
    best_inliers = None
    best_count = -1
    for _ in range(cfg.iterations):
        idx = rng.choice(n, 3, replace=False) if n > 3 else np.arange(3)
        a, b, c = pts[idx]
        normal = np.cross(b - a, c - a)
        nn = np.linalg.norm(normal)
        if nn < 1e-9:
            continue
        normal = normal / nn
        res = np.abs((pts - a) @ normal)
        inliers = res < cfg.plane_tol_mm
        count = int(inliers.sum())
        if count > best_count:
            best_count = count
            best_inliers = inliers
    if best_inliers is None or best_count < 3:
        raise ValueError("degenerate point set: no non-collinear plane hypothesis found")

    inliers = best_inliers
    normal = offset = None
    for _ in range(2):
        centroid, normal, svals = _pca_plane(pts[inliers])
        if svals[1] < 1e-9:  # refit collapsed onto a line
            raise ValueError("degenerate point set: inliers are collinear")
        offset = float(centroid @ normal)
        new_inliers = np.abs(pts @ normal - offset) < cfg.plane_tol_mm
        if new_inliers.sum() < 3:
            break
        inliers = new_inliers
    if offset < 0:  # deterministic sign convention
        normal, offset = -normal, -offset
    frac = float(inliers.mean())
    return PlaneFit(
        normal=normal,
        offset=offset,
        inlier_fraction=frac,
        low_confidence=frac < cfg.min_inlier_fraction,
    )
