"""Vectorized signed-distance primitives.

All functions take point arrays of shape (..., 3) in the primitive's local
frame (millimetres) and return distances of shape (...,). Formulas follow the
standard analytic distance-function catalogue.
"""

from __future__ import annotations

import numpy as np


def sd_sphere(p: np.ndarray, radius: float) -> np.ndarray:
    return np.linalg.norm(p, axis=-1) - radius


def sd_capsule(p: np.ndarray, a, b, radius: float) -> np.ndarray:
    """Capsule (line segment a-b swept by a sphere of the given radius)."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    pa = p - a
    ba = b - a
    h = np.clip(np.einsum("...i,i->...", pa, ba) / float(np.dot(ba, ba)), 0.0, 1.0)
    return np.linalg.norm(pa - h[..., None] * ba, axis=-1) - radius


def sd_round_box(p: np.ndarray, half_extents, corner_radius: float = 0.0) -> np.ndarray:
    """Axis-aligned box with half extents, edges rounded by corner_radius."""
    half = np.asarray(half_extents, dtype=np.float64)
    q = np.abs(p) - half + corner_radius
    outside = np.linalg.norm(np.maximum(q, 0.0), axis=-1)
    inside = np.minimum(np.max(q, axis=-1), 0.0)
    return outside + inside - corner_radius


def sd_torus_arc(p: np.ndarray, ring_radius: float, tube_radius: float, half_angle: float) -> np.ndarray:
    """Torus segment: circle of ring_radius in the local xy-plane (axis +z),
    swept by a sphere of tube_radius, restricted to polar angles
    |atan2(y, x)| <= half_angle and closed by spherical end caps.

    half_angle is in radians; half_angle = pi/2 gives a half-circle arc whose
    endpoints sit at (0, +-ring_radius, 0).
    """
    if not (0.0 < half_angle <= np.pi):
        raise ValueError("half_angle must be in (0, pi]")
    ang = np.arctan2(p[..., 1], p[..., 0])
    on_arc = np.abs(ang) <= half_angle
    ring = np.hypot(np.hypot(p[..., 0], p[..., 1]) - ring_radius, p[..., 2]) - tube_radius
    ca, sa = np.cos(half_angle), np.sin(half_angle)
    end1 = np.array([ring_radius * ca, ring_radius * sa, 0.0])
    end2 = np.array([ring_radius * ca, -ring_radius * sa, 0.0])
    caps = np.minimum(
        np.linalg.norm(p - end1, axis=-1),
        np.linalg.norm(p - end2, axis=-1),
    ) - tube_radius
    return np.where(on_arc, ring, caps)


def segment_point_distance(p: np.ndarray, a, b) -> np.ndarray:
    """Distance from points (..., 3) to the segment a-b (used for the wound stripe)."""
    return sd_capsule(p, a, b, 0.0)
