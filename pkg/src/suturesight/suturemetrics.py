"""Quantitative suturing parameters from the fitted needle circle, instrument
axis and pad plane.

Angle conventions: every reported angle is folded to [0, 90] degrees because
fitted normals and axis directions carry an arbitrary sign. The textbook
recommendation of grasping at 90-120 degrees to the holder axis therefore
maps to a folded band of [60, 90].
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .geomfit import AxisFit, CircleFit3D, PlaneFit

TIP_AMBIGUITY_MM = 2.0  # endpoints closer than this to the same plane distance


@dataclass(frozen=True)
class RecommendedBands:
    grasp_fraction: tuple = (0.60, 0.73)   # "about two thirds from the tip"
    grasp_angle_deg: tuple = (60.0, 90.0)  # folded representation of 90-120
    entry_angle_deg: tuple = (80.0, 90.0)  # near-perpendicular tissue entry

    def check(self, name: str, value: float | None) -> bool | None:
        if value is None:
            return None
        lo, hi = getattr(self, name)
        return bool(lo <= value <= hi)


@dataclass
class SutureMetrics:
    grasp_fraction: float            # arc length tip->grasp over total arc length
    grasp_angle_deg: float           # holder axis vs needle tangent at the grasp, folded
    plane_instrument_angle_deg: float  # holder axis vs needle plane, folded
    entry_angle_deg: float | None    # tip tangent vs pad plane; None without a plane
    tip_theta: float                 # arc angle of the tip endpoint (circle basis)
    grasp_theta: float               # arc angle of the grasp point
    tip_ambiguous: bool
    low_confidence: bool
    grasp_fraction_ok: bool
    grasp_angle_ok: bool
    entry_angle_ok: bool | None

    def to_dict(self) -> dict:
        return {
            "grasp_fraction": self.grasp_fraction,
            "grasp_angle_deg": self.grasp_angle_deg,
            "plane_instrument_angle_deg": self.plane_instrument_angle_deg,
            "entry_angle_deg": self.entry_angle_deg,
            "tip_ambiguous": self.tip_ambiguous,
            "low_confidence": self.low_confidence,
            "flags": {
                "grasp_fraction": self.grasp_fraction_ok,
                "grasp_angle": self.grasp_angle_ok,
                "entry_angle": self.entry_angle_ok,
            },
        }


def folded_angle_deg(a: np.ndarray, b: np.ndarray) -> float:
    """Angle between two lines (sign-free), in [0, 90] degrees."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    c = abs(float(a @ b) / (np.linalg.norm(a) * np.linalg.norm(b)))
    return math.degrees(math.acos(min(c, 1.0)))


def line_plane_angle_deg(direction: np.ndarray, normal: np.ndarray) -> float:
    """Angle between a line and a plane (90 deg minus the normal angle), folded."""
    d = np.asarray(direction, dtype=float)
    n = np.asarray(normal, dtype=float)
    s = abs(float(d @ n) / (np.linalg.norm(d) * np.linalg.norm(n)))
    return math.degrees(math.asin(min(s, 1.0)))


def _closest_arc_theta(circle: CircleFit3D, point: np.ndarray) -> float:
    """Arc angle of the arc point nearest to `point`, respecting the endpoints."""
    rel = np.asarray(point, dtype=float) - circle.center
    theta = math.atan2(float(rel @ circle.basis_v), float(rel @ circle.basis_u))
    unwrapped = circle.arc_start + ((theta - circle.arc_start) % (2.0 * math.pi))
    if unwrapped <= circle.arc_end:
        return float(unwrapped)
    ends = np.array([circle.arc_start, circle.arc_end])
    d = np.linalg.norm(circle.point_at(ends) - point, axis=-1)
    return float(ends[int(np.argmin(d))])


def compute_suture_metrics(
    circle: CircleFit3D,
    axis: AxisFit,
    pad_plane: PlaneFit | None = None,
    bands: RecommendedBands = RecommendedBands(),
) -> SutureMetrics:
    """Derive grasp fraction/angle, needle-plane vs axis angle and (with a pad
    plane) the tip entry angle.

    The grasp point is the arc point closest to the instrument tip. The tip
    endpoint is the one nearer the pad plane; endpoints within
    TIP_AMBIGUITY_MM of each other (or a missing plane, where the endpoint
    farther from the grasp is used instead) set tip_ambiguous.
    """
    grasp_theta = _closest_arc_theta(circle, axis.tip)

    ends = np.array([circle.arc_start, circle.arc_end])
    if pad_plane is not None:
        dists = pad_plane.distance(circle.point_at(ends))
        tip_idx = int(np.argmin(dists))
        ambiguous = bool(abs(dists[0] - dists[1]) < TIP_AMBIGUITY_MM)
    else:
        tip_idx = int(np.argmax(np.abs(ends - grasp_theta)))
        ambiguous = True
    tip_theta = float(ends[tip_idx])

    span = circle.arc_span
    fraction = abs(grasp_theta - tip_theta) / span if span > 0 else 0.0
    fraction = float(min(max(fraction, 0.0), 1.0))

    grasp_angle = folded_angle_deg(circle.tangent_at(grasp_theta), axis.direction)
    plane_angle = line_plane_angle_deg(axis.direction, circle.normal)
    entry = (
        line_plane_angle_deg(circle.tangent_at(tip_theta), pad_plane.normal)
        if pad_plane is not None
        else None
    )

    return SutureMetrics(
        grasp_fraction=fraction,
        grasp_angle_deg=grasp_angle,
        plane_instrument_angle_deg=plane_angle,
        entry_angle_deg=entry,
        tip_theta=tip_theta,
        grasp_theta=float(grasp_theta),
        tip_ambiguous=ambiguous,
        low_confidence=bool(circle.low_confidence or axis.low_confidence),
        grasp_fraction_ok=bands.check("grasp_fraction", fraction),
        grasp_angle_ok=bands.check("grasp_angle_deg", grasp_angle),
        entry_angle_ok=bands.check("entry_angle_deg", entry),
    )
