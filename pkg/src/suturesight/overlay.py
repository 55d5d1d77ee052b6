"""Frame overlays: fitted needle circle with colored arc segments and rotation
center, needle-plane patch, instrument axis, and a metric readout block."""

from __future__ import annotations

import numpy as np
import cv2

from .camera import CameraModel, project_points
from .geomfit import AxisFit, CircleFit3D, PlaneFit
from .suturemetrics import SutureMetrics

CENTER_COLOR = (255, 0, 255)
ARC_COLORS = [(80, 220, 80), (240, 210, 60), (240, 130, 50)]  # tip / middle / tail thirds
GRASP_BAND_COLOR = (255, 255, 255)
AXIS_COLOR = (90, 170, 255)
PLANE_COLOR = (120, 160, 255)
TEXT_COLOR = (255, 255, 255)


def _to_px(pts3d: np.ndarray, camera: CameraModel) -> np.ndarray:
    u, v, ok = project_points(pts3d, camera)
    px = np.stack([u, v], axis=-1)
    return px[ok]


def _draw_polyline(img, px: np.ndarray, color, thickness=2, dashed=False):
    if len(px) < 2:
        return
    pts = np.round(px).astype(np.int32)
    if not dashed:
        cv2.polylines(img, [pts.reshape(-1, 1, 2)], False, color, thickness, cv2.LINE_AA)
        return
    for i in range(len(pts) - 1):
        if i % 2 == 0:
            cv2.line(img, tuple(pts[i]), tuple(pts[i + 1]), color, thickness, cv2.LINE_AA)


def _arc_angles(circle: CircleFit3D, tip_theta: float | None, n: int = 96) -> np.ndarray:
    """Angles from tip to tail so fractional arc positions match grasp fractions."""
    if tip_theta is None or abs(tip_theta - circle.arc_start) < abs(tip_theta - circle.arc_end):
        return np.linspace(circle.arc_start, circle.arc_end, n)
    return np.linspace(circle.arc_end, circle.arc_start, n)


def _banner(img, text):
    cv2.rectangle(img, (0, 0), (img.shape[1], 28), (40, 40, 40), -1)
    cv2.putText(img, text, (8, 20), cv2.FONT_HERSHEY_SIMPLEX, 0.55, TEXT_COLOR, 1, cv2.LINE_AA)


def render_overlay(
    rgb: np.ndarray,
    camera: CameraModel,
    circle: CircleFit3D | None = None,
    axis: AxisFit | None = None,
    metrics: SutureMetrics | None = None,
    plane: PlaneFit | None = None,
) -> np.ndarray:
    """Project the fitted geometry onto the frame. Low-confidence fits are
    drawn dashed; with no fits at all the frame gets a 'no detection' banner."""
    img = np.ascontiguousarray(np.asarray(rgb, dtype=np.uint8).copy())
    if circle is None and axis is None:
        _banner(img, "no detection")
        return img

    if circle is not None:
        dashed = circle.low_confidence
        # translucent needle-plane patch spanning the circle
        corners = np.stack(
            [
                circle.center + 1.25 * circle.radius * (su * circle.basis_u + sv * circle.basis_v)
                for su, sv in ((-1, -1), (1, -1), (1, 1), (-1, 1))
            ]
        )
        px = _to_px(corners, camera)
        if len(px) == 4 and not dashed:
            fill = img.copy()
            cv2.fillPoly(fill, [np.round(px).astype(np.int32).reshape(-1, 1, 2)], PLANE_COLOR)
            img = cv2.addWeighted(fill, 0.18, img, 0.82, 0)

        thetas = _arc_angles(circle, metrics.tip_theta if metrics else None)
        pts3d = circle.point_at(thetas)
        fracs = np.linspace(0.0, 1.0, len(thetas))
        for lo, hi, color in ((0, 1 / 3, ARC_COLORS[0]), (1 / 3, 2 / 3, ARC_COLORS[1]), (2 / 3, 1.0001, ARC_COLORS[2])):
            seg = (fracs >= lo) & (fracs <= hi)
            _draw_polyline(img, _to_px(pts3d[seg], camera), color, 2, dashed)
        if metrics is not None:
            band = (fracs >= 0.60) & (fracs <= 0.73)  # recommended grasp segment
            _draw_polyline(img, _to_px(pts3d[band], camera), GRASP_BAND_COLOR, 4, dashed)

        u, v, ok = project_points(circle.center, camera)
        if ok:
            cv2.drawMarker(
                img, (int(round(float(u))), int(round(float(v)))), CENTER_COLOR,
                cv2.MARKER_CROSS, 14, 2,
            )

    if axis is not None:
        ends = np.stack([axis.tip, axis.tip + 45.0 * axis.direction])
        if (ends[1] - axis.point) @ axis.direction < (ends[0] - axis.point) @ axis.direction:
            ends = np.stack([axis.tip, axis.tip - 45.0 * axis.direction])
        px = _to_px(ends, camera)
        if len(px) == 2:
            p0, p1 = np.round(px).astype(np.int32)
            if axis.low_confidence:
                _draw_polyline(img, px, AXIS_COLOR, 2, dashed=True)
            else:
                cv2.arrowedLine(img, tuple(p1), tuple(p0), AXIS_COLOR, 2, cv2.LINE_AA, tipLength=0.12)
            # short whiskers marking the reduced holder frame at the tip
            for w in _whisker_dirs(axis.direction):
                wpx = _to_px(np.stack([axis.tip, axis.tip + 8.0 * w]), camera)
                _draw_polyline(img, wpx, AXIS_COLOR, 1)

    if metrics is not None:
        _metric_block(img, metrics)
    return img


def _whisker_dirs(direction: np.ndarray):
    helper = np.array([0.0, 0.0, 1.0]) if abs(direction[2]) < 0.9 else np.array([1.0, 0.0, 0.0])
    a = np.cross(direction, helper)
    a /= np.linalg.norm(a)
    return a, np.cross(direction, a)


def _metric_block(img, metrics: SutureMetrics):
    def flag(ok):
        return "--" if ok is None else ("OK" if ok else "!!")

    lines = [
        f"grasp fraction {metrics.grasp_fraction:.2f} [{flag(metrics.grasp_fraction_ok)}]",
        f"grasp angle    {metrics.grasp_angle_deg:5.1f} deg [{flag(metrics.grasp_angle_ok)}]",
        f"plane-axis     {metrics.plane_instrument_angle_deg:5.1f} deg",
    ]
    if metrics.entry_angle_deg is not None:
        lines.append(f"entry angle    {metrics.entry_angle_deg:5.1f} deg [{flag(metrics.entry_angle_ok)}]")
    if metrics.tip_ambiguous:
        lines.append("tip/tail ambiguous")
    if metrics.low_confidence:
        lines.append("LOW CONFIDENCE")
    h = 16 * len(lines) + 10
    cv2.rectangle(img, (0, 0), (205, h), (30, 30, 30), -1)
    for i, line in enumerate(lines):
        cv2.putText(img, line, (6, 16 * (i + 1)), cv2.FONT_HERSHEY_SIMPLEX, 0.42, TEXT_COLOR, 1, cv2.LINE_AA)
