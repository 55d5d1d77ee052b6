"""Frame-level geometry pipeline: predictions (or ground truth) in, fitted
geometry, suture metrics and overlay frames out."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .camera import CameraModel
from .geomfit import AxisFit, CircleFit3D, PlaneFit, RansacConfig, fit_axis, fit_circle_3d, fit_pad_plane
from .imageio import ensure_dir, write_depth, write_rgb, write_seg
from .manifest import DatasetManifest
from .overlay import render_overlay
from .pointcloud import LabeledPointCloud, backproject
from .suturemetrics import RecommendedBands, SutureMetrics, compute_suture_metrics
from .transforms import center_crop_to_multiple, load_sample
from .unet import DualHeadUNet, predict


@dataclass
class GeometryConfig:
    ransac: RansacConfig = field(default_factory=RansacConfig)
    bands: RecommendedBands = field(default_factory=RecommendedBands)
    needle_wire_radius: float = 0.4  # tube compensation for the circle fit; 0 disables
    background_stride: int = 4
    min_needle_points: int = 12
    min_instrument_points: int = 12
    min_background_points: int = 64


@dataclass
class FrameAnalysis:
    cloud: LabeledPointCloud
    circle: CircleFit3D | None
    axis: AxisFit | None
    pad_plane: PlaneFit | None
    metrics: SutureMetrics | None

    def to_dict(self) -> dict:
        d = {"metrics": self.metrics.to_dict() if self.metrics else None}
        if self.circle is not None:
            d["needle_circle"] = {
                "center_mm": self.circle.center.tolist(),
                "normal": self.circle.normal.tolist(),
                "radius_mm": self.circle.radius,
                "inlier_fraction": self.circle.inlier_fraction,
            }
        if self.axis is not None:
            d["instrument_axis"] = {
                "point_mm": self.axis.point.tolist(),
                "direction": self.axis.direction.tolist(),
                "tip_mm": self.axis.tip.tolist(),
            }
        if self.pad_plane is not None:
            d["pad_plane"] = {
                "normal": self.pad_plane.normal.tolist(),
                "offset_mm": self.pad_plane.offset,
            }
        return d


def analyze_frame(
    seg: np.ndarray,
    depth_mm: np.ndarray,
    camera: CameraModel,
    cfg: GeometryConfig = GeometryConfig(),
) -> FrameAnalysis:
    """Fit needle circle, instrument axis and pad plane from one labeled depth
    frame. Fits with too few points are skipped (None); fit errors on
    degenerate clouds are swallowed into None rather than aborting the frame."""
    cloud = backproject(depth_mm, seg, camera, background_stride=cfg.background_stride)

    circle = axis = plane = metrics = None
    if len(cloud.needle) >= cfg.min_needle_points:
        try:
            circle = fit_circle_3d(cloud.needle, cfg.ransac, tube_radius=cfg.needle_wire_radius)
        except ValueError:
            circle = None
    if len(cloud.instrument) >= cfg.min_instrument_points:
        try:
            toward = cloud.needle.mean(axis=0) if len(cloud.needle) else None
            axis = fit_axis(cloud.instrument, toward=toward)
        except ValueError:
            axis = None
    if len(cloud.background) >= cfg.min_background_points:
        try:
            plane = fit_pad_plane(cloud.background, cfg.ransac)
        except ValueError:
            plane = None
    if circle is not None and axis is not None:
        metrics = compute_suture_metrics(circle, axis, plane, cfg.bands)
    return FrameAnalysis(cloud=cloud, circle=circle, axis=axis, pad_plane=plane, metrics=metrics)


def run_inference(
    net: DualHeadUNet,
    manifest: DatasetManifest,
    out_dir,
    split: str | None = None,
) -> Path:
    """Write predicted segmentation and depth PNGs for every (or one split's)
    record; returns the predictions directory."""
    out_dir = ensure_dir(out_dir)
    records = manifest.split(split) if split else list(manifest)
    if not records:
        raise ValueError("no records to run inference on")
    for rec in records:
        sample = center_crop_to_multiple(load_sample(rec, manifest), net.config.stride)
        pred = predict(net, sample.rgb)
        write_seg(out_dir / f"{rec.id}_pred_seg.png", pred.labels)
        write_depth(out_dir / f"{rec.id}_pred_depth.png", pred.depth_mm)
    return out_dir


def run_geometry(
    manifest: DatasetManifest,
    out_dir,
    net: DualHeadUNet | None = None,
    cfg: GeometryConfig = GeometryConfig(),
    split: str | None = None,
    use_ground_truth: bool = False,
) -> list[dict]:
    """Per-frame geometry + overlay over a manifest.

    With a network, segmentation/depth come from predictions; with
    use_ground_truth=True the stored maps are used instead (synthetic frames
    only). Writes <id>_overlay.png and a metrics.jsonl under out_dir.
    """
    if net is None and not use_ground_truth:
        raise ValueError("need either a network or use_ground_truth=True")
    out_dir = ensure_dir(out_dir)
    records = manifest.split(split) if split else list(manifest)
    if not records:
        raise ValueError("no records selected for geometry analysis")

    results = []
    with open(out_dir / "metrics.jsonl", "w") as f:
        for rec in records:
            sample = load_sample(rec, manifest)
            if net is not None:
                sample = center_crop_to_multiple(sample, net.config.stride)
            if use_ground_truth:
                if sample.depth is None:
                    raise ValueError(f"record {rec.id} has no ground-truth depth")
                seg, depth = sample.seg, sample.depth
            else:
                pred = predict(net, sample.rgb)
                seg, depth = pred.labels, pred.depth_mm
            if sample.camera is None:
                raise ValueError(f"record {rec.id} carries no camera model")
            analysis = analyze_frame(seg, depth, sample.camera, cfg)
            overlay = render_overlay(
                sample.rgb, sample.camera, analysis.circle, analysis.axis,
                analysis.metrics, analysis.pad_plane,
            )
            write_rgb(out_dir / f"{rec.id}_overlay.png", overlay)
            entry = {"id": rec.id, **analysis.to_dict()}
            results.append(entry)
            f.write(json.dumps(entry, sort_keys=True) + "\n")
    return results
