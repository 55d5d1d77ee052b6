"""Batch generation of synthetic frames with dense ground truth."""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

from .camera import CameraModel
from .imageio import ensure_dir, write_depth, write_rgb, write_seg
from .manifest import DatasetManifest, SampleRecord
from .render import RenderSample, render
from .scene import InstrumentSpec, NeedleSpec, PadSpec, RandomizationConfig, build_scene
from .seeding import frame_seeds


def default_camera() -> CameraModel:
    return CameraModel(width=640, height=512, fx=520.0, fy=520.0, cx=320.0, cy=256.0)


@dataclass
class SceneGenConfig:
    camera: CameraModel = field(default_factory=default_camera)
    needle: NeedleSpec = field(default_factory=NeedleSpec)
    instrument: InstrumentSpec = field(default_factory=InstrumentSpec)
    pad: PadSpec = field(default_factory=PadSpec)
    rand: RandomizationConfig = field(default_factory=RandomizationConfig)
    test_fraction: float = 0.1
    test_count: int | None = None  # overrides test_fraction when set
    seed: int = 0

    def n_test(self, n: int) -> int:
        k = self.test_count if self.test_count is not None else int(n * self.test_fraction)
        return max(0, min(int(k), n))


def render_frame(config: SceneGenConfig, seed: int, with_noise: bool = True) -> RenderSample:
    """Build + render one frame from a single frame seed (pure function)."""
    poses = build_scene(config.needle, config.instrument, config.pad, config.rand, seed)
    return render(
        poses, config.camera, config.needle, config.instrument, config.pad,
        config.rand, with_noise=with_noise,
    )


def generate_dataset(n: int, config: SceneGenConfig, out_dir) -> DatasetManifest:
    """Render n frames to out_dir and write the manifest.

    Frame i gets an independent seed derived from config.seed, so output is
    reproducible as a whole and per frame. The last n_test frames form the
    test split. Each frame is an independent pure computation; only the
    manifest write is a serialization point.
    """
    if n <= 0:
        raise ValueError("n must be positive")
    out_dir = Path(out_dir)
    img_dir = ensure_dir(out_dir / "images")
    seeds = frame_seeds(config.seed, n)
    n_test = config.n_test(n)

    records = []
    for i, seed in enumerate(seeds):
        sample = render_frame(config, seed)
        sample.validate()
        sid = f"syn{i:05d}"
        paths = {k: f"images/{sid}_{k}.png" for k in ("rgb", "depth", "seg")}
        try:
            write_rgb(out_dir / paths["rgb"], sample.rgb)
            write_depth(out_dir / paths["depth"], sample.depth)
            write_seg(out_dir / paths["seg"], sample.seg)
        except OSError as e:
            raise OSError(f"failed writing sample {sid} under {img_dir}: {e}") from e
        records.append(
            SampleRecord(
                id=sid,
                rgb_path=paths["rgb"],
                depth_path=paths["depth"],
                seg_path=paths["seg"],
                split="test" if i >= n - n_test else "train",
                provenance="synthetic",
                camera=sample.camera,
                seed=seed,
            )
        )

    manifest = DatasetManifest(records=records)
    manifest.save(out_dir / "manifest.jsonl")
    return manifest
