"""Training-corpus assembly: augmentation of synthetic and real frames."""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

from .imageio import ensure_dir, write_depth, write_rgb, write_seg
from .manifest import DatasetManifest, SampleRecord
from .seeding import derive_seed
from .transforms import LoadedSample, load_sample, random_crop_width, resize_to_height


class SplitLeakageError(RuntimeError):
    """An augmentation child traces back to a test-split parent."""


@dataclass
class AugmentationConfig:
    target_height: int = 512
    crop_width: int = 512
    crops_per_image: int = 4
    seed: int = 0

    def __post_init__(self):
        if self.target_height <= 0:
            raise ValueError("target_height must be positive")
        if self.crop_width <= 0:
            raise ValueError("crop_width must be positive")
        if self.crops_per_image < 0:
            raise ValueError("crops_per_image must be >= 0")


def ingest_real_dir(directory, split: str = "train") -> DatasetManifest:
    """Index a directory of real annotated frames pairing <id>_rgb.png with
    <id>_seg.png. Real frames carry no depth."""
    directory = Path(directory)
    records = []
    for rgb_path in sorted(directory.glob("*_rgb.png")):
        stem = rgb_path.name[: -len("_rgb.png")]
        seg_path = directory / f"{stem}_seg.png"
        if not seg_path.exists():
            raise FileNotFoundError(f"missing segmentation for {rgb_path.name}: {seg_path}")
        records.append(
            SampleRecord(
                id=stem,
                rgb_path=rgb_path.name,
                seg_path=seg_path.name,
                depth_path=None,
                split=split,
                provenance="real",
            )
        )
    if not records:
        raise FileNotFoundError(f"no *_rgb.png files under {directory}")
    return DatasetManifest(records=records, root=directory)


def _write_child(sample: LoadedSample, child_id: str, out_dir: Path) -> dict:
    paths = {"rgb": f"images/{child_id}_rgb.png", "seg": f"images/{child_id}_seg.png"}
    write_rgb(out_dir / paths["rgb"], sample.rgb)
    write_seg(out_dir / paths["seg"], sample.seg)
    if sample.depth is not None:
        paths["depth"] = f"images/{child_id}_depth.png"
        write_depth(out_dir / paths["depth"], sample.depth)
    return paths


def build_training_corpus(
    synthetic: DatasetManifest,
    real: DatasetManifest | None,
    aug: AugmentationConfig,
    out_dir,
) -> DatasetManifest:
    """Resize + random-crop every train-split parent into crops_per_image
    children, written under out_dir with a corpus manifest.

    The synthetic test split must already be held out; any child whose parent
    id belongs to a test split is a hard error.
    """
    out_dir = Path(out_dir)
    ensure_dir(out_dir / "images")
    manifests = [m for m in (synthetic, real) if m is not None]
    test_ids = {r.id for m in manifests for r in m.split("test")}

    children = []
    for m_index, m in enumerate(manifests):
        for p_index, parent in enumerate(m.split("train")):
            loaded = load_sample(parent, m)
            resized = resize_to_height(loaded, aug.target_height)
            if aug.crop_width > resized.width:
                raise ValueError(
                    f"crop_width {aug.crop_width} exceeds resized width {resized.width} "
                    f"(sample {parent.id})"
                )
            for k in range(aug.crops_per_image):
                child_seed = derive_seed(aug.seed, m_index, p_index, k)
                cropped = random_crop_width(resized, aug.crop_width, child_seed)
                child_id = f"{parent.id}-c{k}"
                if parent.id in test_ids:
                    raise SplitLeakageError(
                        f"augmentation child {child_id} derives from test parent {parent.id}"
                    )
                paths = _write_child(cropped, child_id, out_dir)
                children.append(
                    SampleRecord(
                        id=child_id,
                        rgb_path=paths["rgb"],
                        seg_path=paths["seg"],
                        depth_path=paths.get("depth"),
                        split="train",
                        provenance=parent.provenance,
                        camera=cropped.camera,
                        seed=child_seed,
                        parent_id=parent.id,
                        crop_x=cropped.crop_x,
                    )
                )

    leaked = {c.parent_id for c in children} & test_ids
    if leaked:
        raise SplitLeakageError(f"test parents leaked into training corpus: {sorted(leaked)}")

    corpus = DatasetManifest(records=children)
    corpus.save(out_dir / "corpus.jsonl")
    return corpus
