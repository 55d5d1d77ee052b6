"""Dataset manifests: JSON-lines indexes of rendered / ingested / augmented samples."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

from .camera import CameraModel

SPLITS = ("train", "test")
PROVENANCES = ("synthetic", "real")


@dataclass
class SampleRecord:
    id: str
    rgb_path: str
    seg_path: str
    depth_path: str | None = None
    split: str = "train"
    provenance: str = "synthetic"
    camera: CameraModel | None = None
    seed: int | None = None
    parent_id: str | None = None  # augmentation lineage
    crop_x: int | None = None     # crop offset in the resized parent frame

    def __post_init__(self):
        if self.split not in SPLITS:
            raise ValueError(f"unknown split {self.split!r}")
        if self.provenance not in PROVENANCES:
            raise ValueError(f"unknown provenance {self.provenance!r}")
        if self.provenance == "synthetic" and self.depth_path is None:
            raise ValueError(f"synthetic record {self.id} lacks depth")
        if self.split == "test" and self.parent_id is not None:
            raise ValueError(f"test record {self.id} must not be an augmentation child")

    @property
    def is_child(self) -> bool:
        return self.parent_id is not None

    def to_dict(self) -> dict:
        d = {
            "id": self.id,
            "rgb_path": self.rgb_path,
            "seg_path": self.seg_path,
            "depth_path": self.depth_path,
            "split": self.split,
            "provenance": self.provenance,
            "camera": self.camera.to_dict() if self.camera else None,
            "seed": self.seed,
        }
        if self.parent_id is not None:
            d["parent_id"] = self.parent_id
            d["crop_x"] = self.crop_x
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "SampleRecord":
        cam = d.get("camera")
        return cls(
            id=d["id"],
            rgb_path=d["rgb_path"],
            seg_path=d["seg_path"],
            depth_path=d.get("depth_path"),
            split=d.get("split", "train"),
            provenance=d.get("provenance", "synthetic"),
            camera=CameraModel.from_dict(cam) if cam else None,
            seed=d.get("seed"),
            parent_id=d.get("parent_id"),
            crop_x=d.get("crop_x"),
        )


@dataclass
class DatasetManifest:
    records: list[SampleRecord] = field(default_factory=list)
    root: Path | None = None  # directory sample paths are relative to

    def __len__(self):
        return len(self.records)

    def __iter__(self):
        return iter(self.records)

    def split(self, name: str) -> list[SampleRecord]:
        return [r for r in self.records if r.split == name]

    def ids(self) -> set[str]:
        return {r.id for r in self.records}

    def resolve(self, rel_path: str) -> Path:
        return (self.root / rel_path) if self.root else Path(rel_path)

    def save(self, path) -> Path:
        """Write one JSON object per line; key-sorted so identical datasets
        produce byte-identical manifests."""
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w") as f:
            for rec in self.records:
                f.write(json.dumps(rec.to_dict(), sort_keys=True) + "\n")
        self.root = path.parent
        return path

    @classmethod
    def load(cls, path) -> "DatasetManifest":
        path = Path(path)
        records = []
        with open(path) as f:
            for line in f:
                line = line.strip()
                if line:
                    records.append(SampleRecord.from_dict(json.loads(line)))
        return cls(records=records, root=path.parent)
