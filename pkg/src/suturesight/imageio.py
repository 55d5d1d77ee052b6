"""PNG readers/writers for the on-disk sample format.

RGB: 8-bit color PNG. Depth: 16-bit grayscale PNG storing round(mm * 10),
i.e. 0.1 mm resolution with 0 as the no-hit sentinel. Segmentation: 8-bit
grayscale PNG with raw class ids.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np
from PIL import Image

DEPTH_QUANTA_PER_MM = 10.0


def write_rgb(path, rgb: np.ndarray) -> None:
    Image.fromarray(np.asarray(rgb, dtype=np.uint8), mode="RGB").save(path)


def read_rgb(path) -> np.ndarray:
    return np.asarray(Image.open(path).convert("RGB"))


def write_depth(path, depth_mm: np.ndarray) -> None:
    q = np.round(np.asarray(depth_mm, dtype=np.float64) * DEPTH_QUANTA_PER_MM)
    if q.min() < 0 or q.max() > 65535:
        raise ValueError("depth out of range for 16-bit storage")
    Image.fromarray(q.astype(np.uint16)).save(path)


def read_depth(path) -> np.ndarray:
    q = np.asarray(Image.open(path), dtype=np.uint16)
    return (q / DEPTH_QUANTA_PER_MM).astype(np.float32)


def write_seg(path, seg: np.ndarray) -> None:
    Image.fromarray(np.asarray(seg, dtype=np.uint8), mode="L").save(path)


def read_seg(path) -> np.ndarray:
    return np.asarray(Image.open(path), dtype=np.uint8)


def ensure_dir(path) -> Path:
    p = Path(path)
    p.mkdir(parents=True, exist_ok=True)
    return p
