"""Overlap and depth-error metrics."""

from __future__ import annotations

import numpy as np


def dice(pred_mask: np.ndarray, gt_mask: np.ndarray) -> float:
    """Dice overlap 2|A n B| / (|A| + |B|).

    Two empty masks agree on absence and score 1.0 (the needle can be absent
    from a crop entirely).
    """
    pred_mask = np.asarray(pred_mask, dtype=bool)
    gt_mask = np.asarray(gt_mask, dtype=bool)
    if pred_mask.shape != gt_mask.shape:
        raise ValueError(f"shape mismatch: {pred_mask.shape} vs {gt_mask.shape}")
    denom = int(pred_mask.sum()) + int(gt_mask.sum())
    if denom == 0:
        return 1.0
    return 2.0 * int(np.logical_and(pred_mask, gt_mask).sum()) / denom


def mae_depth(pred_mm: np.ndarray, gt_mm: np.ndarray, valid_mask: np.ndarray) -> float:
    """Mean absolute depth difference in mm over valid pixels (the mask must
    exclude sentinel-0 background)."""
    pred_mm = np.asarray(pred_mm, dtype=np.float64)
    gt_mm = np.asarray(gt_mm, dtype=np.float64)
    valid_mask = np.asarray(valid_mask, dtype=bool)
    if not pred_mm.shape == gt_mm.shape == valid_mask.shape:
        raise ValueError("pred/gt/mask shapes disagree")
    if not valid_mask.any():
        raise ValueError("empty valid mask")
    return float(np.abs(pred_mm[valid_mask] - gt_mm[valid_mask]).mean())
