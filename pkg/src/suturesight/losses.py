"""Training objectives: categorical cross-entropy for segmentation, MSE for
normalized depth, combined with configurable weights per training phase."""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import torch

PROB_EPS = 1e-7  # probability clamp inside the cross-entropy


class TrainPhase(Enum):
    JOINT_SYNTHETIC = "joint_synthetic"
    SEG_FINETUNE_REAL = "seg_finetune_real"

    @property
    def trainable_groups(self) -> tuple:
        if self is TrainPhase.JOINT_SYNTHETIC:
            return ("encoder", "seg_decoder", "depth_decoder")
        return ("encoder", "seg_decoder")


@dataclass(frozen=True)
class LossConfig:
    w_seg: float = 1.0
    w_depth: float = 1.0
    class_weights: tuple = (1.0, 1.0, 1.0)

    def __post_init__(self):
        if min(self.w_seg, self.w_depth, *self.class_weights) < 0:
            raise ValueError("loss weights must be >= 0")
        if self.w_seg == 0 and self.w_depth == 0:
            raise ValueError("at least one loss weight must be positive")
        if len(self.class_weights) != 3:
            raise ValueError("class_weights must have 3 entries")


def seg_to_onehot(labels: torch.Tensor, num_classes: int = 3) -> torch.Tensor:
    """(B, H, W) integer labels -> (B, C, H, W) one-hot float."""
    return torch.nn.functional.one_hot(labels.long(), num_classes).permute(0, 3, 1, 2).float()


def cross_entropy(seg_probs: torch.Tensor, gt_onehot: torch.Tensor, class_weights=None) -> torch.Tensor:
    """Pixel-averaged categorical cross-entropy on probabilities (clamped to
    [PROB_EPS, 1 - PROB_EPS])."""
    if seg_probs.shape != gt_onehot.shape:
        raise ValueError(f"shape mismatch: {tuple(seg_probs.shape)} vs {tuple(gt_onehot.shape)}")
    logp = torch.log(seg_probs.clamp(PROB_EPS, 1.0 - PROB_EPS))
    per_class = -(gt_onehot * logp)
    if class_weights is not None:
        w = torch.as_tensor(class_weights, dtype=seg_probs.dtype, device=seg_probs.device)
        per_class = per_class * w.view(1, -1, 1, 1)
    return per_class.sum(dim=1).mean()


def depth_mse(depth_pred: torch.Tensor, depth_gt: torch.Tensor) -> torch.Tensor:
    """Pixel-averaged squared error in normalized depth space."""
    if depth_pred.shape != depth_gt.shape:
        raise ValueError(f"shape mismatch: {tuple(depth_pred.shape)} vs {tuple(depth_gt.shape)}")
    return ((depth_pred - depth_gt) ** 2).mean()


def loss_total(
    seg_probs: torch.Tensor,
    depth_norm: torch.Tensor,
    gt_seg_onehot: torch.Tensor,
    gt_depth_norm: torch.Tensor | None,
    cfg: LossConfig,
    phase: TrainPhase,
) -> torch.Tensor:
    """w_seg * CE + w_depth * MSE in the joint phase; w_seg * CE when
    fine-tuning segmentation on real frames (no depth ground truth)."""
    total = cfg.w_seg * cross_entropy(seg_probs, gt_seg_onehot, cfg.class_weights)
    if phase is TrainPhase.JOINT_SYNTHETIC:
        if gt_depth_norm is None:
            raise ValueError("joint phase requires depth ground truth")
        total = total + cfg.w_depth * depth_mse(depth_norm, gt_depth_norm)
    return total
