"""Two-phase optimization: joint synthetic training, then segmentation
fine-tuning with the depth decoder frozen."""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import torch

from .checkpoint import save_checkpoint
from .losses import LossConfig, TrainPhase, cross_entropy, depth_mse, loss_total, seg_to_onehot
from .seeding import SHUFFLE_STREAM, derive_rng
from .transforms import LoadedSample
from .unet import DualHeadUNet


@dataclass
class OptimizerConfig:
    method: str = "adam"
    learning_rate: float = 1e-5
    batch_size: int = 4
    epochs_synthetic: int = 20
    epochs_real: int = 10
    seed: int = 0
    max_steps: int | None = None  # optional per-phase step cap for smoke runs
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8

    def __post_init__(self):
        if self.method.lower() != "adam":
            raise ValueError("only the adam optimizer is supported")
        if self.learning_rate <= 0:
            raise ValueError("learning_rate must be positive")
        if self.batch_size < 1:
            raise ValueError("batch_size must be >= 1")


def _batch_tensors(samples: list[LoadedSample], depth_scale_mm: float, need_depth: bool):
    rgb = torch.from_numpy(
        np.stack([s.rgb for s in samples]).astype(np.float32) / 255.0
    ).permute(0, 3, 1, 2)
    seg = seg_to_onehot(torch.from_numpy(np.stack([s.seg for s in samples]).astype(np.int64)))
    depth = None
    if need_depth:
        depth = torch.from_numpy(
            np.stack([s.depth for s in samples]).astype(np.float32) / depth_scale_mm
        ).clamp(0.0, 1.0)[:, None]
    return rgb, seg, depth


def _epoch_batches(n: int, batch_size: int, rng: np.random.Generator):
    order = rng.permutation(n)
    for start in range(0, n, batch_size):
        yield order[start : start + batch_size]


def _append_log(log_path, entry: dict) -> None:
    if log_path is None:
        return
    log_path = Path(log_path)
    log_path.parent.mkdir(parents=True, exist_ok=True)
    with open(log_path, "a") as f:
        f.write(json.dumps(entry, sort_keys=True) + "\n")


def _run_phase(
    corpus: list[LoadedSample],
    net: DualHeadUNet,
    opt_cfg: OptimizerConfig,
    loss_cfg: LossConfig,
    phase: TrainPhase,
    epochs: int,
    log_path=None,
) -> dict:
    params = [p for p in net.group_parameters(*phase.trainable_groups) if p.requires_grad]
    optimizer = torch.optim.Adam(
        params,
        lr=opt_cfg.learning_rate,
        betas=(opt_cfg.beta1, opt_cfg.beta2),
        eps=opt_cfg.eps,
    )
    rng = derive_rng(opt_cfg.seed, SHUFFLE_STREAM)
    need_depth = phase is TrainPhase.JOINT_SYNTHETIC
    scale = net.config.depth_scale_mm

    net.train()
    step = 0
    history = []
    stop = False
    for epoch in range(epochs):
        sums = {"ce": 0.0, "mse": 0.0, "total": 0.0}
        nb = 0
        for idx in _epoch_batches(len(corpus), opt_cfg.batch_size, rng):
            if opt_cfg.max_steps is not None and step >= opt_cfg.max_steps:
                stop = True
                break
            rgb, seg_gt, depth_gt = _batch_tensors([corpus[i] for i in idx], scale, need_depth)
            optimizer.zero_grad()
            seg, depth = net(rgb)
            ce = cross_entropy(seg, seg_gt, loss_cfg.class_weights)
            total = loss_cfg.w_seg * ce
            mse = torch.zeros(())
            if need_depth:
                mse = depth_mse(depth, depth_gt)
                total = total + loss_cfg.w_depth * mse
            total.backward()
            optimizer.step()
            step += 1
            nb += 1
            sums["ce"] += float(ce)
            sums["mse"] += float(mse)
            sums["total"] += float(total)
        if nb:
            entry = {
                "phase": phase.value,
                "epoch": epoch,
                "steps": step,
                **{k: v / nb for k, v in sums.items()},
            }
            history.append(entry)
            _append_log(log_path, entry)
        if stop:
            break
    net.eval()
    return {
        "phase": phase.value,
        "epochs": epochs,
        "steps": step,
        "seed": opt_cfg.seed,
        "learning_rate": opt_cfg.learning_rate,
        "history": history,
        "final_loss": history[-1]["total"] if history else None,
    }


def train_joint(
    corpus: list[LoadedSample],
    net: DualHeadUNet,
    opt_cfg: OptimizerConfig,
    loss_cfg: LossConfig,
    log_path=None,
    checkpoint_path=None,
) -> dict:
    """Train encoder and both decoders on synthetic frames with dense depth.

    Deterministic in opt_cfg.seed. Returns phase metadata (per-epoch losses);
    writes a checkpoint when checkpoint_path is given.
    """
    if not corpus:
        raise ValueError("empty training corpus")
    missing = [i for i, s in enumerate(corpus) if s.depth is None]
    if missing:
        raise ValueError(f"joint training needs depth for every sample; missing for {len(missing)}")
    meta = _run_phase(
        corpus, net, opt_cfg, loss_cfg, TrainPhase.JOINT_SYNTHETIC,
        opt_cfg.epochs_synthetic, log_path,
    )
    if checkpoint_path is not None:
        save_checkpoint(checkpoint_path, net, meta)
    return meta


def finetune_seg(
    corpus: list[LoadedSample],
    net: DualHeadUNet,
    opt_cfg: OptimizerConfig,
    loss_cfg: LossConfig,
    log_path=None,
    checkpoint_path=None,
    reject_synthetic: bool = False,
) -> dict:
    """Retrain encoder + segmentation decoder on real frames; the depth
    decoder is frozen and verified bit-identical afterwards."""
    if not corpus:
        raise ValueError("empty fine-tuning corpus")
    for s in corpus:
        if s.seg is None:
            raise ValueError("fine-tuning requires segmentation for every sample")
    if reject_synthetic:
        n_syn = sum(1 for s in corpus if s.provenance == "synthetic")
        if n_syn:
            raise ValueError(f"fine-tuning corpus contains {n_syn} synthetic records")

    frozen_before = {
        k: v.detach().clone() for k, v in net.depth_decoder.state_dict().items()
    }
    for p in net.depth_decoder.parameters():
        p.requires_grad_(False)
    try:
        meta = _run_phase(
            corpus, net, opt_cfg, loss_cfg, TrainPhase.SEG_FINETUNE_REAL,
            opt_cfg.epochs_real, log_path,
        )
    finally:
        for p in net.depth_decoder.parameters():
            p.requires_grad_(True)
    for k, v in net.depth_decoder.state_dict().items():
        if not torch.equal(v, frozen_before[k]):
            raise AssertionError(f"depth decoder weight {k} changed during fine-tuning")
    if checkpoint_path is not None:
        save_checkpoint(checkpoint_path, net, meta)
    return meta
