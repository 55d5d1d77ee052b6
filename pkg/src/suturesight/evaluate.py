"""Test-set evaluation: per-class Dice and depth MAE, reported in the layout
of the results table (needle / instruments x synthetic / real corpora)."""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .manifest import DatasetManifest
from .metrics import dice, mae_depth
from .scene import CLASS_INSTRUMENT, CLASS_NEEDLE
from .transforms import center_crop_to_multiple, load_sample, resize_to_height
from .unet import DualHeadUNet, predict


@dataclass
class EvalResult:
    """Metrics over one test corpus."""

    dice_needle: float
    dice_instruments: float
    mae_depth_mm: float | None  # None when the corpus carries no depth
    n_samples: int

    def to_dict(self) -> dict:
        return {
            "dice_needle": self.dice_needle,
            "dice_instruments": self.dice_instruments,
            "mae_depth_mm": self.mae_depth_mm,
            "n_samples": self.n_samples,
        }


@dataclass
class MetricsReport:
    synthetic: EvalResult | None = None
    real_pre_finetune: EvalResult | None = None
    real_post_finetune: EvalResult | None = None
    extra: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "synthetic": self.synthetic.to_dict() if self.synthetic else None,
            "real_pre_finetune": self.real_pre_finetune.to_dict() if self.real_pre_finetune else None,
            "real_post_finetune": self.real_post_finetune.to_dict() if self.real_post_finetune else None,
            **({"extra": self.extra} if self.extra else {}),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=2)

    def format_table(self) -> str:
        cols = [
            ("Synthetic", self.synthetic),
            ("Real (no fine-tune)", self.real_pre_finetune),
            ("Real (fine-tuned)", self.real_post_finetune),
        ]
        cols = [(name, r) for name, r in cols if r is not None]

        def fmt(value):
            return "-" if value is None else f"{value:.3f}"

        rows = [
            ("Dice Needle", [fmt(r.dice_needle) for _, r in cols]),
            ("Dice Instruments", [fmt(r.dice_instruments) for _, r in cols]),
            ("MAE depth (mm)", [fmt(r.mae_depth_mm) for _, r in cols]),
        ]
        head = ["", *[name for name, _ in cols]]
        widths = [max(len(head[0]), *(len(r[0]) for r in rows))] + [
            max(len(h), 8, *(len(r[1][i]) for r in rows)) for i, h in enumerate(head[1:])
        ]
        lines = ["  ".join(h.ljust(w) for h, w in zip(head, widths))]
        lines.append("  ".join("-" * w for w in widths))
        for name, cells in rows:
            lines.append("  ".join(c.ljust(w) for c, w in zip([name, *cells], widths)))
        return "\n".join(lines)


def binarize_argmax(seg_probs: np.ndarray) -> np.ndarray:
    """Default binarization rule: per-pixel argmax over class probabilities."""
    return seg_probs.argmax(axis=-1).astype(np.uint8)


def evaluate(
    net: DualHeadUNet,
    manifest: DatasetManifest,
    argmax_rule=binarize_argmax,
    macro: bool = True,
    eval_height: int | None = None,
) -> EvalResult:
    """Evaluate on the manifest's test split.

    Per sample, predictions are binarized per class via argmax_rule and scored
    with Dice; macro=True averages per-sample scores, macro=False pools pixels
    over the corpus. MAE is computed per synthetic image over pixels with
    valid (non-sentinel) ground-truth depth, then averaged over images.
    Frames are optionally resized to eval_height and center-cropped to the
    network stride.
    """
    records = manifest.split("test")
    if not records:
        raise ValueError("empty test split")

    stride = net.config.stride
    per_sample = {CLASS_NEEDLE: [], CLASS_INSTRUMENT: []}
    pooled = {c: np.zeros(2, dtype=np.int64) for c in per_sample}  # [2*intersection, |A|+|B|]
    maes = []
    for rec in records:
        sample = load_sample(rec, manifest)
        if eval_height is not None:
            sample = resize_to_height(sample, eval_height)
        sample = center_crop_to_multiple(sample, stride)
        pred = predict(net, sample.rgb)
        labels = argmax_rule(pred.seg_probs)
        for cls in per_sample:
            a, b = labels == cls, sample.seg == cls
            per_sample[cls].append(dice(a, b))
            pooled[cls] += (2 * int((a & b).sum()), int(a.sum()) + int(b.sum()))
        if sample.depth is not None:
            valid = sample.depth > 0
            if valid.any():
                maes.append(mae_depth(pred.depth_mm, sample.depth, valid))

    if macro:
        dice_by_class = {c: float(np.mean(v)) for c, v in per_sample.items()}
    else:
        dice_by_class = {
            c: (1.0 if s[1] == 0 else float(s[0] / s[1])) for c, s in pooled.items()
        }
    return EvalResult(
        dice_needle=dice_by_class[CLASS_NEEDLE],
        dice_instruments=dice_by_class[CLASS_INSTRUMENT],
        mae_depth_mm=float(np.mean(maes)) if maes else None,
        n_samples=len(records),
    )
