"""Shared-encoder, dual-decoder convolutional network.

One RGB frame in; a 3-class per-pixel segmentation distribution and a
normalized depth map out. The two task heads hang off a single encoder
(hard parameter sharing): each encoder stage is conv3x3-BN-LeakyReLU twice
followed by 2x2 max-pooling, each decoder stage is a learned transposed-conv
upsample, skip concatenation, then two conv3x3-LeakyReLU layers (no batch
norm on the decoder side). The segmentation head ends in a per-pixel softmax,
the depth head in a sigmoid; metric depth is depth_norm * depth_scale_mm.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, asdict

import numpy as np
import torch
import torch.nn as nn

GROUPS = ("encoder", "seg_decoder", "depth_decoder")


@dataclass(frozen=True)
class ModelConfig:
    depth_levels: int = 4
    base_channels: int = 32
    leaky_slope: float = 0.01
    input_size: tuple = (512, 512)
    num_classes: int = 3
    depth_scale_mm: float = 300.0

    def __post_init__(self):
        if self.depth_levels < 1:
            raise ValueError("depth_levels must be >= 1")
        if self.base_channels < 1:
            raise ValueError("base_channels must be >= 1")
        if self.num_classes != 3:
            raise ValueError("this network is fixed to 3 output classes")
        s = 2 ** self.depth_levels
        h, w = self.input_size
        if h % s or w % s:
            raise ValueError(f"input_size {self.input_size} not divisible by {s}")

    @property
    def stride(self) -> int:
        return 2 ** self.depth_levels

    def to_dict(self) -> dict:
        d = asdict(self)
        d["input_size"] = list(self.input_size)
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "ModelConfig":
        d = dict(d)
        d["input_size"] = tuple(d["input_size"])
        return cls(**d)


def _conv_bn_act(cin: int, cout: int, slope: float) -> nn.Sequential:
    return nn.Sequential(
        nn.Conv2d(cin, cout, 3, padding=1),
        nn.BatchNorm2d(cout),
        nn.LeakyReLU(slope),
        nn.Conv2d(cout, cout, 3, padding=1),
        nn.BatchNorm2d(cout),
        nn.LeakyReLU(slope),
    )


class EncoderStage(nn.Module):
    """Two conv-BN-LeakyReLU layers; returns the pre-pooling activation as the
    skip tensor and the 2x2 max-pooled features for the next level."""

    def __init__(self, cin: int, cout: int, slope: float):
        super().__init__()
        self.block = _conv_bn_act(cin, cout, slope)
        self.pool = nn.MaxPool2d(2)

    def forward(self, x: torch.Tensor):
        if x.shape[-1] % 2 or x.shape[-2] % 2:
            raise ValueError(f"encoder stage needs even spatial dims, got {tuple(x.shape[-2:])}")
        skip = self.block(x)
        return self.pool(skip), skip


class DecoderStage(nn.Module):
    """Transposed-conv upsample, skip concatenation, two conv-LeakyReLU layers."""

    def __init__(self, cin: int, skip_channels: int, cout: int, slope: float):
        super().__init__()
        self.up = nn.ConvTranspose2d(cin, cout, 2, stride=2)
        self.block = nn.Sequential(
            nn.Conv2d(cout + skip_channels, cout, 3, padding=1),
            nn.LeakyReLU(slope),
            nn.Conv2d(cout, cout, 3, padding=1),
            nn.LeakyReLU(slope),
        )

    def forward(self, x: torch.Tensor, skip: torch.Tensor) -> torch.Tensor:
        up = self.up(x)
        if up.shape[-2:] != skip.shape[-2:]:
            raise ValueError(
                f"skip size {tuple(skip.shape[-2:])} does not match upsampled {tuple(up.shape[-2:])}"
            )
        return self.block(torch.cat([up, skip], dim=1))


class Encoder(nn.Module):
    def __init__(self, cfg: ModelConfig):
        super().__init__()
        chans = [cfg.base_channels * 2 ** i for i in range(cfg.depth_levels + 1)]
        self.stages = nn.ModuleList()
        cin = 3
        for c in chans[:-1]:
            self.stages.append(EncoderStage(cin, c, cfg.leaky_slope))
            cin = c
        self.bottleneck = _conv_bn_act(chans[-2], chans[-1], cfg.leaky_slope)

    def forward(self, x: torch.Tensor):
        skips = []
        for stage in self.stages:
            x, skip = stage(x)
            skips.append(skip)
        return self.bottleneck(x), skips


class Decoder(nn.Module):
    def __init__(self, cfg: ModelConfig, out_channels: int):
        super().__init__()
        chans = [cfg.base_channels * 2 ** i for i in range(cfg.depth_levels + 1)]
        self.stages = nn.ModuleList(
            DecoderStage(chans[i + 1], chans[i], chans[i], cfg.leaky_slope)
            for i in reversed(range(cfg.depth_levels))
        )
        self.head = nn.Conv2d(chans[0], out_channels, 1)

    def forward(self, x: torch.Tensor, skips: list) -> torch.Tensor:
        for stage, skip in zip(self.stages, reversed(skips)):
            x = stage(x, skip)
        return self.head(x)


class DualHeadUNet(nn.Module):
    def __init__(self, config: ModelConfig | None = None, seed: int = 0):
        super().__init__()
        self.config = config or ModelConfig()
        self.encoder = Encoder(self.config)
        self.seg_decoder = Decoder(self.config, self.config.num_classes)
        self.depth_decoder = Decoder(self.config, 1)
        init_parameters(self, seed)

    def forward(self, x: torch.Tensor):
        """x: (B, 3, H, W) in [0, 1] -> (seg_probs (B, 3, H, W), depth_norm (B, 1, H, W))."""
        if x.dim() != 4 or x.shape[1] != 3:
            raise ValueError(f"expected (B, 3, H, W) input, got {tuple(x.shape)}")
        s = self.config.stride
        if x.shape[-2] % s or x.shape[-1] % s:
            raise ValueError(f"spatial dims {tuple(x.shape[-2:])} not divisible by stride {s}")
        feats, skips = self.encoder(x)
        seg = torch.softmax(self.seg_decoder(feats, skips), dim=1)
        depth = torch.sigmoid(self.depth_decoder(feats, skips))
        return seg, depth

    def group_parameters(self, *groups: str):
        """Named parameters of the requested weight groups."""
        for g in groups or GROUPS:
            if g not in GROUPS:
                raise KeyError(f"unknown weight group {g!r}")
            yield from getattr(self, g).parameters()


def init_parameters(net: nn.Module, seed: int) -> None:
    """Fan-in-scaled uniform init, reproducible via an explicit generator."""
    gen = torch.Generator().manual_seed(int(seed))
    for m in net.modules():
        if isinstance(m, (nn.Conv2d, nn.ConvTranspose2d)):
            fan_in = m.weight.shape[1] * m.weight.shape[2] * m.weight.shape[3]
            bound = math.sqrt(3.0 / fan_in)
            with torch.no_grad():
                m.weight.uniform_(-bound, bound, generator=gen)
                if m.bias is not None:
                    m.bias.zero_()
        elif isinstance(m, nn.BatchNorm2d):
            with torch.no_grad():
                m.weight.fill_(1.0)
                m.bias.zero_()
            m.reset_running_stats()


@dataclass
class Prediction:
    """Per-pixel class distribution and normalized depth for one frame."""

    seg_probs: np.ndarray   # (H, W, 3), sums to 1 per pixel
    depth_norm: np.ndarray  # (H, W) in [0, 1]
    depth_scale_mm: float

    @property
    def depth_mm(self) -> np.ndarray:
        return self.depth_norm * self.depth_scale_mm

    @property
    def labels(self) -> np.ndarray:
        return self.seg_probs.argmax(axis=-1).astype(np.uint8)


def rgb_to_tensor(rgb: np.ndarray) -> torch.Tensor:
    """HxWx3 uint8 (or float in [0,1]) -> (1, 3, H, W) float32."""
    arr = np.asarray(rgb)
    if arr.dtype == np.uint8:
        arr = arr.astype(np.float32) / 255.0
    return torch.from_numpy(np.ascontiguousarray(arr.astype(np.float32))).permute(2, 0, 1)[None]


def predict(net: DualHeadUNet, rgb: np.ndarray) -> Prediction:
    """Run one frame through the frozen network."""
    was_training = net.training
    net.eval()
    try:
        with torch.no_grad():
            seg, depth = net(rgb_to_tensor(rgb))
    finally:
        net.train(was_training)
    return Prediction(
        seg_probs=seg[0].permute(1, 2, 0).numpy(),
        depth_norm=depth[0, 0].numpy(),
        depth_scale_mm=net.config.depth_scale_mm,
    )
