"""Deterministic RNG derivation. All randomness flows through numpy Generators."""

from __future__ import annotations

import numpy as np

# Stream tags keep independent draws (poses, lighting, noise, crops...) from
# sharing a stream even when they share the same frame seed.
POSE_STREAM = 0
LIGHT_STREAM = 1
NOISE_STREAM = 2
CROP_STREAM = 3
SHUFFLE_STREAM = 4
RANSAC_STREAM = 5


def derive_rng(seed: int, *tags: int) -> np.random.Generator:
    """Generator seeded by (seed, *tags); stable across runs and platforms."""
    return np.random.default_rng(np.random.SeedSequence([int(seed), *map(int, tags)]))


def derive_seed(seed: int, *tags: int) -> int:
    """Plain-int child seed for storage in manifests and configs."""
    return int(np.random.SeedSequence([int(seed), *map(int, tags)]).generate_state(1)[0])


def frame_seeds(seed: int, n: int) -> list[int]:
    """n independent per-frame seeds derived from one dataset seed."""
    return [int(s) for s in np.random.SeedSequence(int(seed)).generate_state(n)]
