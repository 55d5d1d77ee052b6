"""Self-describing checkpoint container.

Layout: magic line, 8-byte little-endian header length, JSON header (model
config, phase metadata, array index), then raw little-endian array bytes in
index order. Writing the same weights twice produces identical bytes, so
checkpoints can be hash-compared across runs; loading round-trips bit-exactly.
"""

from __future__ import annotations

import json
import struct
from pathlib import Path

import numpy as np
import torch

from .unet import GROUPS, DualHeadUNet, ModelConfig

MAGIC = b"SSCKPT1\n"


def weight_group_of(param_name: str) -> str:
    group = param_name.split(".", 1)[0]
    if group not in GROUPS:
        raise KeyError(f"parameter {param_name!r} belongs to no known weight group")
    return group


def state_arrays(net: DualHeadUNet) -> dict[str, np.ndarray]:
    """state_dict as numpy arrays (includes batch-norm running statistics)."""
    return {k: v.detach().cpu().numpy() for k, v in net.state_dict().items()}


def group_arrays(net: DualHeadUNet, group: str) -> dict[str, np.ndarray]:
    prefix = group + "."
    return {k: v for k, v in state_arrays(net).items() if k.startswith(prefix)}


def save_checkpoint(path, net: DualHeadUNet, meta: dict | None = None) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    arrays = state_arrays(net)
    index = []
    offset = 0
    blobs = []
    for name in sorted(arrays):
        arr = np.ascontiguousarray(arrays[name])
        arr = arr.astype(arr.dtype.newbyteorder("<"))
        blob = arr.tobytes()
        index.append(
            {"name": name, "dtype": arr.dtype.str, "shape": list(arr.shape), "offset": offset}
        )
        offset += len(blob)
        blobs.append(blob)
    header = json.dumps(
        {"config": net.config.to_dict(), "meta": meta or {}, "arrays": index},
        sort_keys=True,
    ).encode()
    with open(path, "wb") as f:
        f.write(MAGIC)
        f.write(struct.pack("<Q", len(header)))
        f.write(header)
        for blob in blobs:
            f.write(blob)
    return path


def load_checkpoint(path) -> tuple[DualHeadUNet, dict]:
    path = Path(path)
    with open(path, "rb") as f:
        if f.read(len(MAGIC)) != MAGIC:
            raise ValueError(f"{path} is not a checkpoint file")
        (hlen,) = struct.unpack("<Q", f.read(8))
        header = json.loads(f.read(hlen).decode())
        data = f.read()
    net = DualHeadUNet(ModelConfig.from_dict(header["config"]))
    state = {}
    for entry in header["arrays"]:
        dtype = np.dtype(entry["dtype"])
        count = int(np.prod(entry["shape"])) if entry["shape"] else 1
        arr = np.frombuffer(
            data, dtype=dtype, count=count, offset=entry["offset"]
        ).reshape(entry["shape"])
        state[entry["name"]] = torch.from_numpy(arr.copy())
    net.load_state_dict(state)
    return net, header["meta"]
