"""Single-file checkpoint archive: JSON manifest + raw named tensors.

Layout: magic "PGCK", u16 format version, u32 manifest length, manifest
JSON (kind, config, step, extra, tensor directory), then tensor payloads
back to back. Payloads are little-endian C-order bytes of the exact dtype,
so save -> load round-trips bit-for-bit. Individual tensors can be read
without loading the rest (the play service pulls just a codebook out of a
full model checkpoint this way).
"""

from __future__ import annotations

import json
import os
import struct
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import torch

from .errors import DataError

MAGIC = b"PGCK"
FORMAT_VERSION = 1

_DTYPES: dict[str, tuple[np.dtype, torch.dtype]] = {
    "f32": (np.dtype("<f4"), torch.float32),
    "f64": (np.dtype("<f8"), torch.float64),
    "i64": (np.dtype("<i8"), torch.int64),
    "i32": (np.dtype("<i4"), torch.int32),
    "u16": (np.dtype("<u2"), torch.uint16),
    "u8": (np.dtype("<u1"), torch.uint8),
    "bool": (np.dtype("<u1"), torch.bool),
}
_TAG_BY_TORCH = {t: tag for tag, (_, t) in _DTYPES.items()}


@dataclass
class Checkpoint:
    kind: str
    config: dict
    step: int
    tensors: dict[str, torch.Tensor]
    extra: dict = field(default_factory=dict)


def _tensor_bytes(t: torch.Tensor) -> bytes:
    arr = t.detach().cpu().contiguous()
    if arr.dtype == torch.bool:
        return arr.numpy().astype("<u1").tobytes()
    np_dtype = _DTYPES[_TAG_BY_TORCH[arr.dtype]][0]
    return arr.numpy().astype(np_dtype, copy=False).tobytes()


def save_checkpoint(
    path: str | Path,
    kind: str,
    config: dict,
    step: int,
    tensors: dict[str, torch.Tensor],
    extra: dict | None = None,
) -> None:
    path = Path(path)
    directory: list[dict] = []
    payloads: list[bytes] = []
    offset = 0
    for name, t in tensors.items():
        if t.dtype not in _TAG_BY_TORCH:
            raise DataError(f"tensor {name!r} has unsupported dtype {t.dtype}")
        raw = _tensor_bytes(t)
        directory.append({
            "name": name,
            "dtype": _TAG_BY_TORCH[t.dtype],
            "shape": list(t.shape),
            "offset": offset,
            "nbytes": len(raw),
        })
        payloads.append(raw)
        offset += len(raw)

    manifest = json.dumps({
        "format_version": FORMAT_VERSION,
        "kind": kind,
        "config": config,
        "step": step,
        "extra": extra or {},
        "tensors": directory,
    }).encode("utf-8")

    tmp = path.with_suffix(path.suffix + ".tmp")
    tmp.parent.mkdir(parents=True, exist_ok=True)
    with open(tmp, "wb") as f:
        f.write(MAGIC)
        f.write(struct.pack("<HI", FORMAT_VERSION, len(manifest)))
        f.write(manifest)
        for raw in payloads:
            f.write(raw)
    os.replace(tmp, path)


def _read_manifest(f) -> dict:
    head = f.read(10)
    if len(head) != 10 or head[:4] != MAGIC:
        raise DataError("not a checkpoint file (bad magic)")
    version, mlen = struct.unpack("<HI", head[4:])
    if version != FORMAT_VERSION:
        raise DataError(f"unsupported checkpoint format version {version}")
    try:
        return json.loads(f.read(mlen).decode("utf-8"))
    except json.JSONDecodeError as e:
        raise DataError(f"corrupt checkpoint manifest: {e}") from e


def read_manifest(path: str | Path) -> dict:
    with open(path, "rb") as f:
        return _read_manifest(f)


def _decode(entry: dict, raw: bytes) -> torch.Tensor:
    np_dtype, _ = _DTYPES[entry["dtype"]]
    arr = np.frombuffer(raw, dtype=np_dtype).reshape(entry["shape"]).copy()
    t = torch.from_numpy(arr)
    if entry["dtype"] == "bool":
        t = t.to(torch.bool)
    return t


def load_checkpoint(path: str | Path) -> Checkpoint:
    with open(path, "rb") as f:
        manifest = _read_manifest(f)
        payload_start = f.tell()
        tensors = {}
        for entry in manifest["tensors"]:
            f.seek(payload_start + entry["offset"])
            raw = f.read(entry["nbytes"])
            if len(raw) != entry["nbytes"]:
                raise DataError(f"checkpoint truncated at tensor {entry['name']!r}")
            tensors[entry["name"]] = _decode(entry, raw)
    return Checkpoint(
        kind=manifest["kind"],
        config=manifest["config"],
        step=manifest["step"],
        tensors=tensors,
        extra=manifest.get("extra", {}),
    )


def load_tensors(path: str | Path, names: list[str]) -> dict[str, torch.Tensor]:
    """Load only the named tensors, seeking past everything else."""
    with open(path, "rb") as f:
        manifest = _read_manifest(f)
        payload_start = f.tell()
        by_name = {e["name"]: e for e in manifest["tensors"]}
        out = {}
        for name in names:
            if name not in by_name:
                raise DataError(f"checkpoint has no tensor named {name!r}")
            entry = by_name[name]
            f.seek(payload_start + entry["offset"])
            out[name] = _decode(entry, f.read(entry["nbytes"]))
    return out


def module_tensors(module: torch.nn.Module, prefix: str = "") -> dict[str, torch.Tensor]:
    """Parameters and buffers of a module as a flat named-tensor dict."""
    return {prefix + name: t for name, t in module.state_dict().items()}


def load_module_tensors(
    module: torch.nn.Module, tensors: dict[str, torch.Tensor], prefix: str = ""
) -> None:
    state = {}
    for name, t in tensors.items():
        if name.startswith(prefix):
            state[name[len(prefix):]] = t
    missing = set(module.state_dict()) - set(state)
    if missing:
        raise DataError(f"checkpoint missing tensors: {sorted(missing)[:5]} ...")
    module.load_state_dict(state)
