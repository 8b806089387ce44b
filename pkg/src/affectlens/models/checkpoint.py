"""Binary checkpoint format.

Layout (all integers little-endian)::

    bytes 0..15   magic b"AFFECTLENS-CKPT\\n"
    bytes 16..23  uint64 manifest length N
    next N bytes  UTF-8 JSON manifest (sorted keys, compact separators)
    remainder     arrays back to back, each C-order little-endian float64

The manifest's ``arrays`` list gives every array's name, shape, byte offset
(relative to the end of the manifest) and byte count, in storage order:
parameters (``param/<name>``), then AdamW first moments (``adam_m/<name>``),
then second moments (``adam_v/<name>``).
"""

from __future__ import annotations

import json
import struct
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .networks import ModelSpec, check_params, param_shapes
from .optim import AdamWState

MAGIC = b"AFFECTLENS-CKPT\n"
FORMAT_VERSION = 1


class CheckpointError(ValueError):
    pass


@dataclass
class Checkpoint:
    spec: ModelSpec
    params: dict[str, np.ndarray]
    optimizer: AdamWState
    taxonomy: dict  # {"name": ..., "labels": [...]}
    config: dict
    seed: int
    history: dict = field(default_factory=dict)

    def manifest(self) -> dict:
        return {
            "format_version": FORMAT_VERSION,
            "model_kind": self.spec.kind,
            "spec": self.spec.to_dict(),
            "taxonomy": self.taxonomy,
            "config": self.config,
            "seed": self.seed,
            "optimizer": {"name": "adamw", "step": self.optimizer.step},
            "history": self.history,
        }


def _ordered_arrays(ckpt: Checkpoint):
    names = list(param_shapes(ckpt.spec))
    out = [(f"param/{n}", ckpt.params[n]) for n in names]
    if ckpt.optimizer.m:
        out += [(f"adam_m/{n}", ckpt.optimizer.m[n]) for n in names]
        out += [(f"adam_v/{n}", ckpt.optimizer.v[n]) for n in names]
    return out


def to_bytes(ckpt: Checkpoint) -> bytes:
    check_params(ckpt.spec, ckpt.params)
    arrays = _ordered_arrays(ckpt)
    entries, blobs, offset = [], [], 0
    for name, arr in arrays:
        raw = np.ascontiguousarray(arr, dtype="<f8").tobytes()
        entries.append({"name": name, "shape": list(arr.shape), "offset": offset, "nbytes": len(raw)})
        blobs.append(raw)
        offset += len(raw)
    manifest = ckpt.manifest()
    manifest["arrays"] = entries
    head = json.dumps(manifest, sort_keys=True, separators=(",", ":")).encode("utf-8")
    return MAGIC + struct.pack("<Q", len(head)) + head + b"".join(blobs)


def from_bytes(data: bytes) -> Checkpoint:
    if not data.startswith(MAGIC):
        raise CheckpointError("not an affectlens checkpoint (bad magic)")
    pos = len(MAGIC)
    (n,) = struct.unpack_from("<Q", data, pos)
    pos += 8
    try:
        manifest = json.loads(data[pos:pos + n].decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise CheckpointError(f"corrupt manifest: {exc}") from None
    if manifest.get("format_version") != FORMAT_VERSION:
        raise CheckpointError(f"unsupported checkpoint version {manifest.get('format_version')!r}")
    body = data[pos + n:]
    arrays = {}
    for e in manifest["arrays"]:
        chunk = body[e["offset"]:e["offset"] + e["nbytes"]]
        if len(chunk) != e["nbytes"]:
            raise CheckpointError(f"truncated array {e['name']}")
        arrays[e["name"]] = np.frombuffer(chunk, dtype="<f8").astype(np.float64).reshape(e["shape"])
    spec = ModelSpec(**manifest["spec"])
    names = list(param_shapes(spec))
    params = {k: arrays[f"param/{k}"] for k in names}
    if f"adam_m/{names[0]}" in arrays:
        opt = AdamWState(
            manifest["optimizer"]["step"],
            {k: arrays[f"adam_m/{k}"] for k in names},
            {k: arrays[f"adam_v/{k}"] for k in names},
        )
    else:
        opt = AdamWState(manifest["optimizer"]["step"])
    check_params(spec, params)
    return Checkpoint(
        spec=spec,
        params=params,
        optimizer=opt,
        taxonomy=manifest["taxonomy"],
        config=manifest["config"],
        seed=manifest["seed"],
        history=manifest.get("history", {}),
    )


def save_checkpoint(ckpt: Checkpoint, path: str | Path) -> None:
    Path(path).write_bytes(to_bytes(ckpt))


def load_checkpoint(path: str | Path) -> Checkpoint:
    return from_bytes(Path(path).read_bytes())
