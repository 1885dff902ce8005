"""Binary model checkpoints.

Layout (all integers little-endian):

    bytes 0..3    magic b"KRYF"
    bytes 4..7    format version, u32
    bytes 8..11   CRC-32 of the payload, u32
    bytes 12..19  manifest length in bytes, u64
    manifest      UTF-8 JSON: model/train configs, provenance, and a tensor
                  table of (name, shape, dtype, byte offset) entries
    payload       contiguous little-endian float64 tensor data

Loading is bit-exact: save followed by load reproduces every tensor byte.
"""

import json
import struct
import zlib
from dataclasses import asdict

import numpy as np

from .exceptions import VersionMismatch
from .model import ModelConfig
from .training import TrainConfig

__all__ = ["save_checkpoint", "load_checkpoint"]

MAGIC = b"KRYF"
FORMAT_VERSION = 1
_HEADER = struct.Struct("<4sIIQ")


def save_checkpoint(path, params, model_cfg, train_cfg=None, provenance=None):
    """Write parameters with configs and provenance to ``path``."""
    table = []
    chunks = []
    offset = 0
    for name in sorted(params):
        tensor = np.ascontiguousarray(params[name], dtype="<f8")
        raw = tensor.tobytes()
        table.append(
            {
                "name": name,
                "shape": list(tensor.shape),
                "dtype": "float64-le",
                "offset": offset,
            }
        )
        chunks.append(raw)
        offset += len(raw)
    payload = b"".join(chunks)
    manifest = {
        "model_config": asdict(model_cfg),
        "train_config": asdict(train_cfg) if train_cfg else None,
        "provenance": provenance or {},
        "tensors": table,
    }
    manifest_raw = json.dumps(manifest, sort_keys=True).encode("utf-8")
    with open(path, "wb") as fh:
        fh.write(
            _HEADER.pack(MAGIC, FORMAT_VERSION, zlib.crc32(payload), len(manifest_raw))
        )
        fh.write(manifest_raw)
        fh.write(payload)
    return path


def load_checkpoint(path, expect_model_cfg=None):
    """Read a checkpoint; returns (params, model_cfg, train_cfg, manifest).

    Raises VersionMismatch on a foreign file, an unsupported version, a
    corrupted payload, or (when ``expect_model_cfg`` is given) a config
    that differs from the stored one.
    """
    with open(path, "rb") as fh:
        head = fh.read(_HEADER.size)
        if len(head) < _HEADER.size:
            raise VersionMismatch(f"{path}: truncated header")
        magic, version, crc, manifest_len = _HEADER.unpack(head)
        if magic != MAGIC:
            raise VersionMismatch(f"{path}: bad magic {magic!r}")
        if version > FORMAT_VERSION:
            raise VersionMismatch(
                f"{path}: format version {version} is newer than supported "
                f"version {FORMAT_VERSION}"
            )
        manifest = json.loads(fh.read(manifest_len).decode("utf-8"))
        payload = fh.read()
    if zlib.crc32(payload) != crc:
        raise VersionMismatch(f"{path}: payload checksum mismatch")
    params = {}
    for entry in manifest["tensors"]:
        shape = tuple(entry["shape"])
        size = int(np.prod(shape)) * 8 if shape else 8
        start = entry["offset"]
        params[entry["name"]] = (
            np.frombuffer(payload[start : start + size], dtype="<f8")
            .reshape(shape)
            .copy()
        )
    model_cfg = ModelConfig(**manifest["model_config"])
    train_cfg = (
        TrainConfig(**manifest["train_config"]) if manifest["train_config"] else None
    )
    if expect_model_cfg is not None and expect_model_cfg != model_cfg:
        raise VersionMismatch(
            f"{path}: stored ModelConfig {model_cfg} does not match expected "
            f"{expect_model_cfg}"
        )
    return params, model_cfg, train_cfg, manifest
