"""Versioned binary checkpoint format.

Layout (all integers little-endian)::

    offset        size  field
    0             8     magic  b"NERKITCK"
    8             4     uint32 format version (currently 1)
    12            8     uint64 metadata length M
    20            M     metadata, UTF-8 JSON (sorted keys, no whitespace)
    20+M          8     uint64 payload length P
    28+M          P     tensors back to back, float32 LE, C order, in the
                        order listed under metadata["tensors"]
    28+M+P        32    SHA-256 of every preceding byte

Metadata keys: ``config`` (ModelConfig fields), ``vocab`` (subword list),
``tags`` (rendered BIO tags in output-layer order), ``epoch``, ``dev_f1``,
``tensors`` (list of ``{"name", "shape"}``).
"""

from __future__ import annotations

import hashlib
import json
import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from ..errors import CheckpointError
from ..model.encoder import ModelConfig, ModelParams, check_params
from ..model.vocab import Vocab
from ..taxonomy import TAGS, render_tag

MAGIC = b"NERKITCK"
FORMAT_VERSION = 1
_DTYPE = np.dtype("<f4")
_DIGEST = 32


@dataclass
class Checkpoint:
    config: ModelConfig
    vocab: Vocab
    params: ModelParams
    epoch: int
    dev_f1: float
    tags: tuple[str, ...] = tuple(render_tag(t) for t in TAGS)
    format_version: int = FORMAT_VERSION


def checkpoint_bytes(ckpt: Checkpoint) -> bytes:
    check_params(ckpt.params, ckpt.config)
    names = list(ckpt.params)
    meta = {
        "config": ckpt.config.to_dict(),
        "vocab": list(ckpt.vocab.subwords),
        "tags": list(ckpt.tags),
        "epoch": ckpt.epoch,
        "dev_f1": ckpt.dev_f1,
        "tensors": [{"name": n, "shape": list(ckpt.params[n].shape)} for n in names],
    }
    meta_bytes = json.dumps(meta, sort_keys=True, separators=(",", ":"), ensure_ascii=False).encode()
    payload = b"".join(np.ascontiguousarray(ckpt.params[n], dtype=_DTYPE).tobytes() for n in names)
    body = b"".join(
        [
            MAGIC,
            struct.pack("<I", FORMAT_VERSION),
            struct.pack("<Q", len(meta_bytes)),
            meta_bytes,
            struct.pack("<Q", len(payload)),
            payload,
        ]
    )
    return body + hashlib.sha256(body).digest()


def save_checkpoint(ckpt: Checkpoint, destination: str | Path) -> None:
    Path(destination).write_bytes(checkpoint_bytes(ckpt))


def checkpoint_from_bytes(data: bytes) -> Checkpoint:
    """Decode and verify a checkpoint.

    Raises:
        CheckpointError: bad magic, unsupported version, truncation, checksum
            mismatch, or metadata inconsistent with the tensor payload.
    """
    if len(data) < 20 + 8 + _DIGEST or data[:8] != MAGIC:
        raise CheckpointError("not a checkpoint file (bad magic or too short)")
    (version,) = struct.unpack_from("<I", data, 8)
    if version != FORMAT_VERSION:
        raise CheckpointError(f"unsupported checkpoint version {version} (expected {FORMAT_VERSION})")
    body, digest = data[:-_DIGEST], data[-_DIGEST:]
    if hashlib.sha256(body).digest() != digest:
        raise CheckpointError("checksum mismatch: file truncated or corrupted")
    (meta_len,) = struct.unpack_from("<Q", body, 12)
    if 20 + meta_len + 8 > len(body):
        raise CheckpointError("metadata length exceeds file size")
    try:
        meta = json.loads(body[20 : 20 + meta_len].decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise CheckpointError(f"unreadable metadata: {exc}") from None
    (payload_len,) = struct.unpack_from("<Q", body, 20 + meta_len)
    payload = body[28 + meta_len :]
    if len(payload) != payload_len:
        raise CheckpointError(f"payload length {len(payload)} != declared {payload_len}")

    try:
        config = ModelConfig(**meta["config"])
        vocab = Vocab(tuple(meta["vocab"]))
        tensors = meta["tensors"]
        epoch, dev_f1, tags = int(meta["epoch"]), float(meta["dev_f1"]), tuple(meta["tags"])
    except (KeyError, TypeError, ValueError) as exc:
        raise CheckpointError(f"inconsistent metadata: {exc}") from None

    params: ModelParams = {}
    offset = 0
    for entry in tensors:
        shape = tuple(entry["shape"])
        nbytes = int(np.prod(shape, dtype=np.int64)) * _DTYPE.itemsize
        if offset + nbytes > len(payload):
            raise CheckpointError(f"tensor {entry['name']} runs past the payload")
        arr = np.frombuffer(payload, dtype=_DTYPE, count=nbytes // _DTYPE.itemsize, offset=offset)
        params[entry["name"]] = arr.reshape(shape).astype(np.float32)
        offset += nbytes
    if offset != len(payload):
        raise CheckpointError("trailing bytes after the last tensor")
    if len(vocab) != config.vocab_size:
        raise CheckpointError(f"vocab has {len(vocab)} entries, config says {config.vocab_size}")
    if len(tags) != config.tagset_size:
        raise CheckpointError(f"{len(tags)} tags listed, config says {config.tagset_size}")
    try:
        check_params(params, config)
    except ValueError as exc:
        raise CheckpointError(str(exc)) from None
    return Checkpoint(config, vocab, params, epoch, dev_f1, tags, version)


def load_checkpoint(source: str | Path) -> Checkpoint:
    try:
        data = Path(source).read_bytes()
    except OSError as exc:
        raise CheckpointError(f"cannot read checkpoint: {exc}") from None
    return checkpoint_from_bytes(data)
