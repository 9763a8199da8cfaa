"""Versioned binary artifact files.

Every artifact starts with the magic bytes "TLAT", a u32 format version, and
a u32 kind tag; all integers and floats are little-endian, arrays are
row-major f64 unless noted. Content hashes are computed over the exact byte
serialization so fingerprints are stable between fit, save, and load.
"""

from __future__ import annotations

import hashlib
import io
import json
import struct
from pathlib import Path
from typing import BinaryIO

import numpy as np

from .errors import ArtifactError

MAGIC = b"TLAT"
FORMAT_VERSION = 1

KIND_TFIDF = 1
KIND_LSA = 2
KIND_LDA = 3
KIND_ALIGNMENT = 4
KIND_VECTORS = 5


def write_header(fh: BinaryIO, kind: int) -> None:
    fh.write(MAGIC)
    fh.write(struct.pack("<II", FORMAT_VERSION, kind))


def read_header(fh: BinaryIO, expected_kind: int) -> None:
    magic = fh.read(4)
    if magic != MAGIC:
        raise ArtifactError(f"bad magic {magic!r}, expected {MAGIC!r}")
    raw = fh.read(8)
    if len(raw) != 8:
        raise ArtifactError("truncated header")
    version, kind = struct.unpack("<II", raw)
    if version != FORMAT_VERSION:
        raise ArtifactError(f"unsupported format version {version}")
    if kind != expected_kind:
        raise ArtifactError(f"artifact kind {kind}, expected {expected_kind}")


def write_u32(fh: BinaryIO, value: int) -> None:
    fh.write(struct.pack("<I", value))


def write_u64(fh: BinaryIO, value: int) -> None:
    fh.write(struct.pack("<Q", value))


def write_f64(fh: BinaryIO, value: float) -> None:
    fh.write(struct.pack("<d", value))


def read_u32(fh: BinaryIO) -> int:
    return _unpack(fh, "<I", 4)


def read_u64(fh: BinaryIO) -> int:
    return _unpack(fh, "<Q", 8)


def read_f64(fh: BinaryIO) -> float:
    return _unpack(fh, "<d", 8)


def _unpack(fh: BinaryIO, fmt: str, size: int):
    raw = fh.read(size)
    if len(raw) != size:
        raise ArtifactError("unexpected end of file")
    return struct.unpack(fmt, raw)[0]


def write_string(fh: BinaryIO, value: str) -> None:
    data = value.encode("utf-8")
    write_u32(fh, len(data))
    fh.write(data)


def read_string(fh: BinaryIO) -> str:
    size = read_u32(fh)
    raw = fh.read(size)
    if len(raw) != size:
        raise ArtifactError("unexpected end of file in string")
    return raw.decode("utf-8")


def write_array(fh: BinaryIO, array: np.ndarray, dtype: str = "<f8") -> None:
    """Write shape (ndim, dims...) then the row-major payload."""
    arr = np.ascontiguousarray(array, dtype=np.dtype(dtype))
    write_u32(fh, arr.ndim)
    for dim in arr.shape:
        write_u64(fh, dim)
    fh.write(arr.tobytes(order="C"))


def read_array(fh: BinaryIO, dtype: str = "<f8") -> np.ndarray:
    ndim = read_u32(fh)
    shape = tuple(read_u64(fh) for _ in range(ndim))
    dt = np.dtype(dtype)
    count = int(np.prod(shape)) if shape else 1
    raw = fh.read(count * dt.itemsize)
    if len(raw) != count * dt.itemsize:
        raise ArtifactError("unexpected end of file in array")
    return np.frombuffer(raw, dtype=dt).reshape(shape).copy()


def serialize(kind: int, payload_writer) -> bytes:
    """Serialize an artifact to bytes via its payload writer callback."""
    buf = io.BytesIO()
    write_header(buf, kind)
    payload_writer(buf)
    return buf.getvalue()


def save(path: str | Path, kind: int, payload_writer) -> str:
    """Write an artifact file and return its content hash."""
    data = serialize(kind, payload_writer)
    Path(path).write_bytes(data)
    return content_hash(data)


def load(path: str | Path, kind: int, payload_reader):
    data = Path(path).read_bytes()
    buf = io.BytesIO(data)
    read_header(buf, kind)
    obj = payload_reader(buf)
    return obj, content_hash(data)


def content_hash(data: bytes) -> str:
    return hashlib.sha256(data).hexdigest()


def json_debug_dump(path: str | Path, payload: dict) -> None:
    """Companion human-readable export for artifact inspection."""
    Path(path).write_text(
        json.dumps(payload, indent=2, sort_keys=True, ensure_ascii=False) + "\n",
        encoding="utf-8",
    )
