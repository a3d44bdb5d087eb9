"""File formats: full-precision CSV matrices and a flat float64 container.

Container layout (all integers little-endian)::

    magic    8 bytes   b"RMMARR\\x00\\x01"
    version  uint32
    meta_len uint32    length of the UTF-8 JSON metadata record
    meta     meta_len bytes
    count    uint32    number of arrays
    per array:
        name_len uint16, name (UTF-8), ndim uint8, dims uint64[ndim],
        payload float64 little-endian, C order
"""

from __future__ import annotations

import csv
import hashlib
import json
import struct
from pathlib import Path

import numpy as np

MAGIC = b"RMMARR\x00\x01"
VERSION = 1


def write_matrix_csv(path, M, header=None) -> None:
    M = np.atleast_2d(np.asarray(M, dtype=np.float64))
    with open(path, "w", newline="") as f:
        writer = csv.writer(f, lineterminator="\n")
        if header is not None:
            writer.writerow(header)
        for row in M:
            writer.writerow([f"{x:.17e}" for x in row])


def read_matrix_csv(path, header: bool = False) -> np.ndarray:
    return np.loadtxt(path, delimiter=",", skiprows=1 if header else 0, ndmin=2)


def _canonical_json(meta: dict) -> bytes:
    return json.dumps(meta, sort_keys=True, separators=(",", ":")).encode("utf-8")


def write_container(path, arrays: dict, meta: dict | None = None) -> None:
    """Write named float64 arrays plus a JSON metadata record."""
    meta_bytes = _canonical_json(meta or {})
    parts = [MAGIC, struct.pack("<II", VERSION, len(meta_bytes)), meta_bytes]
    parts.append(struct.pack("<I", len(arrays)))
    for name, arr in arrays.items():
        a = np.array(arr, dtype="<f8", order="C")  # keeps 0-d shape
        nb = name.encode("utf-8")
        parts.append(struct.pack("<H", len(nb)) + nb + struct.pack("<B", a.ndim))
        parts.append(struct.pack(f"<{a.ndim}Q", *a.shape))
        parts.append(a.tobytes())
    Path(path).write_bytes(b"".join(parts))


def read_container(path) -> tuple[dict, dict]:
    """Inverse of :func:`write_container`; returns ``(arrays, meta)``."""
    buf = Path(path).read_bytes()
    if buf[:8] != MAGIC:
        raise ValueError(f"{path}: not an array container (bad magic bytes)")
    version, meta_len = struct.unpack_from("<II", buf, 8)
    if version != VERSION:
        raise ValueError(f"{path}: unsupported container version {version}")
    pos = 16
    meta = json.loads(buf[pos : pos + meta_len].decode("utf-8"))
    pos += meta_len
    (count,) = struct.unpack_from("<I", buf, pos)
    pos += 4
    arrays = {}
    for _ in range(count):
        (nlen,) = struct.unpack_from("<H", buf, pos)
        pos += 2
        name = buf[pos : pos + nlen].decode("utf-8")
        pos += nlen
        (ndim,) = struct.unpack_from("<B", buf, pos)
        pos += 1
        shape = struct.unpack_from(f"<{ndim}Q", buf, pos)
        pos += 8 * ndim
        size = int(np.prod(shape, dtype=np.int64))
        arrays[name] = np.frombuffer(buf, dtype="<f8", count=size, offset=pos).reshape(shape).copy()
        pos += 8 * size
    return arrays, meta


def sha256_file(path, chunk: int = 1 << 20) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as f:
        while block := f.read(chunk):
            h.update(block)
    return h.hexdigest()
