"""FRAS binary raster files (masks, flow, depth share one container).

Layout, all little-endian:

    bytes 0-3    magic ``FRAS``
    bytes 4-7    u32 version (currently 1)
    bytes 8-11   u32 width
    bytes 12-15  u32 height
    bytes 16-19  u32 channels
    byte  20     u8 element type: 0 = u8, 1 = f32
    bytes 21-23  padding (zero)
    bytes 24-    payload, channel planes in order, each plane row-major

Arrays are exchanged as ``(channels, height, width)``.
"""

from __future__ import annotations

import struct
from pathlib import Path

import numpy as np

from ..errors import InputIOError, SchemaError
from .kv import atomic_write_bytes

MAGIC = b"FRAS"
VERSION = 1
HEADER = struct.Struct("<4sIIIIB3x")

_DTYPES = {0: np.dtype("<u1"), 1: np.dtype("<f4")}
_CODES = {np.dtype("uint8"): 0, np.dtype("float32"): 1}


def frame_raster_path(session_dir: Path, kind: str, frame: int) -> Path:
    """One file per frame per kind: ``<session>/<kind>/<frame:08d>.fras``."""
    return Path(session_dir) / kind / f"{frame:08d}.fras"


def write_fras(path: Path, array: np.ndarray) -> None:
    arr = np.asarray(array)
    if arr.ndim == 2:
        arr = arr[None, :, :]
    if arr.ndim != 3:
        raise SchemaError(f"raster must be (channels, height, width), got {arr.shape}")
    if arr.dtype == np.bool_:
        arr = arr.astype(np.uint8)
    if arr.dtype not in _CODES:
        raise SchemaError(f"unsupported raster dtype {arr.dtype}; use u8 or f32")
    channels, height, width = arr.shape
    header = HEADER.pack(MAGIC, VERSION, width, height, channels, _CODES[arr.dtype])
    payload = np.ascontiguousarray(arr).astype(arr.dtype.newbyteorder("<")).tobytes()
    atomic_write_bytes(Path(path), header + payload)


def read_fras(path: Path, mmap: bool = False) -> np.ndarray:
    """Read one raster as (channels, height, width).

    With ``mmap=True`` the payload is memory-mapped read-only, so walking a
    long session never holds every raster in memory at once.
    """
    path = Path(path)
    if not path.is_file():
        raise InputIOError(f"missing raster: {path}")
    with open(path, "rb") as fh:
        head = fh.read(HEADER.size)
    if len(head) < HEADER.size:
        raise SchemaError(f"{path}: truncated header")
    magic, version, width, height, channels, code = HEADER.unpack(head)
    if magic != MAGIC:
        raise SchemaError(f"{path}: bad magic {magic!r}")
    if version != VERSION:
        raise SchemaError(f"{path}: unsupported version {version}")
    if code not in _DTYPES:
        raise SchemaError(f"{path}: unknown element type code {code}")
    dtype = _DTYPES[code]
    count = width * height * channels
    expected = HEADER.size + count * dtype.itemsize
    actual = path.stat().st_size
    if actual != expected:
        raise SchemaError(f"{path}: payload size {actual - HEADER.size}, expected {count * dtype.itemsize}")
    shape = (channels, height, width)
    if mmap:
        data = np.memmap(path, dtype=dtype, mode="r", offset=HEADER.size, shape=shape)
        return data
    data = np.fromfile(path, dtype=dtype, offset=HEADER.size)
    return data.reshape(shape)


def read_fras_header(path: Path) -> dict:
    path = Path(path)
    if not path.is_file():
        raise InputIOError(f"missing raster: {path}")
    with open(path, "rb") as fh:
        head = fh.read(HEADER.size)
    if len(head) < HEADER.size:
        raise SchemaError(f"{path}: truncated header")
    magic, version, width, height, channels, code = HEADER.unpack(head)
    if magic != MAGIC:
        raise SchemaError(f"{path}: bad magic {magic!r}")
    return {
        "version": version,
        "width": width,
        "height": height,
        "channels": channels,
        "dtype": _DTYPES.get(code),
    }
