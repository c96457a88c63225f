"""Little-endian container of named arrays shared by weight files and stream checkpoints.

Layout::

    magic     8 bytes
    version   u32
    header    u32 length + bytes (caller-defined, e.g. a config hash)
    count     u32
    count x { u16 name length, utf-8 name, u8 dtype code, u8 ndim,
              ndim x u32 dims, raw little-endian data }
"""
from __future__ import annotations

import io
import struct

import numpy as np

from .errors import FormatError

_DTYPES = {0: "<f4", 1: "<f8", 2: "<c8", 3: "<c16", 4: "<i8", 5: "|b1"}
_CODES = {np.dtype(v): k for k, v in _DTYPES.items()}


def dumps(magic: bytes, version: int, header: bytes, arrays) -> bytes:
    if len(magic) != 8:
        raise ValueError("magic must be 8 bytes")
    buf = io.BytesIO()
    buf.write(magic)
    buf.write(struct.pack("<II", version, len(header)))
    buf.write(header)
    items = list(arrays.items())
    buf.write(struct.pack("<I", len(items)))
    for name, arr in items:
        arr = np.asarray(arr)
        dt = arr.dtype.newbyteorder("<") if arr.dtype.byteorder == ">" else arr.dtype
        code = _CODES.get(np.dtype(dt))
        if code is None:
            raise FormatError(f"unsupported dtype {arr.dtype} for {name}")
        raw = name.encode()
        buf.write(struct.pack("<H", len(raw)) + raw)
        buf.write(struct.pack("<BB", code, arr.ndim))
        buf.write(struct.pack(f"<{arr.ndim}I", *arr.shape))
        buf.write(np.ascontiguousarray(arr, dtype=_DTYPES[code]).tobytes())
    return buf.getvalue()


def loads(blob: bytes, magic: bytes):
    """Returns ``(version, header, {name: array})``."""
    view = memoryview(blob)
    pos = 0

    def take(n):
        nonlocal pos
        if pos + n > len(view):
            raise FormatError("truncated file")
        out = view[pos : pos + n]
        pos += n
        return bytes(out)

    if take(8) != magic:
        raise FormatError("bad magic")
    version, hlen = struct.unpack("<II", take(8))
    header = take(hlen)
    (count,) = struct.unpack("<I", take(4))
    arrays = {}
    for _ in range(count):
        (nlen,) = struct.unpack("<H", take(2))
        try:
            name = take(nlen).decode()
        except UnicodeDecodeError as exc:
            raise FormatError("corrupt tensor name") from exc
        code, ndim = struct.unpack("<BB", take(2))
        if code not in _DTYPES:
            raise FormatError(f"unknown dtype code {code}")
        dims = struct.unpack(f"<{ndim}I", take(4 * ndim))
        dt = np.dtype(_DTYPES[code])
        n = int(np.prod(dims, dtype=np.int64)) * dt.itemsize
        arrays[name] = np.frombuffer(take(n), dtype=dt).reshape(dims).copy()
    if pos != len(view):
        raise FormatError("trailing bytes after last tensor")
    return version, header, arrays
