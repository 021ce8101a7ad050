"""Bit-exact ``.liou`` segment files and the on-disk segment cache.

Layout (all little-endian)::

    magic "LIOU" | version u32 (=1) | start u64 | len u64 | prefix_base i64
    ceil(len/8) payload bytes, bit 1 = lambda +1, LSB first within a byte
    CRC32 u32 over header + payload
"""

from __future__ import annotations

import os
import struct
import tempfile
import zlib
from pathlib import Path
from typing import Optional, Union

import numpy as np

from .errors import (
    CRCMismatchError,
    EmptyRangeError,
    SegmentFormatError,
    StorageError,
    TruncatedSegmentError,
)
from .sieve import LambdaSegment, sieve_lambda

MAGIC = b"LIOU"
VERSION = 1
HEADER = struct.Struct("<4sIQQq")
CRC = struct.Struct("<I")
CACHE_ENV = "LIOU_CACHE"

PathLike = Union[str, os.PathLike]


def encode_segment(segment: LambdaSegment) -> bytes:
    if segment.len < 1:
        raise EmptyRangeError("refusing to encode an empty segment")
    header = HEADER.pack(MAGIC, VERSION, segment.start, segment.len, segment.prefix_base)
    payload = np.packbits(segment.signs > 0, bitorder="little").tobytes()
    body = header + payload
    return body + CRC.pack(zlib.crc32(body) & 0xFFFFFFFF)


def decode_segment(data: bytes) -> LambdaSegment:
    if len(data) < HEADER.size:
        raise TruncatedSegmentError(f"file shorter than header ({len(data)} bytes)")
    magic, version, start, length, prefix_base = HEADER.unpack_from(data)
    if magic != MAGIC:
        raise SegmentFormatError(f"bad magic {magic!r}")
    if version != VERSION:
        raise SegmentFormatError(f"unsupported version {version}")
    nbytes = (length + 7) // 8
    expected = HEADER.size + nbytes + CRC.size
    if len(data) < expected:
        raise TruncatedSegmentError(f"expected {expected} bytes, found {len(data)}")
    if len(data) > expected:
        raise SegmentFormatError(f"{len(data) - expected} trailing bytes after CRC")
    body = data[: HEADER.size + nbytes]
    (stored,) = CRC.unpack_from(data, HEADER.size + nbytes)
    actual = zlib.crc32(body) & 0xFFFFFFFF
    if stored != actual:
        raise CRCMismatchError(f"CRC mismatch: stored {stored:08x}, computed {actual:08x}")
    bits = np.unpackbits(
        np.frombuffer(body, dtype=np.uint8, offset=HEADER.size), count=length, bitorder="little"
    )
    signs = bits.astype(np.int8) * 2 - 1
    return LambdaSegment(start, signs, prefix_base)


def write_segment(segment: LambdaSegment, path: PathLike) -> None:
    """Write atomically: temp file in the same directory, then rename."""
    path = Path(path)
    data = encode_segment(segment)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        fd, tmp = tempfile.mkstemp(prefix=path.name + ".", suffix=".tmp", dir=path.parent)
        try:
            with os.fdopen(fd, "wb") as fh:
                fh.write(data)
            os.replace(tmp, path)
        except BaseException:
            if os.path.exists(tmp):
                os.unlink(tmp)
            raise
    except OSError as exc:
        raise StorageError(f"cannot write segment to {path}: {exc}") from exc


def read_segment(path: PathLike) -> LambdaSegment:
    path = Path(path)
    try:
        data = path.read_bytes()
    except OSError as exc:
        raise StorageError(f"cannot read segment {path}: {exc}") from exc
    try:
        return decode_segment(data)
    except StorageError as exc:
        raise type(exc)(f"{path}: {exc}") from None


def segment_filename(start: int, length: int) -> str:
    return f"lambda_{start}_{length}.liou"


def default_cache_dir() -> Optional[Path]:
    value = os.environ.get(CACHE_ENV)
    return Path(value) if value else None


class SegmentCache:
    """Directory of ``.liou`` files, one per (start, len)."""

    def __init__(self, directory: PathLike):
        self.directory = Path(directory)

    def path_for(self, start: int, length: int) -> Path:
        return self.directory / segment_filename(start, length)

    def load(self, start: int, length: int) -> Optional[LambdaSegment]:
        path = self.path_for(start, length)
        if not path.exists():
            return None
        return read_segment(path)

    def store(self, segment: LambdaSegment) -> Path:
        path = self.path_for(segment.start, segment.len)
        write_segment(segment, path)
        return path

    def get(self, start: int, length: int, *, workers: int = 1) -> LambdaSegment:
        seg = self.load(start, length)
        if seg is None:
            seg = sieve_lambda(start, length, workers=workers)
            self.store(seg)
        return seg
