import os

import numpy as np
import pytest

from liouvar.errors import CRCMismatchError, SegmentFormatError, StorageError, TruncatedSegmentError
from liouvar.sieve import LambdaSegment, sieve_lambda
from liouvar.storage import (
    HEADER,
    SegmentCache,
    decode_segment,
    encode_segment,
    read_segment,
    segment_filename,
    write_segment,
)


def test_bit_order():
    seg = LambdaSegment(2, np.array([1, -1, -1, 1]), prefix_base=1)
    data = encode_segment(seg)
    assert data[:4] == b"LIOU"
    assert data[HEADER.size] == 0b00001001
    assert len(data) == HEADER.size + 1 + 4


def test_seeded_roundtrips():
    rng = np.random.default_rng(2024)
    for _ in range(1000):
        length = int(rng.integers(1, 4097))
        start = int(rng.integers(2, 10**15))
        signs = rng.choice(np.array([-1, 1], dtype=np.int8), size=length)
        seg = LambdaSegment(start, signs, int(rng.integers(-(10**9), 10**9)))
        back = decode_segment(encode_segment(seg))
        assert back.start == seg.start and back.prefix_base == seg.prefix_base
        assert np.array_equal(back.signs, seg.signs)


def test_file_roundtrip(tmp_path):
    seg = sieve_lambda(1000, 777)
    path = tmp_path / "sub" / "x.liou"
    write_segment(seg, path)
    back = read_segment(path)
    assert np.array_equal(back.signs, seg.signs) and back.prefix_base == seg.prefix_base
    assert [p.name for p in path.parent.iterdir()] == ["x.liou"]


def test_corruption_detected():
    data = bytearray(encode_segment(sieve_lambda(10, 100)))
    flipped = bytearray(data)
    flipped[HEADER.size + 3] ^= 0x10
    with pytest.raises(CRCMismatchError):
        decode_segment(bytes(flipped))
    bad_magic = b"XIOU" + bytes(data[4:])
    with pytest.raises(SegmentFormatError):
        decode_segment(bad_magic)
    with pytest.raises(TruncatedSegmentError):
        decode_segment(bytes(data[:-1]))
    with pytest.raises(TruncatedSegmentError):
        decode_segment(bytes(data[:10]))
    with pytest.raises(SegmentFormatError):
        decode_segment(bytes(data) + b"\x00")


def test_errors_are_storage_errors(tmp_path):
    assert issubclass(CRCMismatchError, StorageError)
    with pytest.raises(StorageError):
        read_segment(tmp_path / "missing.liou")


@pytest.mark.skipif(os.geteuid() == 0, reason="root ignores directory permissions")
def test_unwritable_directory(tmp_path):
    locked = tmp_path / "locked"
    locked.mkdir()
    locked.chmod(0o500)
    try:
        with pytest.raises(StorageError):
            write_segment(sieve_lambda(1, 8), locked / "a.liou")
    finally:
        locked.chmod(0o700)


def test_write_to_file_as_directory(tmp_path):
    blocker = tmp_path / "blocker"
    blocker.write_text("x")
    with pytest.raises(StorageError):
        write_segment(sieve_lambda(1, 8), blocker / "a.liou")


def test_cache(tmp_path):
    cache = SegmentCache(tmp_path)
    assert cache.load(1, 64) is None
    seg = cache.get(1, 64)
    assert (tmp_path / segment_filename(1, 64)).exists()
    again = cache.get(1, 64)
    assert np.array_equal(seg.signs, again.signs)
