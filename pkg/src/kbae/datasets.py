"""Binary dataset files of normalized phase-shift matrices.

Layout (all integers little-endian):

    magic   4 bytes  b"KBPS"
    version u32      1
    m       u32      matrix side length
    count   u64      number of samples
    width   u8       bytes per value (4)
    payload count * m * m float32 values, row-major per sample

Writes are atomic: data goes to a temporary file that is renamed into place
only on success.
"""

from __future__ import annotations

import os
import struct
import tempfile

import numpy as np

from .errors import ConfigError, DomainError, FormatError

MAGIC = b"KBPS"
VERSION = 1
_HEADER = struct.Struct("<4sIIQB")


def atomic_write(path, payload):
    """Write bytes to ``path`` via a same-directory temp file and rename."""
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-kbae-")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(payload)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def write_dataset(path, samples):
    """Persist an array of normalized matrices, shape (count, m, m)."""
    samples = np.asarray(samples, dtype=np.float64)
    if samples.ndim != 3 or samples.shape[1] != samples.shape[2]:
        raise ConfigError(f"samples must be (count, m, m), got {samples.shape}")
    if samples.size and (samples.min() < 0.0 or samples.max() >= 1.0):
        raise DomainError("dataset values must be normalized into [0, 1)")
    count, m, _ = samples.shape
    header = _HEADER.pack(MAGIC, VERSION, m, count, 4)
    payload = samples.astype("<f4").tobytes()
    atomic_write(path, header + payload)


def read_dataset(path):
    """Load a dataset file back to a float64 array of shape (count, m, m)."""
    with open(path, "rb") as fh:
        blob = fh.read()
    if len(blob) < _HEADER.size:
        raise FormatError(f"truncated header: {len(blob)} bytes at offset 0")
    magic, version, m, count, width = _HEADER.unpack_from(blob, 0)
    if magic != MAGIC:
        raise FormatError(f"bad magic {magic!r} at offset 0")
    if version != VERSION:
        raise FormatError(f"unsupported version {version} at offset 4")
    if width != 4:
        raise FormatError(f"unsupported value width {width} at offset 20")
    expected = _HEADER.size + count * m * m * 4
    if len(blob) != expected:
        raise FormatError(
            f"payload ends at offset {len(blob)}, expected {expected}"
        )
    values = np.frombuffer(blob, dtype="<f4", offset=_HEADER.size)
    return values.astype(np.float64).reshape(count, m, m)


def split_counts(total, fractions):
    """Largest-remainder apportionment of ``total`` into len(fractions) parts."""
    fractions = [float(f) for f in fractions]
    if any(f < 0 for f in fractions) or sum(fractions) <= 0:
        raise ConfigError(f"invalid split fractions {fractions}")
    weight = sum(fractions)
    quotas = [total * f / weight for f in fractions]
    counts = [int(q) for q in quotas]
    remainders = [q - c for q, c in zip(quotas, counts)]
    leftover = total - sum(counts)
    # ties broken toward the earlier part
    order = sorted(range(len(fractions)), key=lambda i: (-remainders[i], i))
    for i in order[:leftover]:
        counts[i] += 1
    return counts


def split_dataset(src_path, fractions, out_paths):
    """Partition a dataset file into contiguous, order-preserving parts."""
    if len(fractions) != len(out_paths):
        raise ConfigError("need one output path per fraction")
    samples = read_dataset(src_path)
    counts = split_counts(samples.shape[0], fractions)
    start = 0
    for count, path in zip(counts, out_paths):
        write_dataset(path, samples[start : start + count])
        start += count
    return counts
