"""Binary sample-frame files: 32-byte header plus interleaved float64 pairs.

Layout (all little-endian):

====== ===== =========================================
offset bytes field
====== ===== =========================================
0      8     magic ``b"MFIFRAME"``
8      4     version (uint32, currently 1)
12     4     reserved (zeros)
16     8     sample_rate (float64, Hz)
24     8     symbol_rate (float64, Hz)
32     ...   samples: (re, im) float64 pairs
====== ===== =========================================

The format is bit-exact and language-neutral; an optional JSON sidecar can
carry annotations but is never required to read the samples.
"""

from __future__ import annotations

import struct

import numpy as np

from mfikit.sim import SampleFrame

MAGIC = b"MFIFRAME"
VERSION = 1
_HEADER = struct.Struct("<8sII dd")


class FrameFormatError(ValueError):
    """Raised when a sample file is malformed."""


def write_frame(path, frame: SampleFrame) -> None:
    """Write a frame to `path` in the binary format above."""
    header = _HEADER.pack(MAGIC, VERSION, 0, frame.sample_rate, frame.symbol_rate)
    payload = np.empty(frame.samples.size * 2, dtype="<f8")
    payload[0::2] = frame.samples.real
    payload[1::2] = frame.samples.imag
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(payload.tobytes())


def read_frame(path) -> SampleFrame:
    """Read a frame written by :func:`write_frame`.

    Raises
    ------
    FrameFormatError
        If the file is truncated, carries the wrong magic or version, or
        its payload is not a whole number of complex samples.
    """
    with open(path, "rb") as fh:
        raw = fh.read()
    if len(raw) < _HEADER.size:
        raise FrameFormatError("file too short for a frame header")
    magic, version, _, sample_rate, symbol_rate = _HEADER.unpack_from(raw)
    if magic != MAGIC:
        raise FrameFormatError("bad magic; not a sample-frame file")
    if version != VERSION:
        raise FrameFormatError(f"unsupported frame version {version}")
    body = raw[_HEADER.size :]
    if len(body) == 0 or len(body) % 16 != 0:
        raise FrameFormatError("payload is not a whole number of complex samples")
    flat = np.frombuffer(body, dtype="<f8")
    samples = flat[0::2] + 1j * flat[1::2]
    try:
        return SampleFrame(samples=samples, sample_rate=sample_rate, symbol_rate=symbol_rate)
    except ValueError as exc:
        raise FrameFormatError(str(exc)) from None
