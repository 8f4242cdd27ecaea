"""XOR-preserve deltas against a same-length reference line.

The delta keeps NUL wherever the line equals its reference and the line's
own byte everywhere else, so decoding is substitution rather than XOR.
"""

from __future__ import annotations

from typing import NamedTuple

# byte -> 0xFF if nonzero, 0x00 if zero (and the complement)
_NONZERO_MASK = bytes([0]) + bytes([0xFF]) * 255
_ZERO_MASK = bytes([0xFF]) + bytes(255)


class Match(NamedTuple):
    window_id: int
    score: float
    xor: bytes
    probes: int


class XorpOutput(NamedTuple):
    bytes: bytes
    window_id: int
    score: float


def xor_bytes(a: bytes, b: bytes) -> bytes:
    n = len(a)
    return (int.from_bytes(a, "big") ^ int.from_bytes(b, "big")).to_bytes(n, "big")


def _score(xor: bytes) -> float:
    n = len(xor)
    return xor.count(0) / n if n else 1.0


def similarity(a: bytes, b: bytes) -> float:
    """Fraction of positions at which two equal-length lines agree."""
    assert len(a) == len(b), "similarity needs equal-length lines"
    return _score(xor_bytes(a, b))


def find_similar(queue, line: bytes, theta: float):
    """Scan ``queue`` newest-first for a reference for ``line``.

    Returns the first entry scoring at least ``theta``; failing that, the
    best-scoring entry (the newer one on ties).  None for an empty queue.
    """
    if not queue:
        return None
    best = None
    probes = 0
    for wid in range(len(queue)):
        x = xor_bytes(queue[-1 - wid], line)
        score = _score(x)
        probes += 1
        if score >= theta:
            return Match(wid, score, x, probes)
        if best is None or score > best[1]:
            best = (wid, score, x)
    return Match(*best, probes)


def preserve(line: bytes, reference: bytes, window_id: int = 0, xor: bytes | None = None) -> XorpOutput:
    if xor is None:
        xor = xor_bytes(line, reference)
    n = len(line)
    mask = int.from_bytes(xor.translate(_NONZERO_MASK), "big")
    kept = (int.from_bytes(line, "big") & mask).to_bytes(n, "big")
    return XorpOutput(kept, window_id, _score(xor))


def restore(xorp: bytes, reference: bytes) -> bytes:
    """Invert :func:`preserve`: fill NUL positions from ``reference``."""
    n = len(xorp)
    holes = int.from_bytes(xorp.translate(_ZERO_MASK), "big")
    return (int.from_bytes(xorp, "big") | (int.from_bytes(reference, "big") & holes)).to_bytes(n, "big")
