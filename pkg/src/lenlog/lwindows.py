"""Length-keyed windows: one bounded FIFO queue of recent lines per line length."""

from __future__ import annotations

import numpy as np

from . import _kernels
from .core import CodecError, ErrorKind


class LengthWindows:
    """Map from line length to the ``k`` most recently seen lines of that length.

    Queues are exposed oldest-first; window ids count from the newest entry
    (0 = most recent).  The storage is shared with the compiled engine, so an
    instance belongs to exactly one compressor or decompressor at a time.
    """

    def __init__(self, k: int):
        if not 1 <= k <= 256:
            raise CodecError(ErrorKind.CONFIG_INVALID, f"k must be in [1, 256], got {k}")
        self.k = k
        self.slots, self.rings, self.heads, self.counts = _kernels.new_state()

    @property
    def state(self):
        return self.slots, self.rings, self.heads, self.counts

    def lookup(self, length: int):
        """Return the queue for ``length`` as a tuple (oldest first), or None."""
        s = self.slots.get(length, -1)
        if s < 0:
            return None
        ring = self.rings[s]
        head, count, k = self.heads[s], self.counts[s], self.k
        out = []
        for i in range(count):
            p = (head - count + i) % k
            out.append(ring[p * length:(p + 1) * length].tobytes())
        return tuple(out)

    def cache(self, line: bytes) -> None:
        """Append ``line`` to its queue, evicting the oldest entry when full."""
        _kernels.cache_line(*self.state, self.k, np.frombuffer(line, np.uint8))

    def lengths(self) -> list[int]:
        return sorted(self.slots.keys())

    def snapshot(self) -> dict:
        return {n: self.lookup(n) for n in self.lengths()}

    @property
    def nbytes(self) -> int:
        """Bytes reserved for cached lines (``k`` slots per known length)."""
        return int(_kernels.ring_bytes(self.rings))

    def __len__(self):
        return len(self.slots)

    def __eq__(self, other):
        if not isinstance(other, LengthWindows):
            return NotImplemented
        return self.k == other.k and self.snapshot() == other.snapshot()

    def __repr__(self):
        return f"LengthWindows(k={self.k}, queues={len(self)}, nbytes={self.nbytes})"


def entry_at(queue, window_id: int) -> bytes:
    """Line at ``window_id`` counted from the newest entry of ``queue``."""
    if queue is None or not 0 <= window_id < len(queue):
        size = 0 if queue is None else len(queue)
        raise CodecError(ErrorKind.CORRUPT_RECORD, f"window id {window_id} out of range for queue of {size}")
    return queue[-1 - window_id]
