"""Streaming compressor/decompressor engines and the container format.

Container layout (10 header bytes, then records back to back)::

    magic "LGLT" | version 1 | variant (0=bit, 1=byte) | k - 1 |
    theta * 10000 (u16 big-endian) | flags (bit 0: input ended with LF)

Bit-variant containers zero-pad the final record to a whole byte.
"""

from __future__ import annotations

import io
import shutil
import tempfile
from dataclasses import dataclass

import numpy as np

from . import _kernels, core
from .core import CodecConfig, CodecError, ErrorKind, Variant, check_line
from .lwindows import LengthWindows, entry_at
from .rle import (
    BitReader,
    BitWriter,
    bit_record_size,
    byte_record_size,
    decoded_length,
    detokenize,
    encode_bit_record,
    encode_byte_record,
    encode_raw_bit_record,
    encode_raw_byte_record,
    raw_bit_record_size,
    raw_byte_record_size,
    read_bit_record,
    read_byte_record,
    tokenize,
)
from .xorp import find_similar, preserve, restore

MAGIC = b"LGLT"
VERSION = 1
HEADER_SIZE = 10
FLAG_TRAILING_NEWLINE = 0x01
CHUNK_SIZE = 1 << 20

_DECODE_ERRORS = {
    _kernels.ERR_NO_REFERENCE: "window id has no cached reference line",
    _kernels.ERR_RUN_ZERO: "run of length 0",
    _kernels.ERR_LITERAL: "literal byte cannot occur in a line",
    _kernels.ERR_PADDING: "nonzero padding bits",
    _kernels.ERR_EMPTY_RECORD: "RLE record without tokens",
    _kernels.ERR_RAW_CONTENT: "raw record contains NUL or LF",
    _kernels.ERR_VARINT: "invalid length varint",
    _kernels.ERR_INSTRUCTION_LEN: "RLE record with empty instruction section",
}


@dataclass(frozen=True)
class ContainerHeader:
    config: CodecConfig
    trailing_newline: bool = True

    def to_bytes(self) -> bytes:
        cfg = self.config
        flags = FLAG_TRAILING_NEWLINE if self.trailing_newline else 0
        return (
            MAGIC
            + bytes([VERSION, int(cfg.variant), cfg.k - 1])
            + cfg.theta_units.to_bytes(2, "big")
            + bytes([flags])
        )

    @classmethod
    def from_bytes(cls, data) -> "ContainerHeader":
        data = bytes(data[:HEADER_SIZE])
        if len(data) < HEADER_SIZE:
            raise CodecError(ErrorKind.BAD_HEADER, f"container header needs {HEADER_SIZE} bytes, got {len(data)}")
        if data[:4] != MAGIC:
            raise CodecError(ErrorKind.BAD_HEADER, f"bad magic {data[:4]!r}")
        if data[4] != VERSION:
            raise CodecError(ErrorKind.BAD_HEADER, f"unsupported version {data[4]}")
        if data[5] not in (0, 1):
            raise CodecError(ErrorKind.BAD_HEADER, f"unknown variant {data[5]}")
        flags = data[9]
        if flags & ~FLAG_TRAILING_NEWLINE:
            raise CodecError(ErrorKind.BAD_HEADER, f"unknown flags {flags:#04x}")
        try:
            config = CodecConfig(data[6] + 1, int.from_bytes(data[7:9], "big") / core.THETA_SCALE, Variant(data[5]))
        except CodecError as exc:
            raise CodecError(ErrorKind.BAD_HEADER, exc.detail) from None
        return cls(config, bool(flags & FLAG_TRAILING_NEWLINE))


class Compressor:
    """Line-by-line encoder owning one :class:`LengthWindows`.

    ``compress_line`` and ``compress`` return the bytes completed so far;
    bit-variant output keeps up to 7 pending bits until :meth:`finish`.
    With ``accelerated=False`` the same records are produced by the plain
    Python building blocks (slow; used as a reference).
    """

    def __init__(self, config: CodecConfig | None = None, *, accelerated: bool = True):
        self.config = config or CodecConfig()
        self.windows = LengthWindows(self.config.k)
        self.accelerated = accelerated
        # lines, rle records, similarity probes
        self.stats = np.zeros(3, np.int64)
        self._bit = self.config.variant == Variant.BIT
        self._acc = 0
        self._nacc = 0
        self._writer = BitWriter()
        self._pending = b""
        self._ends_with_lf = None
        self._finished = False

    @property
    def lines(self) -> int:
        return int(self.stats[0])

    @property
    def trailing_newline(self) -> bool:
        return bool(self._ends_with_lf) and not self._pending

    def compress_line(self, line: bytes) -> bytes:
        line = bytes(line)
        check_line(line)
        if not self.accelerated:
            self._encode_pure(line)
            return self._writer.take()
        arr = np.frombuffer(line, np.uint8)
        return self._encode(arr, np.zeros(1, np.int64), np.array([len(line)], np.int64))

    def compress_lines(self, lines) -> bytes:
        return b"".join(self.compress_line(line) for line in lines)

    def compress(self, data: bytes) -> bytes:
        """Encode every complete line in ``data``; a trailing partial line is held."""
        if self._finished:
            raise RuntimeError("compressor already finished")
        data = bytes(data)
        if not data:
            return b""
        if b"\x00" in data:
            pos = data.index(0)
            lineno = self.lines + data.count(b"\n", 0, pos) + 1
            raise CodecError(ErrorKind.NUL_BYTE_IN_INPUT, f"NUL in line {lineno}")
        self._ends_with_lf = data.endswith(b"\n")
        data = self._pending + data
        cut = data.rfind(b"\n") + 1
        complete, self._pending = data[:cut], data[cut:]
        if len(self._pending) > core.MAX_LINE_LENGTH:
            raise CodecError(ErrorKind.LINE_TOO_LONG, f"line exceeds {core.MAX_LINE_LENGTH} bytes")
        if not complete:
            return b""
        arr = np.frombuffer(complete, np.uint8)
        ends = np.flatnonzero(arr == 0x0A)
        starts = np.empty_like(ends)
        starts[0] = 0
        starts[1:] = ends[:-1] + 1
        if int((ends - starts).max()) > core.MAX_LINE_LENGTH:
            raise CodecError(ErrorKind.LINE_TOO_LONG, f"line exceeds {core.MAX_LINE_LENGTH} bytes")
        if not self.accelerated:
            for s, e in zip(starts.tolist(), ends.tolist()):
                self._encode_pure(complete[s:e])
            return self._writer.take()
        return self._encode(arr, starts, ends)

    def finish(self) -> bytes:
        """Encode any held partial line and zero-pad the bit stream."""
        if self._finished:
            return b""
        out = b""
        if self._pending:
            out = self.compress_line(self._pending)
        self._finished = True
        if not self.accelerated:
            return out + self._writer.flush()
        if self._nacc:
            out += bytes([(self._acc << (8 - self._nacc)) & 0xFF])
            self._acc = self._nacc = 0
        return out

    def _encode(self, arr, starts, ends) -> bytes:
        cfg = self.config
        out = np.empty(arr.shape[0] + 8 * starts.shape[0] + 16, np.uint8)
        opos, self._acc, self._nacc = _kernels.compress_lines(
            arr, starts, ends, cfg.k, cfg.window_id_bits, cfg.theta, self._bit,
            *self.windows.state, out, 0, self._acc, self._nacc, self.stats,
        )
        return out[:opos].tobytes()

    def _encode_pure(self, line: bytes) -> None:
        cfg = self.config
        n = len(line)
        queue = self.windows.lookup(n) if n else None
        tokens = None
        if queue:
            match = find_similar(queue, line, cfg.theta)
            self.stats[2] += match.probes
            xp = preserve(line, entry_at(queue, match.window_id), match.window_id, match.xor)
            tokens = tokenize(xp.bytes)
            if self._bit:
                smaller = bit_record_size(len(tokens), cfg.k) < raw_bit_record_size(n)
            else:
                smaller = byte_record_size(len(tokens), cfg.k) < raw_byte_record_size(n)
            if not smaller:
                tokens = None
        if tokens is None:
            if self._bit:
                encode_raw_bit_record(line, self._writer)
            else:
                self._writer.buf += encode_raw_byte_record(line)
        else:
            self.stats[1] += 1
            if self._bit:
                encode_bit_record(tokens, match.window_id, cfg.k, self._writer)
            else:
                self._writer.buf += encode_byte_record(tokens, match.window_id, cfg.k)
        self.windows.cache(line)
        self.stats[0] += 1


class Decompressor:
    """Record decoder mirroring a :class:`Compressor`'s window state.

    Input arrives through :meth:`write`; :meth:`read_line` decodes one record
    and :meth:`read` every complete record buffered so far.
    """

    def __init__(self, config: CodecConfig | None = None, trailing_newline: bool = True,
                 *, accelerated: bool = True):
        self.config = config or CodecConfig()
        self.trailing_newline = trailing_newline
        self.windows = LengthWindows(self.config.k)
        self.accelerated = accelerated
        self.lines = 0
        self._bit = self.config.variant == Variant.BIT
        self._buf = b""
        self._pos = 0

    @classmethod
    def from_header(cls, data, *, accelerated: bool = True) -> "Decompressor":
        header = ContainerHeader.from_bytes(data)
        return cls(header.config, header.trailing_newline, accelerated=accelerated)

    def write(self, data: bytes) -> None:
        if not data:
            return
        cut = self._pos >> 3 if self._bit else self._pos
        self._buf = self._buf[cut:] + bytes(data)
        self._pos -= 8 * cut if self._bit else cut

    def read_line(self):
        """Decode the next record; None if it is not completely buffered."""
        out, n = self._decode(1)
        return out[:-1] if n else None

    def read(self) -> bytes:
        """Decode all complete records; each line is returned followed by LF."""
        return self._decode(-1)[0]

    def feed(self, data: bytes) -> bytes:
        self.write(data)
        return self.read()

    def finish(self) -> None:
        """Check that nothing but bit padding is left over."""
        if self._bit:
            rest = 8 * len(self._buf) - self._pos
            if rest >= 8 or (rest and self._buf[-1] & ((1 << rest) - 1)):
                raise CodecError(ErrorKind.TRUNCATED_STREAM, f"{rest} undecoded bits at end of stream")
        elif self._pos != len(self._buf):
            raise CodecError(
                ErrorKind.TRUNCATED_STREAM, f"{len(self._buf) - self._pos} undecoded bytes at end of stream"
            )

    def _decode(self, limit: int):
        if not self.accelerated:
            return self._decode_pure(limit)
        cfg = self.config
        buf = np.frombuffer(self._buf, np.uint8)
        end = 8 * buf.shape[0] if self._bit else buf.shape[0]
        kernel = _kernels.decompress_bits if self._bit else _kernels.decompress_bytes
        out = np.empty(max(256, 4 * buf.shape[0]), np.uint8)
        opos = 0
        total = 0
        remaining = limit if limit > 0 else 1 << 62
        while True:
            status, pos, opos, n = kernel(
                buf, self._pos, end, remaining - total, cfg.k, cfg.window_id_bits,
                *self.windows.state, out, opos,
            )
            self._pos = pos
            total += n
            if status == _kernels.OUTPUT_FULL:
                grown = np.empty(2 * out.shape[0], np.uint8)
                grown[:opos] = out[:opos]
                out = grown
                continue
            if status < 0:
                self.lines += total
                unit = "bit" if self._bit else "byte"
                raise CodecError(
                    ErrorKind.CORRUPT_RECORD, f"{_DECODE_ERRORS[status]} (record at {unit} {pos} of buffer)"
                )
            break
        self.lines += total
        return out[:opos].tobytes(), total

    def _decode_pure(self, limit: int):
        k = self.config.k
        out = bytearray()
        total = 0
        while limit < 0 or total < limit:
            try:
                if self._bit:
                    src = BitReader(self._buf, self._pos)
                    rec = read_bit_record(src, k)
                else:
                    rec = read_byte_record(self._buf, self._pos, k)
            except CodecError as exc:
                if exc.kind is ErrorKind.TRUNCATED_STREAM:
                    break
                raise
            if rec.raw is not None:
                line = rec.raw
            else:
                n = decoded_length(rec.tokens)
                reference = entry_at(self.windows.lookup(n), rec.window_id)
                line = restore(detokenize(rec.tokens), reference)
            self.windows.cache(line)
            self._pos = rec.end
            out += line
            out.append(0x0A)
            total += 1
        self.lines += total
        return bytes(out), total


def compress_stream(raw: bytes, config: CodecConfig | None = None, *, accelerated: bool = True) -> bytes:
    """Compress a whole byte stream into a container."""
    config = config or CodecConfig()
    c = Compressor(config, accelerated=accelerated)
    body = c.compress(raw) + c.finish()
    return ContainerHeader(config, c.trailing_newline).to_bytes() + body


def decompress_stream(data: bytes, *, accelerated: bool = True) -> bytes:
    d = Decompressor.from_header(data, accelerated=accelerated)
    out = d.feed(data[HEADER_SIZE:])
    d.finish()
    if out and not d.trailing_newline:
        out = out[:-1]
    return out


def _seekable(f) -> bool:
    try:
        return f.seekable()
    except (AttributeError, ValueError, OSError):
        return False


def _input_ends_with_lf(fin):
    """Peek at the last byte of a seekable input; None when not possible."""
    if not _seekable(fin):
        return None
    start = fin.tell()
    end = fin.seek(0, io.SEEK_END)
    if end <= start:
        fin.seek(start)
        return False
    fin.seek(end - 1)
    last = fin.read(1)
    fin.seek(start)
    return last == b"\n"


def compress_file(fin, fout, config: CodecConfig | None = None, chunk_size: int = CHUNK_SIZE) -> Compressor:
    """Stream ``fin`` into a container on ``fout`` with bounded memory.

    The trailing-LF flag must precede the records: it is taken from the end
    of a seekable input, patched into a seekable output afterwards, or, for
    pipe-to-pipe use, the records are spooled to a temporary file.
    """
    config = config or CodecConfig()
    c = Compressor(config)
    ends_lf = _input_ends_with_lf(fin)
    patch_at = None
    sink = fout
    if ends_lf is None:
        if _seekable(fout):
            patch_at = fout.tell()
        else:
            sink = tempfile.SpooledTemporaryFile(max_size=64 << 20)
    if sink is fout:
        fout.write(ContainerHeader(config, bool(ends_lf)).to_bytes())
    while True:
        chunk = fin.read(chunk_size)
        if not chunk:
            break
        sink.write(c.compress(chunk))
    sink.write(c.finish())
    if patch_at is not None:
        end = fout.tell()
        fout.seek(patch_at)
        fout.write(ContainerHeader(config, c.trailing_newline).to_bytes())
        fout.seek(end)
    elif sink is not fout:
        fout.write(ContainerHeader(config, c.trailing_newline).to_bytes())
        sink.seek(0)
        shutil.copyfileobj(sink, fout)
        sink.close()
    elif ends_lf != c.trailing_newline:
        raise CodecError(ErrorKind.TRUNCATED_STREAM, "input changed while it was being compressed")
    return c


def decompress_file(fin, fout, chunk_size: int = CHUNK_SIZE) -> Decompressor:
    d = Decompressor.from_header(fin.read(HEADER_SIZE))
    pending_lf = False
    while True:
        chunk = fin.read(chunk_size)
        if not chunk:
            break
        out = d.feed(chunk)
        if out:
            fout.write((b"\n" if pending_lf else b"") + out[:-1])
            pending_lf = True
    d.finish()
    if pending_lf and d.trailing_newline:
        fout.write(b"\n")
    return d

