"""Run-length tokens and the two record serializations.

Byte records (``B``)::

    [is_RLE:1][window_id:W][len_last_bit:3][pad to byte][varint q]
    [q instruction bytes, 1 bit per token, MSB first, 0=run 1=literal]
    [m data bytes, one per token]

Bit records (``b``)::

    [is_RLE:1][window_id:W] then per token [indicator:1][payload:8],
    closed by the sentinel [0][00000000]

Raw records carry ``is_RLE=0``, a LEB128 length and the line bytes; in byte
streams the header is the single byte 0x00.
"""

from __future__ import annotations

import re
from typing import NamedTuple

from .core import CodecError, ErrorKind, MAX_LINE_LENGTH

MAX_RUN = 255

_SEGMENTS = re.compile(rb"\x00+|[^\x00]+")


class Token(NamedTuple):
    literal: bool
    value: int

    def __repr__(self):
        return f"Lit({bytes([self.value])!r})" if self.literal else f"Run({self.value})"


def Run(count: int) -> Token:
    return Token(False, count)


def Lit(byte) -> Token:
    return Token(True, byte[0] if isinstance(byte, (bytes, bytearray)) else byte)


def window_id_bits(k: int) -> int:
    return max(1, (k - 1).bit_length())


def tokenize(xorp: bytes) -> list[Token]:
    tokens = []
    for seg in _SEGMENTS.finditer(xorp):
        chunk = seg.group()
        if chunk[0] == 0:
            n = len(chunk)
            tokens.extend([Token(False, MAX_RUN)] * (n // MAX_RUN))
            if n % MAX_RUN:
                tokens.append(Token(False, n % MAX_RUN))
        else:
            tokens.extend(Token(True, c) for c in chunk)
    return tokens


def detokenize(tokens) -> bytes:
    out = bytearray()
    for literal, value in tokens:
        if literal:
            out.append(value)
        else:
            out += bytes(value)
    return bytes(out)


def decoded_length(tokens) -> int:
    return sum(1 if literal else value for literal, value in tokens)


# -- varints -------------------------------------------------------------

def encode_varint(value: int) -> bytes:
    if value < 0:
        raise ValueError("varint must be non-negative")
    out = bytearray()
    while value >= 0x80:
        out.append((value & 0x7F) | 0x80)
        value >>= 7
    out.append(value)
    return bytes(out)


def decode_varint(data, pos: int = 0) -> tuple[int, int]:
    value = shift = 0
    while True:
        if pos >= len(data):
            raise CodecError(ErrorKind.TRUNCATED_STREAM, "stream ends inside a varint")
        b = data[pos]
        pos += 1
        value |= (b & 0x7F) << shift
        if b < 0x80:
            break
        shift += 7
        if shift > 28:
            raise CodecError(ErrorKind.CORRUPT_RECORD, "varint longer than 5 bytes")
    if value > MAX_LINE_LENGTH:
        raise CodecError(ErrorKind.CORRUPT_RECORD, f"length {value} exceeds maximum")
    return value, pos


# -- bit cursors ---------------------------------------------------------

class BitWriter:
    """MSB-first bit sink; complete bytes are drained with :meth:`take`."""

    def __init__(self):
        self.buf = bytearray()
        self.acc = 0
        self.nacc = 0

    def write(self, value: int, nbits: int) -> None:
        self.acc = (self.acc << nbits) | value
        self.nacc += nbits
        while self.nacc >= 8:
            self.nacc -= 8
            self.buf.append((self.acc >> self.nacc) & 0xFF)
        self.acc &= (1 << self.nacc) - 1

    def take(self) -> bytes:
        out = bytes(self.buf)
        self.buf.clear()
        return out

    def flush(self) -> bytes:
        """Zero-pad the pending bits to a byte boundary and drain everything."""
        if self.nacc:
            self.buf.append((self.acc << (8 - self.nacc)) & 0xFF)
            self.acc = self.nacc = 0
        return self.take()

    @property
    def bit_length(self) -> int:
        return 8 * len(self.buf) + self.nacc


class BitReader:
    def __init__(self, data, pos: int = 0, end: int | None = None):
        self.data = data
        self.pos = pos
        self.end = 8 * len(data) if end is None else end

    @property
    def remaining(self) -> int:
        return self.end - self.pos

    def read(self, nbits: int) -> int:
        if self.pos + nbits > self.end:
            raise CodecError(ErrorKind.TRUNCATED_STREAM, f"need {nbits} bits at bit {self.pos}")
        value = 0
        for _ in range(nbits):
            byte = self.data[self.pos >> 3]
            value = (value << 1) | ((byte >> (7 - (self.pos & 7))) & 1)
            self.pos += 1
        return value


# -- byte records --------------------------------------------------------

def _header_bytes(k: int) -> int:
    return (4 + window_id_bits(k) + 7) // 8


def byte_record_size(m: int, k: int) -> int:
    q = (m + 7) // 8
    return _header_bytes(k) + len(encode_varint(q)) + q + m


def raw_byte_record_size(n: int) -> int:
    return 1 + len(encode_varint(n)) + n


def encode_byte_record(tokens, window_id: int, k: int) -> bytes:
    m = len(tokens)
    if m == 0:
        raise ValueError("an RLE record needs at least one token")
    wbits = window_id_bits(k)
    if not 0 <= window_id < k:
        raise ValueError(f"window id {window_id} outside [0, {k})")
    nb = 4 + wbits
    hbytes = (nb + 7) // 8
    header = ((1 << (3 + wbits)) | (window_id << 3) | (m & 7)) << (8 * hbytes - nb)
    q = (m + 7) // 8
    bits = 0
    for literal, _ in tokens:
        bits = (bits << 1) | literal
    bits <<= 8 * q - m
    data = bytes(v for _, v in tokens)
    return header.to_bytes(hbytes, "big") + encode_varint(q) + bits.to_bytes(q, "big") + data


def encode_raw_byte_record(line: bytes) -> bytes:
    return b"\x00" + encode_varint(len(line)) + line


class Record(NamedTuple):
    """A decoded record: ``raw`` for raw records, ``tokens``/``window_id`` otherwise."""

    raw: bytes | None
    tokens: list
    window_id: int
    end: int


def _check_tokens(tokens):
    for literal, value in tokens:
        if literal and value in (0x00, 0x0A):
            raise CodecError(ErrorKind.CORRUPT_RECORD, f"literal byte {value:#04x} cannot occur in a line")
        if not literal and value == 0:
            raise CodecError(ErrorKind.CORRUPT_RECORD, "run of length 0")


def read_byte_record(data, pos: int, k: int) -> Record:
    """Decode the byte record at ``data[pos:]`` (raw or RLE)."""
    if pos >= len(data):
        raise CodecError(ErrorKind.TRUNCATED_STREAM, f"no record at offset {pos}")
    b0 = data[pos]
    if not b0 & 0x80:
        if b0:
            raise CodecError(ErrorKind.CORRUPT_RECORD, "nonzero padding in raw record header")
        n, p = decode_varint(data, pos + 1)
        if p + n > len(data):
            raise CodecError(ErrorKind.TRUNCATED_STREAM, f"raw record needs {n} bytes at {p}")
        raw = bytes(data[p:p + n])
        if b"\x00" in raw or b"\n" in raw:
            raise CodecError(ErrorKind.CORRUPT_RECORD, "raw record contains NUL or LF")
        return Record(raw, [], 0, p + n)
    wbits = window_id_bits(k)
    nb = 4 + wbits
    hbytes = (nb + 7) // 8
    if pos + hbytes > len(data):
        raise CodecError(ErrorKind.TRUNCATED_STREAM, "record header cut short")
    header = int.from_bytes(data[pos:pos + hbytes], "big")
    pad = 8 * hbytes - nb
    if header & ((1 << pad) - 1):
        raise CodecError(ErrorKind.CORRUPT_RECORD, "nonzero header padding")
    header >>= pad
    window_id = (header >> 3) & ((1 << wbits) - 1)
    last = (header & 7) or 8
    q, p = decode_varint(data, pos + hbytes)
    if q == 0:
        raise CodecError(ErrorKind.CORRUPT_RECORD, "RLE record with empty instruction section")
    m = 8 * (q - 1) + last
    if p + q + m > len(data):
        raise CodecError(ErrorKind.TRUNCATED_STREAM, f"record needs {q + m} bytes at {p}")
    bits = int.from_bytes(data[p:p + q], "big")
    if bits & ((1 << (8 - last)) - 1):
        raise CodecError(ErrorKind.CORRUPT_RECORD, "nonzero instruction padding")
    bits >>= 8 - last
    payload = data[p + q:p + q + m]
    tokens = [Token(bool((bits >> (m - 1 - i)) & 1), payload[i]) for i in range(m)]
    _check_tokens(tokens)
    return Record(None, tokens, window_id, p + q + m)


def decode_byte_record(data, k: int, pos: int = 0):
    """Decode an RLE byte record; returns ``(tokens, window_id, consumed)``."""
    rec = read_byte_record(data, pos, k)
    if rec.raw is not None:
        raise CodecError(ErrorKind.CORRUPT_RECORD, "expected an RLE record, found a raw record")
    return rec.tokens, rec.window_id, rec.end - pos


# -- bit records ---------------------------------------------------------

def bit_record_size(m: int, k: int) -> int:
    return 1 + window_id_bits(k) + 9 * (m + 1)


def raw_bit_record_size(n: int) -> int:
    return 1 + 8 * (len(encode_varint(n)) + n)


def encode_bit_record(tokens, window_id: int, k: int, sink: BitWriter) -> None:
    if not tokens:
        raise ValueError("an RLE record needs at least one token")
    if not 0 <= window_id < k:
        raise ValueError(f"window id {window_id} outside [0, {k})")
    sink.write(1, 1)
    sink.write(window_id, window_id_bits(k))
    for literal, value in tokens:
        sink.write((literal << 8) | value, 9)
    sink.write(0, 9)


def encode_raw_bit_record(line: bytes, sink: BitWriter) -> None:
    sink.write(0, 1)
    for b in encode_varint(len(line)) + line:
        sink.write(b, 8)


def read_bit_record(source: BitReader, k: int) -> Record:
    if source.read(1) == 0:
        prefix = bytearray()
        while True:
            b = source.read(8)
            prefix.append(b)
            if b < 0x80:
                break
            if len(prefix) == 5:
                raise CodecError(ErrorKind.CORRUPT_RECORD, "varint longer than 5 bytes")
        n, _ = decode_varint(prefix)
        if source.remaining < 8 * n:
            raise CodecError(ErrorKind.TRUNCATED_STREAM, f"raw record needs {n} bytes")
        raw = bytes(source.read(8) for _ in range(n))
        if b"\x00" in raw or b"\n" in raw:
            raise CodecError(ErrorKind.CORRUPT_RECORD, "raw record contains NUL or LF")
        return Record(raw, [], 0, source.pos)
    window_id = source.read(window_id_bits(k))
    tokens = []
    while True:
        t = source.read(9)
        if t == 0:
            break
        tokens.append(Token(bool(t >> 8), t & 0xFF))
    if not tokens:
        raise CodecError(ErrorKind.CORRUPT_RECORD, "RLE record without tokens")
    _check_tokens(tokens)
    return Record(None, tokens, window_id, source.pos)


def decode_bit_record(source: BitReader, k: int):
    """Decode an RLE bit record; returns ``(tokens, window_id)``."""
    rec = read_bit_record(source, k)
    if rec.raw is not None:
        raise CodecError(ErrorKind.CORRUPT_RECORD, "expected an RLE record, found a raw record")
    return rec.tokens, rec.window_id
