"""Configuration, error taxonomy and line splitting shared by every module."""

from __future__ import annotations

import enum
from dataclasses import dataclass

DEFAULT_K = 8
DEFAULT_THETA = 0.85
MAX_K = 256
THETA_SCALE = 10000
MAX_LINE_LENGTH = 2**32 - 1

NUL = 0x00
LF = 0x0A


class Variant(enum.IntEnum):
    """Record serialization: bit-aligned (``b``) or byte-aligned (``B``)."""

    BIT = 0
    BYTE = 1

    @classmethod
    def parse(cls, value) -> "Variant":
        if isinstance(value, cls):
            return value
        aliases = {"b": cls.BIT, "bit": cls.BIT, "B": cls.BYTE, "byte": cls.BYTE}
        if isinstance(value, str):
            if value in aliases:
                return aliases[value]
            if value.lower() in ("bit", "bitstream"):
                return cls.BIT
            if value.lower() in ("byte", "bytestream"):
                return cls.BYTE
        elif isinstance(value, int) and not isinstance(value, bool) and value in (0, 1):
            return cls(value)
        raise CodecError(ErrorKind.CONFIG_INVALID, f"unknown variant {value!r}")


class ErrorKind(enum.Enum):
    NUL_BYTE_IN_INPUT = "NulByteInInput"
    LINE_TOO_LONG = "LineTooLong"
    CORRUPT_RECORD = "CorruptRecord"
    TRUNCATED_STREAM = "TruncatedStream"
    BAD_HEADER = "BadHeader"
    CONFIG_INVALID = "ConfigInvalid"


class CodecError(Exception):
    """Raised for invalid input, invalid configuration or undecodable data."""

    def __init__(self, kind: ErrorKind, detail: str = ""):
        super().__init__(kind, detail)
        self.kind = kind
        self.detail = detail

    def __str__(self):
        return f"{self.kind.value}: {self.detail}" if self.detail else self.kind.value


def _quantize_theta(theta) -> float:
    return round(float(theta) * THETA_SCALE) / THETA_SCALE


@dataclass(frozen=True)
class CodecConfig:
    """Window size ``k``, similarity threshold ``theta`` and record variant.

    ``theta`` is quantized to 1/10000 on construction so that the value the
    compressor uses is exactly the value stored in a container header.
    """

    k: int = DEFAULT_K
    theta: float = DEFAULT_THETA
    variant: Variant = Variant.BYTE

    def __post_init__(self):
        k = self.k
        if isinstance(k, bool) or not isinstance(k, int) or not 1 <= k <= MAX_K:
            raise CodecError(ErrorKind.CONFIG_INVALID, f"k must be an integer in [1, {MAX_K}], got {k!r}")
        try:
            theta = _quantize_theta(self.theta)
        except (TypeError, ValueError):
            raise CodecError(ErrorKind.CONFIG_INVALID, f"theta must be a number, got {self.theta!r}") from None
        if not 0 < theta <= 1:
            raise CodecError(ErrorKind.CONFIG_INVALID, f"theta must lie in (0, 1], got {self.theta!r}")
        object.__setattr__(self, "theta", theta)
        object.__setattr__(self, "variant", Variant.parse(self.variant))

    @property
    def window_id_bits(self) -> int:
        return max(1, (self.k - 1).bit_length())

    @property
    def theta_units(self) -> int:
        return round(self.theta * THETA_SCALE)


def validate_config(k: int = DEFAULT_K, theta: float = DEFAULT_THETA, variant=Variant.BYTE) -> CodecConfig:
    return CodecConfig(k, theta, Variant.parse(variant))


def check_line(line: bytes) -> None:
    """Reject bytes that cannot be a single log line."""
    if len(line) > MAX_LINE_LENGTH:
        raise CodecError(ErrorKind.LINE_TOO_LONG, f"line of {len(line)} bytes exceeds {MAX_LINE_LENGTH}")
    if b"\x00" in line:
        raise CodecError(ErrorKind.NUL_BYTE_IN_INPUT, f"NUL at offset {line.index(0)}")
    if b"\n" in line:
        raise ValueError("a log line must not contain LF")


def split_lines(raw: bytes) -> tuple[list[bytes], bool]:
    """Split ``raw`` on LF. Returns the lines and whether ``raw`` ended with LF."""
    raw = bytes(raw)
    if b"\x00" in raw:
        pos = raw.index(0)
        lineno = raw.count(b"\n", 0, pos) + 1
        raise CodecError(ErrorKind.NUL_BYTE_IN_INPUT, f"NUL at byte offset {pos} (line {lineno})")
    if not raw:
        return [], False
    lines = raw.split(b"\n")
    trailing = lines[-1] == b""
    if trailing:
        lines.pop()
    if any(len(line) > MAX_LINE_LENGTH for line in lines):
        raise CodecError(ErrorKind.LINE_TOO_LONG, f"line exceeds {MAX_LINE_LENGTH} bytes")
    return lines, trailing


def join_lines(lines, trailing_newline: bool) -> bytes:
    out = b"\n".join(lines)
    if trailing_newline and lines:
        out += b"\n"
    return out
