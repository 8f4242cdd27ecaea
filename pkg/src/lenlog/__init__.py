"""Streaming lossless log compression with length-keyed windows."""

from .core import (
    CodecConfig,
    CodecError,
    ErrorKind,
    Variant,
    join_lines,
    split_lines,
    validate_config,
)
from .lwindows import LengthWindows, entry_at
from .stream import (
    Compressor,
    ContainerHeader,
    Decompressor,
    compress_file,
    compress_stream,
    decompress_file,
    decompress_stream,
)

__version__ = "0.1.0"

__all__ = [
    "CodecConfig",
    "CodecError",
    "Compressor",
    "ContainerHeader",
    "Decompressor",
    "ErrorKind",
    "LengthWindows",
    "Variant",
    "compress_file",
    "compress_stream",
    "decompress_file",
    "decompress_stream",
    "entry_at",
    "join_lines",
    "split_lines",
    "validate_config",
]
