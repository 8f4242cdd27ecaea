import io
import random

import numpy as np
import pytest

import oracles
from lenlog import (
    CodecConfig,
    CodecError,
    Compressor,
    ContainerHeader,
    Decompressor,
    ErrorKind,
    compress_file,
    compress_stream,
    decompress_file,
    decompress_stream,
)
from lenlog.rle import Run, decode_byte_record, encode_byte_record
from lenlog.stream import HEADER_SIZE


def both_variants(fn):
    return pytest.mark.parametrize("variant", ["b", "B"])(fn)


def test_header_round_trip():
    for cfg in (CodecConfig(), CodecConfig(256, 1.0, "b"), CodecConfig(1, 0.0001, "B")):
        for flag in (True, False):
            h = ContainerHeader(cfg, flag)
            data = h.to_bytes()
            assert len(data) == HEADER_SIZE
            assert ContainerHeader.from_bytes(data) == h


def test_header_layout():
    assert ContainerHeader(CodecConfig(8, 0.85, "b"), True).to_bytes() == b"LGLT\x01\x00\x07\x21\x34\x01"


@pytest.mark.parametrize("data", [
    b"",
    b"LGLT\x01\x01\x07\x21",
    b"LGLX\x01\x01\x07\x21\x34\x01",
    b"LGLT\x02\x01\x07\x21\x34\x01",
    b"LGLT\x01\x02\x07\x21\x34\x01",
    b"LGLT\x01\x01\x07\x21\x34\x02",
    b"LGLT\x01\x01\x07\x00\x00\x01",   # theta 0
    b"LGLT\x01\x01\x07\x27\x11\x01",   # theta 1.0001
])
def test_bad_header(data):
    with pytest.raises(CodecError) as err:
        decompress_stream(data)
    assert err.value.kind is ErrorKind.BAD_HEADER


@both_variants
def test_first_line_raw(variant):
    c = Compressor(CodecConfig(variant=variant))
    out = c.compress_line(b"hello") + c.finish()
    expected = oracles.byte_raw_record(b"hello") if variant == "B" else oracles.bits_to_bytes(oracles.bit_raw_record(b"hello"))
    assert out == expected
    assert c.windows.lookup(5) == (b"hello",)


def test_identical_line_is_runs():
    line = bytes(range(1, 10)) * 67  # 603 bytes
    c = Compressor(CodecConfig(variant="B"))
    c.compress_line(line)
    rec = c.compress_line(line)
    tokens, wid, used = decode_byte_record(rec, 8)
    assert (tokens, wid, used) == ([Run(255), Run(255), Run(93)], 0, len(rec))


def test_poor_match_falls_back_to_raw():
    ref, line = b"abcdefghij", b"aBCDEFGHIJ"
    c = Compressor(CodecConfig(variant="B"))
    c.compress_line(ref)
    rec = c.compress_line(line)
    assert rec == b"\x00\x0a" + line
    assert c.windows.lookup(10) == (ref, line)


def test_two_line_trace():
    # a 1-byte line costs 3 bytes raw and 4 as an RLE record, so both are raw
    packed = compress_stream(b"a\na\n", CodecConfig(8))
    assert packed[HEADER_SIZE:] == b"\x00\x01a" + b"\x00\x01a"
    packed = compress_stream(b"abcd\nabcd\n", CodecConfig(8))
    assert packed[HEADER_SIZE:] == b"\x00\x04abcd" + bytes([0b10000010, 0x01, 0x00, 0x04])
    assert decompress_stream(packed) == b"abcd\nabcd\n"


@both_variants
def test_three_line_stream(variant):
    log1 = b"[Sun Dec 04 04:47:44 2005] [notice] workerEnv.init() ok /etc/httpd/xyz"
    log2 = log1[:16] + b"2" + log1[17:69] + b"1"
    log3 = b"[Sun Dec 04 04:51:08 2005] [notice] jk2_init() Found child 6725"
    raw = b"\n".join([log1, log2, log3]) + b"\n"
    c = Compressor(CodecConfig(variant=variant))
    body = c.compress(raw) + c.finish()
    assert int(c.stats[1]) == 1  # only log_2 is an RLE record
    d = Decompressor(CodecConfig(variant=variant))
    d.write(body)
    assert [d.read_line() for _ in range(3)] == [log1, log2, log3]
    assert d.read_line() is None
    d.finish()


def test_window_id_out_of_range():
    body = b"\x00\x03abc" + encode_byte_record([Run(3)], 5, 8)
    header = ContainerHeader(CodecConfig(8), True).to_bytes()
    for accelerated in (True, False):
        with pytest.raises(CodecError) as err:
            decompress_stream(header + body, accelerated=accelerated)
        assert err.value.kind is ErrorKind.CORRUPT_RECORD


def test_rle_record_for_unknown_length():
    header = ContainerHeader(CodecConfig(8), True).to_bytes()
    with pytest.raises(CodecError) as err:
        decompress_stream(header + encode_byte_record([Run(3)], 0, 8))
    assert err.value.kind is ErrorKind.CORRUPT_RECORD


@both_variants
def test_empty_input(variant):
    cfg = CodecConfig(variant=variant)
    packed = compress_stream(b"", cfg)
    assert packed == ContainerHeader(cfg, False).to_bytes()
    assert decompress_stream(packed) == b""


@both_variants
@pytest.mark.parametrize("raw", [b"\n", b"\n\n", b"x", b"x\n", b"a\n\nb", b"same\nsame\nsame"])
def test_edge_round_trips(variant, raw):
    assert decompress_stream(compress_stream(raw, CodecConfig(variant=variant))) == raw


@both_variants
def test_truncated_stream(variant):
    raw = b"".join(b"line number %d with some text\n" % i for i in range(50))
    packed = compress_stream(raw, CodecConfig(variant=variant))
    for cut in (HEADER_SIZE + 3, len(packed) - 5):
        with pytest.raises(CodecError) as err:
            decompress_stream(packed[:cut])
        assert err.value.kind is ErrorKind.TRUNCATED_STREAM


def test_trailing_garbage_rejected():
    packed = compress_stream(b"abc\n", CodecConfig(variant="b"))
    with pytest.raises(CodecError):
        decompress_stream(packed + b"\xff")


def test_nul_in_input():
    c = Compressor()
    c.compress(b"ok\n")
    with pytest.raises(CodecError) as err:
        c.compress(b"fine\nbad\x00\n")
    assert err.value.kind is ErrorKind.NUL_BYTE_IN_INPUT
    assert "line 3" in str(err.value)


def test_line_with_lf_rejected():
    with pytest.raises(ValueError):
        Compressor().compress_line(b"a\nb")


@both_variants
def test_chunked_compress_matches_whole(variant):
    rng = random.Random(5)
    lines, trailing = oracles.fuzz_corpus(np.random.default_rng(5), 80, 300)
    raw = oracles.join(lines, trailing)
    cfg = CodecConfig(variant=variant)
    c = Compressor(cfg)
    parts = []
    pos = 0
    while pos < len(raw):
        step = rng.randint(1, 97)
        parts.append(c.compress(raw[pos:pos + step]))
        pos += step
    body = b"".join(parts) + c.finish()
    assert ContainerHeader(cfg, c.trailing_newline).to_bytes() + body == compress_stream(raw, cfg)


@both_variants
def test_chunked_decompress(variant):
    raw = b"".join(b"GET /item/%d HTTP/1.1 200\n" % (i % 37) for i in range(400))
    packed = compress_stream(raw, CodecConfig(variant=variant))
    d = Decompressor.from_header(packed)
    out = b"".join(d.feed(packed[i:i + 7]) for i in range(HEADER_SIZE, len(packed), 7))
    d.finish()
    assert out == raw


@both_variants
def test_pure_engine_matches(variant):
    rng = np.random.default_rng(11)
    for _ in range(60):
        lines, trailing = oracles.fuzz_corpus(rng, 30, 700)
        raw = oracles.join(lines, trailing)
        cfg = CodecConfig(int(rng.choice([1, 2, 8, 32, 256])), float(rng.choice([0.5, 0.85, 1.0])), variant)
        fast = compress_stream(raw, cfg)
        slow = compress_stream(raw, cfg, accelerated=False)
        assert fast == slow
        assert decompress_stream(fast, accelerated=False) == raw


def test_probes_bounded_by_k():
    rng = np.random.default_rng(3)
    for k in (1, 2, 8, 32):
        lines = [oracles.mutate(rng, b"x" * 40, 0.5) for _ in range(300)]
        c = Compressor(CodecConfig(k, 1.0))
        c.compress_lines(lines)
        assert c.lines == 300
        assert c.stats[2] <= k * 300


@both_variants
def test_file_api_round_trip(variant, tmp_path):
    raw = b"".join(b"[notice] child %d in slot %d\n" % (i * 7 % 1000, i % 9) for i in range(3000))[:-1]
    src = tmp_path / "in.log"
    src.write_bytes(raw)
    packed_path = tmp_path / "out.lgl"
    with open(src, "rb") as fin, open(packed_path, "wb") as fout:
        compress_file(fin, fout, CodecConfig(variant=variant), chunk_size=1000)
    assert packed_path.read_bytes() == compress_stream(raw, CodecConfig(variant=variant))
    out = io.BytesIO()
    with open(packed_path, "rb") as fin:
        decompress_file(fin, out, chunk_size=333)
    assert out.getvalue() == raw


class Pipe(io.RawIOBase):
    """Non-seekable byte stream."""

    def __init__(self, data=b""):
        self._src = io.BytesIO(data)
        self.sink = bytearray()

    def readable(self):
        return True

    def writable(self):
        return True

    def seekable(self):
        return False

    def readinto(self, b):
        chunk = self._src.read(len(b))
        b[:len(chunk)] = chunk
        return len(chunk)

    def write(self, b):
        self.sink += b
        return len(b)


@pytest.mark.parametrize("raw", [b"abc\nabd\n", b"abc\nabd"])
def test_file_api_pipes(raw):
    fin, fout = Pipe(raw), Pipe()
    compress_file(fin, fout, CodecConfig(variant="b"), chunk_size=3)
    assert bytes(fout.sink) == compress_stream(raw, CodecConfig(variant="b"))
    back = Pipe()
    decompress_file(Pipe(bytes(fout.sink)), back, chunk_size=2)
    assert bytes(back.sink) == raw


@both_variants
def test_matches_reference_encoder(variant):
    rng = np.random.default_rng(21)
    for i in range(150):
        raw = oracles.join(*oracles.fuzz_corpus(rng, 30, 600))
        k, theta = [1, 2, 8, 32, 256][i % 5], [0.5, 0.85, 1.0][i % 3]
        lines, trailing = oracles.split(raw)
        expected = oracles.compress(lines, trailing, k, theta, variant)
        assert compress_stream(raw, CodecConfig(k, theta, variant)) == expected
