"""Ratio and throughput measurement, with an optional external post-compressor."""

from __future__ import annotations

import datetime
import os
import random
import shlex
import statistics
import subprocess
import tempfile
import time
from dataclasses import asdict, dataclass

from .core import CodecConfig, CodecError, ErrorKind
from .stream import compress_stream, decompress_stream


class BenchError(RuntimeError):
    """The benchmark environment failed (missing or failing external filter)."""


@dataclass
class BenchResult:
    dataset: str
    original_bytes: int
    compressed_bytes: int
    ratio: float | None
    compress_mb_s: float | None
    decompress_mb_s: float | None
    compress_s: float
    decompress_s: float
    compress_io_mb_s: float | None
    k: int
    theta: float
    variant: str
    repetitions: int
    post_cmd: str | None = None
    post_bytes: int | None = None
    post_ratio: float | None = None
    post_compress_s: float | None = None
    post_decompress_s: float | None = None

    def to_dict(self) -> dict:
        return asdict(self)


def _mb_s(nbytes, seconds):
    if not nbytes or seconds <= 0:
        return None
    return nbytes / seconds / 1e6


def _timed(fn, repetitions):
    times = []
    result = None
    for _ in range(repetitions):
        t = time.perf_counter()
        result = fn()
        times.append(time.perf_counter() - t)
    return result, statistics.median(times)


def bench_bytes(raw: bytes, config: CodecConfig | None = None, repetitions: int = 3,
                name: str = "") -> BenchResult:
    """Time in-memory compression and decompression of ``raw``.

    The round trip is verified before anything is reported.
    """
    config = config or CodecConfig()
    # compile and warm caches outside the timed region
    decompress_stream(compress_stream(raw[:4096], config))
    packed, t_comp = _timed(lambda: compress_stream(raw, config), repetitions)
    restored, t_dec = _timed(lambda: decompress_stream(packed), repetitions)
    if restored != raw:
        raise CodecError(ErrorKind.CORRUPT_RECORD, f"round-trip mismatch on {name or 'input'}")
    n = len(raw)
    return BenchResult(
        dataset=name,
        original_bytes=n,
        compressed_bytes=len(packed),
        ratio=len(packed) / n if n else None,
        compress_mb_s=_mb_s(n, t_comp),
        decompress_mb_s=_mb_s(n, t_dec),
        compress_s=t_comp,
        decompress_s=t_dec,
        compress_io_mb_s=None,
        k=config.k,
        theta=config.theta,
        variant=config.variant.name.lower(),
        repetitions=repetitions,
    )


def bench_codec(path, config: CodecConfig | None = None, repetitions: int = 3) -> BenchResult:
    """Benchmark a corpus file; also reports an I/O-inclusive compression rate."""
    config = config or CodecConfig()
    with open(path, "rb") as f:
        raw = f.read()
    result = bench_bytes(raw, config, repetitions, name=os.path.basename(str(path)))
    with tempfile.TemporaryDirectory() as tmp:
        out = os.path.join(tmp, "out.lgl")

        def with_io():
            with open(path, "rb") as f:
                packed = compress_stream(f.read(), config)
            with open(out, "wb") as f:
                f.write(packed)

        _, t_io = _timed(with_io, repetitions)
    result.compress_io_mb_s = _mb_s(len(raw), t_io)
    return result


def run_filter(cmd: str, data: bytes) -> bytes:
    """Pipe ``data`` through an external command (bytes in, bytes out)."""
    argv = shlex.split(cmd)
    if not argv:
        raise BenchError("empty filter command")
    try:
        proc = subprocess.run(argv, input=data, stdout=subprocess.PIPE, stderr=subprocess.PIPE, check=False)
    except OSError as exc:
        raise BenchError(f"cannot run {argv[0]!r}: {exc}") from None
    if proc.returncode != 0:
        err = proc.stderr.decode(errors="replace").strip()
        raise BenchError(f"{cmd!r} exited with status {proc.returncode}: {err}")
    return proc.stdout


def default_inverse(cmd: str) -> str:
    return f"{cmd} -d"


def bench_with_post(path, config: CodecConfig | None = None, post_cmd: str = "zstd -c",
                    post_decmd: str | None = None, repetitions: int = 3) -> BenchResult:
    """Byte-variant container piped through an external compressor.

    ``post_decmd`` undoes ``post_cmd`` (default: ``post_cmd`` plus ``-d``).
    The combined pipeline is round-trip checked before reporting.
    """
    config = config or CodecConfig(variant="B")
    post_decmd = post_decmd or default_inverse(post_cmd)
    result = bench_codec(path, config, repetitions)
    with open(path, "rb") as f:
        raw = f.read()
    packed = compress_stream(raw, config)
    post, t_post = _timed(lambda: run_filter(post_cmd, packed), repetitions)
    unpacked, t_unpost = _timed(lambda: run_filter(post_decmd, post), repetitions)
    if unpacked != packed or decompress_stream(unpacked) != raw:
        raise CodecError(ErrorKind.CORRUPT_RECORD, f"round-trip mismatch through {post_cmd!r}")
    result.post_cmd = post_cmd
    result.post_bytes = len(post)
    result.post_ratio = len(post) / len(raw) if raw else None
    result.post_compress_s = result.compress_s + t_post
    result.post_decompress_s = result.decompress_s + t_unpost
    return result


_TEMPLATES = (
    "[{ts}] [notice] jk2_init() Found child {pid} in scoreboard slot {slot}",
    "[{ts}] [notice] workerEnv.init() ok /etc/httpd/conf/workers2.properties",
    "[{ts}] [error] mod_jk child workerEnv in error state {state}",
    "[{ts}] [error] [client {ip}] Directory index forbidden by rule: /var/www/html/",
    "[{ts}] [notice] Apache/2.0.49 (Fedora) configured -- resuming normal operations",
)


def synthetic_corpus(lines: int, templates=_TEMPLATES, seed: int = 0) -> bytes:
    """Template-generated server log with a slowly advancing timestamp."""
    rng = random.Random(seed)
    t = datetime.datetime(2005, 12, 4, 4, 47, 44)
    out = []
    for _ in range(lines):
        t += datetime.timedelta(seconds=rng.choice((0, 0, 0, 1, 2)))
        out.append(
            rng.choice(templates).format(
                ts=t.strftime("%a %b %d %H:%M:%S %Y"),
                pid=rng.randint(5000, 9999),
                slot=rng.randint(6, 12),
                state=rng.randint(6, 7),
                ip=".".join(str(rng.randint(1, 255)) for _ in range(4)),
            )
        )
    return ("\n".join(out) + "\n").encode() if out else b""
