"""Command line: ``lenlog {compress,decompress,analyze,bench}``.

Exit status is 0 on success, 1 on usage or environment errors (including an
invalid codec configuration) and 2 when the data cannot be encoded or decoded.
"""

from __future__ import annotations

import argparse
import contextlib
import json
import sys

from .core import DEFAULT_K, DEFAULT_THETA, CodecError, ErrorKind, split_lines, validate_config


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _window_list(text):
    try:
        ks = [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None
    if not ks or min(ks) < 1:
        raise argparse.ArgumentTypeError("window sizes must be positive")
    return ks


def _codec_args(p):
    p.add_argument("--variant", choices=("b", "B"), default="B", help="b = bit stream, B = byte stream")
    p.add_argument("-k", "--window-size", type=int, default=DEFAULT_K, dest="k")
    p.add_argument("--theta", type=float, default=DEFAULT_THETA)


def build_parser():
    parser = _Parser(prog="lenlog", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("compress", help="compress a log stream into a container")
    _codec_args(p)
    p.add_argument("input", nargs="?", default="-")
    p.add_argument("output", nargs="?", default="-")

    p = sub.add_parser("decompress", help="restore the original log stream")
    p.add_argument("input", nargs="?", default="-")
    p.add_argument("output", nargs="?", default="-")

    p = sub.add_parser("analyze", help="length and similarity characterization")
    p.add_argument("inputs", nargs="+")
    p.add_argument("--psl-k", type=_window_list, default=[32, 16, 8, 4, 2])
    p.add_argument("--search-k", type=int, default=32, help="window for Seq/Rev/MSS/AN")
    p.add_argument("--theta", type=float, default=DEFAULT_THETA)
    p.add_argument("--format", choices=("json", "csv"), default="json")
    p.add_argument("--include-nopred-as-k", action="store_true",
                   help="count lines without a same-length predecessor as k probes")

    p = sub.add_parser("bench", help="compression ratio and throughput (JSON on stdout)")
    _codec_args(p)
    p.add_argument("inputs", nargs="+")
    p.add_argument("--repetitions", type=int, default=3)
    p.add_argument("--post-cmd", help='external filter applied to the container, e.g. "zstd -c"')
    p.add_argument("--post-decmd", help="inverse of --post-cmd (default: --post-cmd plus -d)")
    return parser


@contextlib.contextmanager
def _open(path, mode):
    if path == "-":
        yield sys.stdin.buffer if "r" in mode else sys.stdout.buffer
    else:
        with open(path, mode) as f:
            yield f


def _compress(args):
    from .stream import compress_file

    config = validate_config(args.k, args.theta, args.variant)
    with _open(args.input, "rb") as fin, _open(args.output, "wb") as fout:
        compress_file(fin, fout, config)


def _decompress(args):
    from .stream import decompress_file

    with _open(args.input, "rb") as fin, _open(args.output, "wb") as fout:
        decompress_file(fin, fout)


def _analyze(args):
    from .metrics import characterize, reports_to_csv

    reports = []
    for path in args.inputs:
        with _open(path, "rb") as f:
            raw = f.read()
        lines, _ = split_lines(raw)
        if not lines:
            raise ValueError(f"{path}: corpus is empty")
        reports.append(
            characterize(lines, args.psl_k, args.theta, args.search_k, name=path,
                         size_bytes=len(raw), include_nopred=args.include_nopred_as_k)
        )
    if args.format == "csv":
        sys.stdout.write(reports_to_csv(reports))
    else:
        json.dump([r.to_dict() for r in reports], sys.stdout, indent=2)
        sys.stdout.write("\n")


def _bench(args):
    from .bench import bench_codec, bench_with_post

    config = validate_config(args.k, args.theta, args.variant)
    results = []
    for path in args.inputs:
        if args.post_cmd:
            r = bench_with_post(path, config, args.post_cmd, args.post_decmd, args.repetitions)
        else:
            r = bench_codec(path, config, args.repetitions)
        results.append(r.to_dict())
    json.dump(results, sys.stdout, indent=2)
    sys.stdout.write("\n")


_COMMANDS = {"compress": _compress, "decompress": _decompress, "analyze": _analyze, "bench": _bench}


def run(argv=None) -> int:
    from .bench import BenchError

    args = build_parser().parse_args(argv)
    try:
        _COMMANDS[args.command](args)
    except CodecError as exc:
        print(f"lenlog: {exc}", file=sys.stderr)
        return 1 if exc.kind is ErrorKind.CONFIG_INVALID else 2
    except (BenchError, OSError, ValueError) as exc:
        print(f"lenlog: {exc}", file=sys.stderr)
        return 1
    finally:
        with contextlib.suppress(Exception):
            sys.stdout.flush()
    return 0


def main():
    try:
        code = run()
    except SystemExit as exc:
        code = exc.code
    sys.exit(code)


if __name__ == "__main__":
    main()
