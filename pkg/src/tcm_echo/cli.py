"""Command-line entry point: ``tcm-echo run | reproduce | selftest``.

Exit codes: 0 success, 1 numerical failure (diagnostic JSON on stderr), 2 usage error.
"""
from __future__ import annotations

import argparse
import json
import sys
import warnings
from dataclasses import replace

from .errors import TcmError, UsageError
from .figures import FIGURES, reproduce
from .runner import RunConfig, run
from .selftest import format_report, run_selftest


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--threads", type=int, default=None, help="worker threads (results do not depend on it)")
    common.add_argument("--quiet", action="store_true", help="suppress warnings and progress output")

    p = _Parser(prog="tcm-echo", description="Photon echoes of N two-level molecules in a cavity.",
                parents=[common])
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    r = sub.add_parser("run", parents=[common], help="run a JSON configuration")
    r.add_argument("--config", required=True, help="path to the JSON run configuration")

    f = sub.add_parser("reproduce", parents=[common], help="regenerate a figure or table panel")
    f.add_argument("figure", help="one of: " + ", ".join(FIGURES))
    f.add_argument("--out", required=True, help="output directory")
    f.add_argument("--svg", action="store_true", help="also write an SVG plot")

    s = sub.add_parser("selftest", parents=[common], help="run the oracle and invariant suites")
    s.add_argument("--inject-fault", action="store_true", help=argparse.SUPPRESS)
    return p


def _load_config(path: str, threads: int | None) -> RunConfig:
    try:
        with open(path) as fh:
            raw = json.load(fh)
    except OSError as exc:
        raise UsageError(f"cannot read config: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise UsageError(f"malformed JSON config: {exc}") from exc
    cfg = RunConfig.from_dict(raw)
    if threads is not None:
        if threads < 1:
            raise UsageError("--threads must be positive", threads=threads)
        cfg = replace(cfg, threads=threads)
    return cfg


def _corrupted_source():
    from .spectrum import SpectralBlock, spectral_block

    def source(N, n, branch, beta):
        blk = spectral_block(N, n, branch, beta)
        return SpectralBlock(blk.index, blk.beta, blk.q + 1e-6, blk.A)
    return source


def _say(args, text):
    if not args.quiet:
        print(text)


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.quiet:
            warnings.simplefilter("ignore")
        if args.command == "run":
            cfg = _load_config(args.config, args.threads)
            res = run(cfg)
            for f in res.files:
                _say(args, f"wrote {f}")
            return 0
        if args.command == "reproduce":
            threads = 1 if args.threads is None else args.threads
            if threads < 1:
                raise UsageError("--threads must be positive", threads=threads)
            res = reproduce(args.figure, args.out, threads=threads, svg=args.svg)
            for f in res.files:
                _say(args, f"wrote {f}")
            return 0
        results = run_selftest(_corrupted_source()) if args.inject_fault else run_selftest()
        print(format_report(results))
        return 0 if all(r.passed for r in results) else 1
    except UsageError as exc:
        print(f"tcm-echo: {exc}", file=sys.stderr)
        return exc.exit_code
    except TcmError as exc:
        print(json.dumps(exc.to_dict(), default=str), file=sys.stderr)
        return exc.exit_code


if __name__ == "__main__":
    sys.exit(main())
