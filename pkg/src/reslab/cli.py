"""``reslab`` command line: one subcommand per experiment suite, plus ``all``.

Exit status: 0 when every check passes, 2 when all hard checks pass but a
soft or report-only check deviates, 1 on a hard failure or a runtime error,
64 on a usage error.
"""

from __future__ import annotations

import argparse
import sys
import time
from typing import List, Optional

from . import experiments
from .config import ConfigError, ExperimentConfig, load_config, quick_config
from .report import emit_report, exit_code

EX_USAGE = 64


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EX_USAGE, f"{self.prog}: error: {message}\n")


def _u64(text: str) -> int:
    v = int(text, 0)
    if not 0 <= v < 2**64:
        raise argparse.ArgumentTypeError(f"seed must fit in 64 unsigned bits: {text}")
    return v


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", metavar="PATH", help="key = value file overriding defaults")
    common.add_argument("--grid", type=int, metavar="N", help="grid points per side (power of two)")
    common.add_argument("--seed", type=_u64, metavar="U64", help="master seed")
    common.add_argument("--out", metavar="PATH", help="report file (default reports/<name>.<format>)")
    common.add_argument("--format", choices=("csv", "json"), help="report format")
    common.add_argument("--quick", action="store_true", help="reduced sizes for a fast smoke run")
    common.add_argument("--timing", action="store_true", help="include wall times in JSON output")

    parser = _Parser(prog="reslab", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", metavar="command", parser_class=_Parser)
    for name, fn in experiments.SUITES.items():
        sub.add_parser(name, parents=[common], help=(fn.__doc__ or "").strip().splitlines()[0])
    sub.add_parser("all", parents=[common], help="every suite followed by the exponent table")
    return parser


def resolve_config(args) -> ExperimentConfig:
    """Defaults, then ``--quick``, then the config file, then explicit flags."""
    cfg = ExperimentConfig()
    if args.quick:
        cfg = quick_config(cfg)
    if args.config:
        cfg = load_config(args.config, cfg)
    changes = {"experiment": args.command}
    for key in ("grid", "seed", "out", "format"):
        val = getattr(args, key)
        if val is not None:
            changes[key] = val
    try:
        return cfg.replace(**changes)
    except ConfigError:
        raise
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from exc


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    argv = sys.argv[1:] if argv is None else list(argv)
    if not argv:
        parser.print_usage(sys.stderr)
        return EX_USAGE
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    if args.command is None:
        parser.print_usage(sys.stderr)
        return EX_USAGE
    try:
        cfg = resolve_config(args)
    except ConfigError as exc:
        print(f"reslab: configuration error: {exc}", file=sys.stderr)
        return EX_USAGE

    t0 = time.perf_counter()
    try:
        if args.command == "all":
            reports = experiments.run_all(cfg)
        else:
            reports = [experiments.SUITES[args.command](cfg)]
        out = cfg.out or f"reports/{args.command}.{cfg.format}"
        path = emit_report(reports, out, cfg.format, args.timing)
    except Exception as exc:  # noqa: BLE001 - surfaced as exit status 1
        print(f"reslab: error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1

    for rep in reports:
        for fl in rep.flags:
            print(f"{rep.experiment:14s} {fl.line()}")
        for note in rep.notes:
            print(note, end="" if note.endswith("\n") else "\n")
    code = exit_code(reports)
    print(f"wrote {path} ({time.perf_counter() - t0:.1f} s), exit status {code}")
    return code


if __name__ == "__main__":
    sys.exit(main())
