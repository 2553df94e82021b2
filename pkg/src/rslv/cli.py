"""Command-line entry point: ``rslv verify`` and ``rslv corpus``."""

from __future__ import annotations

import argparse
import logging
import sys

from rslv import __version__
from rslv.corpus import load_manifest, run_corpus
from rslv.errors import ManifestError, RslError, TypeCheckFailed
from rslv.pipeline import RunOptions, verify_file

EXIT_OK, EXIT_FAILED, EXIT_USAGE = 0, 1, 2


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        sys.exit(EXIT_USAGE)


def _positive(kind):
    def conv(text):
        v = kind(text)
        if v <= 0:
            raise argparse.ArgumentTypeError(f"must be positive, got {text}")
        return v
    return conv


def _add_run_options(p: argparse.ArgumentParser):
    p.add_argument("--smt-cmd", default=RunOptions.smt_cmd,
                   help="solver command line reading SMT-LIB2 on stdin (default: %(default)s)")
    p.add_argument("--timeout", type=_positive(float), default=RunOptions.timeout,
                   help="seconds per obligation (default: %(default)s)")
    p.add_argument("--jobs", type=_positive(int), default=1, help="functions verified in parallel")
    p.add_argument("--warn-leaks", action="store_true",
                   help="warn about resources still held when a function returns")
    p.add_argument("--oracle", action="store_true",
                   help="also run the brute-force oracle on small domains")
    p.add_argument("--domain-size", type=_positive(int), default=2,
                   help="elements per identifier type for --oracle")
    p.add_argument("--amount-max", type=int, default=3,
                   help="integers range over 0..K for --oracle")


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="rslv", description="Verifier for resource-annotated programs.")
    ap.add_argument("--version", action="version", version=f"rslv {__version__}")
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True, parser_class=_Parser)

    v = sub.add_parser("verify", help="verify one or more .rsl files")
    v.add_argument("files", nargs="+")
    v.add_argument("--json", action="store_true", help="print the report as JSON")
    v.add_argument("--dump-ir", action="store_true", help="print the encoded IR")
    v.add_argument("--dump-smt", metavar="DIR", help="write one .smt2 file per obligation")
    _add_run_options(v)

    c = sub.add_parser("corpus", help="check a manifest of expected verdicts")
    c.add_argument("manifest")
    _add_run_options(c)
    return ap


def _options(args) -> RunOptions:
    if args.amount_max < 0:
        raise ValueError("--amount-max must be >= 0")
    return RunOptions(smt_cmd=args.smt_cmd, timeout=args.timeout, jobs=args.jobs,
                      dump_ir=getattr(args, "dump_ir", False), dump_smt=getattr(args, "dump_smt", None),
                      warn_leaks=args.warn_leaks, oracle=args.oracle,
                      domain_size=args.domain_size, amount_max=args.amount_max)


def _frontend_error(path: str, exc: RslError):
    if isinstance(exc, TypeCheckFailed):
        for e in exc.errors:
            print(f"{e}", file=sys.stderr)
    else:
        print(f"{exc}", file=sys.stderr)


def cmd_verify(args) -> int:
    opts = _options(args)
    worst = EXIT_OK
    reports = []
    for path in args.files:
        try:
            report = verify_file(path, opts)
        except OSError as exc:
            print(f"rslv: cannot read {path}: {exc.strerror}", file=sys.stderr)
            worst = EXIT_USAGE
            continue
        except RslError as exc:
            _frontend_error(path, exc)
            worst = EXIT_USAGE
            continue
        if opts.dump_ir:
            # keep stdout parseable when it carries JSON
            (sys.stderr if args.json else sys.stdout).write(opts.ir_out.pop() + "\n")
        reports.append(report)
        if report.verdict != "verified" and worst == EXIT_OK:
            worst = EXIT_FAILED
    if args.json:
        if len(reports) == 1 and len(args.files) == 1:
            print(reports[0].to_json())
        else:
            print("[" + ",\n".join(r.to_json() for r in reports) + "]")
    else:
        for r in reports:
            print(r.render())
    return worst


def cmd_corpus(args) -> int:
    try:
        manifest = load_manifest(args.manifest)
    except OSError as exc:
        print(f"rslv: cannot read {args.manifest}: {exc.strerror}", file=sys.stderr)
        return EXIT_USAGE
    except ManifestError as exc:
        print(f"rslv: {exc}", file=sys.stderr)
        return EXIT_USAGE
    try:
        result = run_corpus(manifest, _options(args))
    except ManifestError as exc:
        print(f"rslv: {exc}", file=sys.stderr)
        return EXIT_USAGE
    for w in result.warnings:
        print(f"warning: {w}", file=sys.stderr)
    for m in result.mismatches:
        print(f"MISMATCH {m}")
    print(f"{result.checked} expectations checked, {len(result.mismatches)} mismatches")
    return EXIT_OK if result.ok else EXIT_FAILED


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s: %(message)s")
    try:
        if args.command == "verify":
            return cmd_verify(args)
        return cmd_corpus(args)
    except ValueError as exc:
        print(f"rslv: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
