"""Command line entry point.

Exit codes: 0 success, 1 applicability/well-formedness/confluence failure,
2 parse error, 3 usage error.
"""

from __future__ import annotations

import argparse
import logging
import os
import sys
from typing import Optional, Sequence

from .adl import print_component
from .analysis import RowStatus, check_product_line, check_wellformed, format_table
from .dot import export_dot
from .engine import DerivationReport, check_confluence, derive_variant, expand_library
from .errors import EnumerationCapExceeded, FactorialCapExceeded, InvalidConfiguration, ParseError, UnknownFeature
from .features import parse_feature_list
from .model import ArchitectureLibrary
from .productline import ProductLine, load_product_line

EXIT_OK, EXIT_FAILED, EXIT_PARSE, EXIT_USAGE = 0, 1, 2, 3

log = logging.getLogger("deltaarc")


class UsageError(Exception):
    pass


class _ArgumentParser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    parser = _ArgumentParser(prog="deltaarc", description="Derive architecture variants from a delta-oriented product line.")
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_ArgumentParser)

    def inputs(p):
        p.add_argument("paths", nargs="+", help=".arc/.delta/.fm files or directories")

    p = sub.add_parser("check", help="check well-formedness of the core architecture")
    inputs(p)

    p = sub.add_parser("variant", help="derive the variant for one configuration")
    p.add_argument("--features", required=True, help="comma-separated selected features")
    p.add_argument("--out", help="output directory (default: print to stdout)")
    p.add_argument("--format", choices=("arc", "dot"), default="arc")
    inputs(p)

    p = sub.add_parser("variants", help="derive and check every valid configuration")
    p.add_argument("--all", action="store_true", required=True, help="derive all configurations")
    p.add_argument("--out", required=True, help="output directory, one subdirectory per configuration")
    p.add_argument("--format", choices=("arc", "dot"), default="arc")
    inputs(p)

    p = sub.add_parser("export", help="export decomposed components")
    p.add_argument("--format", choices=("dot",), default="dot")
    p.add_argument("--features", help="export this variant instead of the core")
    p.add_argument("--out", help="output directory (default: print to stdout)")
    inputs(p)

    p = sub.add_parser("confluence", help="apply the selected deltas in every admissible order")
    p.add_argument("--features", required=True, help="comma-separated selected features")
    p.add_argument("--cap", type=int, default=5040, help="maximum number of orders to try")
    inputs(p)
    return parser


def render(lib: ArchitectureLibrary, fmt: str) -> dict[str, str]:
    """Relative file path -> file content for a library."""
    if fmt == "dot":
        return {f"{name}.dot": text for name, text in export_dot(lib).items()}
    return {
        os.path.join(*d.package.segments, f"{d.name}.arc"): print_component(d)
        for d in lib
    }


def write_files(files: dict[str, str], out_dir: Optional[str]) -> None:
    if out_dir is None:
        for rel, text in sorted(files.items()):
            sys.stdout.write(f"// file: {rel}\n{text}")
        return
    for rel, text in sorted(files.items()):
        path = os.path.join(out_dir, rel)
        os.makedirs(os.path.dirname(path) or ".", exist_ok=True)
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)
        log.info("wrote %s", path)


def _require_fm(pl: ProductLine):
    if pl.feature_model is None:
        raise UsageError("a feature model (.fm) is required for this command")
    return pl.feature_model


def _configuration(pl: ProductLine, text: str):
    fm = _require_fm(pl)
    return fm.configuration(parse_feature_list(text))


def _report_failure(report: DerivationReport) -> None:
    for e in report.errors:
        print(e.format(), file=sys.stderr)


def cmd_check(pl: ProductLine, args) -> int:
    findings = check_wellformed(expand_library(pl.library))
    for f in findings:
        print(f.format(), file=sys.stderr)
    errors = [f for f in findings if f.is_error]
    print(f"{len(pl.library)} component(s), {len(pl.deltas)} delta(s): "
          f"{len(errors)} error(s), {len(findings) - len(errors)} warning(s)")
    return EXIT_FAILED if errors else EXIT_OK


def cmd_variant(pl: ProductLine, args) -> int:
    cfg = _configuration(pl, args.features)
    report = derive_variant(pl.library, pl.deltas, pl.feature_model, cfg)
    for w in report.warnings:
        log.warning(w)
    if not report.ok:
        _report_failure(report)
        return EXIT_FAILED
    write_files(render(report.result, args.format), args.out)
    return EXIT_OK


def cmd_variants(pl: ProductLine, args) -> int:
    fm = _require_fm(pl)
    rows = check_product_line(pl.library, pl.deltas, fm)
    for row in rows:
        if row.report.ok:
            write_files(render(row.report.result, args.format), os.path.join(args.out, row.configuration.label))
        else:
            for e in row.report.errors:
                print(f"[{row.configuration.label}] {e.format()}", file=sys.stderr)
    sys.stdout.write(format_table(rows))
    return EXIT_OK if all(r.status is RowStatus.OK for r in rows) else EXIT_FAILED


def cmd_export(pl: ProductLine, args) -> int:
    if args.features:
        report = derive_variant(pl.library, pl.deltas, _require_fm(pl), _configuration(pl, args.features))
        if not report.ok:
            _report_failure(report)
            return EXIT_FAILED
        lib = report.result
    else:
        lib = expand_library(pl.library)
    write_files(render(lib, "dot"), args.out)
    return EXIT_OK


def cmd_confluence(pl: ProductLine, args) -> int:
    cfg = _configuration(pl, args.features)
    verdict = check_confluence(pl.library, pl.deltas, pl.feature_model, cfg, args.cap)
    print(verdict.format())
    return EXIT_OK if verdict.confluent else EXIT_FAILED


COMMANDS = {
    "check": cmd_check,
    "variant": cmd_variant,
    "variants": cmd_variants,
    "export": cmd_export,
    "confluence": cmd_confluence,
}


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s: %(message)s")
    try:
        pl = load_product_line(args.paths)
        return COMMANDS[args.command](pl, args)
    except ParseError as err:
        for d in err.diagnostics:
            print(d.format(), file=sys.stderr)
        return EXIT_PARSE
    except (UsageError, UnknownFeature, InvalidConfiguration, EnumerationCapExceeded, FactorialCapExceeded) as exc:
        print(f"deltaarc: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
