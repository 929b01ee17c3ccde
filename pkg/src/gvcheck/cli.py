"""Command-line front end.

Exit status contract:

* 0 -- every check passed;
* 1 -- at least one check failed;
* 2 -- no failures, but at least one check was undecided;
* 3 -- usage error (bad flags or arguments);
* 4 -- I/O error reading the document or writing the output;
* 5 -- the document did not parse (diagnostics on stderr).

The seed is resolved in priority order: ``--seed`` flag, then the
``GVCHECK_SEED`` environment variable, then a ``seed`` statement in the
document, then the built-in default.  The resolved value and its source
are echoed in every report.
"""
from __future__ import annotations

import argparse
import os
import sys

from .errors import GvError, WitnessedError
from .gv import MuChoice, gv_min
from .runner import render_report, run_checks
from .specdoc import parse_spec
from .symbolic import ZeroTestConfig, mix_seed

EXIT_PASS = 0
EXIT_FAIL = 1
EXIT_UNDECIDED = 2
EXIT_USAGE = 3
EXIT_IO = 4
EXIT_PARSE = 5

ENV_SEED = "GVCHECK_SEED"


class _ArgumentParser(argparse.ArgumentParser):
    """argparse with the usage-error exit status pinned to 3."""

    def error(self, message):
        self.print_usage(sys.stderr)
        sys.stderr.write("%s: error: %s\n" % (self.prog, message))
        raise SystemExit(EXIT_USAGE)


def build_parser() -> argparse.ArgumentParser:
    parser = _ArgumentParser(
        prog="gvcheck",
        description="Batch verifier for foliation documents.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("specfile", help="path to the document to run")
        p.add_argument("--seed", type=int, default=None, help="override the sampling seed")
        p.add_argument("--samples", type=int, default=None, help="override the sample count")
        p.add_argument("--abs-tol", type=float, default=None, help="override the absolute tolerance")
        p.add_argument("--rel-tol", type=float, default=None, help="override the relative tolerance")

    p_check = sub.add_parser("check", help="run all checks, print a text report")
    common(p_check)

    p_report = sub.add_parser("report", help="run all checks, render a report")
    common(p_report)
    p_report.add_argument(
        "--format", choices=("text", "json", "latex"), default="json",
        help="report rendering (default json)",
    )
    p_report.add_argument("--out", default=None, help="write the report to a file")

    p_gv = sub.add_parser("gv", help="glue the minimal-stratum invariant of the document's family")
    common(p_gv)
    p_gv.add_argument("--rank", type=int, default=None, help="stratum rank (default: smallest leaf dimension)")
    p_gv.add_argument(
        "--format", choices=("text", "latex"), default="text",
        help="output rendering (default text)",
    )
    return parser


def _resolve_seed(args, doc):
    if args.seed is not None:
        return args.seed, "flag"
    env = os.environ.get(ENV_SEED)
    if env is not None:
        try:
            return int(env), "env"
        except ValueError:
            sys.stderr.write("gvcheck: ignoring non-integer %s=%r\n" % (ENV_SEED, env))
    if doc.seed_declared:
        return doc.seed, "document"
    return doc.seed, "default"


def _load_document(path):
    try:
        with open(path, "r", encoding="utf-8") as fh:
            text = fh.read()
    except OSError as e:
        sys.stderr.write("gvcheck: cannot read %s: %s\n" % (path, e.strerror or e))
        raise SystemExit(EXIT_IO)
    doc, diagnostics = parse_spec(text)
    if doc is None:
        for d in diagnostics:
            sys.stderr.write("%s: %s\n" % (path, d))
        raise SystemExit(EXIT_PARSE)
    return doc


def _emit(text, out_path):
    if out_path is None:
        sys.stdout.write(text)
        return
    try:
        with open(out_path, "w", encoding="utf-8") as fh:
            fh.write(text)
    except OSError as e:
        sys.stderr.write("gvcheck: cannot write %s: %s\n" % (out_path, e.strerror or e))
        raise SystemExit(EXIT_IO)


def _cmd_check(args) -> int:
    doc = _load_document(args.specfile)
    seed, source = _resolve_seed(args, doc)
    report = run_checks(
        doc, seed=seed, seed_source=source,
        samples=args.samples, abs_tol=args.abs_tol, rel_tol=args.rel_tol,
    )
    sys.stdout.write(render_report(report, "text"))
    return report.exit_code()


def _cmd_report(args) -> int:
    doc = _load_document(args.specfile)
    seed, source = _resolve_seed(args, doc)
    report = run_checks(
        doc, seed=seed, seed_source=source,
        samples=args.samples, abs_tol=args.abs_tol, rel_tol=args.rel_tol,
    )
    _emit(render_report(report, args.format), args.out)
    return report.exit_code()


def _cmd_gv(args) -> int:
    doc = _load_document(args.specfile)
    seed, source = _resolve_seed(args, doc)
    if len(doc.families) != 1:
        sys.stderr.write(
            "gvcheck: the gv command needs exactly one family in the document (found %d)\n"
            % len(doc.families)
        )
        return EXIT_USAGE
    (fam_name, fam), = doc.families.items()
    mus = {}
    for f in fam.members:
        if f.name in doc.mus:
            mus[f.name] = doc.mus[f.name]
        elif f.leaf_dim == len(doc.coords):
            from .forms import zero_form

            mus[f.name] = zero_form(doc.coords, 1)
        else:
            sys.stderr.write("gvcheck: no mu declared for foliation %r\n" % f.name)
            return EXIT_USAGE
    rank = args.rank if args.rank is not None else min(fam.ranks())
    cfg = ZeroTestConfig(
        sample_count=args.samples if args.samples is not None else doc.samples,
        abs_tol=args.abs_tol if args.abs_tol is not None else doc.abs_tol,
        rel_tol=args.rel_tol if args.rel_tol is not None else doc.rel_tol,
        rng_seed=mix_seed(seed, 0),
    )
    try:
        report = gv_min(fam, MuChoice(mus), rank, cfg)
    except WitnessedError as e:
        sys.stdout.write("FAIL: %s\n" % e)
        if e.witness:
            sys.stdout.write("witness: %s\n" % e.witness)
        if e.detail:
            sys.stdout.write("%s\n" % e.detail)
        return EXIT_FAIL
    except GvError as e:
        sys.stderr.write("gvcheck: %s\n" % e)
        return EXIT_USAGE
    lines = []
    lines.append(
        "family %s: stratum rank %d, invariant degree %d, seed %d (%s)"
        % (fam_name, report.rank, report.degree, seed, source)
    )
    for region, piece in report.piecewise.pieces:
        label = region.name or "<region>"
        if args.format == "latex":
            lines.append("  on %s:  $%s$" % (label, piece.to_latex()))
        else:
            lines.append("  on %s:  %s" % (label, piece))
    lines.append("glued: %s" % ("yes" if report.glued else "no"))
    lines.append("vanishing: %s   closedness: %s" % (
        report.vanishing.verdict.value, report.closedness.verdict.value))
    for n in report.notes:
        lines.append("note: %s" % n)
    sys.stdout.write("\n".join(lines) + "\n")
    if report.verdict.value == "FAIL":
        return EXIT_FAIL
    if report.verdict.value == "UNDECIDED":
        return EXIT_UNDECIDED
    return EXIT_PASS


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command == "check":
        return _cmd_check(args)
    if args.command == "report":
        return _cmd_report(args)
    return _cmd_gv(args)


if __name__ == "__main__":
    raise SystemExit(main())
