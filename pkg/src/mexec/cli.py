"""Command-line front end.

Exit codes: 0 on success, 1 on usage errors (bad flags, missing files,
unknown entry), 2 on source parse errors.
"""

import argparse
import os
import sys

from . import driver, report, satcheck
from .errors import MalformedPath, MexecError, ParseError, UnknownFunction
from .interp import conditional_counts
from .lang import parse, render_instrumented
from .optimize import LocalMinConfig, MCMCConfig
from .transforms import prepare


class _UsageError(Exception):
    pass


class _ArgumentParser(argparse.ArgumentParser):
    def error(self, message):
        raise _UsageError(message)


def _build_parser():
    parser = _ArgumentParser(
        prog="mexec",
        description="Test-input generation for numerical programs by "
                    "global minimization of representing functions.")
    sub = parser.add_subparsers(dest="command", metavar="command")

    def add_common(p, with_source=True):
        if with_source:
            p.add_argument("source", help=".mx source file")
            p.add_argument("--entry", default=None,
                           help="entry function (default: last defined)")
        p.add_argument("--n-iter", type=int, default=5,
                       help="basinhopping iterations per restart")
        p.add_argument("--n-start", type=int, default=500,
                       help="number of restarts")
        p.add_argument("--epsilon", type=float, default=1e-6,
                       help="strict-comparison distance offset")
        p.add_argument("--box", default="-1000:1000",
                       help="search box lo:hi, applied to every input")
        p.add_argument("--seed", type=int, default=None,
                       help="RNG seed (falls back to MEXEC_SEED)")
        p.add_argument("--step-scale", type=float, default=50.0,
                       help="perturbation half-width")
        p.add_argument("--json", dest="json_path", default=None,
                       help="also write a JSON report to this file")

    cover = sub.add_parser("cover", help="saturate all branches")
    add_common(cover)
    cover.add_argument("--infeasible-after", type=int, default=3,
                       help="same-branch failures before deeming the "
                            "opposite branch infeasible")
    cover.add_argument("--emit-instrumented", action="store_true",
                       help="print the entry function with penalty "
                            "assignments inlined")

    path = sub.add_parser("path", help="find an input following a path")
    add_common(path)
    path.add_argument("--path", dest="target", required=True,
                      help="target branch sequence, e.g. 0T,1T")

    bva = sub.add_parser("bva", help="find boundary-value inputs")
    add_common(bva)

    sat = sub.add_parser("sat", help="check a conjunction of comparisons")
    sat.add_argument("constraint",
                     help="e.g. '2^x <= 5 && x*x >= 5 && x >= 0'")
    add_common(sat, with_source=False)

    return parser


def _search_config(args):
    lo, sep, hi = args.box.partition(":")
    if not sep:
        raise _UsageError(f"bad box {args.box!r}, expected lo:hi")
    try:
        lo, hi = float(lo), float(hi)
    except ValueError:
        raise _UsageError(f"bad box {args.box!r}, expected numbers")
    if not lo < hi:
        raise _UsageError(f"bad box {args.box!r}, need lo < hi")
    seed = args.seed
    if seed is None and os.environ.get("MEXEC_SEED"):
        seed = int(os.environ["MEXEC_SEED"])
    cfg = driver.SearchConfig(
        n_start=args.n_start,
        mcmc=MCMCConfig(n_iter=args.n_iter, step_scale=args.step_scale,
                        local=LocalMinConfig()),
        box=[(lo, hi)],
        epsilon=args.epsilon,
        seed=seed,
        infeasible_after=getattr(args, "infeasible_after", 3),
    )
    return cfg


def _load_program(args):
    try:
        with open(args.source, encoding="utf-8") as handle:
            source = handle.read()
    except OSError as exc:
        raise _UsageError(str(exc))
    program = parse(source)
    prepared = prepare(program)
    entry = args.entry or prepared.functions[-1].name
    if prepared.function(entry) is None:
        raise _UsageError(f"no function named {entry!r} in {args.source}")
    return prepared, entry


def _parse_target(text):
    target = []
    for item in text.split(","):
        item = item.strip().upper()
        if len(item) < 2 or item[-1] not in ("T", "F"):
            raise MalformedPath(f"bad branch id {item!r}, expected like 0T")
        try:
            label = int(item[:-1])
        except ValueError:
            raise MalformedPath(f"bad branch id {item!r}, expected like 0T")
        target.append((label, item[-1]))
    return target


def _emit_report(result, prepared, entry, args):
    _, uninstrumentable = conditional_counts(prepared)
    rep = report.coverage_report(result, prepared, entry, uninstrumentable)
    print(report.format_text(rep))
    if args.json_path:
        with open(args.json_path, "w", encoding="utf-8") as handle:
            handle.write(report.to_json(rep) + "\n")
    return rep


def main(argv=None):
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command is None:
            raise _UsageError("a command is required")

        if args.command == "sat":
            constraint = satcheck.parse_constraint(args.constraint)
            cfg = _search_config(args)
            result = satcheck.check_sat(constraint, cfg)
            if result.verdict == "sat":
                model = ", ".join(
                    f"{name} = {value!r}"
                    for name, value in zip(result.variables, result.model))
                print(f"sat: {model}")
            else:
                print(f"unknown (best residual {result.residual!r})")
            return 0

        prepared, entry = _load_program(args)
        cfg = _search_config(args)

        if args.command == "cover":
            if args.emit_instrumented:
                print(render_instrumented(prepared, entry))
            result = driver.run_coverage(prepared, entry, cfg)
            _emit_report(result, prepared, entry, args)
            return 0
        if args.command == "path":
            target = _parse_target(args.target)
            result = driver.run_path(prepared, entry, target, cfg)
            if result.found is not None:
                print("found: " + ", ".join(repr(v) for v in result.found))
            else:
                print("not found")
            _emit_report(result, prepared, entry, args)
            return 0
        if args.command == "bva":
            result = driver.run_bva(prepared, entry, cfg)
            for x in result.inputs:
                print("boundary: " + ", ".join(repr(v) for v in x))
            _emit_report(result, prepared, entry, args)
            return 0
        raise _UsageError(f"unknown command {args.command!r}")
    except _UsageError as exc:
        print(f"mexec: {exc}", file=sys.stderr)
        return 1
    except (MalformedPath, UnknownFunction) as exc:
        print(f"mexec: {exc}", file=sys.stderr)
        return 1
    except ParseError as exc:
        print(f"mexec: parse error: {exc}", file=sys.stderr)
        return 2
    except MexecError as exc:
        print(f"mexec: {exc}", file=sys.stderr)
        return 1


def run():
    sys.exit(main())


if __name__ == "__main__":
    run()
