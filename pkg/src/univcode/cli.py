"""Command line interface: ``univcode <subcommand> ...``.

Exit status: 0 success, 1 verification or property failure, 2 usage error,
3 budget exhausted (a partial report is still written).
"""
from __future__ import annotations

import argparse
import datetime
import json
import os
import sys
from pathlib import Path

import numpy as np

from . import coder as coder_mod
from . import sigma
from .errors import BudgetExceeded, DSLSyntaxError, UnivCodeError, UnknownOrbitError
from .graph import FunctionSpec, components_json, enumerate_components, to_dot
from .numeral import Numeral
from .properties import run_properties

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_BUDGET = 0, 1, 2, 3


class UsageError(Exception):
    pass


def parse_window(text: str) -> range:
    try:
        lo, hi = (int(p) for p in text.split(".."))
    except ValueError:
        raise argparse.ArgumentTypeError(f"window must look like 1..500, got {text!r}")
    if lo < 1 or hi < lo:
        raise argparse.ArgumentTypeError(f"empty or invalid window {text!r}")
    return range(lo, hi + 1)


def positive(text: str) -> int:
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError("must be positive")
    return v


def _add_fn_args(p):
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--fn", help="function in the expression language, e.g. 'n + 1'")
    src.add_argument("--fn-file", type=Path, help="file holding an expression or a JSON table")
    src.add_argument("--random-table", type=positive, metavar="SIZE",
                     help="seeded random table on 1..SIZE (identity elsewhere)")
    p.add_argument("--window", type=parse_window, default=range(1, 501))
    p.add_argument("--eval-budget", type=positive, default=10_000)
    p.add_argument("--scan-bound", type=positive, default=100_000)
    p.add_argument("--spine-bound", type=positive, default=coder_mod.DEFAULT_SPINE_BOUND)
    p.add_argument("--acyclic", action="store_true", help="assert every component is acyclic")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="univcode", description=__doc__.splitlines()[0])
    parser.add_argument("--format", choices=("json", "csv", "dot", "text"), default="text")
    parser.add_argument("--cache", type=Path, default=None,
                        help="sigma cache file (default: $CONJ_CACHE)")
    parser.add_argument("--max-rounds", type=positive, default=sigma.DEFAULT_MAX_ROUNDS)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--deterministic", action="store_true",
                        help="omit the timestamp from JSON output")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("sigma", help="print or export a prefix of sigma")
    p.add_argument("--L", type=positive, default=56)
    p.add_argument("--phases", action="store_true", help="export phase records instead")

    p = sub.add_parser("eval", help="evaluate e at one index (decimal or 2^k)")
    p.add_argument("n")

    p = sub.add_parser("cycles", help="census of cycles of a given length")
    p.add_argument("--k", type=positive, required=True)
    p.add_argument("--count", type=positive, default=5)

    for name, text in (("classify", "component report for h"),
                       ("code", "export the coding map of h"),
                       ("verify", "check c(h(n)) == e(c(n)) over a window")):
        p = sub.add_parser(name, help=text)
        _add_fn_args(p)
        if name == "verify":
            p.add_argument("--perturb", type=positive, metavar="N",
                           help="shift the code of N by one before checking (negative control)")

    p = sub.add_parser("props", help="run the property suite over a sigma prefix")
    p.add_argument("--L", type=positive, default=10**6)
    p.add_argument("--samples", type=positive, default=10**4)

    p = sub.add_parser("export-dot", help="draw G_h over a window, or G_e over a prefix")
    p.add_argument("--fn")
    p.add_argument("--fn-file", type=Path)
    p.add_argument("--random-table", type=positive, metavar="SIZE")
    p.add_argument("--window", type=parse_window, default=range(1, 21))
    p.add_argument("--L", type=positive, default=56)
    p.add_argument("--eval-budget", type=positive, default=10_000)
    p.add_argument("--scan-bound", type=positive, default=100_000)
    p.add_argument("--acyclic", action="store_true")
    return parser


def load_spec(args) -> FunctionSpec:
    budgets = dict(eval_budget=args.eval_budget, preimage_scan_bound=args.scan_bound,
                   acyclicity_hint=args.acyclic)
    if getattr(args, "random_table", None):
        rng = np.random.default_rng(args.seed)
        return FunctionSpec.from_table(coder_mod.random_table(args.random_table, rng),
                                       "identity", **budgets)
    if args.fn is not None:
        return FunctionSpec.from_expr(args.fn, **budgets)
    if args.fn_file is not None:
        text = args.fn_file.read_text()
        if text.lstrip().startswith("{"):
            return FunctionSpec.from_json(text, **budgets)
        return FunctionSpec.from_expr(text, **budgets)
    raise UsageError("one of --fn, --fn-file or --random-table is required")


def load_table(args, L: int) -> sigma.SigmaTable:
    path = args.cache or (Path(os.environ["CONJ_CACHE"]) if os.environ.get("CONJ_CACHE") else None)
    if path is not None and path.exists():
        table = sigma.cache_load(path)
        if table.length >= L:
            return table
        table.extend_to(L)
    else:
        table = sigma.SigmaTable().extend_to(L)
    if path is not None:
        sigma.cache_save(table, path)
    return table


def emit_json(args, obj, out):
    if not args.deterministic:
        obj = {"generated_at": datetime.datetime.now(datetime.timezone.utc).isoformat(), **obj}
    out.write(json.dumps(obj, indent=2) + "\n")


def cmd_sigma(args, out):
    table = load_table(args, args.L)
    if args.phases:
        emit_json(args, {"phases": json.loads(table.phase_json())}, out)
    elif args.format == "csv":
        out.write(table.to_csv(args.L))
    elif args.format == "json":
        emit_json(args, {"L": args.L, "values": [str(table[i]) for i in range(1, args.L + 1)]}, out)
    else:
        for i in range(1, args.L + 1):
            out.write(f"{i} {table[i]}\n")
    return EXIT_OK


def cmd_eval(args, out):
    try:
        n = Numeral.parse(args.n)
    except ValueError as exc:
        raise UsageError(str(exc))
    if n < 1:
        raise UsageError("e is defined on n >= 1")
    model = sigma.PhaseModel(args.max_rounds)
    out.write(f"{sigma.eval_e(n, sigma.SigmaTable(), model)}\n")
    return EXIT_OK


def cmd_cycles(args, out):
    model = sigma.PhaseModel(args.max_rounds)
    cycles = [sigma.kth_cycle(args.k, i, model) for i in range(1, args.count + 1)]
    if args.format == "json":
        emit_json(args, {"k": args.k, "cycles": [
            {"smallest": str(c.smallest), "members": [str(m) for m in c.members]} for c in cycles
        ]}, out)
    else:
        for c in cycles:
            out.write(f"{c.smallest}: {' -> '.join(str(m) for m in c.members)}\n")
    return EXIT_OK


def cmd_classify(args, out):
    spec = load_spec(args)
    comps = enumerate_components(spec, args.window)
    if args.format == "json":
        emit_json(args, json.loads(components_json(comps)), out)
    else:
        for c in comps:
            kind = (f"cyclic, cycle {list(c.cycle.members)}" if c.cycle is not None
                    else f"acyclic, anchor {c.anchor}")
            out.write(f"#{c.discovery_index} rep {c.representative}: {kind}, "
                      f"{len(c.members)} window members\n")
        if comps.unknown:
            out.write(f"unknown: {comps.unknown}\n")
    return EXIT_FAIL if comps.unknown else EXIT_OK


def _coder(args, spec):
    model = sigma.PhaseModel(args.max_rounds)
    return coder_mod.Coder(spec, args.window, spine_bound=args.spine_bound, model=model)


def cmd_code(args, out):
    spec = load_spec(args)
    c = _coder(args, spec)
    status = EXIT_OK
    try:
        c.code_window()
    except BudgetExceeded as exc:
        print(f"budget exhausted: {exc}", file=sys.stderr)
        status = EXIT_BUDGET
    if args.format == "text":
        for s, p in sorted(c.coding.pairs.items()):
            out.write(f"{s} -> {p.target} ({p.provenance})\n")
    else:
        emit_json(args, json.loads(c.coding.to_json()), out)
    return status


def cmd_verify(args, out):
    spec = load_spec(args)
    c = _coder(args, spec)
    coding = None
    if args.perturb is not None:
        try:
            c.code_window()
        except UnivCodeError:
            pass
        if args.perturb not in c.coding:
            raise UsageError(f"{args.perturb} has no code to perturb")
        coding = c.coding.perturbed(args.perturb)
    report = coder_mod.verify_conjugacy(spec, args.window, coder=c, coding=coding)
    if args.format == "json":
        emit_json(args, json.loads(report.to_json()), out)
    else:
        out.write(report.summary() + "\n")
    if report.errors and not report.violations and report.injective:
        return EXIT_BUDGET
    return EXIT_OK if report.ok else EXIT_FAIL


def cmd_props(args, out):
    table = load_table(args, args.L)
    checks = run_properties(args.L, table, sigma.PhaseModel(args.max_rounds), args.samples, args.seed)
    if args.format == "json":
        emit_json(args, {"L": args.L, "checks": [
            {"name": c.name, "ok": c.ok, "detail": c.detail} for c in checks
        ]}, out)
    else:
        for c in checks:
            out.write(c.line() + "\n")
    return EXIT_OK if all(c.ok for c in checks) else EXIT_FAIL


def cmd_export_dot(args, out):
    if args.fn or args.fn_file or args.random_table:
        spec = load_spec(args)
        out.write(to_dot(spec, args.window))
        return EXIT_OK
    table = load_table(args, args.L)
    on = {int(m) for c in table.cycles_through(args.L) for m in c.members}
    lines = ["digraph G_e {"]
    for i in range(1, args.L + 1):
        if i in on:
            lines.append(f'  {i} [style=filled, fillcolor="lightcoral"];')
    for i in range(1, args.L + 1):
        lines.append(f'  {i} -> "{table[i]}";')
    lines.append("}")
    out.write("\n".join(lines) + "\n")
    return EXIT_OK


COMMANDS = {
    "sigma": cmd_sigma, "eval": cmd_eval, "cycles": cmd_cycles, "classify": cmd_classify,
    "code": cmd_code, "verify": cmd_verify, "props": cmd_props, "export-dot": cmd_export_dot,
}


def run(argv=None, out=None) -> int:
    out = out or sys.stdout
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else EXIT_USAGE
    try:
        return COMMANDS[args.command](args, out)
    except (UsageError, DSLSyntaxError, OSError) as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except BudgetExceeded as exc:
        print(f"budget exhausted: {exc}", file=sys.stderr)
        return EXIT_BUDGET
    except (UnknownOrbitError, UnivCodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAIL


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
