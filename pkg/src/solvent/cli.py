"""Command-line entry point and benchmark table rendering."""
from __future__ import annotations

import argparse
import json
import re
import sys
from pathlib import Path

from .driver import (
    HoldsBounded, HoldsUnbounded, RunReport, SuiteOptions, Unknown, Violated,
    find_inconsistencies, render_violation, verify_suite,
)
from .interp import FiniteDomains
from .parser import load_source, render_diagnostics
from .solvers import SolverConfig, solver_available

EXIT_OK = 0
EXIT_VIOLATED = 1
EXIT_USAGE = 2
EXIT_INTERNAL = 3
EXIT_UNKNOWN = 4


def _parse_int_set(spec: str) -> tuple:
    out = []
    for part in spec.split(","):
        part = part.strip()
        if not part:
            continue
        try:
            out.append(int(part))
            continue
        except ValueError:
            pass
        m = re.fullmatch(r"(-?\d+)\s*-\s*(-?\d+)", part)
        if m is None:
            raise ValueError(f"bad integer set element: {part!r}")
        out.extend(range(int(m.group(1)), int(m.group(2)) + 1))
    return tuple(out)


def parse_domain_spec(spec: str) -> FiniteDomains:
    """`values=0-3;addrs=0-5;offsets=0,1,1048576;cap=2000000`"""
    dom = FiniteDomains()
    fields = {}
    for item in spec.split(";"):
        item = item.strip()
        if not item:
            continue
        key, _, val = item.partition("=")
        fields[key.strip()] = val.strip()
    kwargs = {}
    if "values" in fields:
        kwargs["values"] = _parse_int_set(fields["values"])
    if "addrs" in fields:
        kwargs["addresses"] = _parse_int_set(fields["addrs"])
    if "offsets" in fields:
        kwargs["block_offsets"] = _parse_int_set(fields["offsets"])
    if "cap" in fields:
        kwargs["cap"] = int(fields["cap"])
    unknown = set(fields) - {"values", "addrs", "offsets", "cap"}
    if unknown:
        raise ValueError(f"unknown oracle-domain fields: {', '.join(sorted(unknown))}")
    return FiniteDomains(**{**dom.__dict__, **kwargs})


# ---------------------------------------------------------------------------
# Table rendering (consumes the JSON form so the two outputs cannot drift)
# ---------------------------------------------------------------------------

def _mark(verdict: dict | None) -> str:
    if verdict is None:
        return "?"
    match verdict["kind"]:
        case "violated":
            return f"✗({verdict['n']})"
        case "holds_unbounded":
            return "✓"
        case "holds_bounded":
            return f"✓({verdict['n']})"
        case _:
            return "?"


def _time_cell(row: dict) -> str:
    verdict = row.get("verdict")
    if verdict is None or verdict["kind"] == "unknown":
        return "T/O"
    if verdict["kind"] == "holds_bounded":
        return "---"
    return f"{row['elapsed_s']:.2f}"


def render_table(rows: list[dict]) -> str:
    solvers: list[str] = []
    for r in rows:
        if r["solver"] not in solvers:
            solvers.append(r["solver"])
    cells: dict = {}
    order: list = []
    for r in rows:
        label = r.get("source") or r["contract"]
        key = (label, r["property"])
        if key not in cells:
            cells[key] = {}
            order.append(key)
        cells[key][r["solver"]] = (_mark(r.get("verdict")), _time_cell(r))

    header = ["Contract", "Property"]
    for s in solvers:
        header += [f"{s} Result", f"{s} Time"]
    table = [header]
    for key in order:
        row = [key[0], key[1]]
        for s in solvers:
            mark, t = cells[key].get(s, ("?", "T/O"))
            row += [mark, t]
        table.append(row)

    widths = [max(len(r[i]) for r in table) for i in range(len(header))]
    lines = []
    for i, r in enumerate(table):
        lines.append("  ".join(cell.ljust(w) for cell, w in zip(r, widths)).rstrip())
        if i == 0:
            lines.append("  ".join("-" * w for w in widths))
    return "\n".join(lines)


def _exit_code(reports: list[RunReport], internal: bool) -> int:
    if internal:
        return EXIT_INTERNAL
    verdicts = [r.verdict for r in reports]
    if any(r.error for r in reports):
        return EXIT_INTERNAL
    if any(isinstance(v, Unknown) and v.reason.startswith("crash") for v in verdicts):
        return EXIT_INTERNAL
    if any(isinstance(v, Violated) for v in verdicts):
        return EXIT_VIOLATED
    if any(v is None or isinstance(v, Unknown) for v in verdicts):
        return EXIT_UNKNOWN
    return EXIT_OK


def _solver_configs(args) -> list[SolverConfig]:
    names = ["z3", "cvc5"] if args.solver == "both" else [args.solver]
    return [SolverConfig(n, timeout_s=args.timeout) for n in names]


def build_arg_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="solvent",
        description="Verify liquidity properties of contracts in a purified "
                    "Solidity fragment via SMT solving.")
    ap.add_argument("paths", nargs="+", help=".sol files or directories of them")
    ap.add_argument("--solver", choices=["z3", "cvc5", "both"], default="z3")
    ap.add_argument("--timeout", type=float, default=400.0,
                    help="per-task time limit in seconds (default 400)")
    ap.add_argument("--max-depth", type=int, default=10,
                    help="deepest BMC unrolling to try (default 10)")
    ap.add_argument("--property", action="append", default=[],
                    help="verify only this property (repeatable)")
    ap.add_argument("--json", metavar="PATH", help="write the JSON report here")
    ap.add_argument("--dump-smt", metavar="DIR", help="write every query script here")
    ap.add_argument("--replay-check", choices=["on", "off"], default="on",
                    help="replay counterexamples on the interpreter (default on)")
    ap.add_argument("--jobs", type=int, default=1, help="parallel verification tasks")
    ap.add_argument("--oracle-domain", metavar="SPEC",
                    help="finite domains for replay, e.g. 'values=0-3;addrs=0-5'")
    return ap


def main(argv=None) -> int:
    ap = build_arg_parser()
    args = ap.parse_args(argv)

    try:
        domains = parse_domain_spec(args.oracle_domain) if args.oracle_domain \
            else FiniteDomains()
    except ValueError as exc:
        print(f"solvent: {exc}", file=sys.stderr)
        return EXIT_USAGE
    if args.max_depth < 1 or args.timeout <= 0 or args.jobs < 1:
        print("solvent: --max-depth, --timeout and --jobs must be positive",
              file=sys.stderr)
        return EXIT_USAGE

    cfgs = _solver_configs(args)
    missing = [c.name for c in cfgs if not solver_available(c)]
    if missing:
        print(f"solvent: solver(s) not available: {', '.join(missing)}", file=sys.stderr)
        return EXIT_INTERNAL

    files: list[tuple[Path, bool]] = []  # (path, from_directory)
    saw_directory = False
    for raw in args.paths:
        p = Path(raw)
        if p.is_dir():
            saw_directory = True
            files.extend((f, True) for f in sorted(p.glob("*.sol")))
        elif p.is_file():
            files.append((p, False))
        else:
            print(f"solvent: no such file: {p}", file=sys.stderr)
            return EXIT_USAGE
    if not files:
        if saw_directory:  # empty benchmark directory: header-only table
            print(render_table([]))
            return EXIT_OK
        print("solvent: no .sol files found", file=sys.stderr)
        return EXIT_USAGE

    options = SuiteOptions(
        max_depth=args.max_depth,
        budget_s=args.timeout,
        domains=domains,
        replay=args.replay_check == "on",
        dump_dir=args.dump_smt,
        jobs=args.jobs,
        properties=tuple(args.property),
    )

    reports: list[RunReport] = []
    parse_failures: list[dict] = []
    for path, from_dir in files:
        src = load_source(str(path))
        if not src.outcome.ok:
            rendered = render_diagnostics(src.outcome.diagnostics, str(path))
            if not from_dir:
                print(rendered, file=sys.stderr)
                return EXIT_USAGE
            parse_failures.append({"source": path.stem, "contract": path.stem,
                                   "property": "*",
                                   "solver": cfgs[0].name, "verdict": None,
                                   "logic": "", "elapsed_s": 0.0, "phases": [],
                                   "dumped": [], "error": rendered})
            continue
        reports.extend(verify_suite(src, cfgs, options))

    rows = [r.to_json() for r in reports] + parse_failures
    print(render_table(rows))
    for r in reports:
        if isinstance(r.verdict, Violated):
            print(f"\ncounterexample for {r.contract}.{r.property} ({r.solver}):")
            print(render_violation(r.verdict))
            xa = ", ".join(f"{k}=address({v})" for k, v in sorted(r.verdict.xa.items()))
            print(f"with {xa}")

    problems = find_inconsistencies(reports)
    for msg in problems:
        print(f"\nSOUNDNESS ALARM: {msg}", file=sys.stderr)

    if args.json:
        Path(args.json).write_text(json.dumps(rows, indent=2), encoding="utf-8")

    for r in reports:
        if r.error:
            print(f"\nerror in {r.contract}.{r.property} ({r.solver}): {r.error}",
                  file=sys.stderr)

    code = _exit_code(reports, internal=bool(problems))
    if parse_failures and code == EXIT_OK:
        code = EXIT_UNKNOWN
    return code


if __name__ == "__main__":
    sys.exit(main())
