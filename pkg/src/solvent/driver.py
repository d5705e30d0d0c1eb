"""Verification orchestration.

For each (contract, property, solver) task: try the cheap unbounded proof on
the havoc abstraction first, then iterative-deepening bounded model checking
from depth 1, decoding and replay-validating any counterexample before it is
reported. The strictly increasing depth schedule makes a Violated verdict's
depth the length of the shortest violating trace.
"""
from __future__ import annotations

import json
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Union

from .ast import Contract, Property
from .encoder import EncodedQuery, build_abstract_query, build_bmc_query, select_logic
from .interp import (
    CALL, CONSTRUCTOR, SELFDESTRUCT, FiniteDomains, InterpError, Transaction,
    bruteforce_liquid, eval_pre, format_trace, run_trace,
)
from .parser import SourceFile
from .solvers import SolverAnswer, SolverConfig, run_query


class UnsoundEncodingError(Exception):
    """A decoded counterexample failed replay validation: encoder and
    interpreter disagree, which is a bug, never a verdict."""


# ---------------------------------------------------------------------------
# Verdicts
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Violated:
    n: int
    trace: tuple
    xa: dict  # qvar name -> address

    kind = "violated"

    def mark(self) -> str:
        return f"✗({self.n})"


@dataclass(frozen=True)
class HoldsUnbounded:
    kind = "holds_unbounded"

    def mark(self) -> str:
        return "✓"


@dataclass(frozen=True)
class HoldsBounded:
    n: int

    kind = "holds_bounded"

    def mark(self) -> str:
        return f"✓({self.n})"


@dataclass(frozen=True)
class Unknown:
    reason: str

    kind = "unknown"

    def mark(self) -> str:
        return "?"


Verdict = Union[Violated, HoldsUnbounded, HoldsBounded, Unknown]


def verdict_to_json(v: Verdict) -> dict:
    d: dict = {"kind": v.kind}
    match v:
        case Violated(n, trace, xa):
            d["n"] = n
            d["trace"] = [
                {"name": t.name, "args": list(t.args), "sender": t.sender,
                 "value": t.value, "block": t.block}
                for t in trace
            ]
            d["xa"] = dict(xa)
        case HoldsBounded(n):
            d["n"] = n
        case Unknown(reason):
            d["reason"] = reason
    return d


@dataclass
class Phase:
    name: str
    status: str
    elapsed_s: float

    def to_json(self) -> dict:
        return {"name": self.name, "status": self.status,
                "elapsed_s": round(self.elapsed_s, 3)}


@dataclass
class RunReport:
    contract: str
    property: str
    solver: str
    verdict: Optional[Verdict]
    logic: str
    elapsed_s: float
    phases: list = field(default_factory=list)
    dumped: tuple = ()
    error: Optional[str] = None
    source: str = ""  # file stem; distinguishes variants sharing a contract name

    def to_json(self) -> dict:
        return {
            "source": self.source,
            "contract": self.contract,
            "property": self.property,
            "solver": self.solver,
            "verdict": verdict_to_json(self.verdict) if self.verdict else None,
            "logic": self.logic,
            "elapsed_s": round(self.elapsed_s, 3),
            "phases": [p.to_json() for p in self.phases],
            "dumped": list(self.dumped),
            "error": self.error,
        }


# ---------------------------------------------------------------------------
# Counterexample decoding
# ---------------------------------------------------------------------------

@dataclass
class DecodedTrace:
    trace: list
    xa: dict
    initial_accounts: dict


def _typed_arg(kind: str, v) -> int | bool:
    if kind == "bool":
        return bool(v)
    return int(v)


def decode_trace(answer: SolverAnswer, q: EncodedQuery) -> DecodedTrace:
    """Map model values back to a transaction trace plus the witness addresses."""
    if answer.status != "sat":
        raise ValueError("decode_trace needs a sat answer")
    model = answer.model
    by_step: dict = {}
    xa: dict = {}
    genesis_of: dict = {}
    genesis_lits: dict = {}
    for name, role in q.decode_map.items():
        if name not in model:
            if role[0] in ("step", "step_arg", "qvar", "genesis_of", "genesis_lit"):
                raise UnsoundEncodingError(f"model misses {name} ({role})")
            continue
        val = model[name]
        match role:
            case ("step", i, fld):
                by_step.setdefault(i, {})[fld] = val
            case ("step_arg", i, j):
                by_step.setdefault(i, {}).setdefault("args", {})[j] = val
            case ("qvar", qname):
                xa[qname] = int(val)
            case ("genesis_of", var):
                genesis_of[var] = int(val)
            case ("genesis_lit", lit):
                genesis_lits[int(lit)] = int(val)

    meta = q.meta
    methods = meta["methods"]
    trace: list[Transaction] = []
    address_args: set = set()  # (step, arg index) pairs that carry addresses
    for i in range(q.depth):
        fields = by_step[i]
        argmap = fields.get("args", {})
        sender, value, block = int(fields["sender"]), int(fields["value"]), int(fields["block"])
        if i == 0:
            kinds = meta["ctor_params"]
            args = tuple(_typed_arg(kinds[j], argmap[j]) for j in range(len(kinds)))
            address_args |= {(i, j) for j, k in enumerate(kinds) if k == "address"}
            trace.append(Transaction(CONSTRUCTOR, None, args, sender, value, block))
            continue
        sel = int(fields["sel"])
        if sel == meta["skip_tag"]:
            raise UnsoundEncodingError("skip selected in a reachability prefix")
        if sel == meta["selfdestruct_tag"]:
            trace.append(Transaction(SELFDESTRUCT, None, (), sender, value, block))
            continue
        if not 0 <= sel < len(methods):
            raise UnsoundEncodingError(f"selector {sel} out of range at step {i}")
        mname = methods[sel]
        kinds = meta["method_params"][mname]
        args = tuple(_typed_arg(kinds[j], argmap[j]) for j in range(len(kinds)))
        address_args |= {(i, j) for j, k in enumerate(kinds) if k == "address"}
        trace.append(Transaction(CALL, mname, args, sender, value, block))

    # Genesis balances matter only for variables that denote addresses in the
    # decoded trace; padded or non-address arguments are model junk.
    initial_accounts: dict = dict(genesis_lits)
    for var, bal in genesis_of.items():
        role = q.decode_map.get(var)
        if role is None:
            continue
        if role[0] == "step_arg" and (role[1], role[2]) not in address_args:
            continue
        addr = model.get(var)
        if addr is None:
            raise UnsoundEncodingError(f"model misses address variable {var}")
        initial_accounts[int(addr)] = bal
    return DecodedTrace(trace, xa, initial_accounts)


def replay_validate(c: Contract, p: Property, decoded: DecodedTrace,
                    dom: FiniteDomains = FiniteDomains()) -> Optional[str]:
    """Re-derive the counterexample on the interpreter; None means ok.

    The prefix must replay without reverts to a state satisfying the
    antecedent, and the brute-force oracle must agree that no liquidating
    suffix exists within the finite domains.
    """
    if not decoded.trace:
        return "empty trace"
    try:
        outcomes = run_trace(c, decoded.trace, decoded.initial_accounts)
    except InterpError as exc:
        return f"trace does not replay: {exc}"
    for i, out in enumerate(outcomes):
        if out.reverted:
            return f"step {i} reverted during replay"
    final = outcomes[-1].next
    try:
        if not eval_pre(final, p.antecedent, decoded.xa):
            return "antecedent is false in the replayed state"
        if bruteforce_liquid(c, final, p, decoded.xa, dom):
            return ("oracle found a liquidating suffix the solver claimed impossible")
    except InterpError as exc:
        return f"oracle error: {exc}"
    return None


# ---------------------------------------------------------------------------
# Per-task verification
# ---------------------------------------------------------------------------

@dataclass
class VerifyOutcome:
    verdict: Verdict
    phases: list
    logic: str
    dumped: tuple = ()


def _dump(q: EncodedQuery, dump_dir) -> Optional[str]:
    if dump_dir is None:
        return None
    path = Path(dump_dir)
    path.mkdir(parents=True, exist_ok=True)
    target = path / q.filename()
    target.write_text(q.script, encoding="utf-8")
    return str(target)


def verify(c: Contract, p: Property, cfg: SolverConfig, max_depth: int = 10,
           budget_s: float | None = None, domains: FiniteDomains = FiniteDomains(),
           invariants: tuple = (), replay: bool = True, dump_dir=None,
           cross_validate_unbounded: bool = False) -> VerifyOutcome:
    """Verify one property with one solver.

    Phase 1 attempts the unbounded proof on the abstraction; phase 2 runs BMC
    at depths 1..max_depth while the budget lasts. Counterexamples are
    replay-validated before they become verdicts; a mismatch raises
    UnsoundEncodingError rather than returning a verdict.
    """
    if max_depth < 1:
        raise ValueError("max_depth must be at least 1")
    budget = budget_s if budget_s is not None else cfg.timeout_s
    deadline = time.monotonic() + budget
    phases: list[Phase] = []
    dumped: list[str] = []
    logic = select_logic(c, p)

    def remaining() -> float:
        return deadline - time.monotonic()

    def run(q: EncodedQuery) -> SolverAnswer:
        d = _dump(q, dump_dir)
        if d:
            dumped.append(d)
        capped = SolverConfig(cfg.which, cfg.command,
                              max(0.1, min(cfg.timeout_s, remaining())),
                              cfg.extra_args, cfg.label)
        ans = run_query(q, capped)
        phases.append(Phase(f"{q.kind}-{q.depth}" if q.kind == "bmc" else q.kind,
                            ans.status, ans.elapsed_s))
        return ans

    def done(v: Verdict) -> VerifyOutcome:
        return VerifyOutcome(v, phases, logic, tuple(dumped))

    ans = run(build_abstract_query(c, p, invariants))
    if ans.status == "unsat":
        if cross_validate_unbounded:
            for k in range(1, min(3, max_depth) + 1):
                chk = run(build_bmc_query(c, p, k))
                if chk.status == "sat":
                    raise UnsoundEncodingError(
                        f"unbounded proof contradicted by a depth-{k} counterexample")
        return done(HoldsUnbounded())
    if ans.status == "crash":
        return done(Unknown(f"crash: {ans.detail}" if ans.detail else "crash"))

    checked = 0
    for k in range(1, max_depth + 1):
        if remaining() <= 0:
            break
        q = build_bmc_query(c, p, k)
        ans = run(q)
        if ans.status == "unsat":
            checked = k
            continue
        if ans.status == "sat":
            decoded = decode_trace(ans, q)
            if replay:
                mismatch = replay_validate(c, p, decoded, domains)
                if mismatch is not None:
                    raise UnsoundEncodingError(f"unsound-encoding: {mismatch}")
            return done(Violated(k, tuple(decoded.trace), decoded.xa))
        if ans.status == "timeout":
            break
        reason = "solver-unknown" if ans.status == "unknown" else \
            (f"crash: {ans.detail}" if ans.detail else "crash")
        return done(Unknown(reason))
    return done(HoldsBounded(checked) if checked >= 1 else Unknown("timeout"))


# ---------------------------------------------------------------------------
# Suites
# ---------------------------------------------------------------------------

@dataclass
class SuiteOptions:
    max_depth: int = 10
    budget_s: float | None = None
    domains: FiniteDomains = FiniteDomains()
    replay: bool = True
    dump_dir: object = None
    jobs: int = 1
    properties: tuple = ()  # filter by name; empty = all
    cross_validate_unbounded: bool = False


def verify_suite(source: SourceFile, cfgs: list[SolverConfig],
                 options: SuiteOptions = SuiteOptions()) -> list[RunReport]:
    """Verify every selected property with every solver, independently."""
    outcome = source.outcome
    if outcome is None or not outcome.ok:
        raise ValueError(f"{source.path}: source did not parse")
    c = outcome.contract
    props = [p for p in outcome.properties
             if not options.properties or p.name in options.properties]
    invariants = tuple(outcome.invariants)

    tasks = [(p, cfg) for p in props for cfg in cfgs]
    stem = Path(source.path).stem if source.path else c.name

    def run_task(task) -> RunReport:
        p, cfg = task
        start = time.monotonic()
        try:
            out = verify(c, p, cfg, max_depth=options.max_depth,
                         budget_s=options.budget_s, domains=options.domains,
                         invariants=invariants, replay=options.replay,
                         dump_dir=options.dump_dir,
                         cross_validate_unbounded=options.cross_validate_unbounded)
            return RunReport(c.name, p.name, cfg.name, out.verdict, out.logic,
                             time.monotonic() - start, out.phases, out.dumped,
                             source=stem)
        except Exception as exc:  # per-task failures stay in the report
            return RunReport(c.name, p.name, cfg.name, None, select_logic(c, p),
                             time.monotonic() - start, [], (), error=str(exc),
                             source=stem)

    if options.jobs > 1 and len(tasks) > 1:
        with ThreadPoolExecutor(max_workers=options.jobs) as pool:
            return list(pool.map(run_task, tasks))
    return [run_task(t) for t in tasks]


def find_inconsistencies(reports: list[RunReport]) -> list[str]:
    """Cross-solver soundness alarms: a violation on one solver can never
    coexist with a hold at (or beyond) that depth on another."""
    problems: list[str] = []
    by_key: dict = {}
    for r in reports:
        by_key.setdefault((r.source, r.contract, r.property), []).append(r)
    for (_, cname, pname), group in by_key.items():
        violated = [r for r in group if isinstance(r.verdict, Violated)]
        for v in violated:
            for r in group:
                if isinstance(r.verdict, HoldsUnbounded) or (
                        isinstance(r.verdict, HoldsBounded) and r.verdict.n >= v.verdict.n):
                    problems.append(
                        f"{cname}.{pname}: {v.solver} found a depth-{v.verdict.n} "
                        f"violation but {r.solver} reported {r.verdict.mark()}")
    return problems


def reports_to_json(reports: list[RunReport]) -> str:
    return json.dumps([r.to_json() for r in reports], indent=2)


def render_violation(v: Violated) -> str:
    return format_trace(v.trace)
