"""Acceptance suite: one test per criterion, each printing a PASS line.

Run with `pytest tests/test_acceptance.py -v -s`. The shared benchmark results
come from the session fixture `suite_reports`, which verifies every property
of every benchmark contract on every available solver (depth 4, replay
checking on, unbounded proofs cross-validated by shallow BMC).
"""
import random

import pytest

from conftest import CONTRACTS, HAVE_CVC5, HAVE_Z3, Z3, available_solver_configs, load
from difftool import gen_contract, gen_trace, make_pair, run_batched
from solvent.ast import BinOp, MapGet, Param, StateVar
from solvent.driver import (
    HoldsBounded, HoldsUnbounded, Unknown, Violated, find_inconsistencies, verify_suite,
    SuiteOptions,
)
from solvent.encoder import LOGIC_NONLINEAR, build_bmc_query, select_logic
from solvent.interp import (
    CALL, CONSTRUCTOR, SELFDESTRUCT, SKIP, Transaction, apply_tx, genesis_state,
)
from solvent.solvers import SolverConfig, cross_check, run_query
from solvent.encoder import EncodedQuery

pytestmark = pytest.mark.skipif(not HAVE_Z3, reason="acceptance needs a z3 engine")


def note(n: int, text: str) -> None:
    print(f"\nACCEPTANCE CRITERION {n}: PASS — {text}")


def pick(reports, source, prop, solver=None):
    found = [r for r in reports if r.source == source and r.property == prop
             and (solver is None or r.solver == solver)]
    assert found, f"no report for {source}.{prop}"
    return found


def test_criterion_01_crowdfund_bug_reproduction(suite_reports):
    bug = [r for r in pick(suite_reports, "crowdfund_bug", "donor_wd")
           if isinstance(r.verdict, Violated)]
    assert bug, "no solver violated donor_wd on the buggy crowdfund"
    r = bug[0]
    assert r.verdict.n == 3, f"expected N=3, got {r.verdict.n}"
    kinds = [(t.kind, t.method) for t in r.verdict.trace]
    assert kinds == [("constructor", None), ("call", "donate"), ("selfdestruct", None)]
    assert r.error is None  # replay validation passed inside verify()
    assert r.elapsed_s < 120
    note(1, f"donor_wd violated at N=3 with trace {{constructor, donate, selfdestruct}} "
            f"on {r.solver} in {r.elapsed_s:.2f}s; replay validated")


def test_criterion_02_crowdfund_unbounded_proof(suite_reports):
    rs = [r for r in pick(suite_reports, "crowdfund_bug", "owner_wd")
          if isinstance(r.verdict, HoldsUnbounded)]
    assert rs, "no solver proved owner_wd unboundedly"
    assert min(r.elapsed_s for r in rs) < 300
    note(2, f"owner_wd holds unboundedly via the abstract query "
            f"({rs[0].solver}, {rs[0].elapsed_s:.2f}s)")


def test_criterion_03_crowdfund_fix_bounded(suite_reports):
    fix = [r for r in pick(suite_reports, "crowdfund_fix", "donor_wd")
           if isinstance(r.verdict, HoldsBounded) and r.verdict.n == 4]
    assert fix, "suite did not bound-check the fixed crowdfund to depth 4"
    reports = verify_suite(load("crowdfund_fix"), [Z3],
                           SuiteOptions(max_depth=4, budget_s=600.0,
                                        properties=("donor_wd",)))
    assert len(reports) == 1
    v = reports[0].verdict
    assert isinstance(v, HoldsBounded) and v.n == 4, f"got {v}"
    assert reports[0].elapsed_s < 600
    note(3, f"fixed crowdfund: donor_wd has no counterexample for all k <= 4 "
            f"(HoldsBounded(4), {reports[0].elapsed_s:.2f}s)")


def test_criterion_04_no_frozen_funds(suite_reports):
    reports = verify_suite(load("crowdfund_fix2"), [Z3],
                           SuiteOptions(max_depth=3, budget_s=300.0,
                                        properties=("no_frozen_funds",)))
    v = reports[0].verdict
    assert isinstance(v, HoldsUnbounded) or (isinstance(v, HoldsBounded) and v.n >= 3), \
        f"fix2 no_frozen_funds got {v}"
    bug = [r for r in pick(suite_reports, "crowdfund_bug", "no_frozen_funds")
           if isinstance(r.verdict, Violated)]
    assert bug, "frozen-funds-style property not violated on the buggy contract"
    assert bug[0].verdict.n <= 3
    trace_kinds = [t.kind for t in bug[0].verdict.trace]
    note(4, f"fix2 no_frozen_funds: {v.mark()}; buggy contract frozen-funds "
            f"violated at N={bug[0].verdict.n} via {trace_kinds}")


def test_criterion_05_shortest_trace_minimality(suite_reports):
    sources = {name: load(name) for name in
               ("crowdfund_bug", "crowdfund_fix", "crowdfund_fix2", "freezable",
                "deposit")}
    checked = 0
    for r in suite_reports:
        if not isinstance(r.verdict, Violated) or r.verdict.n <= 1:
            continue
        src = sources[r.source]
        c = src.outcome.contract
        props = {p.name: p for p in src.outcome.properties}
        q = build_bmc_query(c, props[r.property], r.verdict.n - 1)
        ans = run_query(q, Z3)
        assert ans.status == "unsat", \
            f"{r.source}.{r.property} claims N={r.verdict.n} but depth " \
            f"{r.verdict.n - 1} answered {ans.status}"
        checked += 1
    assert checked >= 2, "expected at least two minimality checks"
    note(5, f"every Violated(N) confirmed minimal: depth N-1 unsat "
            f"({checked} independent checks)")


def test_criterion_06_differential_suite():
    rng = random.Random(0xD1FF)
    scripts = []
    n_pairs = 1000
    for i in range(n_pairs):
        base, perturbed = make_pair(rng, i)
        scripts += [base, perturbed]
    statuses = run_batched(scripts, Z3, chunk=50, jobs=8)
    assert len(statuses) == 2 * n_pairs
    expected = ["sat", "unsat"] * n_pairs
    bad = [i // 2 for i, (got, want) in enumerate(zip(statuses, expected))
           if got != want]
    assert not bad, f"{len(bad)} of {n_pairs} pairs disagreed: {bad[:10]}"
    note(6, f"{n_pairs} random (contract, trace) pairs: pinned chain sat and "
            f"perturbed final frame unsat on every single pair (100%)")


def test_criterion_07_replay_validation(suite_reports):
    violated = [r for r in suite_reports if isinstance(r.verdict, Violated)]
    assert violated, "suite produced no counterexamples"
    # verify() raises (and the suite records an error) on any replay mismatch,
    # so a clean Violated report means replay and the brute-force
    # no-liquidation oracle both passed over the default finite domains.
    failures = [r for r in suite_reports if r.error is not None]
    assert not failures, [f"{r.contract}.{r.property}: {r.error}" for r in failures]
    note(7, f"{len(violated)} counterexamples emitted, 100% passed replay "
            f"validation including the brute-force no-liquidation check")


def test_criterion_08_solver_consistency(suite_reports):
    problems = find_inconsistencies(suite_reports)
    assert not problems, problems
    solvers = {r.solver for r in suite_reports}
    # the disagreement alarm itself must work, exercised via stub solvers
    stub = lambda s: SolverConfig("custom", ("sh", "-c", f"cat >/dev/null; echo {s}"),
                                  timeout_s=5, label=s)
    alarm = cross_check(EncodedQuery("t", "bmc", 1, "(check-sat)", "LIA-with-arrays"),
                        [stub("sat"), stub("unsat")])
    assert alarm.status == "crash" and "solver-disagreement" in alarm.detail
    if len(solvers) >= 2:
        note(8, f"zero sat/unsat disagreements across solvers {sorted(solvers)}")
    else:
        note(8, f"zero inconsistencies across {sorted(solvers)} (cvc5 binary not "
                f"available in this environment: {HAVE_CVC5=}); the "
                f"disagreement alarm verified with stub solvers")


def test_criterion_09_interpreter_invariants():
    rng = random.Random(90210)
    contracts = [load("crowdfund_bug").outcome.contract,
                 load("crowdfund_fix2").outcome.contract]
    contracts += [gen_contract(rng, i) for i in range(10)]
    total_txs = 0
    target = 100_000
    while total_txs < target:
        c = contracts[total_txs % len(contracts)]
        accounts = {a: rng.randint(0, 12) for a in range(5)}
        state = genesis_state(accounts)
        funds_total = state.total_funds()
        ctor_args = tuple(
            (rng.random() < 0.5) if str(p.ty) == "bool"
            else rng.randint(0, 4) if str(p.ty) in ("uint", "address")
            else rng.randint(-3, 4)
            for p in c.ctor.params)
        value = rng.randint(0, min(3, state.account(1))) if c.ctor.payable else 0
        out = apply_tx(c, state, Transaction(CONSTRUCTOR, None, ctor_args, 1, value,
                                             rng.randint(0, 2)))
        state = out.next
        total_txs += 1
        uint_slots = [v.name for v in c.state_vars if str(v.ty) == "uint"]
        uint_maps = [v.name for v in c.state_vars
                     if str(v.ty).startswith("mapping") and "uint" in str(v.ty)]
        for _ in range(30):
            sender = rng.randint(0, 4)
            block = state.block_number + rng.randint(0, 2)
            roll = rng.random()
            if roll < 0.1:
                tx = Transaction(SKIP, sender=sender, block=block)
            elif roll < 0.3:
                v = rng.randint(0, min(3, state.account(sender)))
                tx = Transaction(SELFDESTRUCT, None, (), sender, v, block)
            else:
                m = rng.choice(c.methods)
                args = tuple(
                    (rng.random() < 0.5) if str(p.ty) == "bool"
                    else rng.randint(0, 4) if str(p.ty) in ("uint", "address")
                    else rng.randint(-3, 4)
                    for p in m.params)
                v = rng.randint(0, min(3, state.account(sender)))
                tx = Transaction(CALL, m.name, args, sender, v, block)
            prev = state
            out = apply_tx(c, prev, tx)
            state = out.next
            total_txs += 1
            assert state.total_funds() == funds_total, "conservation violated"
            assert state.block_number >= prev.block_number, "blocks not monotone"
            if out.reverted:
                assert state.storage == prev.storage, "revert not atomic"
                assert state.accounts == prev.accounts, "revert not atomic"
                assert state.contract_balance == prev.contract_balance
            assert state.contract_balance >= 0
            assert all(v >= 0 for v in state.accounts.values()), "negative balance"
            for name in uint_slots:
                assert state.storage[name] >= 0, f"uint slot {name} negative"
            for name in uint_maps:
                assert all(v >= 0 for v in state.storage[name].values())
    note(9, f"conservation, revert atomicity, block monotonicity and "
            f"nonnegativity held on {total_txs} randomized transactions")


SPLITTER = """
contract Splitter {
    mapping (address => uint) shares;
    uint totalShares;
    uint totalReleased;
    mapping (address => uint) released;

    constructor (address a, uint sa, address b, uint sb) {
        shares[a] = sa;
        shares[b] = sb;
        totalShares = sa + sb;
    }

    function release(address account) public {
        require (shares[account] > 0);
        totalReleased = totalReleased + (shares[account] * (balance + totalReleased) / totalShares - released[account]);
        account.transfer(shares[account] * (balance + totalReleased) / totalShares - released[account]);
        released[account] = released[account] + shares[account];
    }
}

property anyone_wd {
    Forall xa [ shares[xa] > 0 && balance > 0
    -> Exists tx [1, xa]
    [ <tx>xa.balance > xa.balance ] ]
}
"""


def test_criterion_10_exclusions_and_nia_classification(tmp_path):
    f = tmp_path / "splitter.sol"
    f.write_text(SPLITTER)
    from solvent.parser import load_source
    src = load_source(str(f))
    assert src.outcome.ok, [d.message for d in src.outcome.diagnostics]
    c = src.outcome.contract
    p = src.outcome.properties[0]
    assert select_logic(c, p) == LOGIC_NONLINEAR
    reports = verify_suite(src, [SolverConfig("z3", timeout_s=15.0)],
                           SuiteOptions(max_depth=2, budget_s=30.0, replay=True))
    r = reports[0]
    assert r.logic == LOGIC_NONLINEAR
    assert r.verdict is not None or r.error  # any verdict; Unknown is permitted
    note(10, f"nonlinear contracts are classified as {LOGIC_NONLINEAR} and may "
             f"return Unknown (got {r.verdict.mark() if r.verdict else 'error'}); "
             f"wall-clock times and the full 107-task benchmark are out of scope "
             f"by design")
