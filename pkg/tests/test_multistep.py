"""Solver-level checks for transaction bounds m >= 2 and for
invariant-strengthened unbounded proofs."""
import pytest

from conftest import CONTRACTS, Z3, load, needs_z3
from solvent.ast import BinOp, BlockNumber, ContractBalance, IntLit, Post, Property, StateVar
from solvent.driver import HoldsBounded, HoldsUnbounded, SuiteOptions, Violated, verify, verify_suite
from solvent.parser import parse_file

pytestmark = needs_z3

TWO_STEP = """
contract TwoStep {
    mapping (address => uint) dep;
    mapping (address => uint) pending;

    constructor () { }

    function deposit() public payable {
        dep[msg.sender] += msg.value;
    }

    function request() public {
        pending[msg.sender] = pending[msg.sender] + dep[msg.sender];
        dep[msg.sender] = 0;
    }

    function claim() public {
        msg.sender.transfer(pending[msg.sender]);
        pending[msg.sender] = 0;
    }
}

property two_step_wd {
    Forall xa [ true
    -> Exists tx [2, xa]
    [ <tx>xa.balance >= xa.balance + dep[xa] + pending[xa] ] ]
}
"""


def test_two_step_withdrawal_holds_bounded():
    out = parse_file(TWO_STEP)
    assert out.ok, [d.message for d in out.diagnostics]
    p = out.properties[0]
    assert p.bound_m == 2
    res = verify(out.contract, p, Z3, max_depth=3, budget_s=400)
    assert isinstance(res.verdict, (HoldsBounded, HoldsUnbounded)), res.verdict
    if isinstance(res.verdict, HoldsBounded):
        assert res.verdict.n == 3


def test_two_step_bound_one_is_not_enough():
    # with m=1 the request/claim pair cannot complete, so a depth-2 prefix
    # (deploy + deposit) already defeats the single-transaction version
    out = parse_file(TWO_STEP.replace("Exists tx [2, xa]", "Exists tx [1, xa]"))
    assert out.ok
    res = verify(out.contract, out.properties[0], Z3, max_depth=3, budget_s=400)
    assert isinstance(res.verdict, Violated), res.verdict
    assert res.verdict.n == 2


def test_m2_violation_on_buggy_crowdfund(crowdfund_bug):
    c = crowdfund_bug.outcome.contract
    no_drain_2 = Property(
        "no_drain_2", ("xa",),
        BinOp("&&", BinOp(">", ContractBalance(), IntLit(0)),
              BinOp(">", BlockNumber(), StateVar("end_donate"))),
        2, "xa",
        BinOp("<", Post(ContractBalance()), ContractBalance()))
    res = verify(c, no_drain_2, Z3, max_depth=3, budget_s=400)
    assert isinstance(res.verdict, Violated), res.verdict
    assert res.verdict.n == 2  # constructor + selfdestruct freezes the funds


def test_invariant_strengthens_unbounded_proof():
    src = load("piggy")
    assert len(src.outcome.invariants) == 1
    c = src.outcome.contract
    p = src.outcome.properties[0]
    # without the invariant the havoc state (balance < locked) defeats take()
    bare = verify(c, p, Z3, max_depth=2, budget_s=300, invariants=())
    assert not isinstance(bare.verdict, HoldsUnbounded), bare.verdict
    strengthened = verify(c, p, Z3, max_depth=2, budget_s=300,
                          invariants=tuple(src.outcome.invariants))
    assert isinstance(strengthened.verdict, HoldsUnbounded), strengthened.verdict


def test_invariants_flow_through_suites():
    reports = verify_suite(load("piggy"), [Z3], SuiteOptions(max_depth=2, budget_s=300))
    assert isinstance(reports[0].verdict, HoldsUnbounded)
