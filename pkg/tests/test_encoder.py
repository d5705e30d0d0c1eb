import re

import pytest

from solvent.ast import (
    INT, UINT, Assign, BinOp, BoolLit, Contract, IntLit, LVar, MapGet, MappingTy,
    Method, Param, ParamDecl, Property, QVar, Require, StateVar, VarDecl,
)
from solvent.encoder import (
    LOGIC_LINEAR, LOGIC_NONLINEAR, build_abstract_query, build_bmc_query,
    selector_tags, select_logic, max_arity,
)

TRIVIAL_PROP = Property("p", ("xa",), BoolLit(True), 1, "xa", BoolLit(True))


def test_selector_domain(crowdfund_bug):
    c = crowdfund_bug.outcome.contract
    tags = selector_tags(c, allow_skip=False)
    assert tags == {"donate": 0, "wdOwner": 1, "wdDonor": 2, "selfdestruct": 3}
    assert selector_tags(c, allow_skip=True)["skip"] == 4
    assert max_arity(c, include_ctor=True) == 3
    assert max_arity(c, include_ctor=False) == 0


def test_bmc_script_is_self_contained(crowdfund_bug):
    c = crowdfund_bug.outcome.contract
    p = crowdfund_bug.outcome.properties[0]
    q = build_bmc_query(c, p, 3)
    assert q.script.count("(check-sat)") == 1
    assert "(set-logic ALL)" in q.script
    assert "(set-option :produce-models true)" in q.script
    assert q.script.index("(set-logic ALL)") < q.script.index("(assert")
    # one get-value carrying exactly the decode map, after check-sat
    m = re.search(r"\(get-value \((.*)\)\)", q.script)
    assert m, "missing get-value"
    names = m.group(1).split()
    assert set(names) == set(q.decode_map)
    assert q.script.index("(check-sat)") < q.script.index("(get-value")


def test_decode_map_covers_counterexample(crowdfund_bug):
    c = crowdfund_bug.outcome.contract
    p = crowdfund_bug.outcome.properties[0]
    k = 3
    q = build_bmc_query(c, p, k)
    roles = set(q.decode_map.values())
    for i in range(k):
        assert ("step", i, "sender") in roles
        assert ("step", i, "value") in roles
        assert ("step", i, "block") in roles
        if i > 0:
            assert ("step", i, "sel") in roles
    for j in range(len(c.ctor.params)):
        assert ("step_arg", 0, j) in roles
    assert ("qvar", "xa") in roles
    # every address witness has a genesis balance alias
    assert any(r[0] == "genesis_of" for r in roles)


def test_bmc_depth_validation(crowdfund_bug):
    c = crowdfund_bug.outcome.contract
    p = crowdfund_bug.outcome.properties[0]
    with pytest.raises(ValueError):
        build_bmc_query(c, p, 0)


def test_abstract_query_shape(crowdfund_bug):
    c = crowdfund_bug.outcome.contract
    p = crowdfund_bug.outcome.properties[1]  # owner_wd
    q = build_abstract_query(c, p)
    assert q.kind == "abstract" and q.depth == 0
    assert q.script.count("(check-sat)") == 1
    assert "(get-value" not in q.script
    # structural invariants quantify account balances and uint mappings
    assert "(forall ((a Int)) (>= (select" in q.script
    # no reachability chain: a single frame only
    assert "blk_f1" not in q.script and "blk_a" in q.script


def test_prefix_steps_forbid_reverts_and_skip(crowdfund_bug):
    c = crowdfund_bug.outcome.contract
    p = crowdfund_bug.outcome.properties[0]
    q = build_bmc_query(c, p, 3)
    assert "(not reverted_s1)" in q.script
    assert "(not reverted_s2)" in q.script
    assert "(not rev_ctor)" in q.script
    skip_tag = selector_tags(c, allow_skip=True)["skip"]
    # prefix selectors stop at the selfdestruct tag
    assert f"(<= sel_s1 {skip_tag - 1})" in q.script


def _contract_with_expr(e) -> Contract:
    m = Method("f", (ParamDecl("n", INT),), False, (Assign(LVar("x"), e),))
    return Contract("L", (VarDecl("x", INT), VarDecl("shares", MappingTy(UINT)),
                          VarDecl("totalReleased", UINT), VarDecl("totalShares", UINT)),
                    Method(None, (), False, ()), (m,))


def test_logic_selection_crowdfund_is_linear(crowdfund_bug):
    c = crowdfund_bug.outcome.contract
    for p in crowdfund_bug.outcome.properties:
        assert select_logic(c, p) == LOGIC_LINEAR


def test_logic_selection_payment_splitter_shape_is_nonlinear():
    shares_expr = BinOp("/",
                        BinOp("*", MapGet("shares", Param("n")), StateVar("totalReleased")),
                        StateVar("totalShares"))
    c = _contract_with_expr(shares_expr)
    assert select_logic(c) == LOGIC_NONLINEAR


def test_logic_selection_constant_multiplier_is_linear():
    c = _contract_with_expr(BinOp("+", BinOp("*", IntLit(2), Param("n")), IntLit(3)))
    assert select_logic(c) == LOGIC_LINEAR
    c = _contract_with_expr(BinOp("/", Param("n"), IntLit(2)))
    assert select_logic(c) == LOGIC_LINEAR


def test_logic_recorded_on_queries():
    c = _contract_with_expr(BinOp("*", Param("n"), StateVar("x")))
    q = build_bmc_query(c, TRIVIAL_PROP, 1)
    assert q.logic == LOGIC_NONLINEAR
    assert "(set-logic ALL)" in q.script  # portability: logic tag is metadata


def test_tdiv_emitted_only_when_needed(crowdfund_bug):
    c = crowdfund_bug.outcome.contract
    p = crowdfund_bug.outcome.properties[0]
    assert "tdiv" not in build_bmc_query(c, p, 1).script
    dividing = Property("d", ("xa",), BoolLit(True), 1, "xa",
                        BinOp("==", BinOp("/", StateVar("target"), IntLit(2)),
                              IntLit(1)))
    assert "(define-fun tdiv" in build_bmc_query(c, dividing, 1).script


def test_dump_filename(crowdfund_bug):
    c = crowdfund_bug.outcome.contract
    p = crowdfund_bug.outcome.properties[0]
    assert build_bmc_query(c, p, 2).filename() == "query_donor_wd_bmc_2.smt2"
    assert build_abstract_query(c, p).filename() == "query_donor_wd_abstract_0.smt2"
