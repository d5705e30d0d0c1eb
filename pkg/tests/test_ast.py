from hypothesis import given, settings
from hypothesis import strategies as st

from solvent.ast import (
    ADDRESS, BOOL, INT, UINT, AccountBalance, AddressLit, Assign, BinOp, BlockNumber,
    BoolLit, Contract, ContractBalance, If, IntLit, LMap, LVar, MapGet, MappingTy,
    Method, MsgSender, MsgValue, Param, ParamDecl, Post, Property, QVar, Require,
    StateVar, Transfer, UnOp, VarDecl, check_wellformed, pretty_print,
    pretty_print_property,
)
from solvent.parser import parse_file, tokenize


def wf(c, props=()):
    return check_wellformed(c, props)


def simple_contract(methods=(), state_vars=(), ctor=None):
    return Contract("C", tuple(state_vars), ctor or Method(None, (), False, ()),
                    tuple(methods))


def test_crowdfund_is_wellformed(crowdfund_bug):
    out = crowdfund_bug.outcome
    assert wf(out.contract, out.properties) == []


def test_duplicate_method_name():
    m = Method("donate", (), True, ())
    diags = wf(simple_contract(methods=(m, m)))
    assert any(d.rule_id == "dup-method" for d in diags)


def test_unbound_actor():
    p = Property("p", ("xa",), BoolLit(True), 1, "xb", BoolLit(True))
    diags = wf(simple_contract(), (p,))
    assert any(d.rule_id == "unbound-actor" for d in diags)


def test_bound_must_be_positive():
    p = Property("p", ("xa",), BoolLit(True), 0, "xa", BoolLit(True))
    assert any(d.rule_id == "bad-bound" for d in wf(simple_contract(), (p,)))


def test_immutable_assignment_outside_constructor():
    sv = VarDecl("owner", ADDRESS, immutable=True)
    m = Method("steal", (), False, (Assign(LVar("owner"), MsgSender()),))
    ctor = Method(None, (), False, (Assign(LVar("owner"), MsgSender()),))
    diags = wf(simple_contract(methods=(m,), state_vars=(sv,), ctor=ctor))
    assert [d.rule_id for d in diags] == ["immutable-assign"]


def test_reserved_names_rejected():
    diags = wf(simple_contract(state_vars=(VarDecl("balance", INT),)))
    assert any(d.rule_id == "reserved-name" for d in diags)
    diags = wf(simple_contract(methods=(Method("transfer", (), False, ()),)))
    assert any(d.rule_id == "reserved-name" for d in diags)


def test_mapping_param_rejected():
    m = Method("f", (ParamDecl("m", MappingTy(INT)),), False, ())
    assert any(d.rule_id == "mapping-param" for d in wf(simple_contract(methods=(m,))))


def test_type_errors():
    sv = (VarDecl("a", INT), VarDecl("who", ADDRESS))
    bad_require = Method("f", (), False, (Require(BinOp("+", StateVar("a"), IntLit(1))),))
    assert wf(simple_contract(methods=(bad_require,), state_vars=sv))
    bad_cmp = Method("g", (), False,
                     (Require(BinOp("<", StateVar("who"), StateVar("who"))),))
    assert wf(simple_contract(methods=(bad_cmp,), state_vars=sv))
    bad_assign = Method("h", (), False, (Assign(LVar("who"), IntLit(1)),))
    assert wf(simple_contract(methods=(bad_assign,), state_vars=sv))


def test_msg_sender_rejected_in_property():
    p = Property("p", ("xa",), BinOp("==", MsgSender(), QVar("xa")), 1, "xa",
                 BoolLit(True))
    diags = wf(simple_contract(), (p,))
    assert any(d.rule_id == "msg-in-property" for d in diags)


def test_post_must_not_nest():
    p = Property("p", ("xa",), BoolLit(True), 1, "xa",
                 Post(BinOp("==", Post(ContractBalance()), IntLit(0))))
    diags = wf(simple_contract(), (p,))
    assert any(d.rule_id == "post-nested" for d in diags)


def test_post_rejected_in_antecedent():
    p = Property("p", ("xa",), Post(BoolLit(True)), 1, "xa", BoolLit(True))
    diags = wf(simple_contract(), (p,))
    assert any(d.rule_id == "post-outside-consequent" for d in diags)


# ---------------------------------------------------------------------------
# Pretty printer round trips
# ---------------------------------------------------------------------------

def roundtrip(c, props=()):
    text = pretty_print(c) + "".join(pretty_print_property(p) for p in props)
    out = parse_file(text)
    assert out.ok, "; ".join(d.message for d in out.diagnostics) + "\n" + text
    assert out.contract == c
    assert tuple(out.properties) == tuple(props)


def test_crowdfund_roundtrip(crowdfund_bug):
    out = crowdfund_bug.outcome
    roundtrip(out.contract, out.properties)


def test_all_benchmarks_roundtrip(crowdfund_fix, crowdfund_fix2, freezable, deposit):
    for src in (crowdfund_fix, crowdfund_fix2, freezable, deposit):
        roundtrip(src.outcome.contract, src.outcome.properties)


def test_nested_if_roundtrip():
    body = (
        If(BinOp("<", ContractBalance(), IntLit(5)),
           (Assign(LVar("a"), IntLit(1)),
            If(StateVar("f"), (Assign(LVar("a"), IntLit(2)),), ())),
           (Require(StateVar("f")),)),
    )
    c = simple_contract(methods=(Method("m", (), False, body),),
                        state_vars=(VarDecl("a", INT), VarDecl("f", BOOL)))
    assert wf(c) == []
    roundtrip(c)


def test_property_prints_exists_header():
    p = Property("donor_wd", ("xa",), BoolLit(True), 1, "xa", BoolLit(True))
    text = pretty_print_property(p)
    toks = [t.text for t in tokenize(text)[0]]
    i = toks.index("Exists")
    assert toks[i:i + 7] == ["Exists", "tx", "[", "1", ",", "xa", "]"]


# Typed expression strategies over a fixed variable pool.
_VARS = (VarDecl("a", INT), VarDecl("b", UINT), VarDecl("f", BOOL),
         VarDecl("who", ADDRESS), VarDecl("m", MappingTy(UINT)))

addr_expr = st.deferred(lambda: st.one_of(
    st.integers(0, 9).map(AddressLit),
    st.just(StateVar("who")),
    st.just(MsgSender()),
))

num_expr = st.deferred(lambda: st.one_of(
    st.integers(-20, 50).map(IntLit),
    st.sampled_from([StateVar("a"), StateVar("b"), MsgValue(), ContractBalance(),
                     BlockNumber()]),
    addr_expr.map(AccountBalance),
    addr_expr.map(lambda k: MapGet("m", k)),
    st.tuples(st.sampled_from("+-*/"), num_expr, num_expr)
      .map(lambda t: BinOp(t[0], t[1], t[2])),
    num_expr.map(lambda e: UnOp("-", e) if not isinstance(e, IntLit) else e),
))

bool_expr = st.deferred(lambda: st.one_of(
    st.booleans().map(BoolLit),
    st.just(StateVar("f")),
    st.tuples(st.sampled_from(["<", "<=", ">", ">=", "==", "!="]), num_expr, num_expr)
      .map(lambda t: BinOp(t[0], t[1], t[2])),
    st.tuples(addr_expr, addr_expr).map(lambda t: BinOp("==", t[0], t[1])),
    bool_expr.map(lambda e: UnOp("!", e)),
    st.tuples(st.sampled_from(["&&", "||"]), bool_expr, bool_expr)
      .map(lambda t: BinOp(t[0], t[1], t[2])),
))

stmt = st.deferred(lambda: st.one_of(
    bool_expr.map(Require),
    num_expr.map(lambda e: Assign(LVar("a"), e)),
    num_expr.map(lambda e: Assign(LVar("b"), e)),
    bool_expr.map(lambda e: Assign(LVar("f"), e)),
    st.tuples(addr_expr, num_expr).map(lambda t: Assign(LMap("m", t[0]), t[1])),
    st.tuples(addr_expr, num_expr).map(lambda t: Transfer(t[0], t[1])),
    st.tuples(bool_expr, st.lists(stmt, min_size=1, max_size=2),
              st.lists(stmt, max_size=2))
      .map(lambda t: If(t[0], tuple(t[1]), tuple(t[2]))),
))

methods_strategy = st.lists(
    st.tuples(st.booleans(), st.lists(stmt, max_size=4)), min_size=0, max_size=3
).map(lambda ms: tuple(Method(f"m{i}", (), payable, tuple(body))
                       for i, (payable, body) in enumerate(ms)))


@settings(max_examples=80, deadline=None)
@given(methods_strategy, st.lists(stmt, max_size=3))
def test_contract_roundtrip_property(methods, ctor_body):
    c = Contract("G", _VARS, Method(None, (), True, tuple(ctor_body)), methods)
    assert check_wellformed(c) == []
    roundtrip(c)


# Property expressions may not mention msg.sender/msg.value.
prop_addr = st.deferred(lambda: st.one_of(
    st.integers(0, 9).map(AddressLit),
    st.just(StateVar("who")),
    st.just(QVar("xa")),
))

prop_num = st.deferred(lambda: st.one_of(
    st.integers(-20, 50).map(IntLit),
    st.sampled_from([StateVar("a"), StateVar("b"), ContractBalance(), BlockNumber()]),
    prop_addr.map(AccountBalance),
    prop_addr.map(lambda k: MapGet("m", k)),
    st.tuples(st.sampled_from("+-*/"), prop_num, prop_num)
      .map(lambda t: BinOp(t[0], t[1], t[2])),
))

prop_bool = st.deferred(lambda: st.one_of(
    st.booleans().map(BoolLit),
    st.just(StateVar("f")),
    st.tuples(st.sampled_from(["<", "<=", ">", ">=", "==", "!="]), prop_num, prop_num)
      .map(lambda t: BinOp(t[0], t[1], t[2])),
    st.tuples(prop_addr, prop_addr).map(lambda t: BinOp("==", t[0], t[1])),
    prop_bool.map(lambda e: UnOp("!", e)),
    st.tuples(st.sampled_from(["&&", "||"]), prop_bool, prop_bool)
      .map(lambda t: BinOp(t[0], t[1], t[2])),
))


@settings(max_examples=80, deadline=None)
@given(prop_bool, prop_num, prop_num, st.integers(1, 4))
def test_property_roundtrip_property(ante, lhs, rhs, m):
    # qvar use plus a <tx> marker on one side of the consequent
    conseq = BinOp(">=", Post(lhs), BinOp("+", rhs, AccountBalance(QVar("xa"))))
    p = Property("p", ("xa",), BinOp("||", ante, BinOp("==", QVar("xa"), StateVar("who"))),
                 m, "xa", conseq)
    c = Contract("G", _VARS, Method(None, (), True, ()), ())
    assert check_wellformed(c, (p,)) == []
    text = pretty_print(c) + pretty_print_property(p)
    out = parse_file(text)
    assert out.ok, "; ".join(d.message for d in out.diagnostics) + "\n" + text
    assert out.properties[0] == p


def test_typing_is_deterministic(crowdfund_bug):
    out = crowdfund_bug.outcome
    assert check_wellformed(out.contract, out.properties) == \
        check_wellformed(out.contract, out.properties)
