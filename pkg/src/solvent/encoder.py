"""Compilation of contracts and liquidity properties into SMT-LIB scripts.

A contract becomes a functional transition relation over per-step frames
(one solver constant per state variable, plus contract balance, an
address-to-balance array and the block number). A property becomes its
negation: existentially chosen address variables, the antecedent at the
reached frame, and a universal quantifier over the suffix transaction
variables and next-state frames requiring the consequent to fail.  An
unsatisfiable query therefore proves the property.
"""
from __future__ import annotations

from dataclasses import dataclass, field

from .ast import (
    AccountBalance, AddressLit, AddressTy, Assign, BinOp, BlockNumber, BoolLit, BoolTy,
    Contract, ContractBalance, Expr, If, IntLit, IntTy, Invariant, LMap, LVar, MapGet,
    MappingTy, Method, MsgSender, MsgValue, Param, Post, Property, QVar, Require,
    StateVar, Transfer, UIntTy, UnOp, iter_contract_exprs, iter_property_exprs,
    iter_subexprs,
)
from .interp import ConcreteState, Transaction

LOGIC_LINEAR = "LIA-with-arrays"
LOGIC_NONLINEAR = "NIA-with-arrays"

ARRAY_SORT = "(Array Int Int)"
_CONST0_ARRAY = f"((as const {ARRAY_SORT}) 0)"


def _lit(v: int) -> str:
    return str(v) if v >= 0 else f"(- {-v})"


def _and(parts: list[str]) -> str:
    parts = [p for p in parts if p != "true"]
    if not parts:
        return "true"
    if len(parts) == 1:
        return parts[0]
    return "(and " + " ".join(parts) + ")"


def _or(parts: list[str]) -> str:
    if not parts:
        return "false"
    if len(parts) == 1:
        return parts[0]
    return "(or " + " ".join(parts) + ")"


def sort_of(ty) -> str:
    if isinstance(ty, BoolTy):
        return "Bool"
    if isinstance(ty, MappingTy):
        return ARRAY_SORT
    return "Int"


# ---------------------------------------------------------------------------
# Script assembly
# ---------------------------------------------------------------------------

class ScriptBuilder:
    def __init__(self) -> None:
        self.lines: list[str] = []
        self._names: set[str] = set()

    def name(self, base: str) -> str:
        n, i = base, 1
        while n in self._names:
            n = f"{base}.{i}"
            i += 1
        self._names.add(n)
        return n

    def comment(self, text: str) -> None:
        self.lines.append(f"; {text}")

    def raw(self, line: str) -> None:
        self.lines.append(line)

    def declare(self, base: str, sort: str) -> str:
        n = self.name(base)
        self.lines.append(f"(declare-const {n} {sort})")
        return n

    def define(self, base: str, sort: str, body: str) -> str:
        n = self.name(base)
        self.lines.append(f"(define-fun {n} () {sort} {body})")
        return n

    def assert_(self, formula: str) -> None:
        if formula != "true":
            self.lines.append(f"(assert {formula})")

    def text(self) -> str:
        return "\n".join(self.lines) + "\n"


# ---------------------------------------------------------------------------
# Frames and transaction variables
# ---------------------------------------------------------------------------

@dataclass
class SymbolicFrame:
    """Solver terms naming one blockchain state of the unrolling."""

    index: int
    storage: dict  # state var name -> term
    cbal: str
    accts: str
    blk: str

    def fields(self, c: Contract):
        for v in c.state_vars:
            yield v.name, self.storage[v.name], sort_of(v.ty)
        yield "cbal", self.cbal, "Int"
        yield "accts", self.accts, ARRAY_SORT
        yield "blk", self.blk, "Int"


@dataclass
class TxVars:
    """Per-step transaction terms; the block doubles as the post-frame block."""

    step: int
    sel: str | None
    args: list
    sender: str
    value: str
    blk: str


def declare_frame(out: ScriptBuilder, c: Contract, index: int, tag: str | None = None) -> SymbolicFrame:
    t = tag if tag is not None else f"f{index}"
    storage = {v.name: out.declare(f"st_{v.name}_{t}", sort_of(v.ty)) for v in c.state_vars}
    return SymbolicFrame(
        index, storage,
        out.declare(f"cbal_{t}", "Int"),
        out.declare(f"accts_{t}", ARRAY_SORT),
        out.declare(f"blk_{t}", "Int"),
    )


def max_arity(c: Contract, include_ctor: bool) -> int:
    arities = [len(m.params) for m in c.methods]
    if include_ctor:
        arities.append(len(c.ctor.params))
    return max(arities, default=0)


def selector_tags(c: Contract, allow_skip: bool) -> dict:
    tags = {m.name: i for i, m in enumerate(c.methods)}
    tags["selfdestruct"] = len(c.methods)
    if allow_skip:
        tags["skip"] = len(c.methods) + 1
    return tags


# ---------------------------------------------------------------------------
# Expression translation
# ---------------------------------------------------------------------------

@dataclass
class _Sig:
    """Mutable symbolic state during the single-static-assignment body pass."""

    storage: dict
    cbal: str
    accts: str

    def copy(self) -> "_Sig":
        return _Sig(dict(self.storage), self.cbal, self.accts)


@dataclass
class EncEnv:
    contract: Contract
    sig: _Sig
    blk: str
    sender: str | None = None
    value: str | None = None
    params: dict | None = None  # name -> (term, Ty)
    qvars: dict | None = None  # name -> term
    post: "EncEnv | None" = None
    revert_sink: list | None = None  # body mode: division guards go here


def tr(e: Expr, env: EncEnv) -> str:
    """Translate an expression to an SMT-LIB term under env."""
    match e:
        case IntLit(v):
            return _lit(v)
        case AddressLit(v):
            return _lit(v)
        case BoolLit(v):
            return "true" if v else "false"
        case StateVar(name):
            return env.sig.storage[name]
        case Param(name):
            term, ty = env.params[name]
            return f"(= {term} 1)" if isinstance(ty, BoolTy) else term
        case QVar(name):
            return env.qvars[name]
        case MapGet(name, key):
            return f"(select {env.sig.storage[name]} {tr(key, env)})"
        case MsgSender():
            return env.sender
        case MsgValue():
            return env.value
        case BlockNumber():
            return env.blk
        case ContractBalance():
            return env.sig.cbal
        case AccountBalance(addr):
            return f"(select {env.sig.accts} {tr(addr, env)})"
        case Post(inner):
            return tr(inner, env.post)
        case UnOp("-", x):
            return f"(- {tr(x, env)})"
        case UnOp("!", x):
            return f"(not {tr(x, env)})"
        case BinOp("/", a, b):
            ta, tb = tr(a, env), tr(b, env)
            if env.revert_sink is not None:
                # Fold division outside the solver-agreement zone into revert.
                env.revert_sink.append(f"(or (< {ta} 0) (<= {tb} 0))")
                return f"(div {ta} {tb})"
            return f"(tdiv {ta} {tb})"
        case BinOp("!=", a, b):
            return f"(not (= {tr(a, env)} {tr(b, env)}))"
        case BinOp(op, a, b):
            smt = {"+": "+", "-": "-", "*": "*", "==": "=", "<": "<", "<=": "<=",
                   ">": ">", ">=": ">=", "&&": "and", "||": "or"}[op]
            return f"({smt} {tr(a, env)} {tr(b, env)})"
        case _:
            raise ValueError(f"cannot translate {e!r}")


TDIV_DEFINE = (
    "(define-fun tdiv ((a Int) (b Int)) Int "
    "(ite (> b 0) (ite (>= a 0) (div a b) (- (div (- a) b))) "
    "(ite (>= a 0) (- (div a (- b))) (div (- a) (- b)))))"
)


def _needs_tdiv(p: Property, invariants=()) -> bool:
    exprs = list(iter_property_exprs(p))
    for inv in invariants:
        exprs.extend(iter_subexprs(inv.expr))
    return any(isinstance(e, BinOp) and e.op == "/" for e in exprs)


# ---------------------------------------------------------------------------
# Method bodies
# ---------------------------------------------------------------------------

def _exec_sym(c: Contract, body, sig: _Sig, env: EncEnv) -> list[str]:
    """Symbolically execute statements, mutating sig; returns revert disjuncts."""
    revs: list[str] = []

    def t(e: Expr) -> str:
        env.sig = sig
        env.revert_sink = revs
        return tr(e, env)

    for s in body:
        match s:
            case Require(cond):
                revs.append(f"(not {t(cond)})")
            case Assign(LVar(name), value):
                term = t(value)
                if isinstance(c.var(name).ty, UIntTy):
                    revs.append(f"(< {term} 0)")
                sig.storage[name] = term
            case Assign(LMap(name, key), value):
                kt, vt = t(key), t(value)
                if isinstance(c.var(name).ty.value, UIntTy):
                    revs.append(f"(< {vt} 0)")
                sig.storage[name] = f"(store {sig.storage[name]} {kt} {vt})"
            case Transfer(to, amount):
                at, vt = t(to), t(amount)
                revs.append(f"(or (< {vt} 0) (> {vt} {sig.cbal}))")
                sig.cbal = f"(- {sig.cbal} {vt})"
                sig.accts = f"(store {sig.accts} {at} (+ (select {sig.accts} {at}) {vt}))"
            case If(cond, then_body, else_body):
                ct = t(cond)
                then_sig, else_sig = sig.copy(), sig.copy()
                then_revs = _exec_sym(c, then_body, then_sig, env)
                else_revs = _exec_sym(c, else_body, else_sig, env)
                env.sig = sig
                for name in sig.storage:
                    a, b = then_sig.storage[name], else_sig.storage[name]
                    sig.storage[name] = a if a == b else f"(ite {ct} {a} {b})"
                a, b = then_sig.cbal, else_sig.cbal
                sig.cbal = a if a == b else f"(ite {ct} {a} {b})"
                a, b = then_sig.accts, else_sig.accts
                sig.accts = a if a == b else f"(ite {ct} {a} {b})"
                if then_revs or else_revs:
                    revs.append(f"(ite {ct} {_or(then_revs)} {_or(else_revs)})")
            case _:
                raise ValueError(f"cannot encode {s!r}")
    return revs


def _arg_constraints(m: Method, args) -> list[str]:
    out = []
    for p, a in zip(m.params, args):
        if isinstance(p.ty, (UIntTy, AddressTy)):
            out.append(f"(>= {a} 0)")
        elif isinstance(p.ty, BoolTy):
            out.append(f"(or (= {a} 0) (= {a} 1))")
    return out


def method_effect(c: Contract, m: Method, pre: SymbolicFrame, tx: TxVars) -> tuple[_Sig, str]:
    """Run the SSA pass for one method: final symbolic state and revert condition.

    The attached value is credited (and the sender debited) before the body,
    so balance reads inside the body already see the transfer.
    """
    sig = _Sig(dict(pre.storage),
               f"(+ {pre.cbal} {tx.value})",
               f"(store {pre.accts} {tx.sender} (- (select {pre.accts} {tx.sender}) {tx.value}))")
    env = EncEnv(c, sig, blk=tx.blk, sender=tx.sender, value=tx.value,
                 params={p.name: (a, p.ty) for p, a in zip(m.params, tx.args)})
    revs: list[str] = [] if m.payable else [f"(> {tx.value} 0)"]
    revs.extend(_exec_sym(c, m.body, sig, env))
    return sig, _or(revs)


def encode_method(c: Contract, m: Method, pre: SymbolicFrame, tx: TxVars,
                  post: SymbolicFrame) -> tuple[str, str]:
    """Encode one method as (formula tying post to pre, revert condition)."""
    sig, rev = method_effect(c, m, pre, tx)

    eqs = list(_arg_constraints(m, tx.args))
    for name, pre_t in pre.storage.items():
        fin = sig.storage[name]
        eqs.append(f"(= {post.storage[name]} "
                   + (pre_t if fin == pre_t and rev == "false"
                      else fin if rev == "false"
                      else f"(ite {rev} {pre_t} {fin})") + ")")
    eqs.append(f"(= {post.cbal} " + (sig.cbal if rev == "false"
                                     else f"(ite {rev} {pre.cbal} {sig.cbal})") + ")")
    eqs.append(f"(= {post.accts} " + (sig.accts if rev == "false"
                                      else f"(ite {rev} {pre.accts} {sig.accts})") + ")")
    return _and(eqs), rev


@dataclass
class TransitionEnc:
    formula: str
    reverted: str  # revert condition across the selector case split


def encode_transition(c: Contract, pre: SymbolicFrame, tx: TxVars, post: SymbolicFrame,
                      allow_skip: bool, constrain_sender: bool = True) -> TransitionEnc:
    """One selector-indexed transition step; exactly one case applies."""
    tags = selector_tags(c, allow_skip)
    parts = [
        f"(>= {tx.value} 0)",
        f"(>= (select {pre.accts} {tx.sender}) {tx.value})",
        f"(>= {tx.blk} {pre.blk})",
        f"(<= 0 {tx.sel})",
        f"(<= {tx.sel} {max(tags.values())})",
    ]
    if constrain_sender:
        parts.insert(1, f"(>= {tx.sender} 0)")

    rev_cases: list[str] = []
    for m in c.methods:
        formula, rev = encode_method(c, m, pre, tx, post)
        parts.append(f"(=> (= {tx.sel} {tags[m.name]}) {formula})")
        if rev != "false":
            rev_cases.append(f"(and (= {tx.sel} {tags[m.name]}) {rev})")

    frame_eq = [f"(= {post.storage[n]} {pre.storage[n]})" for n in pre.storage]
    sd = frame_eq + [
        f"(= {post.cbal} (+ {pre.cbal} {tx.value}))",
        f"(= {post.accts} (store {pre.accts} {tx.sender} "
        f"(- (select {pre.accts} {tx.sender}) {tx.value})))",
    ]
    parts.append(f"(=> (= {tx.sel} {tags['selfdestruct']}) {_and(sd)})")

    if allow_skip:
        skip = frame_eq + [f"(= {post.cbal} {pre.cbal})", f"(= {post.accts} {pre.accts})",
                           f"(= {tx.value} 0)"]
        parts.append(f"(=> (= {tx.sel} {tags['skip']}) {_and(skip)})")

    return TransitionEnc(_and(parts), _or(rev_cases))


def encode_init(c: Contract, out: ScriptBuilder, genesis_accts: str,
                frame0: SymbolicFrame, tx: TxVars) -> None:
    """Deploy via the constructor over the genesis state; deployment succeeds."""
    defaults = {v.name: ("false" if isinstance(v.ty, BoolTy)
                         else _CONST0_ARRAY if isinstance(v.ty, MappingTy) else "0")
                for v in c.state_vars}
    sig = _Sig(defaults, tx.value,
               f"(store {genesis_accts} {tx.sender} "
               f"(- (select {genesis_accts} {tx.sender}) {tx.value}))")
    env = EncEnv(c, sig, blk=tx.blk, sender=tx.sender, value=tx.value,
                 params={p.name: (a, p.ty) for p, a in zip(c.ctor.params, tx.args)})
    revs: list[str] = [] if c.ctor.payable else [f"(> {tx.value} 0)"]
    revs.extend(_exec_sym(c, c.ctor.body, sig, env))

    out.assert_(f"(>= {tx.value} 0)")
    out.assert_(f"(>= {tx.sender} 0)")
    out.assert_(f"(>= (select {genesis_accts} {tx.sender}) {tx.value})")
    out.assert_(f"(>= {tx.blk} 0)")
    for con in _arg_constraints(c.ctor, tx.args):
        out.assert_(con)
    rev = out.define("rev_ctor", "Bool", _or(revs))
    out.assert_(f"(not {rev})")
    for name in frame0.storage:
        out.assert_(f"(= {frame0.storage[name]} {sig.storage[name]})")
    out.assert_(f"(= {frame0.cbal} {sig.cbal})")
    out.assert_(f"(= {frame0.accts} {sig.accts})")


# ---------------------------------------------------------------------------
# Properties
# ---------------------------------------------------------------------------

def _frame_env(c: Contract, frame: SymbolicFrame, qvars: dict) -> EncEnv:
    return EncEnv(c, _Sig(dict(frame.storage), frame.cbal, frame.accts),
                  blk=frame.blk, qvars=qvars)


def encode_negated_property(c: Contract, p: Property, reached: SymbolicFrame,
                            out: ScriptBuilder, functional: bool = True) -> dict:
    """Assert the negation of p at the reached frame; returns qvar terms.

    The address variables become solver-existential constants, every suffix
    sender is the actor, and Skip padding realizes "at most m". With
    functional=True (the default) the suffix next-state frames are
    selector-indexed ite terms bound by lets, so only the transaction
    variables are universally quantified; solvers handle this far better
    than quantified array-valued frames. functional=False keeps next-state
    frames as explicit universal variables constrained by the transition
    relation; both shapes describe the same transitions.
    """
    qvars = {q: out.declare(f"qv_{q}", "Int") for q in p.qvars}
    for term in qvars.values():
        out.assert_(f"(>= {term} 0)")

    env = _frame_env(c, reached, qvars)
    out.assert_(tr(p.antecedent, env))
    actor = qvars[p.actor]
    if functional:
        _suffix_functional(c, p, reached, out, qvars, actor)
    else:
        _suffix_relational(c, p, reached, out, qvars, actor)
    return qvars


def _suffix_relational(c: Contract, p: Property, reached: SymbolicFrame,
                       out: ScriptBuilder, qvars: dict, actor: str) -> None:
    arity = max_arity(c, include_ctor=False)
    bound: list[str] = []
    ts: list[str] = []
    prev = reached
    post = None
    for j in range(1, p.bound_m + 1):
        sel = f"q{j}_sel"
        args = [f"q{j}_arg{i}" for i in range(arity)]
        value, blk = f"q{j}_value", f"q{j}_blk"
        storage = {v.name: f"q{j}_st_{v.name}" for v in c.state_vars}
        cbal, accts = f"q{j}_cbal", f"q{j}_accts"
        bound.append(f"({sel} Int)")
        bound.extend(f"({a} Int)" for a in args)
        bound.append(f"({value} Int)")
        bound.append(f"({blk} Int)")
        for v in c.state_vars:
            bound.append(f"({storage[v.name]} {sort_of(v.ty)})")
        bound.append(f"({cbal} Int)")
        bound.append(f"({accts} {ARRAY_SORT})")
        post = SymbolicFrame(reached.index + j, storage, cbal, accts, blk)
        txv = TxVars(j, sel, args, actor, value, blk)
        enc = encode_transition(c, prev, txv, post, allow_skip=True, constrain_sender=False)
        ts.append(enc.formula)
        prev = post

    conseq_env = _frame_env(c, reached, qvars)
    conseq_env.post = _frame_env(c, post, qvars)
    consequent = tr(p.consequent, conseq_env)
    body = f"(=> {_and(ts)} (not {consequent}))"
    out.assert_(f"(forall ({' '.join(bound)}) {body})")


def _suffix_functional(c: Contract, p: Property, reached: SymbolicFrame,
                       out: ScriptBuilder, qvars: dict, actor: str) -> None:
    tags = selector_tags(c, allow_skip=True)
    arity = max_arity(c, include_ctor=False)
    bound: list[str] = []
    envs: list[str] = []
    let_layers: list[list[tuple[str, str]]] = []
    prev = reached
    for j in range(1, p.bound_m + 1):
        sel = f"q{j}_sel"
        args = [f"q{j}_arg{i}" for i in range(arity)]
        value, blk = f"q{j}_value", f"q{j}_blk"
        bound.append(f"({sel} Int)")
        bound.extend(f"({a} Int)" for a in args)
        bound.append(f"({value} Int)")
        bound.append(f"({blk} Int)")
        envs += [
            f"(>= {value} 0)",
            f"(>= (select {prev.accts} {actor}) {value})",
            f"(>= {blk} {prev.blk})",
            f"(<= 0 {sel})",
            f"(<= {sel} {max(tags.values())})",
        ]
        txv = TxVars(j, sel, args, actor, value, blk)

        revs: list[tuple[str, str]] = []
        cases: dict = {}  # tag -> (storage terms, cbal, accts)
        for m in c.methods:
            sig, rev = method_effect(c, m, prev, txv)
            cons = _arg_constraints(m, txv.args)
            if cons:
                envs.append(f"(=> (= {sel} {tags[m.name]}) {_and(cons)})")
            rev_name = rev
            if rev not in ("false", "true"):
                rev_name = f"q{j}_rev_{m.name}"
                revs.append((rev_name, rev))
            cases[tags[m.name]] = (sig, rev_name)

        debit = (f"(store {prev.accts} {actor} "
                 f"(- (select {prev.accts} {actor}) {value}))")

        def chain(field: str) -> str:
            # selector-indexed ite; the skip case is the default branch
            if field == "cbal":
                pre_t, sd = prev.cbal, f"(+ {prev.cbal} {value})"
            elif field == "accts":
                pre_t, sd = prev.accts, debit
            else:
                pre_t = sd = prev.storage[field]
            acc = pre_t  # skip: identity
            for tag in sorted(cases, reverse=True):
                sig, rev_name = cases[tag]
                fin = (sig.cbal if field == "cbal" else
                       sig.accts if field == "accts" else sig.storage[field])
                term = (pre_t if rev_name == "true"
                        else fin if rev_name == "false"
                        else f"(ite {rev_name} {pre_t} {fin})")
                acc = term if acc == term else f"(ite (= {sel} {tag}) {term} {acc})"
            return acc if acc == sd else f"(ite (= {sel} {tags['selfdestruct']}) {sd} {acc})"

        if revs:
            let_layers.append(revs)
        fields = [(f"q{j}_st_{v.name}", chain(v.name)) for v in c.state_vars]
        fields.append((f"q{j}_cbal", chain("cbal")))
        fields.append((f"q{j}_accts", chain("accts")))
        let_layers.append(fields)
        prev = SymbolicFrame(reached.index + j,
                             {v.name: f"q{j}_st_{v.name}" for v in c.state_vars},
                             f"q{j}_cbal", f"q{j}_accts", blk)

    conseq_env = _frame_env(c, reached, qvars)
    conseq_env.post = _frame_env(c, prev, qvars)
    consequent = tr(p.consequent, conseq_env)
    body = f"(=> {_and(envs)} (not {consequent}))"
    for layer in reversed(let_layers):
        bindings = " ".join(f"({n} {t})" for n, t in layer)
        body = f"(let ({bindings}) {body})"
    out.assert_(f"(forall ({' '.join(bound)}) {body})")



# ---------------------------------------------------------------------------
# Queries
# ---------------------------------------------------------------------------

@dataclass
class EncodedQuery:
    """A self-contained SMT-LIB script plus everything needed to decode models."""

    name: str
    kind: str  # "bmc" | "abstract" | "chain"
    depth: int
    script: str
    logic: str
    decode_map: dict = field(default_factory=dict)
    getvalues: tuple = ()
    meta: dict = field(default_factory=dict)

    def filename(self) -> str:
        return f"query_{self.name}_{self.kind}_{self.depth}.smt2"


def _header(out: ScriptBuilder, c: Contract, p: Property | None, invariants=()) -> None:
    out.raw("(set-option :produce-models true)")
    out.raw("(set-logic ALL)")
    if p is not None and _needs_tdiv(p, invariants):
        out.raw(TDIV_DEFINE)


def _address_literals(c: Contract, p: Property | None) -> list[int]:
    lits = set()
    for e in iter_contract_exprs(c):
        if isinstance(e, AddressLit):
            lits.add(e.value)
    if p is not None:
        for e in iter_property_exprs(p):
            if isinstance(e, AddressLit):
                lits.add(e.value)
    return sorted(lits)


def _meta(c: Contract) -> dict:
    def kinds(m: Method):
        return [str(p.ty) for p in m.params]

    return {
        "methods": [m.name for m in c.methods],
        "method_params": {m.name: kinds(m) for m in c.methods},
        "ctor_params": kinds(c.ctor),
        "selfdestruct_tag": len(c.methods),
        "skip_tag": len(c.methods) + 1,
    }


def build_bmc_query(c: Contract, p: Property, k: int,
                    functional: bool = True) -> EncodedQuery:
    """Depth-k reachability of a property violation; depth counts the
    constructor, so frame 0 is the state right after deployment."""
    if k < 1:
        raise ValueError("depth must be at least 1")
    out = ScriptBuilder()
    _header(out, c, p)
    decode: dict = {}
    getvalues: list[str] = []

    genesis = out.declare("accts_init", ARRAY_SORT)
    out.assert_(f"(forall ((a Int)) (>= (select {genesis} a) 0))")

    frames: list[SymbolicFrame] = []
    steps: list[TxVars] = []
    ctor_arity = len(c.ctor.params)
    arity = max_arity(c, include_ctor=False)
    for i in range(k):
        frame = declare_frame(out, c, i)
        frames.append(frame)
        nargs = ctor_arity if i == 0 else arity
        txv = TxVars(
            i,
            None if i == 0 else out.declare(f"sel_s{i}", "Int"),
            [out.declare(f"arg{j}_s{i}", "Int") for j in range(nargs)],
            out.declare(f"sender_s{i}", "Int"),
            out.declare(f"value_s{i}", "Int"),
            frame.blk,
        )
        steps.append(txv)

    out.comment("deployment")
    encode_init(c, out, genesis, frames[0], steps[0])
    for i in range(1, k):
        out.comment(f"step {i}")
        enc = encode_transition(c, frames[i - 1], steps[i], frames[i], allow_skip=False)
        out.assert_(enc.formula)
        rev = out.define(f"reverted_s{i}", "Bool", enc.reverted)
        out.assert_(f"(not {rev})")

    out.comment(f"negated property {p.name} at frame {k - 1}")
    qvars = encode_negated_property(c, p, frames[-1], out, functional=functional)

    for i, txv in enumerate(steps):
        if txv.sel is not None:
            decode[txv.sel] = ("step", i, "sel")
        for j, a in enumerate(txv.args):
            decode[a] = ("step_arg", i, j)
        decode[txv.sender] = ("step", i, "sender")
        decode[txv.value] = ("step", i, "value")
        decode[txv.blk] = ("step", i, "block")
    for frame in frames:
        for fname, term, sort in frame.fields(c):
            if sort != ARRAY_SORT:
                decode.setdefault(term, ("frame", frame.index, fname))
    for q, term in qvars.items():
        decode[term] = ("qvar", q)

    out.comment("genesis balances of every address-valued witness")
    for i, txv in enumerate(steps):
        n = out.define(f"ini_sender_s{i}", "Int", f"(select {genesis} {txv.sender})")
        decode[n] = ("genesis_of", txv.sender)
        for a in txv.args:
            n = out.define(f"ini_{a}", "Int", f"(select {genesis} {a})")
            decode[n] = ("genesis_of", a)
    for q, term in qvars.items():
        n = out.define(f"ini_{term}", "Int", f"(select {genesis} {term})")
        decode[n] = ("genesis_of", term)
    for lit in _address_literals(c, p):
        n = out.define(f"ini_lit_{lit}", "Int", f"(select {genesis} {_lit(lit)})")
        decode[n] = ("genesis_lit", lit)

    getvalues = list(decode)
    out.raw("(check-sat)")
    out.raw(f"(get-value ({' '.join(getvalues)}))")
    return EncodedQuery(p.name, "bmc", k, out.text(), select_logic(c, p),
                        decode, tuple(getvalues), _meta(c))


def structural_invariants(c: Contract, frame: SymbolicFrame) -> list[str]:
    """Facts every reachable state satisfies; the abstract domain."""
    facts = [f"(>= {frame.cbal} 0)", f"(>= {frame.blk} 0)",
             f"(forall ((a Int)) (>= (select {frame.accts} a) 0))"]
    for v in c.state_vars:
        term = frame.storage[v.name]
        if isinstance(v.ty, (UIntTy, AddressTy)):
            facts.append(f"(>= {term} 0)")
        elif isinstance(v.ty, MappingTy) and isinstance(v.ty.value, UIntTy):
            facts.append(f"(forall ((a Int)) (>= (select {term} a) 0))")
    return facts


def build_abstract_query(c: Contract, p: Property, extra_invariants: tuple = (),
                         functional: bool = True) -> EncodedQuery:
    """Negated property over a havoc state constrained only by invariants.

    Unsatisfiability proves the property on every state satisfying the
    invariants, hence on every reachable state.
    """
    out = ScriptBuilder()
    _header(out, c, p, extra_invariants)
    frame = declare_frame(out, c, 0, tag="a")
    for fact in structural_invariants(c, frame):
        out.assert_(fact)
    env = _frame_env(c, frame, {})
    for inv in extra_invariants:
        out.assert_(tr(inv.expr, env))
    encode_negated_property(c, p, frame, out, functional=functional)
    out.raw("(check-sat)")
    return EncodedQuery(p.name, "abstract", 0, out.text(), select_logic(c, p))


def select_logic(c: Contract, p: Property | None = None) -> str:
    """Nonlinear iff some multiplication or division has two non-constant operands."""

    def is_const(e: Expr) -> bool:
        return isinstance(e, IntLit) or (isinstance(e, UnOp) and e.op == "-"
                                         and isinstance(e.operand, IntLit))

    exprs = list(iter_contract_exprs(c))
    if p is not None:
        exprs.extend(iter_property_exprs(p))
    for e in exprs:
        if isinstance(e, BinOp) and e.op in ("*", "/"):
            if not is_const(e.lhs) and not is_const(e.rhs):
                return LOGIC_NONLINEAR
    return LOGIC_LINEAR


# ---------------------------------------------------------------------------
# Pinned chains (differential testing against the interpreter)
# ---------------------------------------------------------------------------

def _array_term(entries: dict) -> str:
    term = _CONST0_ARRAY
    for key in sorted(entries):
        if entries[key] != 0:
            term = f"(store {term} {_lit(key)} {_lit(entries[key])})"
    return term


def _pin_frame(out: ScriptBuilder, c: Contract, frame: SymbolicFrame,
               state: ConcreteState, skip_field: str | None = None) -> None:
    for v in c.state_vars:
        if v.name == skip_field:
            continue
        term = frame.storage[v.name]
        val = state.storage[v.name]
        if isinstance(v.ty, MappingTy):
            out.assert_(f"(= {term} {_array_term(val)})")
        elif isinstance(v.ty, BoolTy):
            out.assert_(f"(= {term} {'true' if val else 'false'})")
        else:
            out.assert_(f"(= {term} {_lit(val)})")
    if skip_field != "cbal":
        out.assert_(f"(= {frame.cbal} {_lit(state.contract_balance)})")
    if skip_field != "accts":
        out.assert_(f"(= {frame.accts} {_array_term(state.accounts)})")
    out.assert_(f"(= {frame.blk} {_lit(state.block_number)})")


def _pin_tx(out: ScriptBuilder, c: Contract, txv: TxVars, t: Transaction) -> None:
    tags = selector_tags(c, allow_skip=False)
    if txv.sel is not None:
        tag = tags["selfdestruct"] if t.kind == "selfdestruct" else tags[t.method]
        out.assert_(f"(= {txv.sel} {tag})")
    for var, a in zip(txv.args, tuple(t.args) + (0,) * len(txv.args)):
        v = int(a) if not isinstance(a, bool) else (1 if a else 0)
        out.assert_(f"(= {var} {_lit(v)})")
    out.assert_(f"(= {txv.sender} {_lit(t.sender)})")
    out.assert_(f"(= {txv.value} {_lit(t.value)})")
    out.assert_(f"(= {txv.blk} {_lit(t.block)})")


def build_pinned_chain_query(c: Contract, initial_accounts: dict,
                             trace: list[Transaction], states: list[ConcreteState],
                             perturb: tuple | None = None) -> EncodedQuery:
    """Fix every symbolic variable to interpreter values along a trace.

    With perturb=None the fully pinned chain must be sat. Otherwise perturb
    names one final-frame observation — ("cbal",), ("var", name),
    ("map", name, key) or ("accts", addr) — which is left unpinned and
    asserted different from its concrete value; the chain then must be unsat
    because the transition relation forces it. The relation here is total:
    reverting steps are legal identity transitions.
    """
    if not trace or trace[0].kind != "constructor":
        raise ValueError("chain traces start with the constructor")
    out = ScriptBuilder()
    out.raw("(set-logic ALL)")
    genesis = out.declare("accts_init", ARRAY_SORT)
    out.assert_(f"(forall ((a Int)) (>= (select {genesis} a) 0))")
    out.assert_(f"(= {genesis} {_array_term(initial_accounts)})")

    skip_field = None
    if perturb is not None:
        skip_field = perturb[1] if perturb[0] in ("var", "map") else perturb[0]

    ctor_arity = len(c.ctor.params)
    arity = max_arity(c, include_ctor=False)
    frames = []
    for i, t in enumerate(trace):
        frame = declare_frame(out, c, i)
        frames.append(frame)
        nargs = ctor_arity if i == 0 else arity
        txv = TxVars(
            i,
            None if i == 0 else out.declare(f"sel_s{i}", "Int"),
            [out.declare(f"arg{j}_s{i}", "Int") for j in range(nargs)],
            out.declare(f"sender_s{i}", "Int"),
            out.declare(f"value_s{i}", "Int"),
            frame.blk,
        )
        if i == 0:
            encode_init(c, out, genesis, frame, txv)
        else:
            enc = encode_transition(c, frames[i - 1], txv, frame, allow_skip=False)
            out.assert_(enc.formula)
        _pin_tx(out, c, txv, t)
        last = i == len(trace) - 1
        _pin_frame(out, c, frame, states[i], skip_field if last else None)

    if perturb is not None:
        final, state = frames[-1], states[-1]
        match perturb:
            case ("cbal",):
                out.assert_(f"(not (= {final.cbal} {_lit(state.contract_balance)}))")
            case ("accts", addr):
                out.assert_(f"(not (= (select {final.accts} {_lit(addr)}) "
                            f"{_lit(state.account(addr))}))")
            case ("var", name):
                val = state.storage[name]
                concrete = ("true" if val else "false") if isinstance(val, bool) else _lit(val)
                out.assert_(f"(not (= {final.storage[name]} {concrete}))")
            case ("map", name, key):
                out.assert_(f"(not (= (select {final.storage[name]} {_lit(key)}) "
                            f"{_lit(state.map_get(name, key))}))")
            case _:
                raise ValueError(f"bad perturbation {perturb!r}")

    out.raw("(check-sat)")
    return EncodedQuery("chain", "chain", len(trace), out.text(), select_logic(c),
                        meta=_meta(c))
