"""Abstract syntax for the contract fragment and the liquidity property language.

A contract is a named set of state variables, one constructor and a list of
methods; a property quantifies over user addresses and asks that a bounded
sequence of transactions signed by a designated actor can always reach a
desired post-state. The AST is immutable after construction; structural
equality ignores source spans.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterator, Optional, Union


@dataclass(frozen=True)
class Span:
    """1-based source position (line, column) plus lexeme length."""

    line: int
    col: int
    length: int = 0


@dataclass(frozen=True)
class Diagnostic:
    severity: str  # "error" | "warning"
    message: str
    rule_id: str
    span: Optional[Span] = None

    def render(self, path: str = "<input>") -> str:
        if self.span is None:
            return f"{path}: {self.severity}[{self.rule_id}]: {self.message}"
        return (
            f"{path}:{self.span.line}:{self.span.col}: "
            f"{self.severity}[{self.rule_id}]: {self.message}"
        )


def error(message: str, rule_id: str, span: Span | None = None) -> Diagnostic:
    return Diagnostic("error", message, rule_id, span)


# ---------------------------------------------------------------------------
# Types
# ---------------------------------------------------------------------------

class Ty:
    pass


@dataclass(frozen=True)
class IntTy(Ty):
    def __str__(self) -> str:
        return "int"


@dataclass(frozen=True)
class UIntTy(Ty):
    def __str__(self) -> str:
        return "uint"


@dataclass(frozen=True)
class BoolTy(Ty):
    def __str__(self) -> str:
        return "bool"


@dataclass(frozen=True)
class AddressTy(Ty):
    def __str__(self) -> str:
        return "address"


@dataclass(frozen=True)
class MappingTy(Ty):
    """Address-keyed mapping; values are numeric only."""

    value: Ty

    def __str__(self) -> str:
        return f"mapping (address => {self.value})"


INT = IntTy()
UINT = UIntTy()
BOOL = BoolTy()
ADDRESS = AddressTy()


def is_numeric(ty: Ty) -> bool:
    return isinstance(ty, (IntTy, UIntTy))


# ---------------------------------------------------------------------------
# Expressions
# ---------------------------------------------------------------------------

class Expr:
    pass


def _span_field():
    return field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class IntLit(Expr):
    value: int
    span: Optional[Span] = _span_field()


@dataclass(frozen=True)
class BoolLit(Expr):
    value: bool
    span: Optional[Span] = _span_field()


@dataclass(frozen=True)
class AddressLit(Expr):
    """Surface form `address(k)`; addresses are nonnegative integers."""

    value: int
    span: Optional[Span] = _span_field()


@dataclass(frozen=True)
class Ident(Expr):
    """Unresolved name as produced by the parser; resolution rewrites it.

    `state_prefixed` marks the `st.x` surface form, which forces resolution
    to a state variable even when a quantified variable shadows the name.
    """

    name: str
    state_prefixed: bool = False
    span: Optional[Span] = _span_field()


@dataclass(frozen=True)
class StateVar(Expr):
    name: str
    span: Optional[Span] = _span_field()


@dataclass(frozen=True)
class Param(Expr):
    name: str
    span: Optional[Span] = _span_field()


@dataclass(frozen=True)
class QVar(Expr):
    """Reference to a property's quantified address variable."""

    name: str
    span: Optional[Span] = _span_field()


@dataclass(frozen=True)
class MapGet(Expr):
    name: str
    key: Expr
    span: Optional[Span] = _span_field()


@dataclass(frozen=True)
class MsgSender(Expr):
    span: Optional[Span] = _span_field()


@dataclass(frozen=True)
class MsgValue(Expr):
    span: Optional[Span] = _span_field()


@dataclass(frozen=True)
class BlockNumber(Expr):
    span: Optional[Span] = _span_field()


@dataclass(frozen=True)
class ContractBalance(Expr):
    """Surface `balance` or `address(this).balance`."""

    span: Optional[Span] = _span_field()


@dataclass(frozen=True)
class AccountBalance(Expr):
    """Surface `balance[a]` or `a.balance`."""

    addr: Expr
    span: Optional[Span] = _span_field()


@dataclass(frozen=True)
class UnOp(Expr):
    op: str  # "-" | "!"
    operand: Expr
    span: Optional[Span] = _span_field()


@dataclass(frozen=True)
class BinOp(Expr):
    op: str  # + - * / == != < <= > >= && ||
    lhs: Expr
    rhs: Expr
    span: Optional[Span] = _span_field()


@dataclass(frozen=True)
class Post(Expr):
    """`<tx>e`: evaluate e in the state reached after the transaction suffix."""

    inner: Expr
    span: Optional[Span] = _span_field()


CMP_OPS = ("==", "!=", "<", "<=", ">", ">=")
ARITH_OPS = ("+", "-", "*", "/")
BOOL_OPS = ("&&", "||")


# ---------------------------------------------------------------------------
# Statements and declarations
# ---------------------------------------------------------------------------

class LValue:
    pass


@dataclass(frozen=True)
class LVar(LValue):
    name: str
    span: Optional[Span] = _span_field()


@dataclass(frozen=True)
class LMap(LValue):
    name: str
    key: Expr
    span: Optional[Span] = _span_field()


class Stmt:
    pass


@dataclass(frozen=True)
class Require(Stmt):
    cond: Expr
    span: Optional[Span] = _span_field()


@dataclass(frozen=True)
class Assign(Stmt):
    target: LValue
    value: Expr
    span: Optional[Span] = _span_field()


@dataclass(frozen=True)
class Transfer(Stmt):
    """`to.transfer(amount)`: move currency from the contract to an account."""

    to: Expr
    amount: Expr
    span: Optional[Span] = _span_field()


@dataclass(frozen=True)
class If(Stmt):
    cond: Expr
    then_body: tuple
    else_body: tuple = ()
    span: Optional[Span] = _span_field()


@dataclass(frozen=True)
class ParamDecl:
    name: str
    ty: Ty
    span: Optional[Span] = _span_field()


@dataclass(frozen=True)
class VarDecl:
    name: str
    ty: Ty
    immutable: bool = False
    span: Optional[Span] = _span_field()


@dataclass(frozen=True)
class Method:
    """A contract member; the constructor is a Method with name None."""

    name: Optional[str]
    params: tuple
    payable: bool
    body: tuple
    span: Optional[Span] = _span_field()

    @property
    def is_constructor(self) -> bool:
        return self.name is None


@dataclass(frozen=True)
class Contract:
    name: str
    state_vars: tuple
    ctor: Method
    methods: tuple
    span: Optional[Span] = _span_field()

    def var(self, name: str) -> Optional[VarDecl]:
        for v in self.state_vars:
            if v.name == name:
                return v
        return None

    def method(self, name: str) -> Optional[Method]:
        for m in self.methods:
            if m.name == name:
                return m
        return None


@dataclass(frozen=True)
class Property:
    """`Forall qvars [ antecedent -> Exists tx [m, actor] [ consequent ] ]`."""

    name: str
    qvars: tuple
    antecedent: Expr
    bound_m: int
    actor: str
    consequent: Expr
    span: Optional[Span] = _span_field()


@dataclass(frozen=True)
class Invariant:
    """A user-declared state invariant used to strengthen unbounded proofs."""

    name: Optional[str]
    expr: Expr
    span: Optional[Span] = _span_field()


# Identifiers that may not be redeclared by user code. `constructor` and
# `selfdestruct` are method-level built-ins; the rest are contextual names
# the grammar gives a fixed meaning.
RESERVED_NAMES = frozenset(
    {"constructor", "selfdestruct", "balance", "msg", "block", "this", "st", "tx",
     "transfer"}
)

BUILTIN_SELFDESTRUCT = "selfdestruct"
BUILTIN_SKIP = "skip"


def iter_subexprs(e: Expr) -> Iterator[Expr]:
    """Yield e and every subexpression, pre-order."""
    yield e
    match e:
        case MapGet(_, key):
            yield from iter_subexprs(key)
        case AccountBalance(addr):
            yield from iter_subexprs(addr)
        case UnOp(_, operand):
            yield from iter_subexprs(operand)
        case BinOp(_, lhs, rhs):
            yield from iter_subexprs(lhs)
            yield from iter_subexprs(rhs)
        case Post(inner):
            yield from iter_subexprs(inner)
        case _:
            pass


def iter_stmts(body) -> Iterator[Stmt]:
    for s in body:
        yield s
        if isinstance(s, If):
            yield from iter_stmts(s.then_body)
            yield from iter_stmts(s.else_body)


def iter_contract_exprs(c: Contract) -> Iterator[Expr]:
    for m in (c.ctor, *c.methods):
        for s in iter_stmts(m.body):
            match s:
                case Require(cond):
                    yield from iter_subexprs(cond)
                case Assign(target, value):
                    if isinstance(target, LMap):
                        yield from iter_subexprs(target.key)
                    yield from iter_subexprs(value)
                case Transfer(to, amount):
                    yield from iter_subexprs(to)
                    yield from iter_subexprs(amount)
                case If(cond, _, _):
                    yield from iter_subexprs(cond)


def iter_property_exprs(p: Property) -> Iterator[Expr]:
    yield from iter_subexprs(p.antecedent)
    yield from iter_subexprs(p.consequent)


# ---------------------------------------------------------------------------
# Type inference
# ---------------------------------------------------------------------------

class TypeError_(Exception):
    def __init__(self, diag: Diagnostic):
        super().__init__(diag.message)
        self.diag = diag


@dataclass
class Scope:
    """Name environment for typing one expression.

    context is "body" for contract method bodies, "antecedent" or
    "consequent" for the two halves of a property.
    """

    contract: Contract
    params: dict | None = None  # name -> Ty
    qvars: frozenset | None = None
    context: str = "body"

    def in_property(self) -> bool:
        return self.context in ("antecedent", "consequent")


def infer_type(e: Expr, scope: Scope) -> Ty:
    """Monomorphic typing; raises TypeError_ carrying a diagnostic."""

    def fail(msg: str, rule: str = "type", span=None) -> Ty:
        raise TypeError_(error(msg, rule, span if span is not None else getattr(e, "span", None)))

    match e:
        case IntLit(v):
            return UINT if v >= 0 else INT
        case BoolLit(_):
            return BOOL
        case AddressLit(v):
            if v < 0:
                fail("address literals are nonnegative")
            return ADDRESS
        case Ident(name):
            fail(f"unresolved identifier '{name}'", "unresolved")
        case StateVar(name):
            decl = scope.contract.var(name)
            if decl is None:
                fail(f"unknown state variable '{name}'", "unresolved")
            if isinstance(decl.ty, MappingTy):
                fail(f"mapping '{name}' must be indexed")
            return decl.ty
        case Param(name):
            if scope.params is None or name not in scope.params:
                fail(f"unknown parameter '{name}'", "unresolved")
            return scope.params[name]
        case QVar(name):
            if scope.qvars is None or name not in scope.qvars:
                fail(f"unbound quantified variable '{name}'", "unresolved")
            return ADDRESS
        case MapGet(name, key):
            decl = scope.contract.var(name)
            if decl is None or not isinstance(decl.ty, MappingTy):
                fail(f"'{name}' is not a mapping")
            if not isinstance(infer_type(key, scope), AddressTy):
                fail("mapping keys are addresses")
            return decl.ty.value
        case MsgSender():
            if scope.in_property():
                fail("msg.sender is not available in properties", "msg-in-property")
            return ADDRESS
        case MsgValue():
            if scope.in_property():
                fail("msg.value is not available in properties", "msg-in-property")
            return UINT
        case BlockNumber():
            return UINT
        case ContractBalance():
            return UINT
        case AccountBalance(addr):
            if not isinstance(infer_type(addr, scope), AddressTy):
                fail("account balance needs an address")
            return UINT
        case UnOp("-", operand):
            if not is_numeric(infer_type(operand, scope)):
                fail("unary minus needs a numeric operand")
            return INT
        case UnOp("!", operand):
            if not isinstance(infer_type(operand, scope), BoolTy):
                fail("'!' needs a boolean operand")
            return BOOL
        case BinOp(op, lhs, rhs) if op in ARITH_OPS:
            lt, rt = infer_type(lhs, scope), infer_type(rhs, scope)
            if not (is_numeric(lt) and is_numeric(rt)):
                fail(f"'{op}' needs numeric operands")
            if op == "-":
                return INT
            return UINT if isinstance(lt, UIntTy) and isinstance(rt, UIntTy) else INT
        case BinOp(op, lhs, rhs) if op in ("<", "<=", ">", ">="):
            lt, rt = infer_type(lhs, scope), infer_type(rhs, scope)
            if not (is_numeric(lt) and is_numeric(rt)):
                fail(f"'{op}' compares numeric values")
            return BOOL
        case BinOp(op, lhs, rhs) if op in ("==", "!="):
            lt, rt = infer_type(lhs, scope), infer_type(rhs, scope)
            ok = (
                (is_numeric(lt) and is_numeric(rt))
                or (isinstance(lt, AddressTy) and isinstance(rt, AddressTy))
                or (isinstance(lt, BoolTy) and isinstance(rt, BoolTy))
            )
            if not ok:
                fail(f"'{op}' operands have incompatible types ({lt}, {rt})")
            return BOOL
        case BinOp(op, lhs, rhs) if op in ("&&", "||"):
            if not isinstance(infer_type(lhs, scope), BoolTy):
                fail(f"'{op}' needs boolean operands")
            if not isinstance(infer_type(rhs, scope), BoolTy):
                fail(f"'{op}' needs boolean operands")
            return BOOL
        case Post(inner):
            if scope.context != "consequent":
                fail("<tx> is only allowed in a property consequent",
                     "post-outside-consequent")
            if any(isinstance(sub, Post) for sub in iter_subexprs(inner)):
                fail("<tx> markers do not nest", "post-nested")
            return infer_type(inner, scope)
        case _:
            fail(f"unsupported expression {e!r}")
    raise AssertionError("unreachable")


# ---------------------------------------------------------------------------
# Well-formedness
# ---------------------------------------------------------------------------

def check_wellformed(c: Contract, props=()) -> list[Diagnostic]:
    """Check every structural and typing invariant; empty list iff well-formed."""
    diags: list[Diagnostic] = []

    def err(msg: str, rule: str, span=None) -> None:
        diags.append(error(msg, rule, span))

    seen = set()
    for v in c.state_vars:
        if v.name in seen:
            err(f"duplicate state variable '{v.name}'", "dup-state-var", v.span)
        seen.add(v.name)
        if v.name in RESERVED_NAMES:
            err(f"'{v.name}' is a reserved name", "reserved-name", v.span)
        if isinstance(v.ty, MappingTy) and not is_numeric(v.ty.value):
            err(f"mapping '{v.name}' must have numeric values", "mapping-value", v.span)
        if isinstance(v.ty, MappingTy) and v.immutable:
            err(f"mapping '{v.name}' cannot be immutable", "immutable-mapping", v.span)

    names = set()
    for m in c.methods:
        if m.name is None:
            err("method without a name", "method-name", m.span)
            continue
        if m.name in names:
            err(f"duplicate method '{m.name}'", "dup-method", m.span)
        names.add(m.name)
        if m.name in RESERVED_NAMES:
            err(f"method name '{m.name}' is reserved", "reserved-name", m.span)

    for m in (c.ctor, *c.methods):
        pseen = set()
        for p in m.params:
            if isinstance(p.ty, MappingTy):
                err(f"parameter '{p.name}' has mapping type", "mapping-param", p.span)
            if p.name in pseen:
                err(f"duplicate parameter '{p.name}'", "dup-param", p.span)
            pseen.add(p.name)
            if p.name in RESERVED_NAMES:
                err(f"'{p.name}' is a reserved name", "reserved-name", p.span)
        _check_body(c, m, diags)

    for p in props:
        _check_property(c, p, diags)
    return diags


def _check_body(c: Contract, m: Method, diags: list[Diagnostic]) -> None:
    scope = Scope(c, params={p.name: p.ty for p in m.params}, context="body")

    def check_expr(e: Expr, want: Ty | None = None, what: str = "") -> None:
        try:
            ty = infer_type(e, scope)
        except TypeError_ as exc:
            diags.append(exc.diag)
            return
        if want is None:
            return
        if isinstance(want, BoolTy) and not isinstance(ty, BoolTy):
            diags.append(error(f"{what} must be boolean", "type", getattr(e, "span", None)))
        elif is_numeric(want) and not is_numeric(ty):
            diags.append(error(f"{what} must be numeric", "type", getattr(e, "span", None)))
        elif isinstance(want, AddressTy) and not isinstance(ty, AddressTy):
            diags.append(error(f"{what} must be an address", "type", getattr(e, "span", None)))

    def walk(body) -> None:
        for s in body:
            match s:
                case Require(cond):
                    check_expr(cond, BOOL, "require condition")
                case Assign(target, value):
                    match target:
                        case LVar(name):
                            decl = c.var(name)
                            if decl is None:
                                diags.append(error(f"assignment to unknown variable '{name}'",
                                                   "unresolved", s.span))
                                continue
                            if isinstance(decl.ty, MappingTy):
                                diags.append(error(f"mapping '{name}' must be indexed",
                                                   "type", s.span))
                                continue
                            if decl.immutable and not m.is_constructor:
                                diags.append(error(
                                    f"immutable '{name}' may only be assigned in the constructor",
                                    "immutable-assign", s.span))
                            want = BOOL if isinstance(decl.ty, BoolTy) else decl.ty
                            check_expr(value, want, f"value for '{name}'")
                        case LMap(name, key):
                            decl = c.var(name)
                            if decl is None or not isinstance(decl.ty, MappingTy):
                                diags.append(error(f"'{name}' is not a mapping",
                                                   "unresolved", s.span))
                                continue
                            check_expr(key, ADDRESS, "mapping key")
                            check_expr(value, INT, f"value for '{name}[...]'")
                case Transfer(to, amount):
                    check_expr(to, ADDRESS, "transfer recipient")
                    check_expr(amount, INT, "transfer amount")
                case If(cond, then_body, else_body):
                    check_expr(cond, BOOL, "if condition")
                    walk(then_body)
                    walk(else_body)
    walk(m.body)


def _check_property(c: Contract, p: Property, diags: list[Diagnostic]) -> None:
    if not p.qvars:
        diags.append(error(f"property '{p.name}' quantifies no addresses", "no-qvars", p.span))
    if len(set(p.qvars)) != len(p.qvars):
        diags.append(error(f"property '{p.name}' repeats a quantified variable",
                           "dup-qvar", p.span))
    for q in p.qvars:
        if q in RESERVED_NAMES:
            diags.append(error(f"'{q}' is a reserved name", "reserved-name", p.span))
    if p.actor not in p.qvars:
        diags.append(error(f"actor '{p.actor}' is not bound by Forall", "unbound-actor", p.span))
    if p.bound_m < 1:
        diags.append(error("transaction bound must be at least 1", "bad-bound", p.span))

    qvars = frozenset(p.qvars)
    for ctx, e in (("antecedent", p.antecedent), ("consequent", p.consequent)):
        scope = Scope(c, qvars=qvars, context=ctx)
        try:
            ty = infer_type(e, scope)
            if not isinstance(ty, BoolTy):
                diags.append(error(f"property {ctx} must be boolean", "type",
                                   getattr(e, "span", None)))
        except TypeError_ as exc:
            diags.append(exc.diag)
    for sub in iter_subexprs(p.antecedent):
        if isinstance(sub, Post):
            diags.append(error("<tx> may only appear in the consequent",
                               "post-outside-consequent", getattr(sub, "span", None)))


def check_invariant(c: Contract, inv: Invariant) -> list[Diagnostic]:
    diags: list[Diagnostic] = []
    scope = Scope(c, qvars=frozenset(), context="antecedent")
    try:
        ty = infer_type(inv.expr, scope)
        if not isinstance(ty, BoolTy):
            diags.append(error("invariant must be boolean", "type", inv.span))
    except TypeError_ as exc:
        diags.append(exc.diag)
    return diags


# ---------------------------------------------------------------------------
# Pretty printer
# ---------------------------------------------------------------------------

_PREC_OR, _PREC_AND, _PREC_NOT, _PREC_CMP, _PREC_ADD, _PREC_MUL, _PREC_UNARY, _PREC_POSTFIX = \
    range(1, 9)

_BINOP_PREC = {
    "||": _PREC_OR, "&&": _PREC_AND,
    "==": _PREC_CMP, "!=": _PREC_CMP, "<": _PREC_CMP, "<=": _PREC_CMP,
    ">": _PREC_CMP, ">=": _PREC_CMP,
    "+": _PREC_ADD, "-": _PREC_ADD, "*": _PREC_MUL, "/": _PREC_MUL,
}


def expr_to_str(e: Expr, prec: int = 0) -> str:
    match e:
        case IntLit(v):
            s = str(v)
            return s if v >= 0 or prec <= _PREC_MUL else f"({s})"
        case BoolLit(v):
            return "true" if v else "false"
        case AddressLit(v):
            return f"address({v})"
        case Ident(name):
            return name
        case StateVar(name) | Param(name) | QVar(name):
            return name
        case MapGet(name, key):
            return f"{name}[{expr_to_str(key)}]"
        case MsgSender():
            return "msg.sender"
        case MsgValue():
            return "msg.value"
        case BlockNumber():
            return "block.number"
        case ContractBalance():
            return "balance"
        case AccountBalance(addr):
            return f"balance[{expr_to_str(addr)}]"
        case UnOp("-", operand):
            inner = expr_to_str(operand, _PREC_UNARY)
            if isinstance(operand, IntLit):
                inner = f"({inner})"
            s = f"-{inner}"
            return s if prec <= _PREC_UNARY else f"({s})"
        case UnOp("!", operand):
            s = f"!{expr_to_str(operand, _PREC_NOT)}"
            return s if prec <= _PREC_NOT else f"({s})"
        case BinOp(op, lhs, rhs):
            my = _BINOP_PREC[op]
            if my == _PREC_CMP:
                s = f"{expr_to_str(lhs, my + 1)} {op} {expr_to_str(rhs, my + 1)}"
            else:
                s = f"{expr_to_str(lhs, my)} {op} {expr_to_str(rhs, my + 1)}"
            return s if prec < my or (prec == my and my != _PREC_CMP) else f"({s})"
        case Post(inner):
            return f"<tx>{expr_to_str(inner, _PREC_POSTFIX)}"
        case _:
            raise ValueError(f"cannot print {e!r}")


def _stmt_lines(s: Stmt, indent: str) -> list[str]:
    match s:
        case Require(cond):
            return [f"{indent}require ({expr_to_str(cond)});"]
        case Assign(LVar(name), value):
            return [f"{indent}{name} = {expr_to_str(value)};"]
        case Assign(LMap(name, key), value):
            return [f"{indent}{name}[{expr_to_str(key)}] = {expr_to_str(value)};"]
        case Transfer(to, amount):
            recv = expr_to_str(to, _PREC_POSTFIX)
            if isinstance(to, (BinOp, UnOp, Post)):
                recv = f"({recv})"
            return [f"{indent}{recv}.transfer({expr_to_str(amount)});"]
        case If(cond, then_body, else_body):
            lines = [f"{indent}if ({expr_to_str(cond)}) {{"]
            for t in then_body:
                lines.extend(_stmt_lines(t, indent + "    "))
            if else_body:
                lines.append(f"{indent}}} else {{")
                for t in else_body:
                    lines.extend(_stmt_lines(t, indent + "    "))
            lines.append(f"{indent}}}")
            return lines
        case _:
            raise ValueError(f"cannot print {s!r}")


def _method_lines(m: Method) -> list[str]:
    params = ", ".join(f"{p.ty} {p.name}" for p in m.params)
    payable = " payable" if m.payable else ""
    head = (f"    constructor ({params}){payable} {{" if m.is_constructor
            else f"    function {m.name}({params}){payable} {{")
    lines = [head]
    for s in m.body:
        lines.extend(_stmt_lines(s, "        "))
    lines.append("    }")
    return lines


def pretty_print(c: Contract) -> str:
    """Canonical concrete syntax; parsing the output reproduces the AST."""
    lines = [f"contract {c.name} {{"]
    for v in c.state_vars:
        imm = " immutable" if v.immutable else ""
        lines.append(f"    {v.ty}{imm} {v.name};")
    if c.state_vars:
        lines.append("")
    lines.extend(_method_lines(c.ctor))
    for m in c.methods:
        lines.append("")
        lines.extend(_method_lines(m))
    lines.append("}")
    return "\n".join(lines) + "\n"


def pretty_print_property(p: Property) -> str:
    qvars = ", ".join(p.qvars)
    return (
        f"property {p.name} {{\n"
        f"    Forall {qvars} [\n"
        f"        {expr_to_str(p.antecedent)}\n"
        f"        -> Exists tx [{p.bound_m}, {p.actor}] [\n"
        f"            {expr_to_str(p.consequent)}\n"
        f"        ]\n"
        f"    ]\n"
        f"}}\n"
    )


def pretty_print_invariant(inv: Invariant) -> str:
    name = f" {inv.name}" if inv.name else ""
    return f"invariant{name} {{ {expr_to_str(inv.expr)} }}\n"
