"""Lexer and recursive-descent parser for the contract dialect.

One source file holds exactly one contract followed by any number of
`property` blocks (and optional `invariant` blocks). The grammar is LL(2);
the only two-token lookahead distinguishes `balance` from `balance[`.
Solidity surface noise (visibility keywords, `payable(...)` casts,
`address payable`) is accepted and discarded.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

from . import ast
from .ast import (
    ADDRESS, BOOL, INT, UINT, AccountBalance, AddressLit, Assign, BinOp, BlockNumber,
    BoolLit, Contract, ContractBalance, Diagnostic, Expr, Ident, If, IntLit, Invariant,
    LMap, LVar, MapGet, MappingTy, Method, MsgSender, MsgValue, Param, ParamDecl, Post,
    Property, QVar, Require, Span, StateVar, Stmt, Transfer, Ty, UnOp, VarDecl, error,
)

KEYWORDS = frozenset(
    "contract constructor function require payable immutable mapping address "
    "int uint bool property Forall Exists tx transfer if else true false msg "
    "block this".split()
)

# Accepted and dropped so that ordinary Solidity method headers parse verbatim.
NOISE_MODIFIERS = frozenset({"public", "external", "internal", "private", "view", "pure"})

_PUNCT = [
    "<tx>", "->", "=>", "==", "!=", "<=", ">=", "&&", "||", "+=", "-=",
    "(", ")", "[", "]", "{", "}", ";", ",", ".", "<", ">", "=", "!",
    "+", "-", "*", "/",
]


@dataclass(frozen=True)
class Token:
    kind: str  # "ident" | "int" | "kw" | "punct" | "eof"
    text: str
    span: Span


class ParseError(Exception):
    def __init__(self, diag: Diagnostic):
        super().__init__(diag.message)
        self.diag = diag


def tokenize(src: str) -> tuple[list[Token], list[Diagnostic]]:
    """Split source text into tokens, skipping `//` and `/*...*/` comments."""
    toks: list[Token] = []
    diags: list[Diagnostic] = []
    i, line, col = 0, 1, 1
    n = len(src)

    def advance(k: int) -> None:
        nonlocal i, line, col
        for _ in range(k):
            if i < n and src[i] == "\n":
                line += 1
                col = 1
            else:
                col += 1
            i += 1

    while i < n:
        ch = src[i]
        if ch in " \t\r\n":
            advance(1)
            continue
        if src.startswith("//", i):
            j = src.find("\n", i)
            advance((j - i) if j != -1 else (n - i))
            continue
        if src.startswith("/*", i):
            j = src.find("*/", i + 2)
            if j == -1:
                diags.append(error("unterminated comment", "lex-comment", Span(line, col, 2)))
                advance(n - i)
                continue
            advance(j + 2 - i)
            continue
        if ch.isdigit():
            j = i
            while j < n and src[j].isdigit():
                j += 1
            toks.append(Token("int", src[i:j], Span(line, col, j - i)))
            advance(j - i)
            continue
        if ch.isalpha() or ch == "_":
            j = i
            while j < n and (src[j].isalnum() or src[j] == "_"):
                j += 1
            text = src[i:j]
            kind = "kw" if text in KEYWORDS else "ident"
            toks.append(Token(kind, text, Span(line, col, j - i)))
            advance(j - i)
            continue
        for p in _PUNCT:
            if src.startswith(p, i):
                toks.append(Token("punct", p, Span(line, col, len(p))))
                advance(len(p))
                break
        else:
            diags.append(error(f"illegal character {ch!r}", "lex-char", Span(line, col, 1)))
            advance(1)
    toks.append(Token("eof", "", Span(line, col, 0)))
    return toks, diags


# ---------------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------------

@dataclass
class ParseOutcome:
    contract: Optional[Contract]
    properties: list
    invariants: list
    diagnostics: list

    @property
    def ok(self) -> bool:
        return self.contract is not None and not any(
            d.severity == "error" for d in self.diagnostics
        )


@dataclass
class SourceFile:
    path: str
    contents: str
    outcome: ParseOutcome = field(repr=False, default=None)


_MAX_NESTING = 64


class _Parser:
    def __init__(self, toks: list[Token]):
        self.toks = toks
        self.pos = 0
        self.diags: list[Diagnostic] = []
        self.depth = 0

    def _descend(self) -> None:
        # linear-time recursive descent still needs a nesting cap so hostile
        # inputs cannot blow the interpreter stack
        self.depth += 1
        if self.depth > _MAX_NESTING:
            raise ParseError(error("expression or block nesting is too deep",
                                   "nesting", self.peek().span))

    # -- token plumbing ----------------------------------------------------
    def peek(self, ahead: int = 0) -> Token:
        return self.toks[min(self.pos + ahead, len(self.toks) - 1)]

    def at(self, text: str) -> bool:
        t = self.peek()
        return t.text == text and t.kind in ("kw", "punct")

    def at_ident(self, text: str | None = None) -> bool:
        t = self.peek()
        return t.kind == "ident" and (text is None or t.text == text)

    def bump(self) -> Token:
        t = self.toks[self.pos]
        if t.kind != "eof":
            self.pos += 1
        return t

    def expect(self, text: str, what: str | None = None) -> Token:
        if self.at(text):
            return self.bump()
        t = self.peek()
        found = t.text or "end of input"
        raise ParseError(error(
            f"expected '{text}'{' in ' + what if what else ''}, found '{found}'",
            "parse", t.span))

    def expect_ident(self, what: str = "name") -> Token:
        t = self.peek()
        if t.kind == "ident":
            return self.bump()
        raise ParseError(error(f"expected {what}, found '{t.text or 'end of input'}'",
                               "parse", t.span))

    def recover_to(self, *stops: str) -> None:
        depth = 0
        while self.peek().kind != "eof":
            t = self.peek()
            if depth == 0 and t.text in stops:
                if t.text in (";", "}"):
                    self.bump()
                return
            if t.text == "{":
                depth += 1
            elif t.text == "}":
                if depth == 0:
                    return
                depth -= 1
            self.bump()

    # -- types --------------------------------------------------------------
    def parse_type(self) -> Ty:
        t = self.peek()
        if self.at("int"):
            self.bump()
            return INT
        if self.at("uint"):
            self.bump()
            return UINT
        if self.at("bool"):
            self.bump()
            return BOOL
        if self.at("address"):
            self.bump()
            if self.at("payable"):  # `address payable` normalizes to address
                self.bump()
            return ADDRESS
        if self.at("mapping"):
            self.bump()
            self.expect("(", "mapping type")
            self.expect("address", "mapping key type")
            self.expect("=>", "mapping type")
            if self.at("int"):
                self.bump()
                value: Ty = INT
            elif self.at("uint"):
                self.bump()
                value = UINT
            else:
                raise ParseError(error("mapping values must be int or uint",
                                       "mapping-value", self.peek().span))
            self.expect(")", "mapping type")
            return MappingTy(value)
        raise ParseError(error(f"expected a type, found '{t.text or 'end of input'}'",
                               "parse", t.span))

    # -- expressions ---------------------------------------------------------
    # Precedence, loosest first:  ||  <  &&  <  !  <  comparisons  <  + -
    # <  * /  <  unary minus / <tx>  <  postfix.

    def parse_expr(self, allow_post: bool = False) -> Expr:
        return self._or(allow_post)

    def _or(self, ap: bool) -> Expr:
        e = self._and(ap)
        while self.at("||"):
            sp = self.bump().span
            e = BinOp("||", e, self._and(ap), span=sp)
        return e

    def _and(self, ap: bool) -> Expr:
        e = self._not(ap)
        while self.at("&&"):
            sp = self.bump().span
            e = BinOp("&&", e, self._not(ap), span=sp)
        return e

    def _not(self, ap: bool) -> Expr:
        if self.at("!"):
            sp = self.bump().span
            self._descend()
            try:
                return UnOp("!", self._not(ap), span=sp)
            finally:
                self.depth -= 1
        return self._cmp(ap)

    def _cmp(self, ap: bool) -> Expr:
        e = self._add(ap)
        t = self.peek()
        if t.text in ("==", "!=", "<", "<=", ">", ">=") and t.kind == "punct":
            self.bump()
            return BinOp(t.text, e, self._add(ap), span=t.span)
        return e

    def _add(self, ap: bool) -> Expr:
        e = self._mul(ap)
        while self.peek().text in ("+", "-") and self.peek().kind == "punct":
            t = self.bump()
            e = BinOp(t.text, e, self._mul(ap), span=t.span)
        return e

    def _mul(self, ap: bool) -> Expr:
        e = self._unary(ap)
        while self.peek().text in ("*", "/") and self.peek().kind == "punct":
            t = self.bump()
            e = BinOp(t.text, e, self._unary(ap), span=t.span)
        return e

    def _unary(self, ap: bool) -> Expr:
        if self.at("-"):
            sp = self.bump().span
            self._descend()
            try:
                inner = self._unary(ap)
            finally:
                self.depth -= 1
            if isinstance(inner, IntLit):  # fold `-5` into a literal
                return IntLit(-inner.value, span=sp)
            return UnOp("-", inner, span=sp)
        if self.at("<tx>"):
            sp = self.bump().span
            if not ap:
                raise ParseError(error("<tx> may only appear in a property consequent",
                                       "post-outside-consequent", sp))
            return Post(self._postfix(ap), span=sp)
        return self._postfix(ap)

    def _postfix(self, ap: bool) -> Expr:
        e = self._primary(ap)
        while True:
            if self.at("[") and isinstance(e, Ident):
                self.bump()
                key = self.parse_expr(False)
                self.expect("]", "index")
                e = MapGet(e.name, key, span=e.span)
            elif self.at(".") and self.peek(1).text == "balance":
                self.bump()
                self.bump()
                e = (ContractBalance(span=getattr(e, "span", None))
                     if isinstance(e, _ThisAddr) else AccountBalance(e, span=getattr(e, "span", None)))
            elif self.at(".") and self.peek(1).text == "transfer":
                break  # statement-level: `e.transfer(v);`
            else:
                break
        if isinstance(e, _ThisAddr):
            raise ParseError(error("address(this) is only supported as address(this).balance",
                                   "parse", e.span))
        return e

    def _primary(self, ap: bool) -> Expr:
        t = self.peek()
        if t.kind == "int":
            self.bump()
            return IntLit(int(t.text), span=t.span)
        if self.at("true"):
            self.bump()
            return BoolLit(True, span=t.span)
        if self.at("false"):
            self.bump()
            return BoolLit(False, span=t.span)
        if self.at("("):
            self.bump()
            self._descend()
            try:
                e = self.parse_expr(ap)
            finally:
                self.depth -= 1
            self.expect(")", "parenthesized expression")
            return e
        if self.at("msg"):
            self.bump()
            self.expect(".", "msg access")
            m = self.expect_ident("'sender' or 'value'")
            if m.text == "sender":
                return MsgSender(span=t.span)
            if m.text == "value":
                return MsgValue(span=t.span)
            raise ParseError(error(f"unknown field msg.{m.text}", "parse", m.span))
        if self.at("block"):
            self.bump()
            self.expect(".", "block access")
            m = self.expect_ident("'number'")
            if m.text != "number":
                raise ParseError(error(f"unknown field block.{m.text}", "parse", m.span))
            return BlockNumber(span=t.span)
        if self.at("address"):
            self.bump()
            self.expect("(", "address literal")
            if self.at("this"):
                self.bump()
                self.expect(")", "address(this)")
                return _ThisAddr(span=t.span)
            k = self.peek()
            if k.kind != "int":
                raise ParseError(error("expected integer or 'this' in address(...)",
                                       "parse", k.span))
            self.bump()
            self.expect(")", "address literal")
            return AddressLit(int(k.text), span=t.span)
        if self.at("payable"):  # `payable(e)` cast: accepted and discarded
            self.bump()
            self.expect("(", "payable cast")
            e = self.parse_expr(ap)
            self.expect(")", "payable cast")
            return e
        if self.at("this"):
            self.bump()
            if self.at(".") and self.peek(1).text == "balance":
                return _ThisAddr(span=t.span)
            raise ParseError(error("'this' is only supported as address(this).balance",
                                   "parse", t.span))
        if self.at_ident("st") and self.peek(1).text == ".":
            self.bump()
            self.bump()
            name = self.expect_ident("state variable after 'st.'")
            return Ident(name.text, state_prefixed=True, span=name.span)
        if self.at_ident("balance"):
            self.bump()
            if self.at("["):
                self.bump()
                key = self.parse_expr(False)
                self.expect("]", "balance index")
                return AccountBalance(key, span=t.span)
            return ContractBalance(span=t.span)
        if t.kind == "ident":
            self.bump()
            return Ident(t.text, span=t.span)
        raise ParseError(error(f"expected an expression, found '{t.text or 'end of input'}'",
                               "parse", t.span))

    # -- statements -----------------------------------------------------------
    def parse_block(self) -> tuple:
        self.expect("{", "block")
        self._descend()
        stmts: list[Stmt] = []
        while not self.at("}") and self.peek().kind != "eof":
            try:
                stmts.append(self.parse_stmt())
            except ParseError as exc:
                self.diags.append(exc.diag)
                self.recover_to(";", "}")
        self.depth -= 1
        self.expect("}", "block")
        return tuple(stmts)

    def parse_stmt(self) -> Stmt:
        t = self.peek()
        if self.at("require"):
            self.bump()
            self.expect("(", "require")
            cond = self.parse_expr(False)
            self.expect(")", "require")
            self.expect(";", "require")
            return Require(cond, span=t.span)
        if self.at("if"):
            self.bump()
            self.expect("(", "if condition")
            cond = self.parse_expr(False)
            self.expect(")", "if condition")
            then_body = self.parse_block()
            else_body: tuple = ()
            if self.at("else"):
                self.bump()
                if self.at("if"):
                    else_body = (self.parse_stmt(),)
                else:
                    else_body = self.parse_block()
            return If(cond, then_body, else_body, span=t.span)

        e = self.parse_expr(False)
        if self.at(".") and self.peek(1).text == "transfer":
            self.bump()
            self.bump()
            self.expect("(", "transfer")
            amount = self.parse_expr(False)
            self.expect(")", "transfer")
            self.expect(";", "transfer")
            return Transfer(e, amount, span=t.span)
        op = self.peek()
        if op.text in ("=", "+=", "-=") and op.kind == "punct":
            self.bump()
            rhs = self.parse_expr(False)
            self.expect(";", "assignment")
            target = self._as_lvalue(e)
            if op.text != "=":
                base: Expr = (MapGet(target.name, target.key, span=e.span)
                              if isinstance(target, LMap) else Ident(target.name, span=e.span))
                rhs = BinOp(op.text[0], base, rhs, span=op.span)
            return Assign(target, rhs, span=t.span)
        raise ParseError(error("expected a statement", "parse", t.span))

    def _as_lvalue(self, e: Expr):
        if isinstance(e, Ident) and not e.state_prefixed:
            return LVar(e.name, span=e.span)
        if isinstance(e, MapGet):
            return LMap(e.name, e.key, span=e.span)
        raise ParseError(error("invalid assignment target", "parse", getattr(e, "span", None)))

    # -- declarations -----------------------------------------------------------
    def parse_contract(self) -> Contract:
        kw = self.expect("contract", "file")
        name = self.expect_ident("contract name")
        self.expect("{", "contract body")
        state_vars: list[VarDecl] = []
        ctor: Optional[Method] = None
        methods: list[Method] = []
        while not self.at("}") and self.peek().kind != "eof":
            try:
                if self.at("constructor"):
                    m = self.parse_method(ctor=True)
                    if ctor is not None:
                        self.diags.append(error("duplicate constructor", "dup-ctor", m.span))
                    ctor = m
                elif self.at("function"):
                    methods.append(self.parse_method(ctor=False))
                else:
                    state_vars.append(self.parse_vardecl())
            except ParseError as exc:
                self.diags.append(exc.diag)
                self.recover_to(";", "}")
        self.expect("}", "contract body")
        if ctor is None:  # implicit empty, non-payable constructor
            ctor = Method(None, (), False, (), span=kw.span)
        return Contract(name.text, tuple(state_vars), ctor, tuple(methods), span=kw.span)

    def parse_vardecl(self) -> VarDecl:
        start = self.peek()
        immutable = False
        if self.at("immutable"):
            self.bump()
            immutable = True
        ty = self.parse_type()
        if self.at("immutable"):
            self.bump()
            immutable = True
        while self.peek().kind == "ident" and self.peek().text in NOISE_MODIFIERS:
            self.bump()
        name = self.expect_ident("state variable name")
        self.expect(";", "state variable declaration")
        return VarDecl(name.text, ty, immutable, span=start.span)

    def parse_method(self, ctor: bool) -> Method:
        kw = self.bump()  # 'constructor' or 'function'
        name = None if ctor else self.expect_ident("method name").text
        self.expect("(", "parameter list")
        params: list[ParamDecl] = []
        if not self.at(")"):
            while True:
                ty = self.parse_type()
                pname = self.expect_ident("parameter name")
                params.append(ParamDecl(pname.text, ty, span=pname.span))
                if self.at(","):
                    self.bump()
                    continue
                break
        self.expect(")", "parameter list")
        payable = False
        while True:
            if self.at("payable"):
                self.bump()
                payable = True
            elif self.peek().kind == "ident" and self.peek().text in NOISE_MODIFIERS:
                self.bump()
            else:
                break
        body = self.parse_block()
        return Method(name, tuple(params), payable, body, span=kw.span)

    def parse_property(self) -> Property:
        kw = self.expect("property")
        name = self.expect_ident("property name")
        self.expect("{", "property body")
        self.expect("Forall", "property body")
        qvars = [self.expect_ident("quantified variable").text]
        while self.at(","):
            self.bump()
            qvars.append(self.expect_ident("quantified variable").text)
        self.expect("[", "property body")
        antecedent = self.parse_expr(False)
        self.expect("->", "property body")
        self.expect("Exists", "property body")
        self.expect("tx", "property body")
        self.expect("[", "transaction bound")
        m = self.peek()
        if m.kind != "int":
            raise ParseError(error("expected the transaction bound", "parse", m.span))
        self.bump()
        self.expect(",", "transaction bound")
        actor = self.expect_ident("actor variable")
        self.expect("]", "transaction bound")
        self.expect("[", "consequent")
        consequent = self.parse_expr(True)
        self.expect("]", "consequent")
        self.expect("]", "property body")
        self.expect("}", "property body")
        return Property(name.text, tuple(qvars), antecedent, int(m.text), actor.text,
                        consequent, span=kw.span)

    def parse_invariant(self) -> Invariant:
        kw = self.bump()  # contextual 'invariant'
        name = self.expect_ident("invariant name").text if self.at_ident() else None
        self.expect("{", "invariant body")
        e = self.parse_expr(False)
        self.expect("}", "invariant body")
        return Invariant(name, e, span=kw.span)

    def parse_file(self) -> ParseOutcome:
        contract = None
        props: list[Property] = []
        invs: list[Invariant] = []
        try:
            contract = self.parse_contract()
            while self.peek().kind != "eof":
                if self.at("property"):
                    props.append(self.parse_property())
                elif self.at_ident("invariant"):
                    invs.append(self.parse_invariant())
                else:
                    t = self.peek()
                    raise ParseError(error(
                        f"expected 'property' or end of file, found '{t.text}'",
                        "parse", t.span))
        except ParseError as exc:
            self.diags.append(exc.diag)
        if any(d.severity == "error" for d in self.diags):
            return ParseOutcome(None, [], [], self.diags)
        return ParseOutcome(contract, props, invs, self.diags)


@dataclass(frozen=True)
class _ThisAddr(Expr):
    """Transient parse node for `address(this)`; never escapes the parser."""

    span: Optional[Span] = field(default=None, compare=False, repr=False)


# ---------------------------------------------------------------------------
# Name resolution
# ---------------------------------------------------------------------------

def _resolve_expr(e: Expr, c: Contract, params: frozenset, qvars: frozenset,
                  diags: list[Diagnostic]) -> Expr:
    def res(x: Expr) -> Expr:
        return _resolve_expr(x, c, params, qvars, diags)

    match e:
        case Ident(name, state_prefixed):
            if state_prefixed:
                if c.var(name) is None:
                    diags.append(error(f"unknown state variable '{name}'", "unresolved", e.span))
                    return e
                return StateVar(name, span=e.span)
            if name in qvars:
                return QVar(name, span=e.span)
            if name in params:
                return Param(name, span=e.span)
            if c.var(name) is not None:
                return StateVar(name, span=e.span)
            diags.append(error(f"unresolved identifier '{name}'", "unresolved", e.span))
            return e
        case MapGet(name, key):
            return MapGet(name, res(key), span=e.span)
        case AccountBalance(addr):
            return AccountBalance(res(addr), span=e.span)
        case UnOp(op, operand):
            return UnOp(op, res(operand), span=e.span)
        case BinOp(op, lhs, rhs):
            return BinOp(op, res(lhs), res(rhs), span=e.span)
        case Post(inner):
            return Post(res(inner), span=e.span)
        case _:
            return e


def _resolve_stmt(s: Stmt, c: Contract, params: frozenset, diags) -> Stmt:
    none: frozenset = frozenset()

    def res(e: Expr) -> Expr:
        return _resolve_expr(e, c, params, none, diags)

    match s:
        case Require(cond):
            return Require(res(cond), span=s.span)
        case Assign(target, value):
            if isinstance(target, LMap):
                target = LMap(target.name, res(target.key), span=target.span)
            return Assign(target, res(value), span=s.span)
        case Transfer(to, amount):
            return Transfer(res(to), res(amount), span=s.span)
        case If(cond, then_body, else_body):
            return If(res(cond),
                      tuple(_resolve_stmt(t, c, params, diags) for t in then_body),
                      tuple(_resolve_stmt(t, c, params, diags) for t in else_body),
                      span=s.span)
        case _:
            return s


def resolve(outcome: ParseOutcome) -> ParseOutcome:
    """Rewrite Ident nodes to StateVar/Param/QVar references."""
    c = outcome.contract
    if c is None:
        return outcome
    diags = list(outcome.diagnostics)

    def resolve_method(m: Method) -> Method:
        params = frozenset(p.name for p in m.params)
        body = tuple(_resolve_stmt(s, c, params, diags) for s in m.body)
        return Method(m.name, m.params, m.payable, body, span=m.span)

    ctor = resolve_method(c.ctor)
    methods = tuple(resolve_method(m) for m in c.methods)
    rc = Contract(c.name, c.state_vars, ctor, methods, span=c.span)

    props = []
    none: frozenset = frozenset()
    for p in outcome.properties:
        qv = frozenset(p.qvars)
        props.append(Property(
            p.name, p.qvars,
            _resolve_expr(p.antecedent, rc, none, qv, diags),
            p.bound_m, p.actor,
            _resolve_expr(p.consequent, rc, none, qv, diags),
            span=p.span))
    invs = [Invariant(i.name, _resolve_expr(i.expr, rc, none, none, diags), span=i.span)
            for i in outcome.invariants]
    if any(d.severity == "error" for d in diags):
        return ParseOutcome(None, [], [], diags)
    return ParseOutcome(rc, props, invs, diags)


# ---------------------------------------------------------------------------
# Entry points
# ---------------------------------------------------------------------------

def parse_file(src: str) -> ParseOutcome:
    """Parse and resolve one source text. No partial AST on error."""
    toks, lex_diags = tokenize(src)
    if any(d.severity == "error" for d in lex_diags):
        return ParseOutcome(None, [], [], lex_diags)
    parser = _Parser(toks)
    parser.diags.extend(lex_diags)
    try:
        outcome = parser.parse_file()
    except RecursionError:
        return ParseOutcome(None, [], [], parser.diags + [
            error("input nests too deeply", "nesting", parser.peek().span)])
    if outcome.contract is None:
        return outcome
    outcome = resolve(outcome)
    if outcome.contract is None:
        return outcome
    wf = ast.check_wellformed(outcome.contract, outcome.properties)
    for inv in outcome.invariants:
        wf.extend(ast.check_invariant(outcome.contract, inv))
    if wf:
        return ParseOutcome(None, [], [], outcome.diagnostics + wf)
    return outcome


def load_source(path: str) -> SourceFile:
    with open(path, "r", encoding="utf-8") as fh:
        contents = fh.read()
    return SourceFile(path, contents, parse_file(contents))


def render_diagnostics(diags, path: str = "<input>") -> str:
    return "\n".join(d.render(path) for d in diags)
