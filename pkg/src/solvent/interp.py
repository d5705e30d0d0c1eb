"""Executable semantics of the contract fragment.

This interpreter is the ground truth the symbolic encoding is tested
against: it applies concrete transactions with revert atomicity, replays
counterexample traces, and decides the bounded-liquidation question by
exhaustive enumeration over small finite domains.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field, replace
from typing import Iterable, Iterator, Optional

from .ast import (
    AccountBalance, AddressLit, AddressTy, Assign, BinOp, BlockNumber, BoolLit, BoolTy,
    Contract, ContractBalance, Expr, If, IntLit, IntTy, LMap, LVar, MapGet, MappingTy,
    Method, MsgSender, MsgValue, Param, Post, Property, QVar, Require, StateVar, Stmt,
    Transfer, UIntTy, UnOp,
)

Value = int | bool


class InterpError(Exception):
    """Hard execution error, distinct from a contract-level revert."""


class EvalError(InterpError):
    """Error while evaluating a property expression (e.g. division by zero)."""


class OracleOverflow(InterpError):
    """The brute-force enumerator exceeded its configured trace cap."""


class _Revert(Exception):
    pass


# ---------------------------------------------------------------------------
# State and transactions
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ConcreteState:
    """Ground blockchain state; mappings and accounts default to 0."""

    storage: dict
    contract_balance: int
    accounts: dict
    block_number: int
    deployed: bool

    def account(self, addr: int) -> int:
        return self.accounts.get(addr, 0)

    def map_get(self, name: str, key: int) -> int:
        return self.storage[name].get(key, 0)

    def total_funds(self) -> int:
        return self.contract_balance + sum(self.accounts.values())

    def normalized(self) -> "ConcreteState":
        """Drop zero entries so states compare by extension."""
        storage = {
            k: ({a: v for a, v in m.items() if v != 0} if isinstance(m, dict) else m)
            for k, m in self.storage.items()
        }
        accounts = {a: v for a, v in self.accounts.items() if v != 0}
        return ConcreteState(storage, self.contract_balance, accounts,
                             self.block_number, self.deployed)


def genesis_state(initial_accounts: dict | None = None) -> ConcreteState:
    accounts = {int(a): int(v) for a, v in (initial_accounts or {}).items()}
    for a, v in accounts.items():
        if a < 0 or v < 0:
            raise InterpError(f"invalid initial account {a}={v}")
    return ConcreteState({}, 0, accounts, 0, False)


CONSTRUCTOR, CALL, SELFDESTRUCT, SKIP = "constructor", "call", "selfdestruct", "skip"


@dataclass(frozen=True)
class Transaction:
    kind: str  # constructor | call | selfdestruct | skip
    method: Optional[str] = None
    args: tuple = ()
    sender: int = 0
    value: int = 0
    block: int = 0

    @property
    def name(self) -> str:
        if self.kind == CALL:
            return self.method or "?"
        return self.kind


@dataclass(frozen=True)
class StepOutcome:
    next: ConcreteState
    reverted: bool


def format_step(i: int, t: Transaction) -> str:
    args = ",".join(_fmt_value(a) for a in t.args)
    return (f"[{i}] {t.name}({args})  msg.sender=address({t.sender})  "
            f"msg.value={t.value}  block={t.block}")


def format_trace(trace: Iterable[Transaction]) -> str:
    return "\n".join(format_step(i + 1, t) for i, t in enumerate(trace))


def _fmt_value(v: Value) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    return str(v)


# ---------------------------------------------------------------------------
# Transaction application
# ---------------------------------------------------------------------------

def _default_for(ty) -> Value | dict:
    if isinstance(ty, BoolTy):
        return False
    if isinstance(ty, MappingTy):
        return {}
    return 0


class _Draft:
    """Mutable working copy of a state during one transaction."""

    def __init__(self, s: ConcreteState, block: int):
        self.storage = {k: (dict(v) if isinstance(v, dict) else v)
                        for k, v in s.storage.items()}
        self.contract_balance = s.contract_balance
        self.accounts = dict(s.accounts)
        self.block = block

    def freeze(self, deployed: bool) -> ConcreteState:
        return ConcreteState(self.storage, self.contract_balance, self.accounts,
                             self.block, deployed)


def _check_args(c: Contract, m: Method, t: Transaction) -> None:
    if len(t.args) != len(m.params):
        raise InterpError(
            f"{t.name} expects {len(m.params)} argument(s), got {len(t.args)}")
    for p, a in zip(m.params, t.args):
        if isinstance(p.ty, BoolTy):
            if not isinstance(a, bool):
                raise InterpError(f"argument '{p.name}' must be a bool")
        elif isinstance(a, bool) or not isinstance(a, int):
            raise InterpError(f"argument '{p.name}' must be an integer")
        elif isinstance(p.ty, (UIntTy, AddressTy)) and a < 0:
            raise InterpError(f"argument '{p.name}' must be nonnegative")


def apply_tx(c: Contract, s: ConcreteState, t: Transaction) -> StepOutcome:
    """Apply one transaction; reverts roll everything back except the block."""
    if t.value < 0:
        raise InterpError("negative msg.value")
    if t.sender < 0:
        raise InterpError("negative sender address")
    if t.block < s.block_number:
        raise InterpError(f"block {t.block} precedes current block {s.block_number}")
    if t.kind == CONSTRUCTOR:
        if s.deployed:
            raise InterpError("contract is already deployed")
    elif not s.deployed:
        raise InterpError("contract is not deployed")

    if t.kind == SKIP:
        if t.args or t.value:
            raise InterpError("skip carries no arguments or value")
        return StepOutcome(replace(s, block_number=t.block), False)

    if s.account(t.sender) < t.value:
        raise InterpError(
            f"sender address({t.sender}) holds {s.account(t.sender)} < value {t.value}")

    if t.kind == SELFDESTRUCT:
        if t.args:
            raise InterpError("selfdestruct takes no arguments")
        draft = _Draft(s, t.block)
        draft.accounts[t.sender] = draft.accounts.get(t.sender, 0) - t.value
        draft.contract_balance += t.value
        return StepOutcome(draft.freeze(True), False)

    if t.kind == CONSTRUCTOR:
        m = c.ctor
    else:
        m = c.method(t.method or "")
        if m is None:
            raise InterpError(f"unknown method '{t.method}'")
    _check_args(c, m, t)

    draft = _Draft(s, t.block)
    if t.kind == CONSTRUCTOR:
        for v in c.state_vars:
            draft.storage[v.name] = _default_for(v.ty)
    env = {p.name: a for p, a in zip(m.params, t.args)}
    try:
        if not m.payable and t.value > 0:
            raise _Revert()
        draft.accounts[t.sender] = draft.accounts.get(t.sender, 0) - t.value
        draft.contract_balance += t.value
        _exec_body(c, m.body, draft, env, t)
    except _Revert:
        return StepOutcome(replace(s, block_number=t.block), True)
    return StepOutcome(draft.freeze(True), False)


def _exec_body(c: Contract, body, draft: _Draft, env: dict, t: Transaction) -> None:
    for stmt in body:
        _exec_stmt(c, stmt, draft, env, t)


def _exec_stmt(c: Contract, stmt: Stmt, draft: _Draft, env: dict, t: Transaction) -> None:
    ev = lambda e: _eval_body(e, c, draft, env, t)
    match stmt:
        case Require(cond):
            if not ev(cond):
                raise _Revert()
        case Assign(LVar(name), value):
            v = ev(value)
            decl = c.var(name)
            if isinstance(decl.ty, UIntTy) and v < 0:
                raise _Revert()
            draft.storage[name] = v
        case Assign(LMap(name, key), value):
            k, v = ev(key), ev(value)
            decl = c.var(name)
            if isinstance(decl.ty.value, UIntTy) and v < 0:
                raise _Revert()
            draft.storage[name][k] = v
        case Transfer(to, amount):
            addr, amt = ev(to), ev(amount)
            if amt < 0 or amt > draft.contract_balance:
                raise _Revert()
            draft.contract_balance -= amt
            draft.accounts[addr] = draft.accounts.get(addr, 0) + amt
        case If(cond, then_body, else_body):
            _exec_body(c, then_body if ev(cond) else else_body, draft, env, t)
        case _:
            raise InterpError(f"cannot execute {stmt!r}")


def _eval_body(e: Expr, c: Contract, draft: _Draft, env: dict, t: Transaction) -> Value:
    ev = lambda x: _eval_body(x, c, draft, env, t)
    match e:
        case IntLit(v) | AddressLit(v):
            return v
        case BoolLit(v):
            return v
        case StateVar(name):
            return draft.storage[name]
        case Param(name):
            return env[name]
        case MapGet(name, key):
            return draft.storage[name].get(ev(key), 0)
        case MsgSender():
            return t.sender
        case MsgValue():
            return t.value
        case BlockNumber():
            return draft.block
        case ContractBalance():
            return draft.contract_balance
        case AccountBalance(addr):
            return draft.accounts.get(ev(addr), 0)
        case UnOp("-", x):
            return -ev(x)
        case UnOp("!", x):
            return not ev(x)
        case BinOp("/", a, b):
            # Division diverging from solver-theory semantics reverts, so the
            # symbolic success path and the interpreter agree exactly.
            da, db = ev(a), ev(b)
            if da < 0 or db <= 0:
                raise _Revert()
            return da // db
        case BinOp("&&", a, b):
            return ev(a) and ev(b)
        case BinOp("||", a, b):
            return ev(a) or ev(b)
        case BinOp(op, a, b):
            return _arith(op, ev(a), ev(b))
        case _:
            raise InterpError(f"cannot evaluate {e!r} in a method body")


def _arith(op: str, a: Value, b: Value) -> Value:
    match op:
        case "+":
            return a + b
        case "-":
            return a - b
        case "*":
            return a * b
        case "==":
            return a == b
        case "!=":
            return a != b
        case "<":
            return a < b
        case "<=":
            return a <= b
        case ">":
            return a > b
        case ">=":
            return a >= b
    raise InterpError(f"unknown operator {op}")


def run_trace(c: Contract, txs: list[Transaction],
              initial_accounts: dict | None = None) -> list[StepOutcome]:
    """Fold apply_tx over a trace starting from genesis; returns all outcomes."""
    if not txs or txs[0].kind != CONSTRUCTOR:
        raise InterpError("a trace starts with the constructor")
    state = genesis_state(initial_accounts)
    outcomes: list[StepOutcome] = []
    for i, t in enumerate(txs):
        if i > 0 and t.kind == CONSTRUCTOR:
            raise InterpError(f"step {i}: constructor can only be the first transaction")
        try:
            out = apply_tx(c, state, t)
        except InterpError as exc:
            raise InterpError(f"step {i}: {exc}") from exc
        outcomes.append(out)
        state = out.next
    return outcomes


# ---------------------------------------------------------------------------
# Property evaluation
# ---------------------------------------------------------------------------

def _eval_prop(e: Expr, pre: ConcreteState, post: ConcreteState | None, env: dict) -> Value:
    ev = lambda x: _eval_prop(x, pre, post, env)
    match e:
        case IntLit(v) | AddressLit(v):
            return v
        case BoolLit(v):
            return v
        case StateVar(name):
            return pre.storage[name]
        case QVar(name):
            return env[name]
        case MapGet(name, key):
            return pre.map_get(name, ev(key))
        case BlockNumber():
            return pre.block_number
        case ContractBalance():
            return pre.contract_balance
        case AccountBalance(addr):
            return pre.account(ev(addr))
        case Post(inner):
            if post is None:
                raise EvalError("<tx> has no post-state here")
            return _eval_prop(inner, post, None, env)
        case UnOp("-", x):
            return -ev(x)
        case UnOp("!", x):
            return not ev(x)
        case BinOp("/", a, b):
            da, db = ev(a), ev(b)
            if db == 0:
                raise EvalError("division by zero in property")
            q = abs(da) // abs(db)
            return q if (da >= 0) == (db >= 0) else -q
        case BinOp("&&", a, b):
            return ev(a) and ev(b)
        case BinOp("||", a, b):
            return ev(a) or ev(b)
        case BinOp(op, a, b):
            return _arith(op, ev(a), ev(b))
        case _:
            raise EvalError(f"cannot evaluate {e!r} in a property")


def eval_pre(s: ConcreteState, e: Expr, env: dict) -> Value:
    """Evaluate a pre-state expression (e.g. a property antecedent)."""
    return _eval_prop(e, s, None, env)


def eval_post(pre: ConcreteState, post: ConcreteState, e: Expr, env: dict) -> Value:
    """Evaluate a consequent: bare atoms read `pre`, <tx>-wrapped ones read `post`."""
    return _eval_prop(e, pre, post, env)


# ---------------------------------------------------------------------------
# Brute-force liquidity oracle
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class FiniteDomains:
    """Finite search space for the liquidation enumerator."""

    values: tuple = (0, 1, 2, 3)
    addresses: tuple = (0, 1, 2, 3, 4, 5)
    block_offsets: tuple = (0, 1, 1 << 20)
    cap: int = 2_000_000


def _arg_choices(ty, dom: FiniteDomains):
    if isinstance(ty, BoolTy):
        return (False, True)
    if isinstance(ty, AddressTy):
        return dom.addresses
    if isinstance(ty, UIntTy):
        return tuple(v for v in dom.values if v >= 0)
    return dom.values


def _candidate_txs(c: Contract, state: ConcreteState, actor: int,
                   dom: FiniteDomains) -> Iterator[Transaction]:
    blocks = sorted({state.block_number + o for o in dom.block_offsets})
    funds = state.account(actor)
    for b in blocks:
        yield Transaction(SKIP, sender=actor, block=b)
        for v in dom.values:
            if 0 <= v <= funds:
                yield Transaction(SELFDESTRUCT, sender=actor, value=v, block=b)
        for m in c.methods:
            values = [v for v in dom.values if 0 <= v <= funds] if m.payable else [0]
            pools = [_arg_choices(p.ty, dom) for p in m.params]
            for args in itertools.product(*pools):
                for v in values:
                    yield Transaction(CALL, m.name, args, actor, v, b)


def bruteforce_liquid(c: Contract, s: ConcreteState, p: Property, env: dict | int,
                      dom: FiniteDomains = FiniteDomains()) -> bool:
    """Decide by exhaustive search whether some trace of at most bound_m
    transactions signed by the actor makes the consequent true from s."""
    if isinstance(env, int):
        env = {q: env for q in p.qvars}
    actor = env[p.actor]
    budget = [dom.cap]

    def search(state: ConcreteState, depth: int) -> bool:
        if eval_post(s, state, p.consequent, env):
            return True
        if depth == p.bound_m:
            return False
        for t in _candidate_txs(c, state, actor, dom):
            budget[0] -= 1
            if budget[0] < 0:
                raise OracleOverflow(f"more than {dom.cap} suffix transactions explored")
            if search(apply_tx(c, state, t).next, depth + 1):
                return True
        return False

    return search(s, 0)
