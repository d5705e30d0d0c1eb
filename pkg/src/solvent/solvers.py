"""External SMT solver driver.

Solvers run as child processes speaking SMT-LIB v2 over stdin/stdout; this
module finds a binary, submits a script, enforces the timeout and parses the
sat/unsat/unknown status plus any model values. When no native z3 binary is
on PATH, a bundled Node.js shim running the official z3 WASM build is used
instead, so the pipeline works without system packages.
"""
from __future__ import annotations

import os
import re
import shutil
import subprocess
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from functools import lru_cache
from pathlib import Path

from .encoder import EncodedQuery

SOLVER_PATH_ENV = "SOLVENT_SOLVER_PATH"


class SolverUnavailable(Exception):
    """The requested solver binary could not be found or spawned."""


@dataclass(frozen=True)
class SolverConfig:
    which: str = "z3"  # "z3" | "cvc5" | "custom"
    command: tuple = ()  # for "custom": argv receiving the script on stdin
    timeout_s: float = 400.0
    extra_args: tuple = ()
    label: str | None = None

    @property
    def name(self) -> str:
        return self.label or self.which


@dataclass
class SolverAnswer:
    status: str  # sat | unsat | unknown | timeout | crash
    model: dict = field(default_factory=dict)
    elapsed_s: float = 0.0
    detail: str = ""

    @property
    def definitive(self) -> bool:
        return self.status in ("sat", "unsat")


@lru_cache(maxsize=1)
def _global_node_path() -> str | None:
    npm = shutil.which("npm")
    if npm is None:
        return None
    try:
        root = subprocess.run([npm, "root", "-g"], capture_output=True, text=True,
                              timeout=30).stdout.strip()
    except (subprocess.SubprocessError, OSError):
        return None
    return root or None


def _z3_wasm_command() -> tuple[list[str], dict] | None:
    node = shutil.which("node")
    if node is None:
        return None
    shim = Path(__file__).parent / "_z3js" / "shim.js"
    env = dict(os.environ)
    candidates = [p for p in (env.get("NODE_PATH"), _global_node_path()) if p]
    module_found = any(Path(p, "z3-solver").is_dir() for p in candidates)
    local = Path.cwd() / "node_modules" / "z3-solver"
    if local.is_dir():
        candidates.append(str(local.parent))
        module_found = True
    if not module_found:
        return None
    env["NODE_PATH"] = os.pathsep.join(candidates)
    return [node, str(shim)], env


def _env_override(which: str) -> str | None:
    override = os.environ.get(SOLVER_PATH_ENV)
    if not override:
        return None
    p = Path(override)
    if p.is_dir():
        cand = p / which
        return str(cand) if cand.exists() else None
    return str(p)


def resolve_command(cfg: SolverConfig) -> tuple[list[str], dict | None]:
    """Return (argv, env) for the solver process; raises SolverUnavailable."""
    if cfg.which == "custom":
        if not cfg.command:
            raise SolverUnavailable("custom solver config without a command line")
        head = cfg.command[0]
        if shutil.which(head) is None and not Path(head).exists():
            raise SolverUnavailable(f"solver command not found: {head}")
        return list(cfg.command) + list(cfg.extra_args), None

    override = _env_override(cfg.which)
    if cfg.which == "z3":
        binary = override or shutil.which("z3")
        if binary:
            return [binary, "-in", "-smt2", *cfg.extra_args], None
        wasm = _z3_wasm_command()
        if wasm:
            argv, env = wasm
            return argv + list(cfg.extra_args), env
        raise SolverUnavailable(
            "no z3 available: install a z3 binary or `npm install -g z3-solver`")
    if cfg.which == "cvc5":
        binary = override or shutil.which("cvc5")
        if binary:
            return [binary, "--lang", "smt2", *cfg.extra_args], None
        raise SolverUnavailable("no cvc5 binary on PATH")
    raise SolverUnavailable(f"unknown solver '{cfg.which}'")


def solver_available(cfg: SolverConfig) -> bool:
    try:
        resolve_command(cfg)
        return True
    except SolverUnavailable:
        return False


# ---------------------------------------------------------------------------
# Output parsing
# ---------------------------------------------------------------------------

_ATOM = re.compile(r'[()]|"(?:[^"\\]|\\.)*"|[^\s()]+')


def _sexprs(text: str) -> list:
    """Parse a sequence of s-expressions (atoms are plain strings)."""
    stack: list[list] = [[]]
    for tok in _ATOM.findall(text):
        if tok == "(":
            stack.append([])
        elif tok == ")":
            done = stack.pop()
            if not stack:
                return []  # unbalanced; caller treats as parse failure
            stack[-1].append(done)
        else:
            stack[-1].append(tok)
    return stack[0] if len(stack) == 1 else []


def _value_of(node):
    if isinstance(node, str):
        if node == "true":
            return True
        if node == "false":
            return False
        if re.fullmatch(r"-?\d+", node):
            return int(node)
        return node
    if isinstance(node, list) and len(node) == 2 and node[0] == "-":
        inner = _value_of(node[1])
        return -inner if isinstance(inner, int) else node
    return node


def parse_model_pairs(text: str) -> dict:
    """Collect (name value) pairs from get-value responses."""
    model: dict = {}
    for top in _sexprs(text):
        if not isinstance(top, list):
            continue
        if top and top[0] == "error":
            continue
        for pair in top:
            if isinstance(pair, list) and len(pair) == 2 and isinstance(pair[0], str):
                model[pair[0]] = _value_of(pair[1])
    return model


_STATUS = ("sat", "unsat", "unknown")


def parse_solver_output(out: str, want_model: bool) -> tuple[str, dict, str]:
    """Find the first status line; returns (status, model, trailing_text)."""
    lines = out.splitlines()
    for i, line in enumerate(lines):
        word = line.strip()
        if word in _STATUS:
            rest = "\n".join(lines[i + 1:])
            model = parse_model_pairs(rest) if (word == "sat" and want_model) else {}
            return word, model, rest
    return "", {}, out


# ---------------------------------------------------------------------------
# Query execution
# ---------------------------------------------------------------------------

def run_query(q: EncodedQuery, cfg: SolverConfig) -> SolverAnswer:
    """Submit one script to one solver process and parse the answer.

    A definitive status line wins even when trailing commands error (a
    script's get-value after unsat is reported as an error by solvers) or
    the process exits nonzero afterwards; with no status line at all the
    answer is crash with the captured stderr.
    """
    try:
        argv, env = resolve_command(cfg)
    except SolverUnavailable as exc:
        raise
    start = time.monotonic()
    try:
        proc = subprocess.Popen(argv, stdin=subprocess.PIPE, stdout=subprocess.PIPE,
                                stderr=subprocess.PIPE, text=True, env=env)
    except OSError as exc:
        raise SolverUnavailable(f"cannot spawn {argv[0]}: {exc}") from exc
    try:
        out, err = proc.communicate(q.script, timeout=cfg.timeout_s)
    except subprocess.TimeoutExpired:
        proc.kill()
        proc.communicate()
        return SolverAnswer("timeout", {}, time.monotonic() - start,
                            f"killed after {cfg.timeout_s}s")
    finally:
        if proc.poll() is None:
            proc.kill()
            proc.communicate()
    elapsed = time.monotonic() - start

    status, model, _ = parse_solver_output(out, want_model=bool(q.getvalues))
    if not status:
        detail = (err.strip() or out.strip())[:2000]
        return SolverAnswer("crash", {}, elapsed, detail or "no solver output")
    if status == "sat" and q.getvalues and not model:
        return SolverAnswer("crash", {}, elapsed,
                            "sat but the model could not be parsed")
    return SolverAnswer(status, model, elapsed, err.strip()[:2000])


def run_script(script: str, cfg: SolverConfig) -> list[str]:
    """Run a bare script and return every status line, in order (test helper
    for chains with several check-sat commands)."""
    q = EncodedQuery("adhoc", "chain", 0, script, "LIA-with-arrays")
    argv, env = resolve_command(cfg)
    proc = subprocess.Popen(argv, stdin=subprocess.PIPE, stdout=subprocess.PIPE,
                            stderr=subprocess.PIPE, text=True, env=env)
    try:
        out, err = proc.communicate(script, timeout=cfg.timeout_s)
    except subprocess.TimeoutExpired:
        proc.kill()
        proc.communicate()
        raise
    return [ln.strip() for ln in out.splitlines() if ln.strip() in _STATUS]


def cross_check(q: EncodedQuery, cfgs: list[SolverConfig]) -> SolverAnswer:
    """Run several solvers on one query and reconcile their answers.

    Definitive answers win over timeouts/unknowns. Two disagreeing
    definitive answers are a soundness alarm reported as
    crash("solver-disagreement"), never silently resolved.
    """
    if not cfgs:
        raise ValueError("cross_check needs at least one solver config")
    if len(cfgs) == 1:
        return run_query(q, cfgs[0])
    with ThreadPoolExecutor(max_workers=len(cfgs)) as pool:
        answers = list(pool.map(lambda c: run_query(q, c), cfgs))
    definitive = [a for a in answers if a.definitive]
    if definitive:
        statuses = {a.status for a in definitive}
        if len(statuses) > 1:
            joined = ", ".join(f"{c.name}={a.status}" for c, a in zip(cfgs, answers))
            return SolverAnswer("crash", {}, max(a.elapsed_s for a in answers),
                                f"solver-disagreement: {joined}")
        return definitive[0]
    for status in ("unknown", "timeout", "crash"):
        for a in answers:
            if a.status == status:
                return a
    return answers[0]
