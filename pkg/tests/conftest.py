from __future__ import annotations

from pathlib import Path

import pytest

from solvent.driver import SuiteOptions, verify_suite
from solvent.parser import load_source
from solvent.solvers import SolverConfig, solver_available

ROOT = Path(__file__).resolve().parent.parent
CONTRACTS = ROOT / "contracts"

Z3 = SolverConfig("z3", timeout_s=120.0)
CVC5 = SolverConfig("cvc5", timeout_s=120.0)

HAVE_Z3 = solver_available(Z3)
HAVE_CVC5 = solver_available(CVC5)

needs_z3 = pytest.mark.skipif(not HAVE_Z3, reason="no z3 engine available")


def load(name: str):
    src = load_source(str(CONTRACTS / f"{name}.sol"))
    assert src.outcome.ok, f"{name}.sol failed to parse: " + "; ".join(
        d.message for d in src.outcome.diagnostics)
    return src


@pytest.fixture(scope="session")
def crowdfund_bug():
    return load("crowdfund_bug")


@pytest.fixture(scope="session")
def crowdfund_fix():
    return load("crowdfund_fix")


@pytest.fixture(scope="session")
def crowdfund_fix2():
    return load("crowdfund_fix2")


@pytest.fixture(scope="session")
def freezable():
    return load("freezable")


@pytest.fixture(scope="session")
def deposit():
    return load("deposit")


def available_solver_configs() -> list[SolverConfig]:
    cfgs = []
    if HAVE_Z3:
        cfgs.append(Z3)
    if HAVE_CVC5:
        cfgs.append(CVC5)
    return cfgs


@pytest.fixture(scope="session")
def suite_reports():
    """Verify every benchmark property on every available solver, once.

    Unbounded proofs are cross-validated by BMC at depths 1..3 as an extra
    soundness check, and every counterexample is replay-validated.
    """
    if not HAVE_Z3:
        pytest.skip("no z3 engine available")
    cfgs = available_solver_configs()
    options = SuiteOptions(max_depth=4, budget_s=550.0, jobs=4,
                           cross_validate_unbounded=True)
    reports = []
    for name in ("crowdfund_bug", "crowdfund_fix", "crowdfund_fix2",
                 "freezable", "deposit"):
        reports.extend(verify_suite(load(name), cfgs, options))
    return reports
