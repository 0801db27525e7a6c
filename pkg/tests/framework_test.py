"""
    To run all tests: pytest -s
    To run this module: pytest -s tests/framework_test.py
"""
from typing import List

import numpy as np
import pytest
import scipy.sparse as sp

from app.core.constants import KERNEL_KIND
from app.framework.checks import GLOBAL_CHECK_REGISTRY, Check, CheckResult, register_check, select_checks
from app.framework.context import RunContext
from app.framework.errors import CheckNotReadyError, DimensionMismatch, InvalidParams
from app.framework.operator import ReversibleOperator
from app.framework.workflows import WorkflowRunner
from app.services import orchestrator  # noqa: F401  (registers the verify suite)


class NeverReady(Check):
    name = "never-ready"

    def confirm_setup(self) -> bool:
        return False

    def run(self) -> List[CheckResult]:
        return []


class Exploding(Check):
    name = "exploding"

    def run(self) -> List[CheckResult]:
        raise RuntimeError("boom")


class Fixed(Check):
    name = "fixed"

    def run(self) -> List[CheckResult]:
        return [self.result("a", 0.0, 1e-12), self.result("b", 1.0, 1e-12)]


def two_state(q=0.5):
    pi = np.array([1.0, q * q]) / (1.0 + q * q)
    return ReversibleOperator(pi, sp.csr_matrix([[0.0, q], [1.0 / q, 0.0]]), label="two-state")


def test_registry_holds_the_suite():
    for name in ("two-state-gap", "xxz-equivalence", "p-identity", "iteration-bound", "gamma-band", "k-decay", "gap-scaling", "gamma-tilde-iteration"):
        assert name in GLOBAL_CHECK_REGISTRY
    assert all(issubclass(check_cls, Check) for check_cls in GLOBAL_CHECK_REGISTRY.values())


def test_select_checks_by_name_and_tag():
    assert [c.name for c in select_checks(["two-state-gap"])] == ["two-state-gap"]
    recursion = {c.name for c in select_checks(["recursion"])}
    assert {"variance-decomposition", "p-identity", "class-a", "iteration-bound"} <= recursion
    assert len(select_checks()) == len(GLOBAL_CHECK_REGISTRY)
    assert select_checks(["no-such-check"]) == []


def test_register_rejects_foreign_classes():
    with pytest.raises(TypeError):
        register_check(dict)


def test_check_results_and_readiness():
    results = Fixed().run()
    assert [r.status for r in results] == ["PASS", "FAIL"]
    with pytest.raises(CheckNotReadyError):
        NeverReady()


def test_runner_keeps_order_and_captures_errors():
    context = RunContext("verify")
    results = WorkflowRunner(context).run_sequence([Fixed(), Exploding()], skip=[])
    assert [(r.name, r.passed) for r in results] == [("fixed", True), ("fixed", False), ("exploding", False)]
    assert results[-1].detail == "boom"
    assert context.failed
    assert len(context.results) == 3

    skipped = WorkflowRunner(RunContext("verify")).run_sequence([Fixed(), Exploding()], skip=["exploding"])
    assert len(skipped) == 2


def test_run_parallel_returns_exceptions_in_place():
    def task(x):
        if x == 2:
            raise ValueError("two")
        return x * x

    outcomes = WorkflowRunner(RunContext("scan")).run_parallel(task, [1, 2, 3], jobs=2)
    assert outcomes[0] == 1 and outcomes[2] == 9
    assert isinstance(outcomes[1], ValueError)


def test_context_header():
    context = RunContext("simulate", params={"q": 0.5}, seed=3)
    header = context.header()
    assert header["command"] == "simulate"
    assert header["seed"] == 3
    assert "run_id" in header
    assert "run_id" not in context.header(volatile=False)
    assert context.summary()["errors"] == 0


def test_operator_invariants():
    op = two_state()
    report = op.check()
    assert report["row_sum"] == 0.0
    assert report["detailed_balance"] <= 1e-15
    assert op.dirichlet_form(np.ones(2)) == 0.0
    assert op.variance(np.array([1.0, 0.0])) == pytest.approx(op.pi[0] * op.pi[1])

    broken = op.perturbed()
    assert broken.check()["detailed_balance"] > 0.1
    assert np.array_equal(broken.pi, op.pi)


def test_operator_shapes_and_kinds():
    with pytest.raises(DimensionMismatch):
        ReversibleOperator(np.ones(3) / 3, sp.csr_matrix((2, 2)), label="bad")
    with pytest.raises(InvalidParams):
        ReversibleOperator(np.ones(2) / 2, sp.csr_matrix((2, 2)), label="bad", kind="other")
    with pytest.raises(DimensionMismatch):
        two_state().apply(np.ones(3))

    kernel = ReversibleOperator(np.ones(2) / 2, sp.csr_matrix([[0.0, 0.5], [0.5, 0.0]]), label="K", kind=KERNEL_KIND)
    assert np.allclose(kernel.apply(np.array([1.0, 0.0])), [0.5, 0.5])
