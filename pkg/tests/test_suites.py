"""Tests for check bookkeeping, the suite runner and the fast acceptance suites"""
import math

import pytest

from base_suite import BaseSuite, CheckResult, SuiteState
from orchestrator import SUITE_CLASSES, SuiteRunner, UnknownSuiteError


class ToySuite(BaseSuite):
    def __init__(self):
        super().__init__("toy")

    def run(self):
        self.check("small", lambda: 1e-9, 1e-6)
        self.check("large", lambda: 2.0, 1.0, comparison=">")
        self.check("raises", lambda: 1 / 0, 1.0)
        self.attempt("setup", lambda: int("x"))
        self.record("verdict", True, detail="diagnostic")


class BrokenSuite(BaseSuite):
    def __init__(self):
        super().__init__("broken")

    def run(self):
        self.check("first", lambda: 0.0, 1.0)
        raise RuntimeError("boom")


class TestCheckResult:
    def test_comparisons(self):
        assert CheckResult("a", 0.5, 1.0).passed
        assert not CheckResult("a", 1.5, 1.0).passed
        assert CheckResult("a", 1.5, 1.0, ">").passed
        assert not CheckResult("a", math.nan, 1.0).passed

    def test_unknown_comparison(self):
        with pytest.raises(ValueError):
            CheckResult("a", 0.0, 1.0, "~")

    def test_repr(self):
        assert repr(CheckResult("small", 0.5, 1.0)).startswith("PASS small")


class TestBaseSuite:
    def test_checks_recorded(self):
        suite = ToySuite()
        result = suite.execute()
        by_name = {c.name: c for c in suite.checks}
        assert by_name["small"].passed
        assert by_name["large"].passed
        assert not by_name["raises"].passed
        assert "ZeroDivisionError" in by_name["raises"].detail
        assert not by_name["setup"].passed
        assert by_name["verdict"].passed
        assert result["success"] is False
        assert suite.get_stats()["errors"] == 2

    def test_aborted_suite_records_failure(self):
        state = SuiteState()
        result = BrokenSuite().execute(state)
        assert not result["success"]
        assert [c.name for c in state.results["broken"]] == ["first", "broken: suite"]
        assert not state.passed

    def test_reset(self):
        suite = ToySuite()
        suite.execute()
        suite.reset_stats()
        assert suite.get_stats() == {"suite": "toy", "executions": 0, "checks": 0, "failed": 0, "errors": 0}


class TestSuiteRunner:
    def test_resolve(self):
        runner = SuiteRunner()
        assert runner.resolve("all") == list(SUITE_CLASSES)
        assert runner.resolve("killing") == ["killing"]
        with pytest.raises(UnknownSuiteError):
            runner.resolve("nope")

    def test_table_and_summary(self):
        runner = SuiteRunner({"toy": ToySuite})
        state = runner.execute("all")
        table = runner.summary_table(state)
        assert list(table.columns) == ["suite", "check", "value", "tolerance", "comparison", "result"]
        assert len(table) == 5
        text = runner.format_table(state)
        assert text.splitlines()[0] == "== toy =="
        assert text.endswith("3/5 checks passed")
        summary = runner.get_execution_summary(state)
        assert summary["suites_run"] == ["toy"]
        assert summary["failed"] == 2

    @pytest.mark.parametrize("name", ["frame-metric", "connection", "killing"])
    def test_geometry_suites_pass(self, name):
        runner = SuiteRunner()
        state = runner.execute(name)
        failed = [repr(c) for c in state.all_checks() if not c.passed]
        assert failed == []
        assert state.all_checks()

    @pytest.mark.slow
    @pytest.mark.parametrize("name", ["closed-forms", "special-surfaces", "ode"])
    def test_surface_and_ode_suites_pass(self, name, small_grid):
        state = SuiteRunner().execute(name)
        assert [repr(c) for c in state.all_checks() if not c.passed] == []
