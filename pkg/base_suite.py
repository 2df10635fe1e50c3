"""
Base Suite class for the verification lab
All acceptance suites inherit from this base class
"""
from abc import ABC, abstractmethod
from typing import Dict, Any, List, Optional, Callable
from datetime import datetime
import logging
import math

from config import SUITE_CONFIGS

logger = logging.getLogger(__name__)


class CheckResult:
    """Outcome of one numerical check"""

    def __init__(
        self,
        name: str,
        value: float,
        tolerance: float,
        comparison: str = "<",
        passed: Optional[bool] = None,
        detail: str = ""
    ):
        self.name = name
        self.value = float(value)
        self.tolerance = float(tolerance)
        self.comparison = comparison
        self.detail = detail
        self.passed = self._compare() if passed is None else bool(passed)

    def _compare(self) -> bool:
        if math.isnan(self.value):
            return False
        if self.comparison == "<":
            return self.value < self.tolerance
        if self.comparison == ">":
            return self.value > self.tolerance
        raise ValueError(f"unknown comparison {self.comparison!r}")

    def to_dict(self) -> Dict:
        return {
            "name": self.name,
            "value": self.value,
            "tolerance": self.tolerance,
            "comparison": self.comparison,
            "passed": self.passed,
            "detail": self.detail
        }

    def __repr__(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return f"{status} {self.name}: {self.value:.3e} {self.comparison} {self.tolerance:.1e}"


class SuiteState:
    """Results shared across suites in one verify run"""

    def __init__(self):
        self.results: Dict[str, List[CheckResult]] = {}
        self.history: List[Dict] = []
        self.context: Dict[str, Any] = {}

    def add_checks(self, suite: str, checks: List[CheckResult]):
        """Store a suite's checks"""
        self.results.setdefault(suite, []).extend(checks)
        self.history.append({
            "type": "suite",
            "suite": suite,
            "checks": len(checks),
            "failed": sum(not c.passed for c in checks),
            "timestamp": datetime.now().isoformat()
        })

    def all_checks(self) -> List[CheckResult]:
        return [c for checks in self.results.values() for c in checks]

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.all_checks())

    def to_dict(self) -> Dict:
        return {
            "results": {k: [c.to_dict() for c in v] for k, v in self.results.items()},
            "history": self.history,
            "passed": self.passed
        }


class BaseSuite(ABC):
    """Base class for all verification suites"""

    def __init__(self, suite_id: str):
        self.suite_id = suite_id
        self.config = SUITE_CONFIGS.get(suite_id, {})
        self.name = self.config.get("name", suite_id)
        self.description = self.config.get("description", "")
        self.checks: List[CheckResult] = []
        self.execution_count = 0
        self.error_count = 0

    @abstractmethod
    def run(self) -> None:
        """Run every check of the suite, recording results with check()"""
        pass

    def execute(self, state: Optional[SuiteState] = None) -> Dict[str, Any]:
        """
        Run the suite and record its checks

        Args:
            state: Shared state collecting results across suites

        Returns:
            Formatted result dictionary
        """
        self.checks = []
        self.execution_count += 1
        logger.info(f"{self.name}: starting")
        try:
            self.run()
        except Exception as e:
            logger.error(f"{self.name}: aborted: {e}")
            self.error_count += 1
            self.checks.append(CheckResult(f"{self.suite_id}: suite", math.nan, 0.0, passed=False, detail=str(e)))

        failed = [c for c in self.checks if not c.passed]
        for c in failed:
            logger.warning(f"{self.name}: {c!r} {c.detail}")
        logger.info(f"{self.name}: {len(self.checks) - len(failed)}/{len(self.checks)} checks passed")

        if state is not None:
            state.add_checks(self.suite_id, self.checks)
        return self.format_result(self.checks, success=not failed)

    def check(
        self,
        name: str,
        compute: Callable[[], float],
        tolerance: float,
        comparison: str = "<",
        detail: str = ""
    ) -> CheckResult:
        """
        Evaluate one check; exceptions become a failed result

        Args:
            name: Check label
            compute: Returns the measured value
            tolerance: Threshold the value is compared against
            comparison: "<" (value below tolerance) or ">" (value above)
            detail: Free-text note shown with the result

        Returns:
            The recorded CheckResult
        """
        try:
            value = float(compute())
            result = CheckResult(name, value, tolerance, comparison, detail=detail)
        except Exception as e:
            logger.debug(f"{self.name}: check '{name}' raised {type(e).__name__}: {e}")
            self.error_count += 1
            result = CheckResult(name, math.nan, tolerance, comparison, passed=False,
                                 detail=f"{type(e).__name__}: {e}")
        self.checks.append(result)
        return result

    def attempt(self, name: str, build: Callable[[], Any]) -> Optional[Any]:
        """Run a setup step; on failure record a failed check named `name` and return None"""
        try:
            return build()
        except Exception as e:
            self.error_count += 1
            self.record(name, False, detail=f"{type(e).__name__}: {e}")
            return None

    def record(self, name: str, passed: bool, value: float = math.nan, detail: str = "") -> CheckResult:
        """Record a boolean verdict as a check"""
        result = CheckResult(name, value, 0.0, "=", passed=passed, detail=detail)
        self.checks.append(result)
        return result

    def format_result(
        self,
        output: List[CheckResult],
        success: bool = True,
        error: Optional[str] = None
    ) -> Dict[str, Any]:
        return {
            "suite": self.suite_id,
            "name": self.name,
            "checks": [c.to_dict() for c in output],
            "success": success,
            "error": error,
            "timestamp": datetime.now().isoformat(),
            "executions": self.execution_count
        }

    def get_stats(self) -> Dict[str, Any]:
        """Get suite statistics"""
        return {
            "suite": self.name,
            "executions": self.execution_count,
            "checks": len(self.checks),
            "failed": sum(not c.passed for c in self.checks),
            "errors": self.error_count
        }

    def reset_stats(self):
        """Reset suite statistics"""
        self.execution_count = 0
        self.error_count = 0
        self.checks = []
        logger.info(f"{self.name}: Statistics reset")

    def __repr__(self) -> str:
        return f"{self.name} ({self.suite_id})"
