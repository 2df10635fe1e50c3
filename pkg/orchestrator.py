"""
Suite Runner - Resolves suite names and runs the acceptance suites
"""
import logging
from typing import Dict, Any, List, Optional, Type

import pandas as pd

from base_suite import BaseSuite, SuiteState
from config import SUITE_CONFIGS
from geometry_suite import ConnectionSuite, FrameMetricSuite, KillingSuite
from ode_suite import OdeSuite
from surface_suite import ClosedFormSuite, SpecialSurfaceSuite
from translator_suite import (
    APolynomialSuite,
    CmcSuite,
    PsiVariantSuite,
    RefutationSuite,
    TranslatorCertificationSuite,
)

logger = logging.getLogger(__name__)


SUITE_CLASSES: Dict[str, Type[BaseSuite]] = {
    "frame-metric": FrameMetricSuite,
    "connection": ConnectionSuite,
    "killing": KillingSuite,
    "closed-forms": ClosedFormSuite,
    "special-surfaces": SpecialSurfaceSuite,
    "translators": TranslatorCertificationSuite,
    "refutations": RefutationSuite,
    "cmc": CmcSuite,
    "a-family-poly": APolynomialSuite,
    "ntheta-psi": PsiVariantSuite,
    "ode": OdeSuite,
}


class UnknownSuiteError(KeyError):
    """Raised for a suite name that is not registered"""


class SuiteRunner:
    """
    Runs verification suites in registration order
    and collects their checks into a shared SuiteState
    """

    def __init__(self, suites: Optional[Dict[str, Type[BaseSuite]]] = None):
        self.suite_classes = dict(suites if suites is not None else SUITE_CLASSES)
        self.suites: Dict[str, BaseSuite] = {}

    @property
    def names(self) -> List[str]:
        return list(self.suite_classes)

    def resolve(self, name: str) -> List[str]:
        """
        Expand a suite name into the ordered list of suites to run

        Args:
            name: A registered suite id or "all"

        Returns:
            Suite ids in registration order
        """
        if name == "all":
            return self.names
        if name not in self.suite_classes:
            raise UnknownSuiteError(f"unknown suite '{name}'; choose from: all, {', '.join(self.names)}")
        return [name]

    def get_suite(self, suite_id: str) -> BaseSuite:
        if suite_id not in self.suites:
            self.suites[suite_id] = self.suite_classes[suite_id]()
        return self.suites[suite_id]

    def execute(self, name: str, state: Optional[SuiteState] = None) -> SuiteState:
        """
        Run the named suites

        Args:
            name: Suite id or "all"
            state: Optional state to extend

        Returns:
            State holding every check that ran
        """
        plan = self.resolve(name)
        state = state if state is not None else SuiteState()
        logger.info(f"Running {len(plan)} suite(s): {', '.join(plan)}")

        for step, suite_id in enumerate(plan, 1):
            logger.info(f"Suite {step}/{len(plan)}: {suite_id}")
            result = self.get_suite(suite_id).execute(state)
            if not result["success"]:
                logger.warning(f"Suite '{suite_id}' has failing checks")

        state.context["suites"] = plan
        return state

    @staticmethod
    def summary_table(state: SuiteState) -> pd.DataFrame:
        """One row per check: suite, check, value, tolerance, result"""
        rows = [
            {
                "suite": suite,
                "check": c.name,
                "value": c.value,
                "tolerance": c.tolerance,
                "comparison": c.comparison,
                "result": "PASS" if c.passed else "FAIL",
            }
            for suite, checks in state.results.items() for c in checks
        ]
        return pd.DataFrame(rows, columns=["suite", "check", "value", "tolerance", "comparison", "result"])

    @staticmethod
    def format_table(state: SuiteState) -> str:
        """Plain-text rendering of the per-check table"""
        lines = []
        for suite, checks in state.results.items():
            title = SUITE_CONFIGS.get(suite, {}).get("name", suite)
            lines.append(f"== {title} ==")
            for c in checks:
                status = "PASS" if c.passed else "FAIL"
                value = "-" if c.comparison == "=" else f"{c.value:.3e}"
                bound = "" if c.comparison == "=" else f" {c.comparison} {c.tolerance:.1e}"
                note = f"  ({c.detail})" if c.detail and not c.passed else ""
                lines.append(f"  {status}  {c.name}: {value}{bound}{note}")
        checks = state.all_checks()
        failed = sum(not c.passed for c in checks)
        lines.append(f"{len(checks) - failed}/{len(checks)} checks passed")
        return "\n".join(lines)

    def get_execution_summary(self, state: SuiteState) -> Dict[str, Any]:
        """Counts per suite"""
        return {
            "suites_run": state.context.get("suites", []),
            "checks": len(state.all_checks()),
            "failed": sum(not c.passed for c in state.all_checks()),
            "passed": state.passed,
            "per_suite": {suite_id: suite.get_stats() for suite_id, suite in self.suites.items()},
        }
