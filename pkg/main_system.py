"""
SL(2,R) Translator Lab - Main Entry Point
"""
import argparse
import logging
import sys
from datetime import datetime
from pathlib import Path
from typing import Any, Dict, List, Literal, Optional, Sequence, Tuple

import pandas as pd
from pydantic import BaseModel, ConfigDict, ValidationError

from base_suite import SuiteState
from config import CATALOG, FIELD_NAMES, PROBLEM_CONFIGS, ensure_logs_dir, settings
from invariant_families import SPECIAL_SURFACES, Family, InvariantSurface
from ode_engine import IntegratorConfig, Termination, Trajectory, sample_direction_field
from orchestrator import SuiteRunner, UnknownSuiteError
from sl2r_core import (
    DomainError,
    IntegratorError,
    KillingFieldKind,
    MatrixClass,
    Sl2Matrix,
    Sl2Point,
    Sl2rError,
    classify_matrix,
    decompose_nak,
)
from tools import ConfigFileTools, CsvTools, FormatError, JsonTools, SpecTools
from translator_lab import (
    ResidualGrid,
    ResidualReport,
    SolutionTag,
    TranslatorProblem,
    explicit_solution,
    reduction_system,
    row_columns,
    solve_reduction,
    verdict_summary,
    verify_surface,
)

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_FAILED = 1
EXIT_USAGE = 2

SOLVE_COLUMNS = ["s", "x", "y", "theta", "phi", "H", "residual"]
PORTRAIT_COLUMNS = ["y", "phi", "dy", "dphi"]
# integrator failures that leave less than this share of the range uncovered are reported, not fatal
MIN_COVERAGE = 0.1


def configure_logging(level: Optional[str] = None) -> None:
    """Stream logs to stderr; add a dated file handler when settings.log_to_file"""
    level_name = (level or ("DEBUG" if settings.debug else settings.log_level)).upper()
    handlers: List[logging.Handler] = [logging.StreamHandler(sys.stderr)]
    if settings.log_to_file:
        logs = ensure_logs_dir()
        handlers.append(logging.FileHandler(logs / f"sl2r_lab_{datetime.now().strftime('%Y%m%d')}.log"))
    logging.basicConfig(
        level=getattr(logging, level_name, logging.WARNING),
        format='%(asctime)s - %(name)s - %(levelname)s - %(message)s',
        handlers=handlers,
        force=True,
    )


class UsageError(Exception):
    """Invalid flags, config keys or argument syntax (exit code 2)"""


class RunConfig(BaseModel):
    """Merged subcommand parameters; flags override config-file values"""

    model_config = ConfigDict(extra="forbid")

    suite: str = "all"
    family: Optional[str] = None
    field: Optional[str] = None
    orientation: int = 1
    ic: Optional[str] = None
    s_range: str = "0:10"
    tol: Optional[float] = None
    method: Literal["rk4", "rk45"] = "rk45"
    step: Optional[float] = None
    surface: Optional[str] = None
    grid: Optional[str] = None
    jets: Literal["analytic", "fd"] = "analytic"
    system: str = "as"
    matrix: Optional[str] = None
    out: Optional[str] = None
    format: Literal["csv", "json", "text"] = "csv"
    log_level: Optional[str] = None

    @classmethod
    def build(cls, flags: Dict[str, Any], config_file: Optional[str] = None) -> "RunConfig":
        """
        Merge a key = value config file with command-line flags

        Args:
            flags: Parsed flags; None means "not given"
            config_file: Optional path to a config file

        Returns:
            Validated RunConfig
        """
        values: Dict[str, Any] = {}
        try:
            if config_file:
                values.update(ConfigFileTools.read(config_file))
            values.update({k: v for k, v in flags.items() if v is not None})
            return cls(**values)
        except (FormatError, ValidationError) as e:
            raise UsageError(str(e)) from e


# ============================================================================
# SURFACE SPECS
# ============================================================================

def parse_surface_spec(spec: str, family: Optional[Family] = None) -> Tuple[str, InvariantSurface]:
    """
    Resolve `name[:params]` into an invariant surface

    Special surfaces take one number (`sigma-y0:1`); explicit solutions take
    `name=value` pairs (`nv:c=1,s0=0.5`) on top of their catalog defaults.
    """
    name, _, params = spec.partition(":")
    name = name.strip().lower()
    if name not in CATALOG:
        raise UsageError(f"unknown surface '{name}'; see `catalog`")
    entry = CATALOG[name]

    if entry["kind"] == "surface":
        value = SpecTools.parse_float(params) if params.strip() else float(entry["default"])
        special = SPECIAL_SURFACES[name](value)
        if family is not None and family not in special.members:
            raise UsageError(f"{name} has no {family.value}-invariant description; "
                             f"choose from {', '.join(f.value for f in special.members)}")
        return f"{name}:{value:g}", special.member(family)

    parameters = dict(entry["defaults"])
    parameters.update(SpecTools.parse_assignments(params))
    solution = explicit_solution(SolutionTag.parse(name), **parameters)
    if family is not None and family is not solution.family:
        raise UsageError(f"{name} is {solution.family.value}-invariant, not {family.value}")
    return name, solution.surface()


def _parse_family(name: Optional[str]) -> Optional[Family]:
    if name is None:
        return None
    try:
        return Family.parse(name)
    except ValueError as e:
        raise UsageError(str(e)) from e


def _parse_field(name: Optional[str]) -> KillingFieldKind:
    if name is None:
        raise UsageError(f"--field is required; choose from {', '.join(FIELD_NAMES)}")
    try:
        return KillingFieldKind.parse(name)
    except ValueError as e:
        raise UsageError(str(e)) from e


# ============================================================================
# FACADE
# ============================================================================

class TranslatorLab:
    """
    Programmatic access to every CLI operation
    """

    def __init__(self):
        self.runner = SuiteRunner()
        self.execution_history: List[Dict[str, Any]] = []

    def _log(self, operation: str, **details):
        self.execution_history.append({"operation": operation, **details})

    def verify(self, suite: str = "all") -> SuiteState:
        """Run acceptance suites by name"""
        state = self.runner.execute(suite)
        self._log("verify", suite=suite, passed=state.passed)
        return state

    @staticmethod
    def solve_problem(family: str, field_name: Optional[str]) -> Tuple[TranslatorProblem, bool]:
        """Map --family/--field onto a reduction; family AS is the autonomous (K, dx) system"""
        if family is None:
            raise UsageError("--family is required")
        autonomous = family.strip().upper() == "AS"
        if autonomous:
            if field_name not in (None, "dx"):
                raise UsageError("the autonomous system only exists for --field dx")
            return TranslatorProblem(Family.K, KillingFieldKind.DX), True
        problem = TranslatorProblem(_parse_family(family), _parse_field(field_name))
        key = (problem.family.value, problem.field.value)
        if key not in PROBLEM_CONFIGS:
            raise UsageError(f"no reduction ODE for {key[0]}/{key[1]}; available: "
                             f"{', '.join('/'.join(k) for k in PROBLEM_CONFIGS)}")
        return problem, False

    def solve(self, config: RunConfig) -> Tuple[pd.DataFrame, Trajectory, Dict[str, Any]]:
        """
        Integrate a reduction ODE

        Returns:
            (rows with SOLVE_COLUMNS, the trajectory, metadata)
        """
        problem, autonomous = self.solve_problem(config.family, config.field)
        key = ("AS" if autonomous else problem.family.value, problem.field.value)
        names = PROBLEM_CONFIGS[key]["state"]
        if config.ic is None:
            raise UsageError(f"--ic is required, e.g. \"{','.join(f'{n}=...' for n in names)}\"")
        ic = SpecTools.parse_assignments(config.ic)
        unknown = sorted(set(ic) - set(names))
        missing = [n for n in names if n not in ic]
        if unknown or missing:
            raise UsageError(f"{'/'.join(key)} state is ({', '.join(names)}); "
                             f"missing {missing or '-'}, unknown {unknown or '-'}")
        s_span = SpecTools.parse_range(config.s_range)

        options: Dict[str, Any] = {"method": config.method}
        if config.tol is not None:
            options.update(rtol=config.tol, atol=config.tol * 1e-3)
        if config.step is not None:
            options["step"] = config.step
        try:
            integrator = IntegratorConfig(**options)
        except ValidationError as e:
            raise UsageError(str(e)) from e

        trajectory = solve_reduction(problem, [ic[n] for n in names], s_span, integrator, autonomous)
        frame = pd.DataFrame(
            [{"s": float(s), **row_columns(problem, s, u, autonomous)} for s, u in zip(trajectory.s, trajectory.states)],
            columns=SOLVE_COLUMNS,
        )
        metadata = {
            "problem": {"family": key[0], "field": key[1], "state": names, "description": PROBLEM_CONFIGS[key]["description"]},
            "config": {"ic": ic, "s_range": list(s_span), **integrator.model_dump()},
            "termination": trajectory.summary(),
        }
        self._log("solve", problem="/".join(key), termination=trajectory.termination.value)
        return frame, trajectory, metadata

    def residual(self, config: RunConfig) -> ResidualReport:
        """Residual report of a catalog surface over a grid"""
        if config.surface is None:
            raise UsageError("--surface is required")
        family = _parse_family(config.family)
        name, surface = parse_surface_spec(config.surface, family)
        problem = TranslatorProblem(surface.family, _parse_field(config.field), config.orientation)

        grid = ResidualGrid()
        if config.grid:
            blocks = [b for b in config.grid.split(",") if b.strip()]
            if all(":" not in b for b in blocks) and len(blocks) == 2:
                grid = ResidualGrid(ns=int(SpecTools.parse_float(blocks[0])), nt=int(SpecTools.parse_float(blocks[1])))
            else:
                (s0, s1, ns), (t0, t1, nt) = SpecTools.parse_grid(config.grid)
                grid = ResidualGrid(ns=ns, nt=nt, s_range=(s0, s1), t_range=(t0, t1))
        report = verify_surface(problem, surface, grid, name=name, jets=config.jets)
        self._log("residual", surface=name, problem=problem.label, certified=report.certified)
        return report

    def portrait(self, config: RunConfig) -> pd.DataFrame:
        """Normalized direction field of the autonomous system, row-major over (y, phi)"""
        if config.system.strip().lower() != "as":
            raise UsageError(f"unknown system '{config.system}'; only 'as' is planar")
        if config.grid is None:
            raise UsageError("--grid ymin:ymax:ny,phimin:phimax:nphi is required")
        (y0, y1, ny), (p0, p1, nphi) = SpecTools.parse_grid(config.grid)
        system = reduction_system(TranslatorProblem(Family.K, KillingFieldKind.DX), autonomous=True)
        samples = sample_direction_field(system, SpecTools.axis(y0, y1, ny), SpecTools.axis(p0, p1, nphi))
        frame = pd.DataFrame(
            [[d.state[0], d.state[1], d.direction[0], d.direction[1]] for d in samples],
            columns=PORTRAIT_COLUMNS,
        )
        self._log("portrait", rows=len(frame))
        return frame

    @staticmethod
    def decompose(entries: Sequence[float]) -> Tuple[Sl2Point, MatrixClass]:
        """NAK coordinates and trace class of a determinant-one matrix"""
        matrix = Sl2Matrix(*entries, tol=1e-9)
        return decompose_nak(matrix), classify_matrix(matrix)

    @staticmethod
    def catalog() -> pd.DataFrame:
        rows = []
        for name, entry in CATALOG.items():
            if entry["kind"] == "surface":
                params = f"{entry['parameter']}={entry['default']:g}"
                families = ",".join(entry["families"])
            else:
                params = ",".join(f"{k}={v:g}" for k, v in entry["defaults"].items())
                families = entry["family"]
            rows.append({"name": name, "kind": entry["kind"], "families": families,
                         "parameters": params, "provenance": entry["provenance"]})
        return pd.DataFrame(rows, columns=["name", "kind", "families", "parameters", "provenance"])

    def get_history(self, limit: int = 10) -> list:
        """Get execution history"""
        return self.execution_history[-limit:]


# ============================================================================
# CLI
# ============================================================================

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="sl2r-lab", description=settings.app_name)
    parser.add_argument("--log-level", default=None, help="DEBUG, INFO, WARNING or ERROR")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p: argparse.ArgumentParser, out: bool = True):
        p.add_argument("--config", default=None, help="key = value config file; flags take precedence")
        if out:
            p.add_argument("--out", default=None, help="output path (standard output when omitted)")

    p = sub.add_parser("verify", help="run acceptance suites")
    p.add_argument("suite", nargs="?", default=None, help="suite name or 'all'")
    common(p, out=False)

    p = sub.add_parser("solve", help="integrate a reduction ODE")
    p.add_argument("--family", default=None, help="N, K or AS (autonomous K/dx)")
    p.add_argument("--field", default=None, help="dx, dtheta, v or w")
    p.add_argument("--ic", default=None, help="initial state, e.g. x=0,y=1,phi=0")
    p.add_argument("--s-range", dest="s_range", default=None, help="s0:s1")
    p.add_argument("--tol", type=float, default=None, help="relative tolerance")
    p.add_argument("--method", default=None, help="rk45 (adaptive) or rk4 (fixed step)")
    p.add_argument("--step", type=float, default=None, help="rk4 step")
    p.add_argument("--format", default=None, help="csv or json")
    common(p)

    p = sub.add_parser("residual", help="residual H - <N, X> of a catalog surface")
    p.add_argument("--family", default=None, help="invariant description to use (N, A or K)")
    p.add_argument("--field", default=None, help="dx, dtheta, v or w")
    p.add_argument("--surface", default=None, help="catalog name with optional parameters, e.g. sigma-y0:1")
    p.add_argument("--grid", default=None, help="ns,nt or s0:s1:ns,t0:t1:nt")
    p.add_argument("--orientation", type=int, default=None, help="+1 or -1")
    p.add_argument("--jets", default=None, help="analytic or fd")
    common(p)

    p = sub.add_parser("portrait", help="direction field of the autonomous system")
    p.add_argument("--system", default=None, help="as")
    p.add_argument("--grid", default=None, help="ymin:ymax:ny,phimin:phimax:nphi")
    common(p)

    p = sub.add_parser("decompose", help="NAK coordinates of a matrix")
    p.add_argument("--matrix", default=None, help="a,b,c,d")
    common(p, out=False)

    p = sub.add_parser("catalog", help="list named surfaces and explicit solutions")
    common(p, out=False)
    return parser


def _emit(text: str, out: Optional[str]) -> None:
    if out:
        path = Path(out)
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", encoding="utf-8", newline="\n") as handle:
            handle.write(text)
        logger.info(f"wrote {path}")
    else:
        sys.stdout.write(text)


def _run(lab: TranslatorLab, command: str, config: RunConfig) -> int:
    if command == "verify":
        try:
            state = lab.verify(config.suite)
        except UnknownSuiteError as e:
            raise UsageError(e.args[0]) from e
        sys.stdout.write(SuiteRunner.format_table(state) + "\n")
        return EXIT_OK if state.passed else EXIT_FAILED

    if command == "solve":
        if config.format not in ("csv", "json"):
            raise UsageError("--format must be csv or json")
        try:
            frame, trajectory, metadata = lab.solve(config)
        except IntegratorError as e:
            logger.error(f"integration failed: {e}")
            return EXIT_FAILED
        if config.format == "csv":
            _emit(CsvTools.to_csv(frame), config.out)
        else:
            _emit(JsonTools.dumps({"metadata": metadata, "records": JsonTools.records(frame)}), config.out)
        if trajectory.termination is Termination.STEP_FAILURE:
            s_span = SpecTools.parse_range(config.s_range)
            covered = trajectory.covered_fraction(s_span)
            logger.warning(f"integrator stopped at s={trajectory.s[-1]:.6g}: {trajectory.message}")
            if covered < MIN_COVERAGE:
                return EXIT_FAILED
        return EXIT_OK

    if command == "residual":
        report = lab.residual(config)
        data = report.to_dict()
        data["verdict"] = verdict_summary(report)
        _emit(JsonTools.dumps(data), config.out)
        return EXIT_OK if report.certified else EXIT_FAILED

    if command == "portrait":
        _emit(CsvTools.to_csv(lab.portrait(config)), config.out)
        return EXIT_OK

    if command == "decompose":
        if config.matrix is None:
            raise UsageError("--matrix a,b,c,d is required")
        point, kind = lab.decompose(SpecTools.parse_floats(config.matrix, 4))
        sys.stdout.write(f"x={point.x:.17g} y={point.y:.17g} theta={point.theta:.17g}\n{kind.value}\n")
        return EXIT_OK

    frame = lab.catalog()
    for row in frame.itertuples(index=False):
        sys.stdout.write(f"{row.name:<16} {row.kind:<9} {row.families:<6} {row.parameters:<22} {row.provenance}\n")
    return EXIT_OK


def main(argv: Optional[Sequence[str]] = None) -> int:
    """
    CLI entry point

    Returns:
        0 on success or certification, 1 on failed checks, 2 on usage errors
    """
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_OK if e.code == 0 else EXIT_USAGE

    flags = {k: v for k, v in vars(args).items() if k not in ("command", "config")}
    try:
        config = RunConfig.build(flags, args.config)
        configure_logging(config.log_level)
        return _run(TranslatorLab(), args.command, config)
    except UsageError as e:
        sys.stderr.write(f"error: {e}\n")
        return EXIT_USAGE
    except (DomainError, FormatError) as e:
        # DeterminantError and bad parameters are DomainErrors
        sys.stderr.write(f"error: {e}\n")
        return EXIT_USAGE
    except Sl2rError as e:
        logger.error(f"{args.command} failed: {e}")
        return EXIT_FAILED


if __name__ == "__main__":
    sys.exit(main())
