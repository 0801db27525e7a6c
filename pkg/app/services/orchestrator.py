import json
from pathlib import Path
from typing import Any, Dict, List, Literal, Optional, Sequence, Tuple

import pandas as pd
from pydantic import BaseModel, ConfigDict

from app.core.config import settings
from app.core.constants import AUTO_METHOD, BERNOULLI_LAPLACE_FORM, FULL_FORM, GAP_SCAN_COLUMNS, SERIES_COLUMNS, XXZ_COLUMNS
from app.core.logging import Logger
from app.framework.checks import Check, CheckResult, select_checks
from app.framework.context import RunContext
from app.framework.errors import CapExceeded, DegenerateSector, ExclusionGapError, InvalidParams
from app.framework.workflows import WorkflowRunner
from app.services.checks import quantum, recursion, stochastic, trend  # noqa: F401  (registers the suite)
from app.services.operators.lattice import profile_generator
from app.services.simulate import RelaxationEstimate, SimulationPlan, SimulationSeries, gillespie_run, relaxation_estimate
from app.services.spectral.solvers import dense_gap
from app.services.spectral.variational import (
    ScanResult,
    band_ratio,
    bernoulli_laplace_scan,
    diagonal_gap_table,
    gamma_scan,
    xxz_gap_table,
)

logger = Logger(name="Spectral Orchestrator")



# --------------------------------------------------------------------------------
#        Run Config Start
# --------------------------------------------------------------------------------


class RunConfig(BaseModel):
    """ Parameter echo of one command, plus where and how its output is written."""
    model_config = ConfigDict(frozen=True)

    command: str
    params: Dict[str, Any] = {}
    seed: Optional[int] = None
    out: Optional[Path] = None
    format: Literal["csv", "json"] = "csv"

    def output_path(self, suffix: str) -> Path:
        if self.out is not None:
            return Path(self.out)
        return Path(settings.OUTPUT_DIR) / f"{self.command}.{suffix}"


# --------------------------------------------------------------------------------
#        Run Config End
# --------------------------------------------------------------------------------



# --------------------------------------------------------------------------------
#        Output Start
# --------------------------------------------------------------------------------


def write_table(rows: List[Dict[str, Any]], columns: Sequence[str], path: Path, header: Dict[str, Any], fmt: str = "csv") -> Path:
    """ CSV with '#' header lines, or one JSON document {header, rows}."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    frame = pd.DataFrame(rows, columns=list(columns))

    if fmt == "json":
        payload = {"header": header, "rows": json.loads(frame.to_json(orient="records"))}
        path.write_text(json.dumps(payload, indent=2) + "\n")
    else:
        with path.open("w", newline="") as handle:
            for key, value in header.items():
                handle.write(f"# {key}: {json.dumps(value, sort_keys=True)}\n")
            frame.to_csv(handle, index=False, lineterminator="\n")

    logger.output(f"Wrote {len(rows)} rows to {path}")
    return path


def write_json(payload: Dict[str, Any], path: Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")
    logger.output(f"Wrote {path}")
    return path


# --------------------------------------------------------------------------------
#        Output End
# --------------------------------------------------------------------------------



# --------------------------------------------------------------------------------
#        Spectral Orchestrator Start
# --------------------------------------------------------------------------------


class SpectralOrchestrator:
    def __init__(self, config: RunConfig, context: RunContext, runner: WorkflowRunner):
        """ Initialize the orchestrator with the run config, its context and the workflow runner."""

        self.config = config
        self.context = context
        self.runner = runner


    @classmethod
    def create(cls, command: str, params: Optional[Dict[str, Any]] = None, seed: Optional[int] = None, out: Optional[Path] = None, fmt: str = "csv"):
        """ Factory method building the config, the context and the runner of one command."""

        try:
            try:
                config = RunConfig(command=command, params=params or {}, seed=seed, out=out, format=fmt)
            except Exception as e:
                logger.error(f"Failed to build run config: {e}")
                raise InvalidParams(f"(SpectralOrchestrator) Failed to build run config. Please check the parameters. (Error: {e})") from e
            try:
                context = RunContext(command, params=config.params, seed=seed)
                runner = WorkflowRunner(context)
                context.success("(SpectralOrchestrator) Context and workflow runner initialized.")
            except Exception as e:
                logger.error(f"Failed to initialize context: {e}")
                raise ExclusionGapError(f"(SpectralOrchestrator) Failed to initialize context. (Error: {e})") from e
        except ExclusionGapError:
            raise
        except Exception as e:
            logger.error(f"Failed to initialize orchestrator: {e}")
            raise ExclusionGapError(f"(SpectralOrchestrator) Failed to initialize orchestrator. (Error: {e})") from e

        self = cls(config, context, runner)
        return self, context.log


    # Gap scan
    def run_scan(
        self,
        q_values: Sequence[float],
        L_values: Sequence[int],
        H_values: Sequence[int],
        N_values: Optional[Sequence[int]] = None,
        form: str = FULL_FORM,
        method: str = AUTO_METHOD,
        jobs: int = 1,
    ) -> ScanResult:
        merged = ScanResult()
        if form == BERNOULLI_LAPLACE_FORM:
            results = [bernoulli_laplace_scan(L_values, method=method, jobs=jobs, context=self.context)]
        else:
            results = [
                gamma_scan(q, L_values, H_values, form=form, method=method, N_values=N_values, jobs=jobs, context=self.context)
                for q in q_values
            ]
        for result in results:
            merged.rows.extend(result.rows)
            merged.failures.extend(result.failures)

        gammas = [row["gamma"] for row in merged.sup_rows()]
        self.context.info(f"(SpectralOrchestrator) {len(merged.rows)} rows, {len(merged.failures)} failures, sup band ratio {band_ratio(gammas):.3f}")
        return merged


    def write_scan(self, result: ScanResult) -> Path:
        return write_table(result.rows, GAP_SCAN_COLUMNS, self.config.output_path(self.config.format), self.context.header(), self.config.format)


    # Quantum tables
    def run_xxz(
        self,
        Delta_values: Sequence[float],
        twiceS_values: Sequence[int],
        H_values: Sequence[int],
        sectors: Optional[Sequence[int]] = None,
        diagonal: bool = False,
        R_values: Sequence[int] = (1,),
    ) -> List[Dict[str, Any]]:
        if diagonal:
            rows = diagonal_gap_table(Delta_values, twiceS_values, R_values, H_values, sectors)
            column = "gap_times_R2_over_S"
        else:
            rows = xxz_gap_table(Delta_values, twiceS_values, H_values, sectors)
            column = "gap_over_S"

        worst = max((row["equivalence_residual"] for row in rows), default=0.0)
        self.context.info(f"(SpectralOrchestrator) {len(rows)} rows, worst equivalence residual {worst:.2e}, {column} band ratio {band_ratio([row[column] for row in rows]):.3f}")
        if worst > settings.EIGEN_TOL:
            self.context.error(f"(SpectralOrchestrator) Equivalence residual {worst:.2e} above {settings.EIGEN_TOL:.0e}")
        return rows


    def write_xxz(self, rows: List[Dict[str, Any]]) -> Path:
        return write_table(rows, XXZ_COLUMNS, self.config.output_path(self.config.format), self.context.header(), self.config.format)


    # Verify suite
    def run_verify(self, selectors: Optional[List[str]] = None, corrupt: Optional[str] = None) -> List[CheckResult]:
        """ Instantiate the selected checks (the one named by `corrupt` gets a perturbed operator) and run them in sequence."""
        checks: List[Check] = []
        for check_cls in select_checks(selectors):
            try:
                checks.append(check_cls(corrupt=check_cls.name == corrupt))
            except Exception as e:
                self.context.error(f"(SpectralOrchestrator) Check '{check_cls.name}' not ready: {e}")

        if corrupt is not None and corrupt not in {check.name for check in checks}:
            raise InvalidParams(f"(SpectralOrchestrator) Unknown check '{corrupt}' for fault injection.")

        results = self.runner.run_sequence(checks)
        failed = sum(not result.passed for result in results)
        self.context.info(f"(SpectralOrchestrator) {len(checks)} checks, {len(results)} instances, {failed} failed")
        return results


    # Simulation
    def run_simulation(self, plan: SimulationPlan) -> Tuple[SimulationSeries, RelaxationEstimate, Dict[str, Any]]:
        series = gillespie_run(plan)
        estimate = relaxation_estimate(series)

        payload: Dict[str, Any] = {
            "header": self.context.header(volatile=False),
            **estimate.model_dump(mode="json"),
            "events": series.events,
        }
        exact = self.exact_gap(plan)
        if exact is not None:
            payload["exact_gap"] = exact
            payload["ratio"] = estimate.rate / exact

        self.context.success(f"(SpectralOrchestrator) Simulated {series.events} events, rate {estimate.rate:.4f} +- {estimate.stderr:.4f}")
        return series, estimate, payload


    def exact_gap(self, plan: SimulationPlan) -> Optional[float]:
        """ Dense profile gap when the sector fits under DENSE_CAP."""
        try:
            return float(dense_gap(profile_generator(plan.params, cap=settings.DENSE_CAP)).gap)
        except (CapExceeded, DegenerateSector) as e:
            self.context.info(f"(SpectralOrchestrator) No exact gap for {plan.params}: {e}")
            return None


    def write_simulation(self, series: SimulationSeries, payload: Dict[str, Any]) -> Tuple[Path, Path]:
        """ `<stem>_series.csv` and `<stem>_estimate.json`; both reproducible from the seed."""
        base = self.config.output_path("csv")
        stem = base.parent / base.stem
        rows = [{"t": t, "value": v} for t, v in zip(series.times.tolist(), series.values.tolist())]
        series_path = write_table(rows, SERIES_COLUMNS, Path(f"{stem}_series.csv"), self.context.header(volatile=False), "csv")
        estimate_path = write_json(payload, Path(f"{stem}_estimate.json"))
        return series_path, estimate_path


# --------------------------------------------------------------------------------
#        Spectral Orchestrator End
# --------------------------------------------------------------------------------
