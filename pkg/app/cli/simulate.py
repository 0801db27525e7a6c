from pathlib import Path
from typing import Optional

import typer

from app.cli.options import console, draw_seed, error_console, require_choice
from app.core.constants import EXIT_FAILURE
from app.core.logging import Logger
from app.framework.errors import ExclusionGapError, InvalidParams
from app.services.orchestrator import SpectralOrchestrator
from app.services.simulate import CENTER_OF_MASS, LATTICE_MODE, OMEGA_H0, PROFILE_MODE, SimulationPlan
from app.services.state_space import EnsembleParams

logger = Logger(name="SimulateCommand")


def simulate(
    q: float = typer.Option(0.5, "--q", help="Anisotropy in (0, 1)."),
    L: int = typer.Option(1, "--L", min=1),
    H: int = typer.Option(2, "--H", min=1),
    N: int = typer.Option(1, "--N", min=0),
    mode: str = typer.Option(PROFILE_MODE, "--mode", help="profile | lattice"),
    seed: Optional[int] = typer.Option(None, "--seed", min=0, help="Random seed; drawn and echoed when omitted."),
    t_burn: float = typer.Option(10.0, "--t-burn"),
    t_run: float = typer.Option(1000.0, "--t-run"),
    sample_dt: float = typer.Option(0.1, "--sample-dt"),
    observable: str = typer.Option(OMEGA_H0, "--observable", help="omega_h0 | center_of_mass"),
    out: Optional[Path] = typer.Option(None, "--out", help="Output stem; writes <stem>_series.csv and <stem>_estimate.json."),
):
    """ Gillespie run of the exclusion or profile dynamics and the fitted relaxation rate."""

    require_choice(mode, (PROFILE_MODE, LATTICE_MODE), "--mode")
    require_choice(observable, (OMEGA_H0, CENTER_OF_MASS), "--observable")
    if seed is None:
        seed = draw_seed()
        console.print(f"seed: {seed}")

    try:
        params = EnsembleParams.create(q=q, L=L, H=H, N=N)
        plan = SimulationPlan.create(params=params, mode=mode, seed=seed, t_burn=t_burn, t_run=t_run, sample_dt=sample_dt, observable=observable)
        orchestrator, _ = SpectralOrchestrator.create("simulate", params=plan.model_dump(mode="json", exclude={"seed"}), seed=seed, out=out)
        series, estimate, payload = orchestrator.run_simulation(plan)
        series_path, estimate_path = orchestrator.write_simulation(series, payload)
    except InvalidParams as e:
        raise typer.BadParameter(str(e)) from e
    except ExclusionGapError as e:
        logger.error(f"[!] simulate failed: {e}")
        error_console.print(f"[red]simulate failed:[/red] {e}")
        raise typer.Exit(EXIT_FAILURE)

    line = f"rate={estimate.rate:.6g} stderr={estimate.stderr:.2g} n_samples={estimate.n_samples}"
    if "exact_gap" in payload:
        line += f" exact_gap={payload['exact_gap']:.6g} ratio={payload['ratio']:.4f}"
    console.print(line, soft_wrap=True)
    console.print(f"Wrote {series_path} and {estimate_path}", soft_wrap=True)
