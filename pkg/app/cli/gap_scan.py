from pathlib import Path
from typing import Optional

import typer

from app.cli.options import console, error_console, optional_range, parse_list, parse_range, require, require_choice
from app.core.config import settings
from app.core.constants import (
    AUTO_METHOD,
    BERNOULLI_LAPLACE_FORM,
    DENSE_METHOD,
    EXIT_FAILURE,
    FULL_FORM,
    ITERATIVE_METHOD,
    MODIFIED_FORM,
)
from app.core.logging import Logger
from app.framework.errors import ExclusionGapError, InvalidParams
from app.services.orchestrator import SpectralOrchestrator

logger = Logger(name="GapScan")


def gap_scan(
    q: str = typer.Option("0.5", "--q", help="Anisotropy values in (0, 1), comma separated."),
    L: str = typer.Option("2..3", "--L", help="Stick counts, a..b or a,b,c."),
    H: str = typer.Option("2", "--H", help="Heights, a..b or a,b,c."),
    N: Optional[str] = typer.Option(None, "--N", help="Particle numbers; default 1..ceil(LH/2)."),
    form: str = typer.Option(FULL_FORM, "--form", help="full | modified | bernoulli-laplace"),
    solver: str = typer.Option(AUTO_METHOD, "--solver", help="auto | dense | iterative"),
    jobs: int = typer.Option(settings.MAX_JOBS, "--jobs", min=1, help="Concurrent sector solves."),
    keep_going: bool = typer.Option(False, "--keep-going", help="Exit 0 even when some cells fail."),
    out: Optional[Path] = typer.Option(None, "--out", help="Output file; default under EXGAP_OUTPUT_DIR."),
    fmt: str = typer.Option("csv", "--format", help="csv | json"),
):
    """ Tabulate gap and gamma = 1/gap for every sector, with one sup row per (L, H)."""

    q_values = parse_list(q, float, "--q")
    require(q_values, lambda v: 0.0 < v < 1.0, "outside (0, 1)", "--q")
    L_values, H_values = parse_range(L, "--L"), parse_range(H, "--H")
    require(L_values, lambda v: v >= 1, "below 1", "--L")
    require(H_values, lambda v: v >= 1, "below 1", "--H")
    N_values = optional_range(N, "--N")
    require_choice(form, (FULL_FORM, MODIFIED_FORM, BERNOULLI_LAPLACE_FORM), "--form")
    require_choice(solver, (AUTO_METHOD, DENSE_METHOD, ITERATIVE_METHOD), "--solver")
    require_choice(fmt, ("csv", "json"), "--format")

    params = {"q": q_values, "L": L_values, "H": H_values, "N": N_values, "form": form, "solver": solver, "jobs": jobs}
    try:
        orchestrator, _ = SpectralOrchestrator.create("gap-scan", params=params, out=out, fmt=fmt)
        result = orchestrator.run_scan(q_values, L_values, H_values, N_values, form=form, method=solver, jobs=jobs)
        path = orchestrator.write_scan(result)
    except InvalidParams as e:
        raise typer.BadParameter(str(e)) from e
    except ExclusionGapError as e:
        logger.error(f"[!] gap-scan failed: {e}")
        error_console.print(f"[red]gap-scan failed:[/red] {e}")
        raise typer.Exit(EXIT_FAILURE)

    for row in result.sup_rows():
        console.print(f"q={row['q']} L={row['L']} H={row['H']}  gamma={row['gamma']:.6g}  dim<={row['dim']}", soft_wrap=True)
    console.print(f"Wrote {len(result.rows)} rows to {path}", soft_wrap=True)

    if result.failures:
        for failure in result.failures:
            error_console.print(f"[red]FAILED[/red] {failure}", soft_wrap=True)
        if not keep_going:
            raise typer.Exit(EXIT_FAILURE)
