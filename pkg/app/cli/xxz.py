from pathlib import Path
from typing import Optional

import typer

from app.cli.options import console, error_console, optional_range, parse_list, parse_range, require, require_choice
from app.core.constants import EXIT_FAILURE
from app.core.logging import Logger
from app.framework.errors import DegenerateSector, ExclusionGapError, InvalidParams
from app.services.orchestrator import SpectralOrchestrator

logger = Logger(name="XXZ")


def xxz(
    delta: str = typer.Option("2.0", "--delta", help="Anisotropies Delta > 1, comma separated."),
    twice_s: str = typer.Option("1", "--twice-s", help="Values of 2S, a..b or a,b,c."),
    H: str = typer.Option("2", "--H", help="Chain lengths (or region heights with --diagonal)."),
    sector: Optional[str] = typer.Option(None, "--sector", help="Sectors 2n; default all non-extreme (chain) or the one nearest 0 (diagonal)."),
    diagonal: bool = typer.Option(False, "--diagonal", help="Diagonal interface on the region |x1 - x2| <= R."),
    R: str = typer.Option("1", "--R", help="Region half-widths for --diagonal."),
    out: Optional[Path] = typer.Option(None, "--out", help="Output file; default under EXGAP_OUTPUT_DIR."),
    fmt: str = typer.Option("csv", "--format", help="csv | json"),
):
    """ Sector gaps of the kink Hamiltonians, read through the ground-state transform."""

    Delta_values = parse_list(delta, float, "--delta")
    require(Delta_values, lambda v: v > 1.0, "not above 1", "--delta")
    twiceS_values, H_values = parse_range(twice_s, "--twice-s"), parse_range(H, "--H")
    require(twiceS_values, lambda v: v >= 1, "below 1", "--twice-s")
    require(H_values, lambda v: v >= 1, "below 1", "--H")
    R_values = parse_range(R, "--R")
    require(R_values, lambda v: v >= 1, "below 1", "--R")
    sectors = optional_range(sector, "--sector")
    require_choice(fmt, ("csv", "json"), "--format")

    params = {"Delta": Delta_values, "twiceS": twiceS_values, "H": H_values, "sectors": sectors, "diagonal": diagonal, "R": R_values if diagonal else None}
    try:
        orchestrator, _ = SpectralOrchestrator.create("xxz", params=params, out=out, fmt=fmt)
        rows = orchestrator.run_xxz(Delta_values, twiceS_values, H_values, sectors, diagonal=diagonal, R_values=R_values)
        path = orchestrator.write_xxz(rows)
    except (InvalidParams, DegenerateSector) as e:
        raise typer.BadParameter(str(e)) from e
    except ExclusionGapError as e:
        logger.error(f"[!] xxz failed: {e}")
        error_console.print(f"[red]xxz failed:[/red] {e}")
        raise typer.Exit(EXIT_FAILURE)

    for row in rows:
        console.print(
            f"Delta={row['Delta']} 2S={row['twiceS']} H={row['H']} R={row['R']} 2n={row['sector_2n']}  "
            f"gap={row['gap']:.10g}  residual={row['equivalence_residual']:.1e}",
            soft_wrap=True,
        )
    console.print(f"Wrote {len(rows)} rows to {path}", soft_wrap=True)

    if orchestrator.context.failed:
        raise typer.Exit(EXIT_FAILURE)
