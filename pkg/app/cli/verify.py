from typing import List, Optional

import typer
from rich.table import Table

from app.cli.options import console, error_console
from app.core.constants import EXIT_FAILURE
from app.core.logging import Logger
from app.framework.checks import select_checks
from app.framework.errors import ExclusionGapError, InvalidParams
from app.services.orchestrator import SpectralOrchestrator

logger = Logger(name="Verify")


def verify(
    filters: Optional[List[str]] = typer.Option(None, "--filter", help="Check name or tag; repeatable."),
    list_checks: bool = typer.Option(False, "--list", help="List the registered checks and exit."),
    corrupt: Optional[str] = typer.Option(None, "--corrupt", hidden=True),
):
    """ Run the identity suite on the built-in grid; exit 0 iff every instance passes."""

    try:
        orchestrator, _ = SpectralOrchestrator.create("verify", params={"filter": filters or [], "corrupt": corrupt})
    except ExclusionGapError as e:
        error_console.print(f"[red]verify failed:[/red] {e}")
        raise typer.Exit(EXIT_FAILURE)

    selected = select_checks(filters)
    if filters and not selected:
        raise typer.BadParameter(f"no check matches {filters}", param_hint="--filter")

    if list_checks:
        table = Table(title="Registered checks")
        table.add_column("name", no_wrap=True)
        table.add_column("tags")
        table.add_column("description")
        for check_cls in selected:
            table.add_row(check_cls.name, ", ".join(check_cls.tags), check_cls.description)
        console.print(table)
        return

    try:
        results = orchestrator.run_verify(filters, corrupt=corrupt)
    except InvalidParams as e:
        raise typer.BadParameter(str(e), param_hint="--corrupt") from e

    for result in results:
        colour = "green" if result.passed else "red"
        console.print(
            f"{result.name:<24} {result.instance:<40} {result.deviation:10.3e}  [{colour}]{result.status}[/{colour}]",
            soft_wrap=True,
        )

    summary = Table(title="Verify summary")
    summary.add_column("check", no_wrap=True)
    summary.add_column("instances", justify="right")
    summary.add_column("max deviation", justify="right")
    summary.add_column("status", no_wrap=True)
    for name in dict.fromkeys(result.name for result in results):
        rows = [result for result in results if result.name == name]
        worst = max(result.deviation for result in rows)
        status = "PASS" if all(result.passed for result in rows) else "FAIL"
        summary.add_row(name, str(len(rows)), f"{worst:.3e}", status)
    console.print(summary)

    failed = [result for result in results if not result.passed]
    if failed:
        logger.error(f"[!] {len(failed)} of {len(results)} instances failed")
        raise typer.Exit(EXIT_FAILURE)
