"""
Command line entry point.

    python main.py gap-scan --q 0.5 --L 2..4 --H 2..3
    python main.py xxz --delta 1.25,2,5 --twice-s 1..3 --H 2
    python main.py verify [--filter k-spectrum] [--list]
    python main.py simulate --q 0.5 --L 2 --H 3 --N 3 --seed 7
"""

import typer

from app.cli.gap_scan import gap_scan
from app.cli.simulate import simulate
from app.cli.verify import verify
from app.cli.xxz import xxz
from app.core.constants import TOOL_NAME

cli = typer.Typer(
    name=TOOL_NAME,
    help="Spectral gaps of the anisotropic exclusion process, its profile chain and the kink XXZ Hamiltonians.",
    add_completion=False,
    no_args_is_help=True,
)

cli.command("gap-scan")(gap_scan)
cli.command("xxz")(xxz)
cli.command("verify")(verify)
cli.command("simulate")(simulate)


if __name__ == "__main__":
    cli()
