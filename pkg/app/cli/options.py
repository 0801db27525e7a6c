"""
Value parsing shared by the commands: integer ranges "a..b", comma lists "a,b,c"
and single values. Malformed input is a usage error (exit code 2).
"""

import secrets
from typing import Callable, List, Optional, Sequence, TypeVar

import typer
from rich.console import Console

T = TypeVar("T")

console = Console()
error_console = Console(stderr=True)


def parse_list(raw: str, cast: Callable[[str], T], name: str) -> List[T]:
    try:
        values = [cast(token.strip()) for token in raw.split(",") if token.strip()]
    except ValueError as e:
        raise typer.BadParameter(f"'{raw}' is not a comma separated list. (Error: {e})", param_hint=name) from e
    if not values:
        raise typer.BadParameter("empty list", param_hint=name)
    return values


def parse_range(raw: str, name: str) -> List[int]:
    """ "2..5" -> [2, 3, 4, 5]; "2,4" -> [2, 4]; "3" -> [3]"""
    if ".." not in raw:
        return parse_list(raw, int, name)
    low, _, high = raw.partition("..")
    try:
        start, stop = int(low), int(high)
    except ValueError as e:
        raise typer.BadParameter(f"'{raw}' is not a range a..b of integers.", param_hint=name) from e
    if stop < start:
        raise typer.BadParameter(f"'{raw}' is an empty range.", param_hint=name)
    return list(range(start, stop + 1))


def optional_range(raw: Optional[str], name: str) -> Optional[List[int]]:
    return None if raw is None else parse_range(raw, name)


def require(values: Sequence[float], predicate: Callable[[float], bool], message: str, name: str):
    bad = [v for v in values if not predicate(v)]
    if bad:
        raise typer.BadParameter(f"{bad} {message}", param_hint=name)


def require_choice(value: str, choices: Sequence[str], name: str) -> str:
    if value not in choices:
        raise typer.BadParameter(f"'{value}' is not one of {', '.join(choices)}.", param_hint=name)
    return value


def draw_seed() -> int:
    return secrets.randbits(63)
