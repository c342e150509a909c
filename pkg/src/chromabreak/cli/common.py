from __future__ import annotations

import logging
import re
from collections.abc import Callable
from functools import wraps
from typing import ParamSpec, TypeVar

import typer
from pydantic import ValidationError
from rich.console import Console
from rich.logging import RichHandler
from rich.markup import escape

from ..config import get_settings
from ..errors import AmbiguousChannelError, ChromaBreakError, NotABijectionError
from ..image import Dims

console = Console()

CommandParams = ParamSpec("CommandParams")
CommandReturn = TypeVar("CommandReturn")

_DIMS_PATTERN = re.compile(r"^\s*(\d+)\s*[xX]\s*(\d+)\s*$")


def configure_logging(level: int | str) -> None:
    """Route library logging through a rich handler on stderr."""

    logging.basicConfig(
        level=level,
        format="%(message)s",
        handlers=[RichHandler(console=Console(stderr=True), show_path=False)],
        force=True,
    )


def parse_dims(value: str) -> Dims:
    """Parse ``MxN`` (rows x columns)."""

    match = _DIMS_PATTERN.match(value)
    if not match:
        raise typer.BadParameter(f"Dimensions must look like MxN (e.g. 512x512), got {value!r}")
    m, n = int(match.group(1)), int(match.group(2))
    if m < 1 or n < 1:
        raise typer.BadParameter("Dimensions must be positive")
    return m, n


def _render_error(exc: Exception) -> None:
    console.print(f"[red]Error:[/red] {escape(str(exc))}")


def handle_cli_errors(
    func: Callable[CommandParams, CommandReturn],
) -> Callable[CommandParams, CommandReturn]:
    @wraps(func)
    def wrapper(*args: CommandParams.args, **kwargs: CommandParams.kwargs) -> CommandReturn:
        try:
            return func(*args, **kwargs)
        except typer.BadParameter:
            raise
        except typer.Exit:
            raise
        except AmbiguousChannelError as exc:
            _render_error(exc)
            console.print(f"Ambiguous steps: {', '.join(str(step) for step in exc.steps)}")
            console.print("Retry with another --d1/--d2 pair (an odd difference is best).")
            raise typer.Exit(1) from None
        except NotABijectionError as exc:
            _render_error(exc)
            console.print("The position map does not match this key and image size.")
            raise typer.Exit(1) from None
        except ValidationError as exc:
            console.print(f"[red]Error:[/red] Invalid value: {escape(str(exc))}")
            raise typer.Exit(1) from None
        except (ChromaBreakError, OSError) as exc:
            _render_error(exc)
            raise typer.Exit(1) from None
        except Exception as exc:
            if get_settings().debug:
                raise
            console.print(f"[red]Error:[/red] Unexpected failure: {escape(str(exc))}")
            console.print("Set CHROMABREAK_DEBUG=1 for a stack trace.")
            raise typer.Exit(1) from exc

    return wrapper


__all__ = ["configure_logging", "console", "handle_cli_errors", "parse_dims"]
