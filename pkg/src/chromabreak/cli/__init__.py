from __future__ import annotations

import logging

import typer

from ..config import get_settings
from . import attack, cipher
from .common import configure_logging

app = typer.Typer(
    help="chromabreak CLI: chaotic colour-image cipher and its chosen-plaintext break"
)

VERBOSE_OPTION = typer.Option(
    0, "--verbose", "-v", count=True, help="Log progress (-v) or full detail (-vv) to stderr"
)

cipher.register(app)
attack.register(app)


@app.callback()
def common(ctx: typer.Context, verbose: int = VERBOSE_OPTION) -> None:
    """Initialize logging and shared Typer context state."""

    if verbose >= 2:
        level: int | str = logging.DEBUG
    elif verbose == 1:
        level = logging.INFO
    else:
        level = get_settings().log_level.upper()
    configure_logging(level)
    ctx.ensure_object(dict)


__all__ = ["app", "attack", "cipher"]
