"""Key generation, encryption and decryption commands."""

from __future__ import annotations

from pathlib import Path

import typer

from ..cipher import decrypt, encrypt
from ..imageio import load_ppm, save_ppm
from ..keyfile import format_key, generate_key, load_key, save_key
from .common import console, handle_cli_errors

KEY_OPTION = typer.Option(..., "--key", help="Key file (name=value lines)")
IN_OPTION = typer.Option(..., "--in", help="Input binary PPM (P6, maxval 255)")
OUT_OPTION = typer.Option(..., "--out", help="Output PPM path")
SEED_OPTION = typer.Option(None, "--seed", help="Seed for a reproducible key (default: OS entropy)")
KEYGEN_OUT_OPTION = typer.Option(None, "--out", help="Write the key here instead of stdout")


def register(app: typer.Typer) -> None:
    app.command("keygen")(keygen)
    app.command("encrypt")(encrypt_command)
    app.command("decrypt")(decrypt_command)


@handle_cli_errors
def keygen(
    seed: int | None = SEED_OPTION,
    out: Path | None = KEYGEN_OUT_OPTION,
) -> None:
    """Generate a random secret key."""

    key = generate_key(seed)
    if out is None:
        typer.echo(format_key(key), nl=False)
        return
    save_key(out, key)
    console.print(f"Key written to {out}")


@handle_cli_errors
def encrypt_command(
    key_path: Path = KEY_OPTION,
    in_path: Path = IN_OPTION,
    out_path: Path = OUT_OPTION,
) -> None:
    """Encrypt a PPM image."""

    key = load_key(key_path)
    save_ppm(out_path, encrypt(load_ppm(in_path), key))
    console.print(f"Encrypted {in_path} -> {out_path}")


@handle_cli_errors
def decrypt_command(
    key_path: Path = KEY_OPTION,
    in_path: Path = IN_OPTION,
    out_path: Path = OUT_OPTION,
) -> None:
    """Decrypt a PPM image."""

    key = load_key(key_path)
    save_ppm(out_path, decrypt(load_ppm(in_path), key))
    console.print(f"Decrypted {in_path} -> {out_path}")


__all__ = ["decrypt_command", "encrypt_command", "keygen", "register"]
