"""Chosen-plaintext attack commands: ``attack``, ``break`` and ``bound``."""

from __future__ import annotations

import json
from pathlib import Path
from typing import Any, cast

import numpy as np
import typer
from rich import print

try:
    import yaml as _yaml
except ImportError:  # pragma: no cover - optional at runtime
    yaml: Any | None = None
else:  # pragma: no cover - simple assignment
    yaml = cast(Any, _yaml)

from ..attack import (
    DifferenceParams,
    break_ciphertext,
    failure_probability_bound,
    probe_count,
    run_attack_with_retry,
)
from ..config import get_settings
from ..ekeystore import load_equivalent_key, save_equivalent_key
from ..errors import AmbiguousChannelError, NotABijectionError
from ..image import require_dims
from ..imageio import load_ppm, save_ppm
from ..keyfile import load_key
from ..models.report import AttackReport, StageName, StageRecord, VerificationResult
from ..oracle import CountingOracle, KeyedOracle
from ..utils.files import write_text_atomic
from .common import console, handle_cli_errors, parse_dims

HIDDEN_KEY_OPTION = typer.Option(
    ..., "--key", help="Secret key file held by the in-process oracle (the attack never reads it)"
)
DIMS_OPTION = typer.Option(..., "--dims", help="Image size as MxN (rows x columns)")
D1_OPTION = typer.Option(None, "--d1", min=0, max=255, help="First solid value (default: 127)")
D2_OPTION = typer.Option(None, "--d2", min=0, max=255, help="Second solid value (default: 0)")
REPORT_OPTION = typer.Option(
    None, "--report", help="Report path, JSON or .yaml/.yml (default: OUT/report.json)"
)
EKEY_OUT_OPTION = typer.Option(..., "--out", help="Directory for the equivalent-key files")
VERIFY_IN_OPTION = typer.Option(
    None,
    "--in",
    help="Optional plain PPM: encrypt it under the hidden key and check the break is exact",
)
EKEY_OPTION = typer.Option(
    ..., "--key", "--ekey", help="Equivalent-key directory written by `cbx attack`"
)
CIPHER_IN_OPTION = typer.Option(..., "--in", help="Cipher PPM to break")
PLAIN_OUT_OPTION = typer.Option(..., "--out", help="Recovered plain PPM path")


def register(app: typer.Typer) -> None:
    app.command("attack")(attack)
    app.command("break")(break_command)
    app.command("bound")(bound)


def write_report(path: Path, report: AttackReport) -> Path:
    data = report.model_dump(mode="json")
    if path.suffix.lower() in {".yaml", ".yml"}:
        if yaml is None:  # pragma: no cover - fallback path when dependency missing
            raise typer.BadParameter("PyYAML is required to write YAML reports")
        text = cast(str, yaml.safe_dump(data, sort_keys=False))
    else:
        text = json.dumps(data, indent=2) + "\n"
    return write_text_atomic(path, text)


@handle_cli_errors
def attack(
    key_path: Path = HIDDEN_KEY_OPTION,
    dims: str = DIMS_OPTION,
    d1: int | None = D1_OPTION,
    d2: int | None = D2_OPTION,
    out_dir: Path = EKEY_OUT_OPTION,
    report_path: Path | None = REPORT_OPTION,
    verify_path: Path | None = VERIFY_IN_OPTION,
) -> None:
    """Recover an equivalent key from a chosen-plaintext oracle under KEY."""

    settings = get_settings()
    size = parse_dims(dims)
    primary = settings.primary_params(d1, d2)
    fallback = settings.fallback_params()
    report_path = report_path or out_dir / "report.json"

    oracle = CountingOracle(KeyedOracle(load_key(key_path), size))
    stages: list[StageRecord] = []

    def on_stage(name: str, seconds: float) -> None:
        stages.append(StageRecord.model_validate({"name": name, "seconds": round(seconds, 6)}))

    def base_report(params: DifferenceParams) -> dict[str, Any]:
        return {
            "dims": size,
            "query_count": oracle.queries,
            "expected_queries": 2 + probe_count(size),
            "d1": params.d1,
            "d2": params.d2,
            "d": params.d,
            "period": params.period,
            "stages": stages,
        }

    try:
        outcome = run_attack_with_retry(oracle, primary, fallback, on_stage=on_stage)
    except (AmbiguousChannelError, NotABijectionError) as exc:
        if isinstance(exc, AmbiguousChannelError):
            failed_stage: StageName = "selector"
            params, steps = fallback, list(exc.steps)
        else:
            # A retry spends two queries on the abandoned pair before the fallback run.
            retried = oracle.queries > 2 + probe_count(size)
            failed_stage = "permutation"
            params, steps = (fallback if retried else primary), []
        stages.append(StageRecord(name=failed_stage, status="failed"))
        failed = AttackReport(**base_report(params), ambiguity_steps=steps, error=str(exc))
        write_report(report_path, failed)
        raise

    outputs = {name: str(path) for name, path in save_equivalent_key(out_dir, outcome.key).items()}
    outputs["report"] = str(report_path)
    verification = None
    if verify_path is not None:
        plain = load_ppm(verify_path)
        require_dims(plain, size)
        # Encrypted outside the counted oracle: this ciphertext is the target, not a query.
        recovered = break_ciphertext(oracle.inner.query(plain), outcome.key)
        differing = int(np.count_nonzero(recovered.flat() != plain.flat()))
        verification = VerificationResult(
            source=str(verify_path), differing_bytes=differing, total_bytes=plain.size
        )

    report = AttackReport(
        **base_report(outcome.params),
        success=verification is None or verification.exact,
        ambiguity_steps=outcome.ambiguity_steps,
        outputs=outputs,
        verification=verification,
    )
    write_report(report_path, report)

    print(
        f"[green]Recovered equivalent key[/green] for {size[0]}x{size[1]} with "
        f"{report.query_count} chosen plain-images "
        f"(d1={report.d1}, d2={report.d2}, T={report.period})"
    )
    if verification is not None:
        colour = "green" if verification.exact else "red"
        print(
            f"[{colour}]Verification:[/{colour}] {verification.differing_bytes} of "
            f"{verification.total_bytes} bytes differ"
        )
        if not verification.exact:
            raise typer.Exit(1)


@handle_cli_errors
def break_command(
    ekey_path: Path = EKEY_OPTION,
    in_path: Path = CIPHER_IN_OPTION,
    out_path: Path = PLAIN_OUT_OPTION,
) -> None:
    """Decrypt a ciphertext with a recovered equivalent key."""

    ek = load_equivalent_key(ekey_path)
    save_ppm(out_path, break_ciphertext(load_ppm(in_path), ek))
    console.print(f"Recovered {in_path} -> {out_path}")


@handle_cli_errors
def bound(
    dims: str = DIMS_OPTION,
    d1: int | None = D1_OPTION,
    d2: int | None = D2_OPTION,
) -> None:
    """Print the difference period and the failure-probability bound for an image size."""

    size = parse_dims(dims)
    params = get_settings().primary_params(d1, d2)
    probability = failure_probability_bound(size[0] * size[1], params.period)
    print(f"D={params.d} T={params.period} probes={probe_count(size)}")
    print(f"Prob(MN) <= {probability:.4e}")


__all__ = ["attack", "bound", "break_command", "register", "write_report"]
