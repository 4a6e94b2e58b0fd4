"""
Command-line front end.

    python -m market_base.cli solve  instance.json [--trace trace.json] [--out outcome.json]
    python -m market_base.cli verify instance.json outcome.json
    python -m market_base.cli audit  instance.json trace.json
    python -m market_base.cli gen    [--config config.json | --sellers 2 --buyers 2 ...] --seed 1
    python -m market_base.cli oracle instance.json
    python -m market_base.cli check  instance.json

Machine output (JSON) goes to stdout or --out; diagnostics go to stderr.
"""
import sys
from enum import IntEnum
from pathlib import Path
from typing import Optional

import typer

from market_base.exceptions import (
    EnumerationGuardError,
    GeneratorConfigError,
    InstanceParseError,
    InternalInvariantError,
    MarketError,
)
from market_base.instance_generator import FamilyWeights, GeneratorConfig, generate
from market_base.market_model import validate_instance
from market_base.market_serializer import (
    dump_document,
    outcome_to_dict,
    read_instance,
    read_outcome,
    read_trace,
    write_instance,
    write_outcome,
    write_trace,
)
from market_base.price_adjustment_solver import PriceAdjustmentSolver
from market_base.stability_verifier import StabilityVerifier
from utilities.logger import LoggerFactory

logger = LoggerFactory.get_logger("market_base.cli")

app = typer.Typer(
    add_completion=False,
    no_args_is_help=True,
    help="Pairwise-stable outcomes for two-sided markets with integer prices.",
)


class ExitCode(IntEnum):
    OK = 0
    UNSTABLE = 1
    INPUT_ERROR = 2
    INTERNAL_FAILURE = 3
    GUARD_REFUSED = 4


# -----------------------------------------------------------------------------
# Helpers
# -----------------------------------------------------------------------------
def _fail(message: str, code: ExitCode):
    logger.error(f"❌ {message}")
    raise typer.Exit(int(code))


def _read(path: Path) -> bytes:
    try:
        return path.read_bytes()
    except OSError as exc:
        _fail(f"Cannot read {path}: {exc.strerror or exc}", ExitCode.INPUT_ERROR)


def _emit(document: bytes, out: Optional[Path]):
    if out is None:
        sys.stdout.write(document.decode("utf-8"))
        sys.stdout.flush()
        return
    try:
        out.write_bytes(document)
    except OSError as exc:
        _fail(f"Cannot write {out}: {exc.strerror or exc}", ExitCode.INPUT_ERROR)


def _load_instance(path: Path):
    try:
        return read_instance(_read(path))
    except InstanceParseError as exc:
        _fail(f"{path}: {exc}", ExitCode.INPUT_ERROR)


OutOption = typer.Option(None, "--out", "-o", help="Write machine output here instead of stdout.")


# -----------------------------------------------------------------------------
# Commands
# -----------------------------------------------------------------------------
@app.command()
def solve(
    instance_path: Path = typer.Argument(..., help="Instance JSON."),
    trace: Optional[Path] = typer.Option(None, "--trace", help="Also write the per-pass trace here."),
    out: Optional[Path] = OutOption,
):
    """Run the price-adjustment algorithm and print the stable outcome."""
    inst = _load_instance(instance_path)
    try:
        outcome, iteration_trace = PriceAdjustmentSolver(inst, logger=logger).run()
    except InternalInvariantError as exc:
        _fail(f"Internal failure after {len(exc.states)} passes: {exc}", ExitCode.INTERNAL_FAILURE)
    except MarketError as exc:
        _fail(str(exc), ExitCode.INPUT_ERROR)

    if trace is not None:
        try:
            trace.write_bytes(write_trace(iteration_trace))
        except OSError as exc:
            _fail(f"Cannot write {trace}: {exc.strerror or exc}", ExitCode.INPUT_ERROR)
    _emit(write_outcome(outcome), out)


@app.command()
def verify(
    instance_path: Path = typer.Argument(..., help="Instance JSON."),
    outcome_path: Path = typer.Argument(..., help="Outcome JSON."),
    out: Optional[Path] = OutOption,
):
    """Check an outcome for individual rationality and blocking pairs."""
    inst = _load_instance(instance_path)
    try:
        outcome = read_outcome(_read(outcome_path))
        report = StabilityVerifier(inst, logger=logger).verify(outcome)
    except MarketError as exc:
        _fail(f"{outcome_path}: {exc}", ExitCode.INPUT_ERROR)

    _emit(dump_document(report.to_dict()), out)
    if not report.stable:
        logger.warning(f"❌ Outcome is not stable: {len(report.witnesses)} blocking witnesses")
        raise typer.Exit(int(ExitCode.UNSTABLE))


@app.command()
def audit(
    instance_path: Path = typer.Argument(..., help="Instance JSON."),
    trace_path: Path = typer.Argument(..., help="Trace JSON written by solve --trace."),
    out: Optional[Path] = OutOption,
):
    """Replay a solver trace and report the first broken guarantee."""
    inst = _load_instance(instance_path)
    try:
        iteration_trace = read_trace(_read(trace_path), inst)
        report = StabilityVerifier(inst, logger=logger).audit_trace(iteration_trace)
    except MarketError as exc:
        _fail(f"{trace_path}: {exc}", ExitCode.INPUT_ERROR)

    _emit(dump_document(report.to_dict()), out)
    if not report.ok:
        raise typer.Exit(int(ExitCode.UNSTABLE))


@app.command()
def gen(
    config: Optional[Path] = typer.Option(None, "--config", help="Generator config JSON; flags are ignored when given."),
    seed: Optional[int] = typer.Option(None, "--seed", help="Seed; overrides the config file's seed."),
    sellers: int = typer.Option(2, "--sellers"),
    buyers: int = typer.Option(2, "--buyers"),
    lo: int = typer.Option(0, "--lo", help="Lowest price bound."),
    hi: int = typer.Option(10, "--hi", help="Highest price bound."),
    linear: float = typer.Option(1.0, "--linear", help="Weight of the linear family."),
    piecewise: float = typer.Option(1.0, "--piecewise", help="Weight of the piecewise-linear family."),
    exponential: float = typer.Option(1.0, "--exponential", help="Weight of the exponential family."),
    out: Optional[Path] = OutOption,
):
    """Generate a random instance, deterministically from the seed."""
    try:
        if config is not None:
            settings = GeneratorConfig.from_json(_read(config))
            if seed is not None:
                settings = settings.model_copy(update={"seed": seed})
        else:
            settings = GeneratorConfig(
                seed=seed or 0,
                num_sellers=sellers,
                num_buyers=buyers,
                price_range=(lo, hi),
                family_weights=FamilyWeights(linear=linear, piecewise_linear=piecewise, exponential=exponential),
            )
        inst = generate(settings)
    except GeneratorConfigError as exc:
        _fail(str(exc), ExitCode.INPUT_ERROR)
    except ValueError as exc:
        _fail(f"Invalid generator flags: {exc}", ExitCode.INPUT_ERROR)

    _emit(write_instance(inst), out)


@app.command()
def oracle(
    instance_path: Path = typer.Argument(..., help="Instance JSON; at most a handful of pairs."),
    out: Optional[Path] = OutOption,
):
    """Enumerate every stable outcome of a tiny instance."""
    inst = _load_instance(instance_path)
    report = validate_instance(inst)
    if not report.ok:
        _fail("Instance rejected: " + "; ".join(report.violations), ExitCode.INPUT_ERROR)
    try:
        outcomes = StabilityVerifier(inst, logger=logger).enumerate_stable_outcomes()
    except EnumerationGuardError as exc:
        _fail(str(exc), ExitCode.GUARD_REFUSED)

    _emit(dump_document({"outcomes": [outcome_to_dict(o) for o in outcomes]}), out)


@app.command()
def check(
    instance_path: Path = typer.Argument(..., help="Instance JSON."),
    out: Optional[Path] = OutOption,
):
    """Validate an instance and list every violation."""
    inst = _load_instance(instance_path)
    report = validate_instance(inst)
    _emit(dump_document(report.to_dict()), out)
    if not report.ok:
        raise typer.Exit(int(ExitCode.UNSTABLE))


if __name__ == "__main__":
    app()
