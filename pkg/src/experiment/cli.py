"""Command line entry point: ``ham <subcommand>``."""

import logging
from contextlib import contextmanager
from pathlib import Path
from typing import Any, Dict, Iterator, List, Optional

import typer
from pydantic import ValidationError

from src.common.errors import HamError
from src.common.logger import get_logger, set_log_level
from src.experiment import commands
from src.experiment.config import ExperimentConfig, load_config

app = typer.Typer(
    add_completion=False, help="Adversarial training with hard example mining."
)

logger = get_logger(__name__)

ConfigOption = typer.Option(None, "--config", help="YAML experiment config.")
PresetOption = typer.Option(None, "--preset", help="Packaged preset to start from.")
SeedOption = typer.Option(None, "--seed", help="Override train.seed.")
OutOption = typer.Option(None, "--out", help="Output directory.")


@contextmanager
def _expected_faults() -> Iterator[None]:
    """Turn expected faults into a logged message and exit status 1."""
    try:
        yield
    except (HamError, ValidationError, FileNotFoundError) as e:
        logger.error(str(e))
        raise typer.Exit(code=1)


def _config(
    config: Optional[Path],
    preset: Optional[str],
    seed: Optional[int] = None,
    output_dir: Optional[Path] = None,
) -> ExperimentConfig:
    overrides: Dict[str, Any] = {}
    if seed is not None:
        overrides["train"] = {"seed": seed}
    if output_dir is not None:
        overrides["output_dir"] = str(output_dir)
    return load_config(config, preset, overrides)


def _optional_config(
    config: Optional[Path], preset: Optional[str]
) -> Optional[ExperimentConfig]:
    if config is None and preset is None:
        return None
    return load_config(config, preset)


@app.callback()
def main(verbose: bool = typer.Option(False, "--verbose", "-v")) -> None:
    if verbose:
        set_log_level(logging.DEBUG)


@app.command()
def train(
    config: Optional[Path] = ConfigOption,
    preset: Optional[str] = PresetOption,
    seed: Optional[int] = SeedOption,
    resume: bool = typer.Option(
        False, "--resume", help="Continue from last checkpoint."
    ),
    out: Optional[Path] = typer.Option(
        None, "--out", help="Parent of the run directory."
    ),
) -> None:
    """Train one configuration."""
    with _expected_faults():
        run_dir = commands.cmd_train(_config(config, preset, seed, out), resume=resume)
        typer.echo(str(run_dir))


@app.command()
def evaluate(
    checkpoint: Path = typer.Argument(..., help="Checkpoint file."),
    config: Optional[Path] = ConfigOption,
    preset: Optional[str] = PresetOption,
    out: Optional[Path] = OutOption,
) -> None:
    """Fairness tables of a checkpoint under the evaluation attack."""
    with _expected_faults():
        loaded = _optional_config(config, preset)
        report = commands.cmd_evaluate(checkpoint, loaded, out)
        for key, value in report.summary().items():
            typer.echo(f"{key}: {value:.4f}")


@app.command()
def diagnose(
    checkpoint: Path = typer.Argument(..., help="Checkpoint file."),
    config: Optional[Path] = ConfigOption,
    preset: Optional[str] = PresetOption,
    out: Optional[Path] = OutOption,
    split: str = typer.Option("test", "--split", help="train or test."),
) -> None:
    """Confidence scatter, over-confidence per class and minimal-step histogram."""
    with _expected_faults():
        commands.cmd_diagnose(checkpoint, _optional_config(config, preset), out, split)


@app.command()
def ablate(
    sweep: Path = typer.Argument(..., help="YAML sweep spec."),
    config: Optional[Path] = ConfigOption,
    preset: Optional[str] = PresetOption,
    seed: Optional[int] = SeedOption,
    jobs: int = typer.Option(1, "--jobs", help="Child runs trained at once."),
    out: Optional[Path] = typer.Option(None, "--out", help="Parent of the sweep."),
) -> None:
    """Train a grid of child runs over one mining parameter."""
    with _expected_faults():
        root = commands.cmd_ablate(_config(config, preset, seed, out), sweep, jobs)
        typer.echo(str(root))


@app.command()
def plot(
    directory: Path = typer.Argument(..., help="Run or ablation directory."),
    series: Optional[List[str]] = typer.Option(
        None, "--series", help="Series to draw."
    ),
) -> None:
    """Render figures from plot-data files."""
    with _expected_faults():
        for path in commands.cmd_plot(directory, series):
            typer.echo(str(path))


@app.command()
def report(
    run_dirs: List[Path] = typer.Argument(
        ..., help="Runs; the first is the reference."
    ),
    out: Path = typer.Option(Path("report"), "--out", help="Output directory."),
) -> None:
    """Compare runs: fairness, attack steps and wall time."""
    with _expected_faults():
        frame = commands.cmd_report(run_dirs, out)
        typer.echo(frame.to_string(index=False))


if __name__ == "__main__":
    app()
