# -*- coding: utf-8 -*-
# ------------------------------------------------------------------------------
#
#   Copyright 2024 Valory AG
#
#   Licensed under the Apache License, Version 2.0 (the "License");
#   you may not use this file except in compliance with the License.
#   You may obtain a copy of the License at
#
#       http://www.apache.org/licenses/LICENSE-2.0
#
#   Unless required by applicable law or agreed to in writing, software
#   distributed under the License is distributed on an "AS IS" BASIS,
#   WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
#   See the License for the specific language governing permissions and
#   limitations under the License.
#
# ------------------------------------------------------------------------------

"""Command line interface of the trapped atom simulator."""

import logging
from pathlib import Path
from typing import Any, Callable, Dict, Optional

import click
from aea.helpers.logging import setup_logger

from packages.valory.skills.trapped_atom import LOGGER_NAME
from packages.valory.skills.trapped_atom.exceptions import (
    ConfigurationError,
    TrappedAtomError,
)
from packages.valory.skills.trapped_atom.experiments import (
    BaseExperiment,
    CorrelateExperiment,
    EXPERIMENTS,
    RunSummary,
)
from packages.valory.skills.trapped_atom.models import (
    DEFAULT_CONFIG_FILE,
    ExperimentConfig,
)


ERROR_EXIT_CODE = 2
TRAJECTORY_KEYS = {
    "trace": "trace.trajectories",
    "hbt": "hbt.trajectories",
    "emit": "hbt.trajectories",
    "correlate": "hbt.trajectories",
}


def report_error(error: TrappedAtomError) -> None:
    """Print one machine-readable line per failure."""
    failures = (
        error.errors if isinstance(error, ConfigurationError) else [("-", str(error))]
    )
    for field, message in failures:
        click.echo(
            f"error: type={type(error).__name__} field={field} message={message}",
            err=True,
        )


def load_config(
    verb: str,
    config: Optional[Path],
    seed: Optional[int],
    out: Optional[Path],
    trajectories: Optional[int],
) -> ExperimentConfig:
    """Load the configuration of a verb and apply the command line overrides."""
    overrides: Dict[str, Any] = {}
    if seed is not None:
        overrides["run.master_seed"] = seed
    if out is not None:
        overrides["run.output_directory"] = str(out)
    if trajectories is not None and verb in TRAJECTORY_KEYS:
        overrides[TRAJECTORY_KEYS[verb]] = trajectories
    return ExperimentConfig.from_file(config or DEFAULT_CONFIG_FILE, **overrides)


def common_options(function: Callable) -> Callable:
    """Add the options shared by the experiment verbs."""
    options = [
        click.option(
            "--config",
            "config",
            type=click.Path(exists=True, dir_okay=False, path_type=Path),
            help="Configuration file, the shipped defaults otherwise.",
        ),
        click.option("--seed", type=int, help="Master seed override."),
        click.option(
            "--out",
            type=click.Path(file_okay=False, path_type=Path),
            help="Output directory override.",
        ),
        click.option("--trajectories", type=int, help="Number of trajectories override."),
        click.option(
            "--jobs",
            type=int,
            default=1,
            show_default=True,
            help="Parallel jobs; outputs do not depend on it.",
        ),
    ]
    for option in reversed(options):
        function = option(function)
    return function


def execute(build: Callable[[], BaseExperiment]) -> RunSummary:
    """Run an experiment, turning its failures into error lines and exit code 2."""
    try:
        summary = build().run()
    except TrappedAtomError as error:
        report_error(error)
        raise click.exceptions.Exit(ERROR_EXIT_CODE) from error
    click.echo(summary.to_text(), nl=False)
    return summary


@click.group(name="trapped-atom")
@click.option("--verbose", is_flag=True, help="Log at debug level.")
def cli(verbose: bool) -> None:
    """Simulate a single trapped atom used as a photon source and a qubit."""
    logger = setup_logger(LOGGER_NAME)
    logger.setLevel(logging.DEBUG if verbose else logging.INFO)


def _experiment_command(verb: str, help_text: str) -> None:
    """Register a verb running one of the registered experiments."""

    @cli.command(name=verb, help=help_text)
    @common_options
    def command(  # pylint: disable=too-many-arguments
        config: Optional[Path],
        seed: Optional[int],
        out: Optional[Path],
        trajectories: Optional[int],
        jobs: int,
    ) -> None:
        def build() -> BaseExperiment:
            return EXPERIMENTS[verb](
                load_config(verb, config, seed, out, trajectories), jobs
            )

        execute(build)


_experiment_command("rabi", "Sweep the drive power and trace pi, 2pi and 3pi pulses.")
_experiment_command("trace", "Average the excited population of quantum-jump trajectories.")
_experiment_command("hbt", "Correlate the photons of triggered excitation sequences.")
_experiment_command("raman-scan", "Scan the Raman resonances between the hyperfine levels.")
_experiment_command("raman-flop", "Drive Raman Rabi flopping on the edge resonance.")
_experiment_command("occupancy", "Simulate the atom number of the trap.")
_experiment_command("emit", "Export the emission times of quantum-jump trajectories.")


@cli.command(name="correlate")
@click.argument(
    "emissions", type=click.Path(exists=True, dir_okay=False, path_type=Path)
)
@common_options
def correlate(  # pylint: disable=too-many-arguments
    emissions: Path,
    config: Optional[Path],
    seed: Optional[int],
    out: Optional[Path],
    trajectories: Optional[int],
    jobs: int,
) -> None:
    """Run the detection chain and the peak analysis on an emission file."""
    execute(
        lambda: CorrelateExperiment(
            load_config("correlate", config, seed, out, trajectories), emissions, jobs
        )
    )


@cli.command(name="config")
@click.option("--seed", type=int, help="Master seed of the written configuration.")
@click.option(
    "--out",
    type=click.Path(dir_okay=False, path_type=Path),
    help="File to write, standard output otherwise.",
)
def write_config(seed: Optional[int], out: Optional[Path]) -> None:
    """Write the default configuration."""
    try:
        overrides = {} if seed is None else {"run.master_seed": seed}
        config = ExperimentConfig.from_file(DEFAULT_CONFIG_FILE, **overrides)
    except TrappedAtomError as error:
        report_error(error)
        raise click.exceptions.Exit(ERROR_EXIT_CODE) from error
    if out is None:
        click.echo(config.to_text(), nl=False)
    else:
        config.save(out)


def main() -> None:
    """Run the command line interface."""
    cli()  # pylint: disable=no-value-for-parameter


if __name__ == "__main__":
    main()
