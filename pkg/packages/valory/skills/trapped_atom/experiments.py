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

"""
This module contains the experiment runners.

EXPERIMENTS maps a verb to an experiment built from a configuration and a
number of jobs. CorrelateExperiment is left out: it also needs the emission
file to read.
"""

import dataclasses
import math
from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple, Type, Union

import numpy as np
from aea.helpers.logging import WithLogger
from joblib import Parallel, delayed

from packages.valory.skills.trapped_atom import LOGGER_NAME
from packages.valory.skills.trapped_atom.bloch import (
    BlochState,
    IntensityNoiseModel,
    PowerAxis,
    evolve_obe,
    excitation_after_pulse,
    first_fluorescence_maximum,
    mean_photons_per_period,
    rabi_curve,
)
from packages.valory.skills.trapped_atom.constants import (
    AtomicConstants,
    DetectionChainParams,
    KHZ,
    MHZ,
    NS,
    NW,
    US,
    to_angular,
    to_frequency,
)
from packages.valory.skills.trapped_atom.detection import (
    CoincidenceHistogram,
    GateSchedule,
    PeakAnalysis,
    analyze_peaks,
    correlate_records,
    detect,
    merge_histograms,
    start_stop_histogram,
)
from packages.valory.skills.trapped_atom.emitter import (
    PulseTrainConfig,
    RepumpMode,
    fit_decay_time,
    photon_number_distribution,
    simulate_block,
    simulate_population_traces,
    simulate_trajectories,
    trajectory_blocks,
)
from packages.valory.skills.trapped_atom.exceptions import AnalysisError
from packages.valory.skills.trapped_atom.exports import (
    read_emissions,
    read_key_values,
    write_csv,
    write_emissions,
    write_key_values,
)
from packages.valory.skills.trapped_atom.models import ExperimentConfig
from packages.valory.skills.trapped_atom.occupancy import (
    OccupancyMode,
    OccupancyTrace,
    SequenceTiming,
    cycles_present,
    fit_survival,
    simulate_occupancy,
    window_occupancy,
)
from packages.valory.skills.trapped_atom.random_streams import Purpose, TrajectorySeed
from packages.valory.skills.trapped_atom.raman import (
    RamanPulse,
    SublevelPopulation,
    beam2_power_for_area,
    effective_rabi_frequency,
    fit_rabi_frequency,
    fit_spectral_peaks,
    rabi_flopping_scan,
    scan_grid,
    spectroscopy_scan,
)


SUMMARY_FILE = "summary.txt"
EXACT = "exact"
PLUS_MINUS = "±"
TRACE_AREAS = {"pi": 1, "2pi": 2, "3pi": 3}
PHOTON_STATISTICS_CYCLES = 1
OCCUPANCY_BATCHES = 20


@dataclass(frozen=True)
class Metric:
    """A headline value with its uncertainty, None marking an exact value."""

    value: float
    error: Optional[float] = None
    unit: str = ""

    @property
    def is_exact(self) -> bool:
        """Check whether the value carries no uncertainty."""
        return self.error is None

    def render(self) -> str:
        """Render as '<value> ± <error> [unit]' or '<value> exact [unit]'."""
        uncertainty = EXACT if self.is_exact else f"{PLUS_MINUS} {self.error:.12g}"
        return f"{self.value:.12g} {uncertainty}" + (f" {self.unit}" if self.unit else "")

    @classmethod
    def parse(cls, text: str) -> "Metric":
        """Parse a rendered metric."""
        value, *rest = text.split()
        if rest[0] == EXACT:
            return cls(float(value), None, " ".join(rest[1:]))
        return cls(float(value), float(rest[1]), " ".join(rest[2:]))


@dataclass(frozen=True)
class RunSummary:
    """The headline results of a run and the files it produced."""

    experiment_name: str
    parameters_digest: str
    headline_metrics: Dict[str, Metric] = field(default_factory=dict)
    artifact_paths: List[Path] = field(default_factory=list)

    def __getitem__(self, name: str) -> Metric:
        """Get a metric."""
        return self.headline_metrics[name]

    def to_text(self) -> str:
        """Render the summary as key = value lines."""
        lines = [
            f"experiment = {self.experiment_name}",
            f"config_digest = {self.parameters_digest}",
        ]
        lines.extend(
            f"metric.{name} = {metric.render()}"
            for name, metric in self.headline_metrics.items()
        )
        lines.extend(
            f"artifact.{index} = {path}" for index, path in enumerate(self.artifact_paths)
        )
        return "\n".join(lines) + "\n"

    def write(self, path: Union[str, Path]) -> Path:
        """Write the summary file."""
        return write_key_values(
            path, (line.split(" = ", 1) for line in self.to_text().splitlines())
        )

    @classmethod
    def from_file(cls, path: Union[str, Path]) -> "RunSummary":
        """Read a summary file."""
        entries = read_key_values(path)
        values = dict(entries)
        return cls(
            values["experiment"],
            values["config_digest"],
            {
                key[len("metric.") :]: Metric.parse(value)
                for key, value in entries
                if key.startswith("metric.")
            },
            [Path(value) for key, value in entries if key.startswith("artifact.")],
        )


class BaseExperiment(WithLogger, ABC):
    """Base class for a seeded experiment writing CSV artifacts and a summary."""

    name: str

    def __init__(self, config: ExperimentConfig, jobs: int = 1) -> None:
        """Initialize the experiment."""
        super().__init__(default_logger_name=f"{LOGGER_NAME}.{self.name}")
        self.config = config
        self.jobs = jobs
        self._artifacts: List[Path] = []

    @property
    def output_directory(self) -> Path:
        """Get the directory of the artifacts of this experiment."""
        return self.config.output_directory / self.name

    @property
    def constants(self) -> AtomicConstants:
        """Get the atomic constants."""
        return self.config.constants

    @cached_property
    def train(self) -> PulseTrainConfig:
        """Get the pulse train, tuned to the first fluorescence maximum if requested."""
        train = self.config.train
        if not self.config.calibrate_pulse:
            return train
        pulse = train.pulse
        rabi = first_fluorescence_maximum(
            pulse.duration, train.period, self.constants, pulse.detuning
        )
        self.logger.info(
            f"Calibrated the pulse Rabi frequency to "
            f"{to_frequency(rabi) / MHZ:.3f} MHz ({rabi * pulse.duration / math.pi:.4f} pi)."
        )
        return train.with_pulse(pulse.with_rabi_frequency(rabi))

    def write_csv(
        self, file_name: str, columns: Sequence[str], data: Sequence[Sequence[float]]
    ) -> Path:
        """Write an artifact of this run."""
        path = write_csv(
            self.output_directory / file_name, columns, data, self.config.digest
        )
        self._artifacts.append(path)
        return path

    @abstractmethod
    def compute(self) -> Dict[str, Metric]:
        """Run the simulation, write the artifacts and return the headline metrics."""

    def run(self) -> RunSummary:
        """Run the experiment and write its summary."""
        self.logger.info(f"Starting experiment {self.name}.")
        self._artifacts = []
        metrics = self.compute()
        summary = RunSummary(self.name, self.config.digest, metrics, list(self._artifacts))
        path = summary.write(self.output_directory / SUMMARY_FILE)
        for artifact in summary.artifact_paths:
            self.logger.info(f"Wrote {artifact}.")
        self.logger.info(f"Finished experiment {self.name}, summary in {path}.")
        return summary


class RabiSweepExperiment(BaseExperiment):
    """Fluorescence rate against power, and the driven population traces."""

    name = "rabi"

    def compute(self) -> Dict[str, Metric]:
        """Sweep the power and integrate the optical Bloch equations."""
        config, train = self.config, self.train
        pulse = train.pulse
        powers_nw = np.linspace(0.0, config["rabi.max_power_nw"], config["rabi.points"])
        axis = PowerAxis(
            powers_nw * NW,
            to_angular(config["rabi.rabi_coefficient_mhz_per_sqrt_nw"] * MHZ)
            / math.sqrt(NW),
        )
        efficiency = config.chain.total_efficiency
        noisy = rabi_curve(
            axis,
            pulse,
            config.noise,
            self.constants,
            config["rabi.samples_per_point"],
            train.period,
            efficiency,
            config.master_seed,
        )
        noiseless = rabi_curve(
            axis, pulse, IntensityNoiseModel(0.0), self.constants, 1, train.period, efficiency
        )
        self.write_csv(
            "rabi_curve.csv",
            ("power_nw", "rate_per_s", "rate_error_per_s", "noiseless_rate_per_s"),
            (powers_nw, noisy.rates, noisy.rate_errors, noiseless.rates),
        )

        for label, multiple in TRACE_AREAS.items():
            trajectory = evolve_obe(
                BlochState.ground(),
                pulse.with_rabi_frequency(multiple * pulse.rabi_frequency),
                self.constants,
                free_decay_until=config["trace.duration_ns"] * NS,
            )
            self.write_csv(
                f"trace_{label}.csv",
                ("time_ns", "rho_ee", "rho_gg", "coherence_re", "coherence_im"),
                (
                    trajectory.times / NS,
                    trajectory.rho_ee,
                    trajectory.rho_gg,
                    trajectory.coherence_re,
                    trajectory.coherence_im,
                ),
            )

        excited, _ = excitation_after_pulse(
            np.array([pulse.rabi_frequency]), pulse.duration, self.constants, pulse.detuning
        )
        photons = mean_photons_per_period(pulse, train.period, self.constants)
        peak = int(np.argmax(noisy.rates))
        self.logger.info(f"First peak excitation efficiency {excited[0]:.4f}.")
        return {
            "first_peak_excitation_efficiency": Metric(float(excited[0])),
            "first_peak_rabi_frequency": Metric(
                to_frequency(pulse.rabi_frequency) / MHZ, unit="MHz"
            ),
            "mean_photons_per_pulse": Metric(photons),
            "peak_count_rate": Metric(photons * efficiency / train.period, unit="1/s"),
            "curve_maximum_rate": Metric(
                float(noisy.rates[peak]), float(noisy.rate_errors[peak]), "1/s"
            ),
            "curve_maximum_power": Metric(float(powers_nw[peak]), unit="nW"),
        }


class TraceExperiment(BaseExperiment):
    """Time-resolved excited population and photon-number statistics."""

    name = "trace"

    def compute(self) -> Dict[str, Metric]:
        """Average quantum-jump trajectories driven by one pulse."""
        config, train = self.config, self.train
        pulse = train.pulse
        n_trajectories = config["trace.trajectories"]
        traces = simulate_population_traces(
            pulse,
            self.constants,
            config.master_seed,
            n_trajectories,
            config["trace.duration_ns"] * NS,
        )
        reference = evolve_obe(
            BlochState.ground(),
            pulse,
            self.constants,
            free_decay_until=float(traces.times[-1]),
        )
        obe = np.interp(traces.times, reference.times, reference.rho_ee)
        mean, error = traces.mean(), traces.standard_error()
        self.write_csv(
            "population_trace.csv",
            ("time_ns", "mcwf_rho_ee", "mcwf_error", "obe_rho_ee"),
            (traces.times / NS, mean, error, obe),
        )
        decay_time, decay_error = fit_decay_time(traces)

        short_train = dataclasses.replace(train, cycles=PHOTON_STATISTICS_CYCLES)
        statistics = photon_number_distribution(
            short_train,
            self.constants,
            n_trajectories,
            config.master_seed,
            leak_probability_per_pulse=config.leak_probability,
            repump=config.repump,
            batch_size=config.batch_size,
            jobs=self.jobs,
        )
        self.write_csv(
            "photon_numbers.csv",
            ("pulses", "zero", "one", "two_or_more", "photons", "photons_squared"),
            (
                [statistics.pulses],
                [statistics.zero],
                [statistics.one],
                [statistics.two_or_more],
                [statistics.photons],
                [statistics.photons_squared],
            ),
        )
        end = int(np.searchsorted(traces.times, traces.pulse_end - NS * 1e-6))
        metrics = {
            "fitted_decay_time": Metric(decay_time / NS, decay_error / NS, "ns"),
            "excited_population_at_pulse_end": Metric(
                float(mean[end]), float(error[end])
            ),
            "obe_mean_photons_per_pulse": Metric(
                mean_photons_per_period(pulse, train.period, self.constants)
            ),
        }
        for name, (value, value_error) in statistics.summary().items():
            metrics[name] = Metric(value, value_error)
        return metrics


def _hbt_block(  # pylint: disable=too-many-arguments,too-many-locals
    train: PulseTrainConfig,
    constants: AtomicConstants,
    chain: DetectionChainParams,
    master_seed: int,
    block: range,
    leak_probability_per_pulse: float,
    repump: RepumpMode,
    survival_per_cycle: float,
    bin_width: float,
    delay_range: float,
) -> Tuple[CoincidenceHistogram, np.ndarray, np.ndarray, np.ndarray]:
    """Simulate, detect and correlate one block of triggered sequences."""
    uniforms = np.array(
        [
            TrajectorySeed(master_seed, index, Purpose.OCCUPANCY).generator().random()
            for index in block
        ]
    )
    present = cycles_present(uniforms, survival_per_cycle, train.cycles)
    records = simulate_block(
        train,
        constants,
        master_seed,
        list(block),
        leak_probability_per_pulse,
        repump,
        present,
    )
    gates = GateSchedule.from_train(train)
    histogram = CoincidenceHistogram.empty(bin_width, delay_range)
    clicks_present = np.zeros(len(block), dtype=np.int64)
    clicks_total = np.zeros(len(block), dtype=np.int64)
    for row, (record, cycles) in enumerate(zip(records, present)):
        a, b = detect(record, chain, gates, master_seed)
        histogram += start_stop_histogram(a, b, bin_width, delay_range)
        clicks = np.concatenate([a.timestamps, b.timestamps])
        clicks_total[row] = len(clicks)
        clicks_present[row] = np.count_nonzero(train.cycle_index_of(clicks) < cycles)
    return histogram, present, clicks_present, clicks_total


def _rate(counts: float, duration: float) -> Metric:
    return Metric(counts / duration, math.sqrt(counts) / duration, "1/s")


class HbtExperiment(BaseExperiment):
    """The photon correlation of triggered excitation sequences."""

    name = "hbt"

    @cached_property
    def predicted_peak_rate(self) -> float:
        """Get the click rate expected with an atom present, spurious counts included."""
        train, chain = self.train, self.config.chain
        photons = mean_photons_per_period(train.pulse, train.period, self.constants)
        return (
            photons * chain.total_efficiency / train.period
            + 2 * chain.spurious_rate_per_detector
        )

    def survival_per_cycle(self) -> float:
        """Get the configured survival, or the one fitted to the target average rate."""
        config = self.config
        if not config["hbt.fit_survival"]:
            return config.occupancy.survival_per_cycle
        survival = fit_survival(
            self.predicted_peak_rate,
            config["occupancy.target_average_rate"],
            self.train.cycles,
        )
        self.logger.info(f"Fitted survival per cycle {survival:.6f}.")
        return survival

    def simulate(
        self, survival: float
    ) -> Tuple[CoincidenceHistogram, np.ndarray, np.ndarray, np.ndarray]:
        """Run the blocks in parallel and merge them in block order."""
        config = self.config
        bin_width = config["hbt.bin_width_ns"] * NS
        delay_range = config["hbt.range_ns"] * NS
        blocks = trajectory_blocks(0, config["hbt.trajectories"], config.batch_size)
        results = Parallel(n_jobs=self.jobs)(
            delayed(_hbt_block)(
                self.train,
                self.constants,
                config.chain,
                config.master_seed,
                block,
                config.leak_probability,
                config.repump,
                survival,
                bin_width,
                delay_range,
            )
            for block in blocks
        )
        histogram = merge_histograms([result[0] for result in results])
        if histogram is None:
            histogram = CoincidenceHistogram.empty(bin_width, delay_range)
        present, clicks_present, clicks_total = (
            np.concatenate([result[column] for result in results]) for column in (1, 2, 3)
        )
        return histogram, present, clicks_present, clicks_total

    def compute(self) -> Dict[str, Metric]:  # pylint: disable=too-many-locals
        """Simulate the sequences, build the histogram and measure its peaks."""
        config, train = self.config, self.train
        survival = self.survival_per_cycle()
        histogram, present, clicks_present, clicks_total = self.simulate(survival)
        n_sequences = len(present)
        self.write_csv(
            "hbt_histogram.csv",
            ("delay_ns", "counts"),
            (histogram.delays / NS, histogram.counts),
        )
        self.write_csv(
            "hbt_counts.csv",
            ("trajectory_id", "present_cycles", "clicks_present", "clicks_total"),
            (np.arange(n_sequences), present, clicks_present, clicks_total),
        )

        window = train.excitation_window
        total_clicks = float(clicks_total.sum())
        excitation_time = n_sequences * train.cycles * window
        metrics = {
            "survival_per_cycle": Metric(survival),
            "predicted_average_rate": Metric(
                self.predicted_peak_rate * window_occupancy(survival, train.cycles),
                unit="1/s",
            ),
            "peak_rate": _rate(float(clicks_present.sum()), float(present.sum()) * window),
            "average_rate_during_excitation": _rate(total_clicks, excitation_time),
            "duty_limited_average_rate": _rate(
                total_clicks, excitation_time / train.excitation_fraction
            ),
            "long_run_average_rate": _rate(
                total_clicks,
                n_sequences * (train.total_duration + 1 / config.occupancy.capture_rate),
            ),
        }

        analysis = self.analyze(histogram)
        side_coincidences = 0 if analysis is None else analysis.side_peak_coincidences
        if analysis is not None:
            self.write_csv(
                "hbt_peaks.csv",
                ("order", "position_ns", "area"),
                (
                    analysis.peak_orders,
                    np.asarray(analysis.peak_positions) / NS,
                    analysis.peak_areas,
                ),
            )
            metrics["zero_delay_residual_ratio"] = Metric(
                analysis.zero_delay_residual_ratio, analysis.ratio_error
            )
            metrics["one_over_e_half_width"] = Metric(
                analysis.one_over_e_half_width / NS, analysis.width_error / NS, "ns"
            )
            metrics["background_per_bin"] = Metric(analysis.background_per_bin)
        target = config["hbt.target_side_coincidences"]
        metrics["side_peak_coincidences"] = Metric(float(side_coincidences))
        shortfall = analysis is None or side_coincidences < target
        if shortfall:
            self.logger.warning(
                f"Only {side_coincidences} side peak coincidences, {target} wanted."
            )
        metrics["statistics_warning"] = Metric(float(shortfall))
        return metrics

    def analyze(self, histogram: CoincidenceHistogram) -> Optional[PeakAnalysis]:
        """Measure the peaks, None when the histogram cannot be analysed."""
        try:
            return analyze_peaks(
                histogram, self.train.period, self.constants.excited_lifetime
            )
        except AnalysisError as error:
            self.logger.warning(f"Peak analysis failed: {error}")
            return None


class RamanExperiment(BaseExperiment):
    """Raman spectroscopy and Rabi flopping between the hyperfine levels."""

    SCAN = "scan"
    FLOP = "flop"

    mode: str

    def compute(self) -> Dict[str, Metric]:
        """Run the scan of the selected mode."""
        return self.scan() if self.mode == self.SCAN else self.flop()

    def scan(self) -> Dict[str, Metric]:
        """Scan the Raman frequency difference with a fixed pulse."""
        config = self.config
        params = config.lambda_params
        duration = config["raman.scan_pulse_us"] * US
        area = config["raman.scan_pulse_area"] * math.pi
        if area > 0:
            params = params.with_beam2_power(beam2_power_for_area(params, duration, area))
        grid = scan_grid(
            config["raman.scan_start_mhz"] * MHZ,
            config["raman.scan_stop_mhz"] * MHZ,
            config["raman.scan_step_khz"] * KHZ,
        )
        spectrum = spectroscopy_scan(
            SublevelPopulation.uniform(),
            RamanPulse(duration),
            params,
            config.field,
            grid,
            config.polarization,
            self.constants,
            config.raman_damping_rate,
        )
        peaks = fit_spectral_peaks(spectrum)
        self.write_csv(
            "raman_spectrum.csv",
            ("detuning_mhz", "population"),
            (spectrum.detunings / MHZ, spectrum.populations),
        )
        self.write_csv(
            "raman_peaks.csv",
            ("center_mhz", "center_error_mhz", "width_khz", "width_error_khz", "height"),
            (
                [peak.center / MHZ for peak in peaks],
                [peak.center_error / MHZ for peak in peaks],
                [peak.width / KHZ for peak in peaks],
                [peak.width_error / KHZ for peak in peaks],
                [peak.height for peak in peaks],
            ),
        )
        metrics = {
            "beam2_power": Metric(params.beam2_power / NW, unit="nW"),
            "effective_rabi_frequency": Metric(
                to_frequency(effective_rabi_frequency(params)) / KHZ, unit="kHz"
            ),
        }
        for index, peak in enumerate(peaks):
            metrics[f"peak_{index}_center"] = Metric(
                peak.center / MHZ, peak.center_error / MHZ, "MHz"
            )
            metrics[f"peak_{index}_width"] = Metric(
                peak.width / KHZ, peak.width_error / KHZ, "kHz"
            )
        return metrics

    def flop(self) -> Dict[str, Metric]:
        """Vary the duration of a pulse on the edge resonance."""
        config = self.config
        params = config.lambda_params
        durations = scan_grid(
            0.0, config["raman.flop_max_us"] * US, config["raman.flop_step_us"] * US
        )
        flopping = rabi_flopping_scan(
            params,
            durations,
            magnetic_field=config.field,
            polarization=config.polarization,
            constants=self.constants,
            damping_rate=config.raman_damping_rate,
        )
        fit = fit_rabi_frequency(flopping)
        self.write_csv(
            "raman_flopping.csv",
            ("duration_us", "population"),
            (flopping.durations / US, flopping.populations),
        )
        return {
            "fitted_rabi_frequency": Metric(
                to_frequency(fit.rabi_frequency) / KHZ,
                to_frequency(fit.rabi_frequency_error) / KHZ,
                "kHz",
            ),
            "effective_rabi_frequency": Metric(
                to_frequency(effective_rabi_frequency(params)) / KHZ, unit="kHz"
            ),
            "beam2_power": Metric(params.beam2_power / NW, unit="nW"),
        }


class RamanScanExperiment(RamanExperiment):
    """Raman spectroscopy over the Zeeman resonances."""

    name = "raman-scan"
    mode = RamanExperiment.SCAN


class RamanFlopExperiment(RamanExperiment):
    """Raman Rabi flopping on the edge resonance."""

    name = "raman-flop"
    mode = RamanExperiment.FLOP


def occupied_fraction_error(trace: OccupancyTrace, batches: int = OCCUPANCY_BATCHES) -> float:
    """Estimate the standard error of the occupied fraction from batch means."""
    edges = np.linspace(0.0, trace.duration, batches + 1)
    ends = np.append(trace.times[1:], trace.duration)
    fractions = []
    for start, stop in zip(edges[:-1], edges[1:]):
        overlap = np.clip(np.minimum(ends, stop) - np.maximum(trace.times, start), 0, None)
        fractions.append(np.sum(overlap * trace.atom_numbers) / (stop - start))
    return float(np.std(fractions, ddof=1) / math.sqrt(batches))


class OccupancyExperiment(BaseExperiment):
    """The atom number of the collisionally blockaded trap."""

    name = "occupancy"

    def compute(self) -> Dict[str, Metric]:
        """Simulate the trap over the configured span."""
        config = self.config
        model = config.occupancy
        triggered = config.occupancy_mode is OccupancyMode.TRIGGERED
        sequence = SequenceTiming.from_train(config.train) if triggered else None
        trace = simulate_occupancy(
            model,
            config["occupancy.duration_s"],
            TrajectorySeed(config.master_seed, 0),
            sequence,
        )
        self.write_csv(
            "occupancy_trace.csv",
            ("time_s", "atom_number"),
            (trace.times, trace.atom_numbers),
        )
        metrics = {
            "occupied_fraction": Metric(
                trace.occupied_fraction(), occupied_fraction_error(trace)
            ),
            "max_atom_number": Metric(float(trace.atom_numbers.max())),
            "events": Metric(float(trace.events)),
            "sequences": Metric(float(len(trace.sequence_starts))),
        }
        if triggered:
            metrics["expected_window_occupancy"] = Metric(
                window_occupancy(model.survival_per_cycle, config.train.cycles)
            )
        return metrics


class EmitExperiment(BaseExperiment):
    """Export the emission times of quantum-jump trajectories."""

    name = "emit"

    def compute(self) -> Dict[str, Metric]:
        """Simulate the trajectories and write their emissions."""
        config, train = self.config, self.train
        records = simulate_trajectories(
            train,
            self.constants,
            config["hbt.trajectories"],
            config.master_seed,
            leak_probability_per_pulse=config.leak_probability,
            repump=config.repump,
            batch_size=config.batch_size,
            jobs=self.jobs,
        )
        path = write_emissions(
            self.output_directory / "emissions.csv", records, config.digest
        )
        self._artifacts.append(path)
        emissions = sum(len(record) for record in records)
        pulses = len(records) * train.pulse_count
        return {
            "trajectories": Metric(float(len(records))),
            "mean_photons_per_pulse": Metric(
                emissions / pulses, math.sqrt(emissions) / pulses
            ),
        }


class CorrelateExperiment(BaseExperiment):
    """Detect and correlate previously exported emissions."""

    name = "correlate"

    def __init__(
        self, config: ExperimentConfig, emissions: Union[str, Path], jobs: int = 1
    ) -> None:
        """Initialize the experiment."""
        super().__init__(config, jobs)
        self.emissions = Path(emissions)

    def compute(self) -> Dict[str, Metric]:
        """Run the detection chain and the peak analysis on the emission file."""
        config = self.config
        digest, records = read_emissions(self.emissions)
        if digest != config.digest:
            self.logger.warning(
                f"{self.emissions} was produced with configuration {digest}."
            )
        histogram = correlate_records(
            records,
            config.chain,
            GateSchedule.from_train(config.train),
            config.master_seed,
            config["hbt.bin_width_ns"] * NS,
            config["hbt.range_ns"] * NS,
        )
        self.write_csv(
            "hbt_histogram.csv",
            ("delay_ns", "counts"),
            (histogram.delays / NS, histogram.counts),
        )
        analysis = analyze_peaks(
            histogram, config.train.period, self.constants.excited_lifetime
        )
        return {
            "zero_delay_residual_ratio": Metric(
                analysis.zero_delay_residual_ratio, analysis.ratio_error
            ),
            "one_over_e_half_width": Metric(
                analysis.one_over_e_half_width / NS, analysis.width_error / NS, "ns"
            ),
            "side_peak_coincidences": Metric(float(analysis.side_peak_coincidences)),
        }


EXPERIMENTS: Dict[str, Type[BaseExperiment]] = {
    RabiSweepExperiment.name: RabiSweepExperiment,
    TraceExperiment.name: TraceExperiment,
    HbtExperiment.name: HbtExperiment,
    RamanScanExperiment.name: RamanScanExperiment,
    RamanFlopExperiment.name: RamanFlopExperiment,
    OccupancyExperiment.name: OccupancyExperiment,
    EmitExperiment.name: EmitExperiment,
}


def run_rabi_sweep(config: ExperimentConfig, jobs: int = 1) -> RunSummary:
    """Run the Rabi sweep."""
    return RabiSweepExperiment(config, jobs).run()


def run_traces(config: ExperimentConfig, jobs: int = 1) -> RunSummary:
    """Run the time-resolved traces."""
    return TraceExperiment(config, jobs).run()


def run_hbt(config: ExperimentConfig, jobs: int = 1) -> RunSummary:
    """Run the photon correlation experiment."""
    return HbtExperiment(config, jobs).run()


def run_raman(config: ExperimentConfig, mode: str = RamanExperiment.SCAN) -> RunSummary:
    """Run a Raman scan, mode 'scan' or 'flop'."""
    if mode not in (RamanExperiment.SCAN, RamanExperiment.FLOP):
        raise ValueError(f"Unknown Raman mode {mode!r}.")
    return EXPERIMENTS[f"raman-{mode}"](config).run()


def run_occupancy(config: ExperimentConfig, jobs: int = 1) -> RunSummary:
    """Run the trap occupancy simulation."""
    return OccupancyExperiment(config, jobs).run()
