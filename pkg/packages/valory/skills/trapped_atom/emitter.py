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
Quantum-jump simulation of the photons emitted by the trapped atom.

Trajectories are propagated in blocks: the amplitudes of all trajectories of
a block advance together, pulse by pulse, under the effective non-Hermitian
Hamiltonian

    H_eff = [[0, Omega / 2], [Omega / 2, -Delta - i Gamma / 2]]

in the basis (|g>, |e>). A photon is emitted when the squared norm of the
unnormalised state drops below a uniform threshold; the state then resets to
|g> and a new threshold is drawn.
"""

import logging
import math
from dataclasses import dataclass
from enum import Enum
from typing import Any, Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np
from aea.exceptions import enforce
from joblib import Parallel, delayed
from scipy.optimize import curve_fit

from packages.valory.skills.trapped_atom import LOGGER_NAME
from packages.valory.skills.trapped_atom.bloch import (
    DEFAULT_PULSE_DURATION,
    SquarePulse,
)
from packages.valory.skills.trapped_atom.constants import AtomicConstants, NS, US
from packages.valory.skills.trapped_atom.exceptions import (
    ConfigurationError,
    DomainError,
)
from packages.valory.skills.trapped_atom.random_streams import (
    Purpose,
    TrajectorySeed,
    UniformBuffer,
)


_logger = logging.getLogger(f"{LOGGER_NAME}.emitter")

JUMP_TIME_TOLERANCE = 1e-3  # in units of the lifetime
JUMP_BISECTIONS = 3
MIN_GRID_POINTS = 16
DEFAULT_BATCH_SIZE = 128
MIN_ENSEMBLE_SIZE = 100
WINDOW_RATIO_TOLERANCE = 1e-9


class RepumpMode(Enum):
    """When an atom leaked to the dark hyperfine level is pumped back."""

    PULSE = "pulse"
    WINDOW = "window"


@dataclass(frozen=True)
class PulseTrainConfig:
    """A gated train of identical pulses."""

    pulse: SquarePulse = SquarePulse(math.pi / DEFAULT_PULSE_DURATION)
    period: float = 200 * NS
    excitation_window: float = 115 * US
    cooling_window: float = 885 * US
    cycles: int = 100

    def __post_init__(self) -> None:
        """Validate the timing."""
        enforce(
            self.period >= self.pulse.duration,
            f"Period {self.period} s is shorter than the pulse.",
            ConfigurationError,
        )
        enforce(
            self.excitation_window >= self.period,
            "The excitation window must hold at least one pulse.",
            ConfigurationError,
        )
        enforce(
            self.cooling_window >= 0,
            "The cooling window must be non-negative.",
            ConfigurationError,
        )
        enforce(self.cycles >= 1, "At least one cycle is needed.", ConfigurationError)
        ratio = self.excitation_window / self.period
        enforce(
            abs(ratio - round(ratio)) <= WINDOW_RATIO_TOLERANCE * ratio,
            f"The excitation window must hold an integer number of periods, got {ratio}.",
            ConfigurationError,
        )

    @property
    def repetition_rate(self) -> float:
        """Get the pulse repetition rate."""
        return 1 / self.period

    @property
    def pulses_per_window(self) -> int:
        """Get the number of pulses in an excitation window."""
        return int(round(self.excitation_window / self.period))

    @property
    def pulse_count(self) -> int:
        """Get the number of pulses of the whole train."""
        return self.cycles * self.pulses_per_window

    @property
    def cycle_duration(self) -> float:
        """Get the duration of one excitation and cooling cycle."""
        return self.excitation_window + self.cooling_window

    @property
    def total_duration(self) -> float:
        """Get the duration of the train."""
        return self.cycles * self.cycle_duration

    @property
    def excitation_fraction(self) -> float:
        """Get the fraction of the time spent exciting."""
        return self.excitation_window / self.cycle_duration

    def with_pulse(self, pulse: SquarePulse) -> "PulseTrainConfig":
        """Get the same timing with another pulse."""
        return PulseTrainConfig(
            pulse,
            self.period,
            self.excitation_window,
            self.cooling_window,
            self.cycles,
        )

    def pulse_start_times(self) -> np.ndarray:
        """Get the start time of every pulse."""
        in_window = self.period * np.arange(self.pulses_per_window)
        window_starts = self.cycle_duration * np.arange(self.cycles)
        return (window_starts[:, None] + in_window[None, :]).ravel()

    def excitation_windows(self) -> List[Tuple[float, float]]:
        """Get the (start, end) of every excitation window."""
        return [
            (float(start), float(start + self.excitation_window))
            for start in self.cycle_duration * np.arange(self.cycles)
        ]

    def pulse_index_of(self, times: np.ndarray) -> np.ndarray:
        """Get the index of the pulse whose period contains each time."""
        return np.searchsorted(self.pulse_start_times(), times, side="right") - 1

    def cycle_index_of(self, times: np.ndarray) -> np.ndarray:
        """Get the index of the cycle containing each time."""
        return np.floor_divide(np.asarray(times), self.cycle_duration).astype(np.int64)


@dataclass(frozen=True, eq=False)
class EmissionRecord:
    """The photon emission times of one trajectory."""

    trajectory_id: int
    emission_times: np.ndarray

    def __post_init__(self) -> None:
        """Check the ordering of the emissions."""
        times = np.asarray(self.emission_times, dtype=float)
        object.__setattr__(self, "emission_times", times)
        enforce(
            bool(np.all(np.diff(times) > 0)),
            f"Emission times of trajectory {self.trajectory_id} are not increasing.",
            DomainError,
        )

    def __len__(self) -> int:
        """Get the number of emissions."""
        return len(self.emission_times)

    def __eq__(self, other: Any) -> bool:
        """Compare two records."""
        return (
            isinstance(other, EmissionRecord)
            and self.trajectory_id == other.trajectory_id
            and np.array_equal(self.emission_times, other.emission_times)
        )

    def __hash__(self) -> int:
        """Hash the record."""
        return hash((self.trajectory_id, self.emission_times.tobytes()))

    def before(self, time: float) -> "EmissionRecord":
        """Keep the emissions earlier than a time."""
        return EmissionRecord(
            self.trajectory_id, self.emission_times[self.emission_times < time]
        )


@dataclass(frozen=True)
class PhotonNumberStatistics:
    """Additive per-pulse photon number counts."""

    pulses: int = 0
    zero: int = 0
    one: int = 0
    two_or_more: int = 0
    photons: int = 0
    photons_squared: int = 0

    def __add__(self, other: "PhotonNumberStatistics") -> "PhotonNumberStatistics":
        """Merge the counts of disjoint trajectory sets."""
        return PhotonNumberStatistics(
            self.pulses + other.pulses,
            self.zero + other.zero,
            self.one + other.one,
            self.two_or_more + other.two_or_more,
            self.photons + other.photons,
            self.photons_squared + other.photons_squared,
        )

    @classmethod
    def from_counts(cls, counts: np.ndarray) -> "PhotonNumberStatistics":
        """Tally photon numbers, one entry per pulse."""
        counts = np.asarray(counts, dtype=np.int64)
        return cls(
            int(counts.size),
            int(np.count_nonzero(counts == 0)),
            int(np.count_nonzero(counts == 1)),
            int(np.count_nonzero(counts >= 2)),
            int(counts.sum()),
            int((counts**2).sum()),
        )

    def _probability(self, count: int) -> Tuple[float, float]:
        enforce(self.pulses > 0, "No pulses were simulated.", DomainError)
        probability = count / self.pulses
        return probability, math.sqrt(probability * (1 - probability) / self.pulses)

    @property
    def p_zero(self) -> Tuple[float, float]:
        """Get P(0) and its standard error."""
        return self._probability(self.zero)

    @property
    def p_one(self) -> Tuple[float, float]:
        """Get P(1) and its standard error."""
        return self._probability(self.one)

    @property
    def p_two_or_more(self) -> Tuple[float, float]:
        """Get P(>=2) and its standard error."""
        return self._probability(self.two_or_more)

    @property
    def mean(self) -> Tuple[float, float]:
        """Get the mean photon number per pulse and its standard error."""
        enforce(self.pulses > 0, "No pulses were simulated.", DomainError)
        mean = self.photons / self.pulses
        variance = max(self.photons_squared / self.pulses - mean**2, 0.0)
        return mean, math.sqrt(variance / self.pulses)

    def summary(self) -> Dict[str, Tuple[float, float]]:
        """Get the point estimates with their standard errors."""
        return {
            "p_zero": self.p_zero,
            "p_one": self.p_one,
            "p_two_or_more": self.p_two_or_more,
            "mean_photons": self.mean,
        }


class _Propagator:
    """Exact propagator exp(-i H_eff tau) of a constant effective Hamiltonian."""

    def __init__(self, rabi_frequency: float, detuning: float, decay_rate: float) -> None:
        """Initialize the propagator."""
        # A = -i H_eff = mu + B with B = [[-mu, -i Omega/2], [-i Omega/2, mu]]
        self._mu = (1j * detuning - decay_rate / 2) / 2
        self._coupling = -0.5j * rabi_frequency
        self._k = np.sqrt(complex(self._mu**2 + self._coupling**2))
        self._degenerate = abs(self._k) < 1e-12 * max(abs(self._mu), 1.0)

    def apply(
        self, tau: Any, ground: np.ndarray, excited: np.ndarray
    ) -> Tuple[np.ndarray, np.ndarray]:
        """Propagate amplitudes over durations tau (broadcast)."""
        tau = np.asarray(tau, dtype=float)
        if self._degenerate:
            cosh, sinh_over_k = np.ones_like(tau), tau
        else:
            cosh = np.cosh(self._k * tau)
            sinh_over_k = np.sinh(self._k * tau) / self._k
        envelope = np.exp(self._mu * tau)
        new_ground = envelope * (
            cosh * ground + sinh_over_k * (-self._mu * ground + self._coupling * excited)
        )
        new_excited = envelope * (
            cosh * excited + sinh_over_k * (self._coupling * ground + self._mu * excited)
        )
        return new_ground, new_excited


def _norm(ground: np.ndarray, excited: np.ndarray) -> np.ndarray:
    return ground.real**2 + ground.imag**2 + excited.real**2 + excited.imag**2


class _BlockSimulator:  # pylint: disable=too-many-instance-attributes
    """Propagates a block of trajectories through a pulse train."""

    def __init__(  # pylint: disable=too-many-arguments
        self,
        train: PulseTrainConfig,
        constants: AtomicConstants,
        master_seed: int,
        indices: Sequence[int],
        leak_probability: float,
        repump: RepumpMode,
    ) -> None:
        """Initialize the block."""
        enforce(
            0 <= leak_probability < 1,
            f"Leak probability must lie in [0, 1), got {leak_probability}.",
            DomainError,
        )
        self.train = train
        self.indices = list(indices)
        self.gamma = constants.decay_rate
        self.leak_probability = leak_probability
        self.repump = repump
        size = len(self.indices)
        pulse = train.pulse
        self._detuning = pulse.detuning
        self._drive = _Propagator(pulse.rabi_frequency, pulse.detuning, self.gamma)
        grid_points = max(
            MIN_GRID_POINTS,
            math.ceil(pulse.duration * self.gamma / JUMP_TIME_TOLERANCE),
        )
        self._grid = pulse.duration / grid_points * np.arange(grid_points + 1)
        self._thresholds = UniformBuffer(
            [TrajectorySeed(master_seed, index, Purpose.EMISSION) for index in self.indices]
        )
        self._leaks = (
            UniformBuffer(
                [TrajectorySeed(master_seed, index, Purpose.LEAK) for index in self.indices]
            )
            if leak_probability > 0
            else None
        )
        self._all_rows = np.arange(size)
        self.ground = np.ones(size, dtype=complex)
        self.excited = np.zeros(size, dtype=complex)
        self.threshold = self._thresholds.draw(self._all_rows)
        self.dark = np.zeros(size, dtype=bool)
        self._emitting_rows: List[np.ndarray] = []
        self._emission_times: List[np.ndarray] = []

    def _reset(self, rows: np.ndarray) -> None:
        self.ground[rows] = 1.0
        self.excited[rows] = 0.0
        self.threshold[rows] = self._thresholds.draw(rows)

    def _record(self, rows: np.ndarray, times: np.ndarray) -> None:
        self._emitting_rows.append(rows.astype(np.int32))
        self._emission_times.append(np.asarray(times, dtype=float))

    def _apply_leak(self, rows: np.ndarray, window_start: bool) -> np.ndarray:
        """Repump the dark atoms that are due and draw new leaks."""
        if self.repump is RepumpMode.PULSE or window_start:
            repumped = rows[self.dark[rows]]
            self.dark[repumped] = False
            self._reset(repumped)
        bright = rows[~self.dark[rows]]
        leaked = bright[self._leaks.draw(bright) < self.leak_probability]
        self.dark[leaked] = True
        return rows[~self.dark[rows]]

    def _jump_delays(
        self,
        ground: np.ndarray,
        excited: np.ndarray,
        threshold: np.ndarray,
        remaining: np.ndarray,
    ) -> np.ndarray:
        """
        Locate the threshold crossing of trajectories known to jump.

        The crossing is bracketed on the pulse grid, which is finer than the
        jump time tolerance, then refined by bisection.
        """
        tau = np.minimum(self._grid[None, :], remaining[:, None])
        ground_grid, excited_grid = self._drive.apply(
            tau, ground[:, None], excited[:, None]
        )
        below = _norm(ground_grid, excited_grid) <= threshold[:, None]
        first = np.where(
            below.any(axis=1), np.maximum(np.argmax(below, axis=1), 1), tau.shape[1] - 1
        )
        rows = np.arange(len(first))
        low, high = tau[rows, first - 1], tau[rows, first]
        for _ in range(JUMP_BISECTIONS):
            middle = (low + high) / 2
            crossed = _norm(*self._drive.apply(middle, ground, excited)) <= threshold
            high = np.where(crossed, middle, high)
            low = np.where(crossed, low, middle)
        return high

    def _drive_segment(self, rows: np.ndarray, start: float) -> None:
        """Propagate through one pulse, with any number of jumps."""
        duration = self.train.pulse.duration
        ground, excited = self.ground[rows], self.excited[rows]
        elapsed = np.zeros(len(rows))
        while rows.size:
            end_ground, end_excited = self._drive.apply(
                duration - elapsed, ground, excited
            )
            threshold = self.threshold[rows]
            jumped = _norm(end_ground, end_excited) <= threshold
            kept = rows[~jumped]
            self.ground[kept] = end_ground[~jumped]
            self.excited[kept] = end_excited[~jumped]
            if not jumped.any():
                return
            rows, elapsed = rows[jumped], elapsed[jumped]
            elapsed = elapsed + self._jump_delays(
                ground[jumped], excited[jumped], threshold[jumped], duration - elapsed
            )
            self._record(rows, start + elapsed)
            self._reset(rows)
            ground, excited = self.ground[rows], self.excited[rows]

    def _free_segment(self, rows: np.ndarray, start: float, duration: float) -> None:
        """Propagate through the free decay, where the jump time is closed form."""
        if duration <= 0 or not rows.size or self.gamma == 0:
            if duration > 0 and rows.size:
                self.excited[rows] *= np.exp(1j * self._detuning * duration)
            return
        ground, excited = self.ground[rows], self.excited[rows]
        ground_norm = ground.real**2 + ground.imag**2
        excited_norm = excited.real**2 + excited.imag**2
        threshold = self.threshold[rows]
        jumped = ground_norm + excited_norm * math.exp(-self.gamma * duration) <= threshold
        kept = rows[~jumped]
        self.excited[kept] = excited[~jumped] * np.exp(
            (1j * self._detuning - self.gamma / 2) * duration
        )
        if jumped.any():
            delays = (
                np.log(excited_norm[jumped] / (threshold[jumped] - ground_norm[jumped]))
                / self.gamma
            )
            self._record(rows[jumped], start + delays)
            self._reset(rows[jumped])

    def run(self, present_cycles: Optional[np.ndarray] = None) -> List[EmissionRecord]:
        """
        Propagate the block through the whole train.

        :param present_cycles: for each trajectory, the number of cycles the
            atom stays trapped. Absent atoms are not propagated.
        :return: the emission record of every trajectory.
        """
        train = self.train
        starts = train.pulse_start_times()
        ends = np.append(starts[1:], train.total_duration)
        duration = train.pulse.duration
        per_window = train.pulses_per_window
        rows = self._all_rows
        for pulse_index, (start, end) in enumerate(zip(starts, ends)):
            window_start = pulse_index % per_window == 0
            if window_start:
                cycle = pulse_index // per_window
                if present_cycles is not None:
                    rows = self._all_rows[present_cycles > cycle]
                    if not rows.size:
                        break
                _logger.debug(f"Block {self.indices[0]}: cycle {cycle}.")
            active = rows
            if self._leaks is not None:
                active = self._apply_leak(rows, window_start)
            self._drive_segment(active, start)
            self._free_segment(active, start + duration, end - start - duration)
        return self._records()

    def _records(self) -> List[EmissionRecord]:
        size = len(self.indices)
        if self._emitting_rows:
            rows = np.concatenate(self._emitting_rows)
            times = np.concatenate(self._emission_times)
        else:
            rows, times = np.zeros(0, dtype=np.int32), np.zeros(0)
        order = np.argsort(rows, kind="stable")
        splits = np.cumsum(np.bincount(rows, minlength=size))[:-1]
        return [
            EmissionRecord(index, chunk)
            for index, chunk in zip(self.indices, np.split(times[order], splits))
        ]


def simulate_block(  # pylint: disable=too-many-arguments
    train: PulseTrainConfig,
    constants: AtomicConstants,
    master_seed: int,
    indices: Sequence[int],
    leak_probability_per_pulse: float = 0.0,
    repump: RepumpMode = RepumpMode.PULSE,
    present_cycles: Optional[np.ndarray] = None,
) -> List[EmissionRecord]:
    """
    Simulate a block of trajectories together.

    Every trajectory only consumes its own random streams, so the result of a
    trajectory does not depend on the other members of the block.

    :param train: the pulse train.
    :param constants: the atomic constants.
    :param master_seed: the master seed.
    :param indices: the trajectory indices.
    :param leak_probability_per_pulse: the probability to leak to the dark level.
    :param repump: when dark atoms are pumped back.
    :param present_cycles: per trajectory, the number of cycles the atom is present.
    :return: one record per index, in order.
    """
    simulator = _BlockSimulator(
        train, constants, master_seed, indices, leak_probability_per_pulse, repump
    )
    return simulator.run(present_cycles)


def simulate_trajectory(
    train: PulseTrainConfig,
    constants: AtomicConstants,
    seed: TrajectorySeed,
    leak_probability_per_pulse: float = 0.0,
    repump: RepumpMode = RepumpMode.PULSE,
) -> EmissionRecord:
    """
    Simulate the emissions of one trajectory.

    :param train: the pulse train.
    :param constants: the atomic constants.
    :param seed: the seed of the trajectory.
    :param leak_probability_per_pulse: the probability to leak to the dark level.
    :param repump: when dark atoms are pumped back.
    :return: the emission record.
    """
    return simulate_block(
        train,
        constants,
        seed.master_seed,
        [seed.trajectory_index],
        leak_probability_per_pulse,
        repump,
    )[0]


def trajectory_blocks(
    first_trajectory: int, n_trajectories: int, batch_size: int
) -> List[range]:
    """Split consecutive trajectory indices into fixed-size blocks."""
    enforce(batch_size >= 1, "Batch size must be >= 1.", ConfigurationError)
    stop = first_trajectory + n_trajectories
    return [
        range(start, min(start + batch_size, stop))
        for start in range(first_trajectory, stop, batch_size)
    ]


def simulate_trajectories(  # pylint: disable=too-many-arguments
    train: PulseTrainConfig,
    constants: AtomicConstants,
    n_trajectories: int,
    master_seed: int,
    first_trajectory: int = 0,
    leak_probability_per_pulse: float = 0.0,
    repump: RepumpMode = RepumpMode.PULSE,
    batch_size: int = DEFAULT_BATCH_SIZE,
    jobs: int = 1,
) -> List[EmissionRecord]:
    """Simulate consecutive trajectories, fanning the blocks out over jobs."""
    blocks = trajectory_blocks(first_trajectory, n_trajectories, batch_size)
    results = Parallel(n_jobs=jobs)(
        delayed(simulate_block)(
            train, constants, master_seed, block, leak_probability_per_pulse, repump
        )
        for block in blocks
    )
    return [record for block in results for record in block]


def count_photons_per_pulse(
    record: EmissionRecord, train: PulseTrainConfig
) -> np.ndarray:
    """Bin the emissions of a record to the period of their pulse."""
    indices = train.pulse_index_of(record.emission_times)
    return np.bincount(indices, minlength=train.pulse_count)


def _block_statistics(  # pylint: disable=too-many-arguments
    train: PulseTrainConfig,
    constants: AtomicConstants,
    master_seed: int,
    block: Iterable[int],
    leak_probability_per_pulse: float,
    repump: RepumpMode,
) -> PhotonNumberStatistics:
    records = simulate_block(
        train, constants, master_seed, list(block), leak_probability_per_pulse, repump
    )
    statistics = PhotonNumberStatistics()
    for record in records:
        statistics += PhotonNumberStatistics.from_counts(
            count_photons_per_pulse(record, train)
        )
    return statistics


def photon_number_distribution(  # pylint: disable=too-many-arguments
    train: PulseTrainConfig,
    constants: AtomicConstants,
    n_trajectories: int,
    master_seed: int,
    first_trajectory: int = 0,
    leak_probability_per_pulse: float = 0.0,
    repump: RepumpMode = RepumpMode.PULSE,
    batch_size: int = DEFAULT_BATCH_SIZE,
    jobs: int = 1,
) -> PhotonNumberStatistics:
    """
    Get the per-pulse photon number statistics.

    Steps:
    - Simulate the trajectories block by block.
    - Bin every emission to the excitation period containing its pulse.
    - Merge the additive counts of all blocks.

    :param train: the pulse train.
    :param constants: the atomic constants.
    :param n_trajectories: the number of trajectories.
    :param master_seed: the master seed.
    :param first_trajectory: the index of the first trajectory.
    :param leak_probability_per_pulse: the probability to leak to the dark level.
    :param repump: when dark atoms are pumped back.
    :param batch_size: the number of trajectories propagated together.
    :param jobs: the number of parallel jobs.
    :return: the statistics over all simulated pulses.
    """
    enforce(
        n_trajectories >= 1,
        f"n_trajectories must be >= 1, got {n_trajectories}.",
        ConfigurationError,
    )
    partials = Parallel(n_jobs=jobs)(
        delayed(_block_statistics)(
            train, constants, master_seed, block, leak_probability_per_pulse, repump
        )
        for block in trajectory_blocks(first_trajectory, n_trajectories, batch_size)
    )
    statistics = PhotonNumberStatistics()
    for partial in partials:
        statistics += partial
    return statistics


@dataclass(frozen=True, eq=False)
class PopulationTraces:
    """Normalised excited populations of individual trajectories."""

    times: np.ndarray
    populations: np.ndarray
    pulse_end: float

    def __len__(self) -> int:
        """Get the number of trajectories."""
        return len(self.populations)

    def mean(self) -> np.ndarray:
        """Get the ensemble average at every sample time."""
        return self.populations.mean(axis=0, dtype=float)

    def standard_error(self) -> np.ndarray:
        """Get the standard error of the ensemble average."""
        return self.populations.std(axis=0, ddof=1, dtype=float) / math.sqrt(len(self))


def simulate_population_traces(  # pylint: disable=too-many-locals
    pulse: SquarePulse,
    constants: AtomicConstants,
    master_seed: int,
    n_trajectories: int,
    duration: Optional[float] = None,
) -> PopulationTraces:
    """
    Record the excited population of trajectories driven by a single pulse.

    The grid spacing divides the pulse duration and stays below the jump time
    tolerance; jumps are detected at the end of each grid step.

    :param pulse: the drive pulse, starting at time 0.
    :param constants: the atomic constants.
    :param master_seed: the master seed.
    :param n_trajectories: the number of trajectories.
    :param duration: the recorded span, five lifetimes after the pulse by default.
    :return: the traces.
    """
    gamma = constants.decay_rate
    if duration is None:
        duration = pulse.duration + 5 * constants.excited_lifetime
    enforce(
        duration >= pulse.duration,
        "The traces must cover the pulse.",
        ConfigurationError,
    )
    steps_in_pulse = max(
        MIN_GRID_POINTS, math.ceil(pulse.duration * gamma / JUMP_TIME_TOLERANCE)
    )
    step = pulse.duration / steps_in_pulse
    n_steps = math.ceil(duration / step - 1e-9)
    rows = np.arange(n_trajectories)
    thresholds = UniformBuffer(
        [TrajectorySeed(master_seed, index, Purpose.EMISSION) for index in rows]
    )
    drive = _Propagator(pulse.rabi_frequency, pulse.detuning, gamma)
    free = _Propagator(0.0, pulse.detuning, gamma)
    ground = np.ones(n_trajectories, dtype=complex)
    excited = np.zeros(n_trajectories, dtype=complex)
    threshold = thresholds.draw(rows)
    populations = np.zeros((n_trajectories, n_steps + 1), dtype=np.float32)
    for index in range(n_steps):
        propagator = drive if index < steps_in_pulse else free
        ground, excited = propagator.apply(step, ground, excited)
        norm = _norm(ground, excited)
        jumped = norm <= threshold
        if jumped.any():
            ground[jumped], excited[jumped] = 1.0, 0.0
            norm[jumped] = 1.0
            threshold[jumped] = thresholds.draw(rows[jumped])
        populations[:, index + 1] = (excited.real**2 + excited.imag**2) / norm
    return PopulationTraces(step * np.arange(n_steps + 1), populations, pulse.duration)


def ensemble_population(traces: PopulationTraces, time: Any) -> Any:
    """
    Get the trajectory-averaged excited population.

    :param traces: at least a hundred trajectory traces.
    :param time: the time, or times, since the pulse start.
    :return: the ensemble population, interpolated between samples.
    """
    enforce(
        len(traces) >= MIN_ENSEMBLE_SIZE,
        f"At least {MIN_ENSEMBLE_SIZE} trajectories are needed, got {len(traces)}.",
        DomainError,
    )
    return np.interp(time, traces.times, traces.mean())


def fit_decay_time(
    traces: PopulationTraces, start: Optional[float] = None, stop: Optional[float] = None
) -> Tuple[float, float]:
    """
    Fit an exponential to the ensemble population after the pulse.

    :param traces: the traces.
    :param start: the beginning of the fitted span, the pulse end by default.
    :param stop: the end of the fitted span, the last sample by default.
    :return: the time constant and its standard error.
    """
    start = traces.pulse_end if start is None else start
    stop = traces.times[-1] if stop is None else stop
    selected = (traces.times >= start) & (traces.times <= stop)
    times = traces.times[selected] - start
    mean = traces.mean()[selected]
    errors = np.maximum(traces.standard_error()[selected], 1e-6)
    enforce(mean[0] > 0, "No excited population left after the pulse.", DomainError)
    (amplitude, time_constant), covariance = curve_fit(
        lambda t, a, tau: a * np.exp(-t / tau),
        times,
        mean,
        p0=(mean[0], max(times[-1], 1e-12) / 5),
        sigma=errors,
        absolute_sigma=True,
    )
    _logger.debug(f"Fitted tail amplitude {amplitude:.4f}.")
    return float(time_constant), float(math.sqrt(covariance[1, 1]))
