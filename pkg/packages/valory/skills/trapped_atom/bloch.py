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
Optical Bloch equations of the driven two-level atom.

The state is (rho_ee, rho_gg, u, v) with rho_ge = u + i v, in the frame
rotating at the laser frequency. A fifth component accumulates the number of
emitted photons, the integral of gamma * rho_ee.
"""

import logging
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterator, List, Optional, Tuple

import numpy as np
from aea.exceptions import enforce
from scipy.optimize import minimize_scalar

from packages.valory.skills.trapped_atom import LOGGER_NAME
from packages.valory.skills.trapped_atom.constants import AtomicConstants, NS
from packages.valory.skills.trapped_atom.exceptions import (
    ConfigurationError,
    DomainError,
)
from packages.valory.skills.trapped_atom.random_streams import Purpose, TrajectorySeed


_logger = logging.getLogger(f"{LOGGER_NAME}.bloch")

DEFAULT_PULSE_DURATION = 4 * NS
STEPS_PER_SCALE = 1000
MAX_STEP_FRACTION = 1 / 100
TRACE_TOLERANCE = 1e-9

EE, GG, U, V, PHOTONS = range(5)


class NoiseDistribution(Enum):
    """Distribution of the per-pulse peak power."""

    GAUSSIAN_TRUNCATED_AT_ZERO = "gaussian-truncated-at-zero"


@dataclass(frozen=True)
class BlochState:
    """A two-level density matrix."""

    rho_ee: float
    rho_gg: float
    coherence_re: float = 0.0
    coherence_im: float = 0.0

    @classmethod
    def ground(cls) -> "BlochState":
        """Get the ground state."""
        return cls(0.0, 1.0)

    @classmethod
    def excited(cls) -> "BlochState":
        """Get the excited state."""
        return cls(1.0, 0.0)

    @classmethod
    def from_array(cls, values: np.ndarray) -> "BlochState":
        """Build a state from its first four vector components."""
        return cls(*(float(value) for value in values[:4]))

    def as_array(self) -> np.ndarray:
        """Get the state vector, with a zero photon counter appended."""
        return np.array(
            [self.rho_ee, self.rho_gg, self.coherence_re, self.coherence_im, 0.0]
        )

    @property
    def trace(self) -> float:
        """Get the trace of the density matrix."""
        return self.rho_ee + self.rho_gg

    def is_physical(self, tolerance: float = TRACE_TOLERANCE) -> bool:
        """Check the trace, the population bounds and positivity."""
        coherence = self.coherence_re**2 + self.coherence_im**2
        return (
            abs(self.trace - 1) < tolerance
            and -tolerance <= self.rho_ee <= 1 + tolerance
            and coherence <= self.rho_ee * self.rho_gg + tolerance
        )


@dataclass(frozen=True)
class SquarePulse:
    """A square drive pulse."""

    rabi_frequency: float
    duration: float = DEFAULT_PULSE_DURATION
    detuning: float = 0.0
    start_time: float = 0.0

    def __post_init__(self) -> None:
        """Validate the pulse."""
        enforce(
            self.duration > 0,
            f"Pulse duration must be positive, got {self.duration}.",
            DomainError,
        )
        enforce(
            self.rabi_frequency >= 0,
            f"Rabi frequency must be non-negative, got {self.rabi_frequency}.",
            DomainError,
        )

    @property
    def area(self) -> float:
        """Get the pulse area, in rad."""
        return self.rabi_frequency * self.duration

    @property
    def end_time(self) -> float:
        """Get the time the pulse switches off."""
        return self.start_time + self.duration

    def with_rabi_frequency(self, rabi_frequency: float) -> "SquarePulse":
        """Get the same pulse at another Rabi frequency."""
        return SquarePulse(rabi_frequency, self.duration, self.detuning, self.start_time)

    def with_area(self, area: float) -> "SquarePulse":
        """Get the same pulse with another area."""
        return self.with_rabi_frequency(area / self.duration)


@dataclass(frozen=True)
class IntensityNoiseModel:
    """Shot-to-shot fluctuations of the peak power."""

    relative_rms: float = 0.1
    distribution: NoiseDistribution = NoiseDistribution.GAUSSIAN_TRUNCATED_AT_ZERO

    def __post_init__(self) -> None:
        """Validate the model."""
        enforce(
            self.relative_rms >= 0,
            f"Relative RMS must be non-negative, got {self.relative_rms}.",
            DomainError,
        )

    def sample_power_factors(
        self, size: int, generator: np.random.Generator
    ) -> np.ndarray:
        """
        Draw peak powers relative to their mean.

        Negative draws are redrawn, which truncates the Gaussian at zero.

        :param size: the number of pulses.
        :param generator: the random generator.
        :return: the non-negative power factors.
        """
        if self.relative_rms == 0:
            return np.ones(size)
        factors = 1 + self.relative_rms * generator.standard_normal(size)
        negative = factors < 0
        while negative.any():
            factors[negative] = 1 + self.relative_rms * generator.standard_normal(
                int(negative.sum())
            )
            negative = factors < 0
        return factors


@dataclass(frozen=True, eq=False)
class PowerAxis:
    """Average drive powers and their mapping to the Rabi frequency."""

    average_power: np.ndarray
    power_to_rabi_coefficient: float

    def __post_init__(self) -> None:
        """Validate the axis."""
        object.__setattr__(
            self, "average_power", np.asarray(self.average_power, dtype=float)
        )
        enforce(
            bool(np.all(self.average_power >= 0)),
            "Powers must be non-negative.",
            DomainError,
        )

    def rabi_frequencies(self, power_factors: float = 1.0) -> np.ndarray:
        """Get the Rabi frequency of every power, Omega = c * sqrt(P)."""
        return self.power_to_rabi_coefficient * np.sqrt(
            self.average_power * power_factors
        )


@dataclass(frozen=True, eq=False)
class ObeTrajectory:
    """Sampled solution of the optical Bloch equations."""

    times: np.ndarray
    rho_ee: np.ndarray
    rho_gg: np.ndarray
    coherence_re: np.ndarray
    coherence_im: np.ndarray

    def __len__(self) -> int:
        """Get the number of samples."""
        return len(self.times)

    def __iter__(self) -> Iterator[Tuple[float, BlochState]]:
        """Iterate over (time, state) samples."""
        for index, time in enumerate(self.times):
            yield float(time), self.state_at(index)

    def state_at(self, index: int) -> BlochState:
        """Get the state of a sample."""
        return BlochState(
            float(self.rho_ee[index]),
            float(self.rho_gg[index]),
            float(self.coherence_re[index]),
            float(self.coherence_im[index]),
        )

    @property
    def final_state(self) -> BlochState:
        """Get the last sampled state."""
        return self.state_at(-1)


@dataclass(frozen=True, eq=False)
class RabiCurve:
    """Noise-averaged fluorescence rate against average power."""

    powers: np.ndarray
    rates: np.ndarray
    rate_errors: np.ndarray = field(default_factory=lambda: np.zeros(0))

    def points(self) -> List[Tuple[float, float]]:
        """Get the (power, rate) pairs."""
        return list(zip(self.powers.tolist(), self.rates.tolist()))


def analytic_excitation_probability(omega: float, duration: float) -> float:
    """
    Get the excitation of a resonant pulse without decay, sin^2(Omega T / 2).

    Works element-wise on arrays.

    :param omega: the Rabi frequency, in rad/s.
    :param duration: the pulse duration, in s.
    :return: the excited population.
    """
    enforce(bool(np.all(np.asarray(duration) >= 0)), "Duration must be >= 0.", DomainError)
    return np.sin(np.asarray(omega) * duration / 2) ** 2


def default_step(duration: float, constants: AtomicConstants) -> float:
    """Get the default integration step, min(T, 1/gamma) / 1000."""
    return min(duration, constants.excited_lifetime) / STEPS_PER_SCALE


def _check_step(step: float, duration: float, constants: AtomicConstants) -> None:
    enforce(
        0 < step <= duration * MAX_STEP_FRACTION
        and step <= constants.excited_lifetime * MAX_STEP_FRACTION,
        f"Integration step {step} s is too coarse for a {duration} s pulse and a "
        f"{constants.excited_lifetime} s lifetime.",
        ConfigurationError,
    )


def _generator_matrices(
    rabi_frequencies: np.ndarray, detuning: float, gamma: float
) -> np.ndarray:
    """Build the (n, 5, 5) generators of the linear Bloch equations."""
    omega = np.asarray(rabi_frequencies, dtype=float)
    matrices = np.zeros(omega.shape + (5, 5))
    matrices[..., EE, EE] = -gamma
    matrices[..., EE, V] = omega
    matrices[..., GG, EE] = gamma
    matrices[..., GG, V] = -omega
    matrices[..., U, U] = -gamma / 2
    matrices[..., U, V] = detuning
    matrices[..., V, EE] = -omega / 2
    matrices[..., V, GG] = omega / 2
    matrices[..., V, U] = -detuning
    matrices[..., V, V] = -gamma / 2
    matrices[..., PHOTONS, EE] = gamma
    return matrices


def _rk4_step_matrices(generators: np.ndarray, step: float) -> np.ndarray:
    """
    Get the classical Runge-Kutta step map of a linear system.

    For y' = A y one RK4 step is y <- (1 + hA + (hA)^2/2 + (hA)^3/6 + (hA)^4/24) y.
    """
    scaled = generators * step
    identity = np.broadcast_to(np.eye(5), scaled.shape)
    term = identity
    total = identity.copy()
    for order in range(1, 5):
        term = term @ scaled / order
        total = total + term
    return total


def _step_grid(duration: float, step: float) -> Tuple[int, float]:
    """Get the number of steps and the step that ends exactly at the duration."""
    n_steps = max(1, math.ceil(duration / step - 1e-9))
    return n_steps, duration / n_steps


def excitation_after_pulse(
    rabi_frequencies: np.ndarray,
    duration: float,
    constants: AtomicConstants,
    detuning: float = 0.0,
    step: Optional[float] = None,
) -> Tuple[np.ndarray, np.ndarray]:
    """
    Integrate many pulses starting from the ground state.

    :param rabi_frequencies: the Rabi frequencies, in rad/s.
    :param duration: the pulse duration, in s.
    :param constants: the atomic constants.
    :param detuning: the laser detuning, in rad/s.
    :param step: the integration step, in s.
    :return: the excited population at the end of each pulse and the number of
        photons emitted during it.
    """
    step = default_step(duration, constants) if step is None else step
    _check_step(step, duration, constants)
    n_steps, step = _step_grid(duration, step)
    omega = np.atleast_1d(np.asarray(rabi_frequencies, dtype=float))
    maps = _rk4_step_matrices(
        _generator_matrices(omega, detuning, constants.decay_rate), step
    )
    propagators = np.linalg.matrix_power(maps, n_steps)
    final = propagators[..., :, GG]
    return final[..., EE], final[..., PHOTONS]


def evolve_obe(
    initial: BlochState,
    pulse: SquarePulse,
    constants: AtomicConstants = AtomicConstants(),
    step: Optional[float] = None,
    free_decay_until: Optional[float] = None,
) -> ObeTrajectory:
    """
    Integrate the optical Bloch equations over a pulse.

    :param initial: the state at the start of the pulse.
    :param pulse: the drive pulse.
    :param constants: the atomic constants.
    :param step: the integration step, in s. Defaults to min(T, 1/gamma) / 1000.
    :param free_decay_until: if given, the absolute time up to which the free
        decay after the pulse is sampled, at the same spacing.
    :return: the sampled trajectory.
    """
    step = default_step(pulse.duration, constants) if step is None else step
    _check_step(step, pulse.duration, constants)
    n_steps, step = _step_grid(pulse.duration, step)
    gamma = constants.decay_rate
    step_map = _rk4_step_matrices(
        _generator_matrices(np.asarray(pulse.rabi_frequency), pulse.detuning, gamma),
        step,
    )
    samples = np.empty((n_steps + 1, 5))
    samples[0] = initial.as_array()
    for index in range(n_steps):
        samples[index + 1] = step_map @ samples[index]
    times = pulse.start_time + step * np.arange(n_steps + 1)

    if free_decay_until is not None and free_decay_until > pulse.end_time:
        elapsed = step * np.arange(1, math.ceil((free_decay_until - pulse.end_time) / step) + 1)
        elapsed = np.minimum(elapsed, free_decay_until - pulse.end_time)
        end = samples[-1]
        population = end[EE] * np.exp(-gamma * elapsed)
        damping = np.exp(-gamma * elapsed / 2)
        phase = pulse.detuning * elapsed
        free = np.empty((len(elapsed), 5))
        free[:, EE] = population
        free[:, GG] = end[GG] + end[EE] - population
        free[:, U] = damping * (end[U] * np.cos(phase) + end[V] * np.sin(phase))
        free[:, V] = damping * (end[V] * np.cos(phase) - end[U] * np.sin(phase))
        free[:, PHOTONS] = end[PHOTONS] + end[EE] - population
        samples = np.vstack([samples, free])
        times = np.concatenate([times, pulse.end_time + elapsed])

    return ObeTrajectory(
        times, samples[:, EE], samples[:, GG], samples[:, U], samples[:, V]
    )


def _mean_photons(
    rabi_frequencies: np.ndarray,
    duration: float,
    period: float,
    constants: AtomicConstants,
    detuning: float = 0.0,
    step: Optional[float] = None,
) -> np.ndarray:
    enforce(
        period >= duration,
        f"Period {period} s is shorter than the pulse ({duration} s).",
        ConfigurationError,
    )
    excited, emitted = excitation_after_pulse(
        rabi_frequencies, duration, constants, detuning, step
    )
    tail = -np.expm1(-constants.decay_rate * (period - duration))
    return emitted + excited * tail


def mean_photons_per_period(
    pulse: SquarePulse,
    period: float,
    constants: AtomicConstants = AtomicConstants(),
    step: Optional[float] = None,
) -> float:
    """
    Get the expected number of photons emitted per excitation period.

    The atom starts in the ground state; the free decay after the pulse is
    integrated analytically up to the end of the period.

    :param pulse: the drive pulse.
    :param period: the excitation period, in s.
    :param constants: the atomic constants.
    :param step: the integration step, in s.
    :return: the mean photon number.
    """
    return float(
        _mean_photons(
            np.array([pulse.rabi_frequency]),
            pulse.duration,
            period,
            constants,
            pulse.detuning,
            step,
        )[0]
    )


def first_fluorescence_maximum(
    duration: float,
    period: float,
    constants: AtomicConstants = AtomicConstants(),
    detuning: float = 0.0,
) -> float:
    """
    Find the Rabi frequency of the first maximum of the fluorescence.

    :param duration: the pulse duration, in s.
    :param period: the excitation period, in s.
    :param constants: the atomic constants.
    :param detuning: the laser detuning, in rad/s.
    :return: the Rabi frequency, in rad/s.
    """
    nominal = math.pi / duration
    if constants.decay_rate == 0:
        return nominal
    result = minimize_scalar(
        lambda omega: -_mean_photons(
            np.array([omega]), duration, period, constants, detuning
        )[0],
        bounds=(0.5 * nominal, 1.6 * nominal),
        method="bounded",
        options={"xatol": 1e-7 * nominal},
    )
    _logger.debug(f"First fluorescence maximum at {result.x / nominal:.5f} pi / T.")
    return float(result.x)


def rabi_curve(  # pylint: disable=too-many-arguments
    axis: PowerAxis,
    pulse_template: SquarePulse,
    noise: IntensityNoiseModel,
    constants: AtomicConstants,
    samples_per_point: int,
    period: float,
    detection_efficiency: float,
    master_seed: int = 0,
    step: Optional[float] = None,
) -> RabiCurve:
    """
    Get the detected fluorescence rate against average power.

    Steps:
    - Draw the peak power of every sampled pulse from the noise model, using a
      stream owned by the power point.
    - Map each power to a Rabi frequency through the square root law.
    - Average the photons per period and scale by the repetition rate and the
      detection efficiency.

    :param axis: the powers and the power to Rabi frequency mapping.
    :param pulse_template: the pulse whose Rabi frequency is swept.
    :param noise: the intensity noise model.
    :param constants: the atomic constants.
    :param samples_per_point: the number of noisy pulses per power.
    :param period: the excitation period, in s.
    :param detection_efficiency: the detection efficiency.
    :param master_seed: the seed of the noise streams.
    :param step: the integration step, in s.
    :return: the curve, with the standard error of every rate.
    """
    enforce(
        samples_per_point >= 1,
        f"samples_per_point must be >= 1, got {samples_per_point}.",
        ConfigurationError,
    )
    factors = np.stack(
        [
            noise.sample_power_factors(
                samples_per_point,
                TrajectorySeed(master_seed, index, Purpose.NOISE).generator(),
            )
            for index in range(len(axis.average_power))
        ]
    )
    omegas = axis.rabi_frequencies(1.0)[:, None] * np.sqrt(factors)
    photons = _mean_photons(
        omegas.ravel(),
        pulse_template.duration,
        period,
        constants,
        pulse_template.detuning,
        step,
    ).reshape(omegas.shape)
    scale = detection_efficiency / period
    errors = (
        photons.std(axis=1, ddof=1) / math.sqrt(samples_per_point)
        if samples_per_point > 1
        else np.zeros(len(photons))
    )
    return RabiCurve(axis.average_power, photons.mean(axis=1) * scale, errors * scale)
