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
Raman transitions between the ground hyperfine levels.

The excited state is adiabatically eliminated: the two Raman beams, detuned
by Delta from the excited state, drive each F=1 -> F=2 sublevel pair as a
two-level system with Rabi frequency Omega_1 Omega_2 / (2 Delta). The beams
co-propagate, so the atomic motion plays no role.
"""

import logging
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np
from aea.exceptions import enforce
from scipy.optimize import curve_fit
from scipy.signal import find_peaks, peak_widths

from packages.valory.skills.trapped_atom import LOGGER_NAME
from packages.valory.skills.trapped_atom.constants import (
    AtomicConstants,
    GHZ,
    KHZ,
    LOWER_F,
    MagneticField,
    NW,
    THZ,
    UPPER_F,
    ZeemanSublevel,
    raman_resonance_offset,
    to_angular,
)
from packages.valory.skills.trapped_atom.exceptions import (
    AnalysisError,
    ConfigurationError,
    DomainError,
    SingularityError,
)


_logger = logging.getLogger(f"{LOGGER_NAME}.raman")

ADIABATIC_RATIO = 100
POPULATION_TOLERANCE = 1e-9
FWHM_PER_SIGMA = 2 * math.sqrt(2 * math.log(2))
DEFAULT_OMEGA_1 = to_angular(100 * GHZ)
DEFAULT_SINGLE_PHOTON_DETUNING = to_angular(14 * THZ)
FFT_PADDING = 16


class Polarization(Enum):
    """Polarisation settings of the Raman beam pair."""

    PI_SIGMA_PLUS = "pi-sigma-plus"
    PI_SIGMA_MINUS = "pi-sigma-minus"

    @property
    def delta_m(self) -> int:
        """Get the change of mF driven by the setting."""
        return 1 if self is Polarization.PI_SIGMA_PLUS else -1


@dataclass(frozen=True)
class RamanCalibration:
    """A measured (Rabi frequency, beam power) point."""

    rabi_frequency: float = to_angular(65 * KHZ)
    beam2_power: float = 60 * NW

    def __post_init__(self) -> None:
        """Validate the anchor."""
        enforce(
            self.rabi_frequency >= 0 and self.beam2_power > 0,
            "The calibration needs a non-negative Rabi frequency and a positive power.",
            DomainError,
        )


@dataclass(frozen=True)
class LambdaSystemParams:
    """The Raman drive."""

    omega_1: float
    omega_2: float
    single_photon_detuning: float
    two_photon_detuning: float = 0.0
    beam2_power: float = 60 * NW

    def __post_init__(self) -> None:
        """Validate the drive and warn when adiabatic elimination is doubtful."""
        enforce(
            self.omega_1 >= 0 and self.omega_2 >= 0,
            "Single-photon Rabi frequencies must be non-negative.",
            DomainError,
        )
        enforce(self.beam2_power >= 0, "Beam power must be non-negative.", DomainError)
        strongest = max(self.omega_1, self.omega_2)
        if strongest > 0 and abs(self.single_photon_detuning) < ADIABATIC_RATIO * strongest:
            _logger.warning(
                f"Single-photon detuning is only {abs(self.single_photon_detuning) / strongest:.1f} "
                f"times the strongest Rabi frequency."
            )

    @classmethod
    def from_calibration(
        cls,
        calibration: RamanCalibration = RamanCalibration(),
        beam2_power: Optional[float] = None,
        omega_1: float = DEFAULT_OMEGA_1,
        single_photon_detuning: float = DEFAULT_SINGLE_PHOTON_DETUNING,
        two_photon_detuning: float = 0.0,
    ) -> "LambdaSystemParams":
        """
        Get the drive reproducing a calibration point.

        :param calibration: the (Rabi frequency, power) anchor.
        :param beam2_power: the power of the second beam, the anchor power by default.
        :param omega_1: the Rabi frequency of the trap beam.
        :param single_photon_detuning: the detuning from the excited state.
        :param two_photon_detuning: the detuning from the addressed resonance.
        :return: the drive.
        """
        enforce(omega_1 > 0, "The trap beam must couple the atom.", DomainError)
        beam2_power = calibration.beam2_power if beam2_power is None else beam2_power
        anchor_omega_2 = 2 * single_photon_detuning * calibration.rabi_frequency / omega_1
        return cls(
            omega_1,
            abs(anchor_omega_2) * math.sqrt(beam2_power / calibration.beam2_power),
            single_photon_detuning,
            two_photon_detuning,
            beam2_power,
        )

    def with_beam2_power(self, beam2_power: float) -> "LambdaSystemParams":
        """Rescale the second beam, omega_2 growing as the square root of the power."""
        enforce(self.beam2_power > 0, "The current beam power is zero.", DomainError)
        return LambdaSystemParams(
            self.omega_1,
            self.omega_2 * math.sqrt(beam2_power / self.beam2_power),
            self.single_photon_detuning,
            self.two_photon_detuning,
            beam2_power,
        )

    def with_two_photon_detuning(self, two_photon_detuning: float) -> "LambdaSystemParams":
        """Get the same drive at another two-photon detuning."""
        return LambdaSystemParams(
            self.omega_1,
            self.omega_2,
            self.single_photon_detuning,
            two_photon_detuning,
            self.beam2_power,
        )


@dataclass(frozen=True)
class RamanPulse:
    """A square Raman pulse."""

    duration: float
    detuning_from_resonance: float = 0.0

    def __post_init__(self) -> None:
        """Validate the pulse."""
        enforce(
            self.duration > 0,
            f"Pulse duration must be positive, got {self.duration}.",
            DomainError,
        )


@dataclass(frozen=True)
class SublevelPopulation:
    """The populations of the F=1 sublevels before the Raman pulse."""

    populations: Dict[ZeemanSublevel, float] = field(hash=False)

    def __post_init__(self) -> None:
        """Check the populations."""
        for level, probability in self.populations.items():
            enforce(level.F == LOWER_F, f"{level} is not in F={LOWER_F}.", DomainError)
            enforce(
                0 <= probability <= 1,
                f"Population of {level} must lie in [0, 1].",
                DomainError,
            )
        enforce(
            abs(sum(self.populations.values()) - 1) <= POPULATION_TOLERANCE,
            "Populations must sum to 1.",
            DomainError,
        )

    @classmethod
    def uniform(cls) -> "SublevelPopulation":
        """Spread the atom evenly over the F=1 sublevels."""
        levels = [ZeemanSublevel(LOWER_F, m) for m in range(-LOWER_F, LOWER_F + 1)]
        return cls({level: 1 / len(levels) for level in levels})

    def of(self, level: ZeemanSublevel) -> float:
        """Get the population of a sublevel."""
        return self.populations.get(level, 0.0)


@dataclass(frozen=True, eq=False)
class RamanSpectrum:
    """F=2 population against the Raman frequency difference."""

    detunings: np.ndarray
    populations: np.ndarray

    def points(self) -> List[Tuple[float, float]]:
        """Get the (detuning, population) pairs."""
        return list(zip(self.detunings.tolist(), self.populations.tolist()))


@dataclass(frozen=True, eq=False)
class RabiFlopping:
    """F=2 population against the Raman pulse duration."""

    durations: np.ndarray
    populations: np.ndarray

    def points(self) -> List[Tuple[float, float]]:
        """Get the (duration, population) pairs."""
        return list(zip(self.durations.tolist(), self.populations.tolist()))


@dataclass(frozen=True)
class SpectralPeak:
    """A Gaussian fitted to a spectral line."""

    center: float
    width: float
    height: float
    center_error: float = 0.0
    width_error: float = 0.0


@dataclass(frozen=True)
class FloppingFit:
    """The fitted oscillation A sin^2(Omega t / 2) + c."""

    rabi_frequency: float
    rabi_frequency_error: float
    amplitude: float
    offset: float


def effective_rabi_frequency(params: LambdaSystemParams) -> float:
    """
    Get the two-photon Rabi frequency.

    :param params: the Raman drive.
    :return: Omega_1 Omega_2 / (2 Delta), in rad/s.
    """
    enforce(
        params.single_photon_detuning != 0,
        "The effective Rabi frequency diverges at zero single-photon detuning.",
        SingularityError,
    )
    return params.omega_1 * params.omega_2 / (2 * abs(params.single_photon_detuning))


def transfer_probability(
    rabi: float, detuning: Any, t: Any, damping_rate: float = 0.0
) -> Any:
    """
    Get the population transferred by a Raman pulse.

    Element-wise on arrays. With a damping rate gamma the oscillation decays
    towards half the resonant weight: (Omega^2 / W^2)(1 - exp(-gamma t) cos W t) / 2.

    :param rabi: the Rabi frequency, in rad/s.
    :param detuning: the two-photon detuning, in rad/s.
    :param t: the pulse duration, in s.
    :param damping_rate: the damping rate, in s^-1.
    :return: the transferred population.
    """
    t = np.asarray(t, dtype=float)
    enforce(bool(np.all(t >= 0)), "Durations must be non-negative.", DomainError)
    generalized_squared = rabi**2 + np.asarray(detuning, dtype=float) ** 2
    weight = np.divide(
        rabi**2,
        generalized_squared,
        out=np.zeros(np.shape(generalized_squared)),
        where=generalized_squared > 0,
    )
    generalized = np.sqrt(generalized_squared)
    if damping_rate == 0:
        return weight * np.sin(generalized * t / 2) ** 2
    return weight * (1 - np.exp(-damping_rate * t) * np.cos(generalized * t)) / 2


def allowed_transitions(
    polarization: Polarization, constants: AtomicConstants = AtomicConstants()
) -> List[Tuple[ZeemanSublevel, ZeemanSublevel]]:
    """
    Get the sublevel pairs driven by a polarisation setting.

    :param polarization: the polarisation setting.
    :param constants: the atomic constants providing the Landé factors.
    :return: one (F=1, F=2) pair per F=1 sublevel.
    """
    return [
        (
            constants.sublevel(LOWER_F, m),
            constants.sublevel(UPPER_F, m + polarization.delta_m),
        )
        for m in range(-LOWER_F, LOWER_F + 1)
    ]


def scan_grid(start: float, stop: float, step: float) -> np.ndarray:
    """Get a frequency grid from start to stop inclusive."""
    enforce(step > 0 and stop > start, "Invalid scan grid.", ConfigurationError)
    return start + step * np.arange(int(round((stop - start) / step)) + 1)


def spectroscopy_scan(  # pylint: disable=too-many-arguments
    initial: SublevelPopulation,
    pulse: RamanPulse,
    params: LambdaSystemParams,
    magnetic_field: MagneticField,
    scan: Sequence[float],
    polarization: Polarization = Polarization.PI_SIGMA_MINUS,
    constants: AtomicConstants = AtomicConstants(),
    damping_rate: float = 0.0,
) -> RamanSpectrum:
    """
    Get the F=2 population against the Raman frequency difference.

    :param initial: the F=1 populations.
    :param pulse: the Raman pulse.
    :param params: the Raman drive.
    :param magnetic_field: the applied field.
    :param scan: the frequency differences minus the zero-field splitting, in Hz.
    :param polarization: the polarisation setting.
    :param constants: the atomic constants.
    :param damping_rate: the damping rate, in s^-1.
    :return: the spectrum.
    """
    scan = np.asarray(scan, dtype=float)
    pairs = allowed_transitions(polarization, constants)
    offsets = [
        raman_resonance_offset(lower, upper, magnetic_field, constants)
        for lower, upper in pairs
    ]
    enforce(
        scan.size > 0
        and any(scan.min() <= offset <= scan.max() for offset in offsets),
        "The scan grid contains none of the Raman resonances.",
        ConfigurationError,
    )
    rabi = effective_rabi_frequency(params)
    populations = np.zeros_like(scan)
    for (lower, _), offset in zip(pairs, offsets):
        detuning = to_angular(scan - offset - pulse.detuning_from_resonance)
        populations += initial.of(lower) * transfer_probability(
            rabi, detuning, pulse.duration, damping_rate
        )
    return RamanSpectrum(scan, populations)


def rabi_flopping_scan(  # pylint: disable=too-many-arguments
    params: LambdaSystemParams,
    durations: Sequence[float],
    initial: Optional[SublevelPopulation] = None,
    magnetic_field: MagneticField = MagneticField(),
    polarization: Polarization = Polarization.PI_SIGMA_MINUS,
    constants: AtomicConstants = AtomicConstants(),
    damping_rate: float = 0.0,
) -> RabiFlopping:
    """
    Get the F=2 population against the pulse duration.

    The beams are tuned to the pair starting from the edge sublevel (mF=-1
    for pi/sigma-, mF=+1 for pi/sigma+), shifted by the two-photon detuning
    of the drive; the other pairs contribute their detuned transfer.

    :param params: the Raman drive.
    :param durations: the pulse durations, in s.
    :param initial: the F=1 populations, uniform by default.
    :param magnetic_field: the applied field.
    :param polarization: the polarisation setting.
    :param constants: the atomic constants.
    :param damping_rate: the damping rate, in s^-1.
    :return: the flopping curve.
    """
    initial = SublevelPopulation.uniform() if initial is None else initial
    durations = np.asarray(durations, dtype=float)
    pairs = allowed_transitions(polarization, constants)
    addressed = pairs[0] if polarization is Polarization.PI_SIGMA_MINUS else pairs[-1]
    resonance = raman_resonance_offset(*addressed, magnetic_field, constants)
    rabi = effective_rabi_frequency(params)
    populations = np.zeros_like(durations)
    for lower, upper in pairs:
        offset = raman_resonance_offset(lower, upper, magnetic_field, constants)
        detuning = params.two_photon_detuning + to_angular(resonance - offset)
        populations += initial.of(lower) * transfer_probability(
            rabi, detuning, durations, damping_rate
        )
    return RabiFlopping(durations, populations)


def _gaussian(x: np.ndarray, height: float, center: float, sigma: float) -> np.ndarray:
    return height * np.exp(-((x - center) ** 2) / (2 * sigma**2))


def fit_spectral_peaks(
    spectrum: RamanSpectrum, min_height_fraction: float = 0.2
) -> List[SpectralPeak]:
    """
    Fit a Gaussian to every line of a spectrum.

    :param spectrum: the spectrum.
    :param min_height_fraction: the smallest line height, relative to the highest.
    :return: the fitted lines, sorted by centre.
    """
    populations = spectrum.populations
    enforce(populations.max() > 0, "The spectrum is flat.", AnalysisError)
    indices, _ = find_peaks(populations, height=min_height_fraction * populations.max())
    enforce(len(indices) > 0, "No line found in the spectrum.", AnalysisError)
    half_widths = peak_widths(populations, indices, rel_height=0.5)[0] / 2
    step = float(np.mean(np.diff(spectrum.detunings)))
    peaks = []
    for index, half_width in zip(indices, half_widths):
        reach = max(int(math.ceil(2 * half_width)), 3)
        window = slice(max(index - reach, 0), index + reach + 1)
        x, y = spectrum.detunings[window], populations[window]
        sigma_guess = max(2 * half_width * step / FWHM_PER_SIGMA, step)
        parameters, covariance = curve_fit(
            _gaussian, x, y, p0=(populations[index], spectrum.detunings[index], sigma_guess)
        )
        errors = np.sqrt(np.diag(covariance))
        peaks.append(
            SpectralPeak(
                center=float(parameters[1]),
                width=float(FWHM_PER_SIGMA * abs(parameters[2])),
                height=float(parameters[0]),
                center_error=float(errors[1]),
                width_error=float(FWHM_PER_SIGMA * errors[2]),
            )
        )
    return sorted(peaks, key=lambda peak: peak.center)


def fit_rabi_frequency(flopping: RabiFlopping) -> FloppingFit:
    """
    Fit A sin^2(Omega t / 2) + c to a flopping curve on a uniform grid.

    The initial frequency comes from the zero-padded spectrum of the curve.

    :param flopping: the flopping curve.
    :return: the fit.
    """
    times, populations = flopping.durations, flopping.populations
    enforce(len(times) >= 8, "Too few durations to fit.", AnalysisError)
    step = float(times[1] - times[0])
    centred = populations - populations.mean()
    size = FFT_PADDING * len(times)
    spectrum = np.abs(np.fft.rfft(centred, n=size))
    frequencies = np.fft.rfftfreq(size, step)
    enforce(spectrum[1:].max() > 0, "The curve does not oscillate.", AnalysisError)
    guess = to_angular(frequencies[1 + int(np.argmax(spectrum[1:]))])
    amplitude = float(populations.max() - populations.min())
    parameters, covariance = curve_fit(
        lambda t, a, omega, c: a * np.sin(omega * t / 2) ** 2 + c,
        times,
        populations,
        p0=(amplitude, guess, float(populations.min())),
    )
    return FloppingFit(
        rabi_frequency=float(abs(parameters[1])),
        rabi_frequency_error=float(math.sqrt(abs(covariance[1, 1]))),
        amplitude=float(parameters[0]),
        offset=float(parameters[2]),
    )


def beam2_power_for_area(
    params: LambdaSystemParams, duration: float, area: float
) -> float:
    """Get the second beam power giving a pulse of the requested area, in rad."""
    rabi = effective_rabi_frequency(params)
    enforce(rabi > 0, "The drive does not couple the levels.", DomainError)
    return params.beam2_power * (area / (rabi * duration)) ** 2
