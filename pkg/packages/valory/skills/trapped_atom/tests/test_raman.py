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

"""Test the raman.py module of the skill."""

# pylint: skip-file

import logging
import math

import numpy as np
import pytest

from packages.valory.skills.trapped_atom import LOGGER_NAME
from packages.valory.skills.trapped_atom.constants import (
    KHZ,
    MHZ,
    MagneticField,
    NW,
    US,
    ZeemanSublevel,
    raman_resonance_offset,
    to_angular,
    to_frequency,
)
from packages.valory.skills.trapped_atom.exceptions import (
    AnalysisError,
    ConfigurationError,
    DomainError,
    SingularityError,
)
from packages.valory.skills.trapped_atom.raman import (
    LambdaSystemParams,
    Polarization,
    RamanCalibration,
    RamanPulse,
    RamanSpectrum,
    SublevelPopulation,
    allowed_transitions,
    beam2_power_for_area,
    effective_rabi_frequency,
    fit_rabi_frequency,
    fit_spectral_peaks,
    rabi_flopping_scan,
    scan_grid,
    spectroscopy_scan,
    transfer_probability,
)


FIELD = MagneticField(4.2)
GRID_STEP = 2 * KHZ


def spectrum_for(duration: float) -> RamanSpectrum:
    """Scan the default resonances with a pi pulse of the given duration."""
    params = LambdaSystemParams.from_calibration()
    params = params.with_beam2_power(beam2_power_for_area(params, duration, math.pi))
    return spectroscopy_scan(
        SublevelPopulation.uniform(),
        RamanPulse(duration),
        params,
        FIELD,
        scan_grid(-12 * MHZ, 0.0, GRID_STEP),
    )


class TestLambdaSystem:
    """Test the Raman drive."""

    def test_effective_rabi_frequency(self) -> None:
        """Test Omega_1 Omega_2 / (2 |Delta|)."""
        params = LambdaSystemParams(10.0, 20.0, -1e5)
        assert effective_rabi_frequency(params) == pytest.approx(1e-3)

    def test_singularity(self) -> None:
        """Test that a vanishing single-photon detuning is rejected."""
        with pytest.raises(SingularityError):
            effective_rabi_frequency(LambdaSystemParams(1.0, 1.0, 0.0))

    def test_calibration_anchor(self) -> None:
        """Test that the calibration point is reproduced."""
        params = LambdaSystemParams.from_calibration(RamanCalibration())
        assert to_frequency(effective_rabi_frequency(params)) == pytest.approx(65 * KHZ)

    def test_square_root_power_law(self) -> None:
        """Test that four times the power doubles the Rabi frequency."""
        params = LambdaSystemParams.from_calibration()
        quadrupled = params.with_beam2_power(4 * params.beam2_power)
        assert effective_rabi_frequency(quadrupled) == pytest.approx(
            2 * effective_rabi_frequency(params), rel=1e-12
        )

    def test_adiabatic_warning(self, caplog: pytest.LogCaptureFixture) -> None:
        """Test the warning when the detuning is not much larger than the drive."""
        with caplog.at_level(logging.WARNING, logger=f"{LOGGER_NAME}.raman"):
            LambdaSystemParams(1.0, 1.0, 50.0)
        assert "times the strongest Rabi frequency" in caplog.text

    def test_invalid(self) -> None:
        """Test that negative drives are rejected."""
        with pytest.raises(DomainError):
            LambdaSystemParams(-1.0, 1.0, 1e9)
        with pytest.raises(DomainError):
            RamanCalibration(beam2_power=0.0)


class TestTransferProbability:
    """Test transfer_probability."""

    def test_resonant(self) -> None:
        """Test the resonant oscillation sin^2(Omega t / 2)."""
        rabi = to_angular(65 * KHZ)
        times = np.linspace(0, 50 * US, 11)
        np.testing.assert_allclose(
            transfer_probability(rabi, 0.0, times), np.sin(rabi * times / 2) ** 2
        )

    def test_detuned_amplitude(self) -> None:
        """Test the reduced amplitude Omega^2 / W^2 off resonance."""
        rabi = 1.0
        peak_time = math.pi / math.sqrt(2)
        assert transfer_probability(rabi, 1.0, peak_time) == pytest.approx(0.5)

    def test_damping(self) -> None:
        """Test that damping settles at half the resonant weight."""
        assert transfer_probability(1.0, 0.0, 1e3, damping_rate=1.0) == pytest.approx(0.5)
        assert transfer_probability(1.0, 0.0, 0.0, damping_rate=1.0) == 0.0

    def test_zero_rabi(self) -> None:
        """Test that no drive transfers nothing, even on resonance."""
        assert transfer_probability(0.0, 0.0, 1.0) == 0.0

    def test_negative_duration(self) -> None:
        """Test that negative durations are rejected."""
        with pytest.raises(DomainError):
            transfer_probability(1.0, 0.0, -1.0)

    @pytest.mark.parametrize("damping_rate", [0.0, 1e3, 2e4, 1e7])
    @pytest.mark.parametrize("duration", [0.0, 3 * US, 17.5 * US, 1e3 * US])
    def test_symmetric_and_bounded(self, damping_rate: float, duration: float) -> None:
        """Test the lineshape is even in the detuning and stays a probability."""
        rabi = to_angular(50 * KHZ)
        detunings = to_angular(np.linspace(0, 2 * MHZ, 401))
        above = transfer_probability(rabi, detunings, duration, damping_rate)
        below = transfer_probability(rabi, -detunings, duration, damping_rate)
        np.testing.assert_array_equal(above, below)
        assert np.all((above >= 0) & (above <= 1))


class TestSpectroscopy:
    """Test the Raman spectroscopy scan."""

    def test_allowed_transitions(self) -> None:
        """Test the pairs driven by each polarisation."""
        pairs = allowed_transitions(Polarization.PI_SIGMA_MINUS)
        assert [(lower.m_F, upper.m_F) for lower, upper in pairs] == [
            (-1, -2),
            (0, -1),
            (1, 0),
        ]
        pairs = allowed_transitions(Polarization.PI_SIGMA_PLUS)
        assert [(lower.m_F, upper.m_F) for lower, upper in pairs] == [
            (-1, 0),
            (0, 1),
            (1, 2),
        ]

    def test_peak_centres(self) -> None:
        """Test the two resonances inside the default scan."""
        peaks = fit_spectral_peaks(spectrum_for(10 * US))
        assert len(peaks) == 2
        expected = [
            raman_resonance_offset(lower, upper, FIELD)
            for lower, upper in allowed_transitions(Polarization.PI_SIGMA_MINUS)[:2]
        ]
        assert expected == pytest.approx([-8.82 * MHZ, -2.94 * MHZ], abs=0.005 * MHZ)
        for peak, offset in zip(peaks, expected):
            assert peak.center == pytest.approx(offset, abs=GRID_STEP)
        assert peaks[0].height == pytest.approx(1 / 3, abs=0.02)

    def test_fourier_limited_width(self) -> None:
        """Test that doubling the pulse duration halves the line width."""
        short = fit_spectral_peaks(spectrum_for(10 * US))
        long = fit_spectral_peaks(spectrum_for(20 * US))
        for narrow, wide in zip(long, short):
            assert narrow.width == pytest.approx(wide.width / 2, rel=0.05)

    def test_scan_without_resonance(self) -> None:
        """Test that a scan missing every resonance is rejected."""
        with pytest.raises(ConfigurationError):
            spectroscopy_scan(
                SublevelPopulation.uniform(),
                RamanPulse(10 * US),
                LambdaSystemParams.from_calibration(),
                FIELD,
                scan_grid(-20 * MHZ, -15 * MHZ, GRID_STEP),
            )

    def test_single_populated_sublevel(self) -> None:
        """Test that only the populated sublevel shows a line."""
        initial = SublevelPopulation({ZeemanSublevel(1, 0): 1.0})
        params = LambdaSystemParams.from_calibration()
        duration = 10 * US
        params = params.with_beam2_power(beam2_power_for_area(params, duration, math.pi))
        spectrum = spectroscopy_scan(
            initial, RamanPulse(duration), params, FIELD, scan_grid(-12 * MHZ, 0.0, GRID_STEP)
        )
        peaks = fit_spectral_peaks(spectrum)
        assert len(peaks) == 1
        assert peaks[0].height == pytest.approx(1.0, abs=0.02)

    def test_populations(self) -> None:
        """Test the validation of the initial populations."""
        with pytest.raises(DomainError):
            SublevelPopulation({ZeemanSublevel(1, 0): 0.5})
        with pytest.raises(DomainError):
            SublevelPopulation({ZeemanSublevel(2, 0): 1.0})

    def test_flat_spectrum(self) -> None:
        """Test that a flat spectrum has no line to fit."""
        spectrum = RamanSpectrum(np.arange(10.0), np.zeros(10))
        with pytest.raises(AnalysisError):
            fit_spectral_peaks(spectrum)


class TestRabiFlopping:
    """Test the Rabi flopping scan."""

    def test_fitted_frequency(self) -> None:
        """Test the fitted frequency at the calibration anchor."""
        params = LambdaSystemParams.from_calibration()
        flopping = rabi_flopping_scan(params, scan_grid(0.0, 60 * US, 0.1 * US))
        fit = fit_rabi_frequency(flopping)
        assert to_frequency(fit.rabi_frequency) == pytest.approx(65 * KHZ, rel=0.05)
        assert fit.amplitude == pytest.approx(1 / 3, abs=0.02)

    def test_factor_two_at_four_times_power(self) -> None:
        """Test the doubled frequency at four times the power."""
        params = LambdaSystemParams.from_calibration()
        durations = scan_grid(0.0, 60 * US, 0.1 * US)
        base = fit_rabi_frequency(rabi_flopping_scan(params, durations))
        boosted = fit_rabi_frequency(
            rabi_flopping_scan(params.with_beam2_power(240 * NW), durations)
        )
        assert boosted.rabi_frequency / base.rabi_frequency == pytest.approx(2, rel=0.01)

    def test_two_photon_detuning_speeds_up(self) -> None:
        """Test the generalised Rabi frequency of a detuned drive."""
        params = LambdaSystemParams.from_calibration().with_two_photon_detuning(
            to_angular(65 * KHZ)
        )
        flopping = rabi_flopping_scan(params, scan_grid(0.0, 60 * US, 0.1 * US))
        fit = fit_rabi_frequency(flopping)
        assert to_frequency(fit.rabi_frequency) == pytest.approx(
            math.sqrt(2) * 65 * KHZ, rel=0.05
        )
        assert fit.amplitude == pytest.approx(1 / 6, abs=0.02)

    def test_too_few_points(self) -> None:
        """Test that short scans cannot be fitted."""
        flopping = rabi_flopping_scan(
            LambdaSystemParams.from_calibration(), np.linspace(0, 1e-6, 4)
        )
        with pytest.raises(AnalysisError):
            fit_rabi_frequency(flopping)

    def test_beam_power_for_area(self) -> None:
        """Test the power giving a pi pulse."""
        params = LambdaSystemParams.from_calibration()
        duration = 10 * US
        power = beam2_power_for_area(params, duration, math.pi)
        rabi = effective_rabi_frequency(params.with_beam2_power(power))
        assert rabi * duration == pytest.approx(math.pi)
        assert power / NW == pytest.approx(60 * (50 / 65) ** 2)
