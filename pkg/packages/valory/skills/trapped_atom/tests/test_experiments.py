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

"""Test the experiments.py module of the skill."""

# pylint: skip-file

import logging
from pathlib import Path
from typing import Any, Dict, Optional

import numpy as np
import pytest

from packages.valory.skills.trapped_atom import LOGGER_NAME
from packages.valory.skills.trapped_atom.experiments import (
    EXPERIMENTS,
    SUMMARY_FILE,
    CorrelateExperiment,
    EmitExperiment,
    HbtExperiment,
    Metric,
    RamanExperiment,
    RunSummary,
    run_hbt,
    run_occupancy,
    run_rabi_sweep,
    run_raman,
    run_traces,
)
from packages.valory.skills.trapped_atom.exports import read_csv
from packages.valory.skills.trapped_atom.models import ExperimentConfig
from packages.valory.skills.trapped_atom.occupancy import window_occupancy


SMALL_HBT = {
    "hbt.trajectories": 64,
    "emitter.batch_size": 16,
    "train.cycles": 2,
}
PERFECT_CHAIN = {
    "chain.total_efficiency": 1.0,
    "chain.dark_rate_per_detector": 0.0,
    "chain.background_rate": 0.0,
}


def make_config(directory: Path, overrides: Optional[Dict[str, Any]] = None) -> ExperimentConfig:
    """Build a seeded configuration writing under the given directory."""
    return ExperimentConfig(
        **{
            "run.master_seed": 2024,
            "run.output_directory": str(directory),
            **(overrides or {}),
        }
    )


class TestMetric:
    """Test Metric."""

    def test_render(self) -> None:
        """Test the rendering of values with and without errors."""
        assert Metric(1.5, 0.25, "ns").render() == "1.5 ± 0.25 ns"
        assert Metric(2.0).render() == "2 exact"

    @pytest.mark.parametrize("text", ["1.5 ± 0.25 ns", "2 exact", "30600 ± 175 1/s"])
    def test_parse(self, text: str) -> None:
        """Test that parsing inverts rendering."""
        assert Metric.parse(text).render() == text

    def test_exact(self) -> None:
        """Test the exact flag."""
        assert Metric(1.0).is_exact
        assert not Metric(1.0, 0.0).is_exact


class TestRunSummary:
    """Test RunSummary."""

    def test_file_round_trip(self, tmp_path: Path) -> None:
        """Test writing and reading a summary."""
        summary = RunSummary(
            "hbt",
            "abc",
            {"peak_rate": Metric(30600.0, 175.0, "1/s"), "ratio": Metric(0.5)},
            [tmp_path / "hbt" / "hbt_histogram.csv"],
        )
        back = RunSummary.from_file(summary.write(tmp_path / SUMMARY_FILE))
        assert back == summary
        assert back["peak_rate"].error == 175.0


class TestRabiSweepExperiment:
    """Test RabiSweepExperiment."""

    def test_run(self, tmp_path: Path) -> None:
        """Test the artifacts and the headline metrics of a short sweep."""
        config = make_config(
            tmp_path,
            {"rabi.points": 11, "rabi.samples_per_point": 10, "rabi.max_power_nw": 500.0},
        )
        summary = run_rabi_sweep(config)
        names = sorted(path.name for path in summary.artifact_paths)
        assert names == ["rabi_curve.csv", "trace_2pi.csv", "trace_3pi.csv", "trace_pi.csv"]
        digest, columns = read_csv(tmp_path / "rabi" / "rabi_curve.csv")
        assert digest == config.digest
        assert len(columns["power_nw"]) == 11
        assert np.all(columns["rate_per_s"] >= 0)

        efficiency = summary["first_peak_excitation_efficiency"]
        assert efficiency.is_exact
        assert efficiency.value == pytest.approx(0.945, abs=0.02)
        assert 1.0 < summary["mean_photons_per_pulse"].value < 1.05
        assert summary["peak_count_rate"].value == pytest.approx(30600, rel=0.03)

        written = RunSummary.from_file(tmp_path / "rabi" / SUMMARY_FILE)
        assert written.to_text() == summary.to_text()


class TestTraceExperiment:
    """Test TraceExperiment."""

    def test_run(self, tmp_path: Path) -> None:
        """Test the decay and photon statistics of a short run."""
        config = make_config(
            tmp_path, {"trace.trajectories": 300, "train.excitation_window_us": 20.0}
        )
        summary = run_traces(config)
        assert summary["fitted_decay_time"].value == pytest.approx(26.0, rel=0.2)
        assert summary["excited_population_at_pulse_end"].value == pytest.approx(
            0.945, abs=0.06
        )
        probabilities = sum(
            summary[name].value for name in ("p_zero", "p_one", "p_two_or_more")
        )
        assert probabilities == pytest.approx(1.0)
        assert summary["p_two_or_more"].value < 0.05
        _, columns = read_csv(tmp_path / "trace" / "population_trace.csv")
        assert set(columns) == {"time_ns", "mcwf_rho_ee", "mcwf_error", "obe_rho_ee"}


class TestHbtExperiment:
    """Test HbtExperiment."""

    def test_jobs_do_not_change_results(self, tmp_path: Path) -> None:
        """Test that the artifacts are byte-identical for one and two jobs."""
        serial = run_hbt(make_config(tmp_path / "serial", SMALL_HBT), jobs=1)
        parallel = run_hbt(make_config(tmp_path / "parallel", SMALL_HBT), jobs=2)
        for name in ("hbt_histogram.csv", "hbt_counts.csv"):
            assert (tmp_path / "serial" / "hbt" / name).read_bytes() == (
                tmp_path / "parallel" / "hbt" / name
            ).read_bytes()
        assert serial.headline_metrics == parallel.headline_metrics
        assert serial.parameters_digest == parallel.parameters_digest

    def test_present_cycles(self, tmp_path: Path) -> None:
        """Test that a surviving atom is present in every cycle."""
        run_hbt(make_config(tmp_path, SMALL_HBT))
        _, columns = read_csv(tmp_path / "hbt" / "hbt_counts.csv")
        assert len(columns["trajectory_id"]) == 64
        np.testing.assert_array_equal(columns["present_cycles"], 2)
        np.testing.assert_array_equal(columns["clicks_present"], columns["clicks_total"])

    def test_lossy_atom(self, tmp_path: Path) -> None:
        """Test that losses cut the sequences short."""
        summary = run_hbt(
            make_config(tmp_path, {**SMALL_HBT, "occupancy.survival_per_cycle": 0.5})
        )
        _, columns = read_csv(tmp_path / "hbt" / "hbt_counts.csv")
        assert set(np.unique(columns["present_cycles"])) <= {1, 2}
        assert np.any(columns["present_cycles"] == 1)
        assert summary["predicted_average_rate"].value == pytest.approx(
            0.75 * HbtExperiment(make_config(tmp_path)).predicted_peak_rate
        )

    def test_statistics_warning(self, tmp_path: Path, caplog: pytest.LogCaptureFixture) -> None:
        """Test the warning when the side peaks hold too few coincidences."""
        with caplog.at_level(logging.WARNING, logger=f"{LOGGER_NAME}.hbt"):
            summary = run_hbt(make_config(tmp_path, SMALL_HBT))
        assert summary["statistics_warning"].value == 1.0
        assert "side peak coincidences" in caplog.text

    def test_fitted_survival(self, tmp_path: Path) -> None:
        """Test the survival reproducing the measured average rate."""
        experiment = HbtExperiment(make_config(tmp_path, {"hbt.fit_survival": True}))
        assert experiment.predicted_peak_rate == pytest.approx(30900, rel=0.03)
        survival = experiment.survival_per_cycle()
        assert 0.96 < survival < 0.98
        assert experiment.predicted_peak_rate * window_occupancy(
            survival, 100
        ) == pytest.approx(9600, rel=1e-6)


class TestRamanExperiment:
    """Test RamanExperiment."""

    def test_scan(self, tmp_path: Path) -> None:
        """Test the fitted resonances of the default scan."""
        summary = run_raman(make_config(tmp_path), RamanExperiment.SCAN)
        assert summary.experiment_name == "raman-scan"
        assert summary["peak_0_center"].value == pytest.approx(-8.82, abs=0.005)
        assert summary["peak_1_center"].value == pytest.approx(-2.94, abs=0.005)
        assert "peak_2_center" not in summary.headline_metrics
        assert summary["effective_rabi_frequency"].value == pytest.approx(50.0)
        assert (tmp_path / "raman-scan" / "raman_spectrum.csv").exists()

    def test_flop(self, tmp_path: Path) -> None:
        """Test the fitted Rabi frequency at the calibration anchor."""
        summary = run_raman(make_config(tmp_path), RamanExperiment.FLOP)
        assert summary["fitted_rabi_frequency"].value == pytest.approx(65.0, rel=0.05)
        assert summary["effective_rabi_frequency"].value == pytest.approx(65.0)
        assert summary["beam2_power"].value == pytest.approx(60.0)

    def test_invalid_mode(self, tmp_path: Path) -> None:
        """Test that unknown modes are rejected."""
        with pytest.raises(ValueError):
            run_raman(make_config(tmp_path), "sweep")


class TestOccupancyExperiment:
    """Test OccupancyExperiment."""

    def test_continuous(self, tmp_path: Path) -> None:
        """Test the occupied fraction under continuous loading."""
        summary = run_occupancy(make_config(tmp_path, {"occupancy.duration_s": 300.0}))
        fraction = summary["occupied_fraction"]
        assert fraction.value == pytest.approx(0.5, abs=0.08)
        assert 0 < fraction.error < 0.05
        assert summary["max_atom_number"].value == 1.0
        assert summary["sequences"].value == 0.0

    def test_triggered(self, tmp_path: Path) -> None:
        """Test the triggered sequences of a lossy atom."""
        summary = run_occupancy(
            make_config(
                tmp_path,
                {
                    "occupancy.mode": "triggered",
                    "occupancy.survival_per_cycle": 0.97,
                    "occupancy.duration_s": 50.0,
                },
            )
        )
        assert summary["sequences"].value > 0
        assert summary["expected_window_occupancy"].value == pytest.approx(
            window_occupancy(0.97, 100)
        )


class TestEmitAndCorrelate:
    """Test the export of emissions and their later correlation."""

    OVERRIDES = {"hbt.trajectories": 100, "train.cycles": 1, **PERFECT_CHAIN}

    def test_antibunching(self, tmp_path: Path) -> None:
        """Test that exported single photons show antibunching once detected."""
        config = make_config(tmp_path, self.OVERRIDES)
        emitted = EmitExperiment(config).run()
        assert emitted["trajectories"].value == 100
        assert emitted["mean_photons_per_pulse"].value == pytest.approx(1.02, rel=0.05)
        emissions = tmp_path / "emit" / "emissions.csv"
        correlated = CorrelateExperiment(config, emissions).run()
        assert correlated["side_peak_coincidences"].value > 10000
        assert correlated["zero_delay_residual_ratio"].value < 0.1

    def test_foreign_emissions(self, tmp_path: Path, caplog: pytest.LogCaptureFixture) -> None:
        """Test the warning for emissions of another configuration."""
        EmitExperiment(make_config(tmp_path, self.OVERRIDES)).run()
        other = make_config(tmp_path, {**self.OVERRIDES, "run.master_seed": 1})
        with caplog.at_level(logging.WARNING, logger=f"{LOGGER_NAME}.correlate"):
            CorrelateExperiment(other, tmp_path / "emit" / "emissions.csv").run()
        assert "was produced with configuration" in caplog.text


def test_registry(tmp_path: Path) -> None:
    """Test the experiments selectable by name."""
    assert sorted(EXPERIMENTS) == [
        "emit",
        "hbt",
        "occupancy",
        "rabi",
        "raman-flop",
        "raman-scan",
        "trace",
    ]
    assert all(experiment.name == name for name, experiment in EXPERIMENTS.items())
    flop = EXPERIMENTS["raman-flop"](make_config(tmp_path))
    assert isinstance(flop, RamanExperiment)
    assert flop.mode == RamanExperiment.FLOP
    assert flop.output_directory == tmp_path / "raman-flop"
    assert CorrelateExperiment.name not in EXPERIMENTS


@pytest.mark.e2e
def test_full_hbt(tmp_path: Path) -> None:
    """Test the correlation experiment at production size."""
    summary = run_hbt(make_config(tmp_path), jobs=-1)
    assert summary["side_peak_coincidences"].value >= 10000
    assert summary["statistics_warning"].value == 0.0
    assert 0.02 <= summary["zero_delay_residual_ratio"].value <= 0.05
    assert summary["one_over_e_half_width"].value == pytest.approx(27.0, abs=3.0)
    _, peaks = read_csv(tmp_path / "hbt" / "hbt_peaks.csv")
    np.testing.assert_allclose(peaks["position_ns"], 200 * peaks["order"], atol=5.0)


@pytest.mark.e2e
def test_count_rates(tmp_path: Path) -> None:
    """Test the peak and average count rates with and without losses."""
    lossless = run_hbt(make_config(tmp_path / "lossless", {"hbt.trajectories": 400}), jobs=-1)
    peak = lossless["peak_rate"].value
    assert peak == pytest.approx(29000, rel=0.1)
    assert lossless["duty_limited_average_rate"].value <= peak * 0.115 * 1.01
    fitted = run_hbt(
        make_config(
            tmp_path / "fitted", {"hbt.trajectories": 400, "hbt.fit_survival": True}
        ),
        jobs=-1,
    )
    assert fitted["survival_per_cycle"].value < 1
    assert fitted["average_rate_during_excitation"].value == pytest.approx(9600, rel=0.1)


@pytest.mark.e2e
def test_full_rabi_sweep(tmp_path: Path) -> None:
    """Test the default Rabi sweep."""
    summary = run_rabi_sweep(make_config(tmp_path), jobs=-1)
    _, columns = read_csv(tmp_path / "rabi" / "rabi_curve.csv")
    assert len(columns["power_nw"]) == 201
    assert summary["curve_maximum_rate"].value < summary["peak_count_rate"].value * 1.05
