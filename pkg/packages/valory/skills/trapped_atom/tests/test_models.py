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

"""Test the models.py module of the skill."""

# pylint: skip-file

import math
from pathlib import Path

import pytest

from packages.valory.skills.trapped_atom.constants import MHZ, NS, to_frequency
from packages.valory.skills.trapped_atom.emitter import RepumpMode
from packages.valory.skills.trapped_atom.exceptions import ConfigurationError
from packages.valory.skills.trapped_atom.models import (
    DEFAULTS,
    DEFAULT_CONFIG_FILE,
    ExperimentConfig,
    parse_config_text,
)
from packages.valory.skills.trapped_atom.raman import Polarization


def data_lines(text: str) -> list:
    """Get the key = value lines of a configuration text."""
    return [
        line.strip()
        for line in text.splitlines()
        if line.strip() and not line.strip().startswith("#")
    ]


def failing_fields(error: ConfigurationError) -> set:
    """Get the field paths of a configuration error."""
    return {path for path, _ in error.errors}


class TestParseConfigText:
    """Test parse_config_text."""

    def test_typed_values(self) -> None:
        """Test the conversion to the schema types."""
        values = parse_config_text(
            "train.cycles = 7\n"
            "chain.total_efficiency = 0.01  # measured\n"
            "hbt.fit_survival = TRUE\n"
            "raman.polarization = pi-sigma-plus\n"
        )
        assert values == {
            "train.cycles": 7,
            "chain.total_efficiency": 0.01,
            "hbt.fit_survival": True,
            "raman.polarization": "pi-sigma-plus",
        }

    def test_every_failure_is_reported(self) -> None:
        """Test that all failing lines are collected."""
        text = (
            "train.cycles = many\n"
            "train.colour = blue\n"
            "field.magnitude_g = 4.2\n"
            "field.magnitude_g = 4.3\n"
            "just some words\n"
            "hbt.fit_survival = maybe\n"
        )
        with pytest.raises(ConfigurationError) as info:
            parse_config_text(text)
        assert failing_fields(info.value) == {
            "train.cycles",
            "train.colour",
            "field.magnitude_g",
            "line 5",
            "hbt.fit_survival",
        }
        assert dict(info.value.errors)["train.colour"] == "unknown key"

    def test_comments_and_blank_lines(self) -> None:
        """Test that comments and blank lines are skipped."""
        assert parse_config_text("# nothing\n\n   \n") == {}


class TestExperimentConfig:
    """Test ExperimentConfig."""

    def test_default_file_round_trip(self) -> None:
        """Test that the shipped file dumps back to its own data lines."""
        text = DEFAULT_CONFIG_FILE.read_text(encoding="utf-8")
        config = ExperimentConfig.from_text(text)
        assert data_lines(config.to_text()) == data_lines(text)
        assert list(config.to_mapping()) == list(DEFAULTS)

    def test_text_round_trip(self) -> None:
        """Test that parsing a dump gives an equal configuration."""
        config = ExperimentConfig(**{"run.master_seed": 9, "chain.total_efficiency": 0.1 + 0.2})
        again = ExperimentConfig.from_text(config.to_text())
        assert again == config
        assert again.digest == config.digest
        assert again["chain.total_efficiency"] == 0.1 + 0.2

    def test_file_round_trip(self, tmp_path: Path) -> None:
        """Test saving and loading."""
        config = ExperimentConfig(**{"run.master_seed": 3, "train.cycles": 12})
        path = config.save(tmp_path / "saved.cfg")
        assert ExperimentConfig.from_file(path) == config

    def test_typed_sections(self) -> None:
        """Test the sections built from the raw keys."""
        config = ExperimentConfig(
            **{
                "run.master_seed": 1,
                "train.rabi_frequency_mhz": 125.0,
                "emitter.repump": "window",
                "raman.polarization": "pi-sigma-plus",
                "raman.damping_rate_per_ms": 2.0,
            }
        )
        assert to_frequency(config.train.pulse.rabi_frequency) == pytest.approx(125 * MHZ)
        assert config.train.pulse.duration == pytest.approx(4 * NS)
        assert config.train.cycles == 100
        assert config.repump is RepumpMode.WINDOW
        assert config.polarization is Polarization.PI_SIGMA_PLUS
        assert config.raman_damping_rate == pytest.approx(2000.0)
        assert config.constants.excited_lifetime == pytest.approx(26 * NS)
        assert not config.calibrate_pulse

    def test_calibrated_pulse_placeholder(self) -> None:
        """Test that a zero Rabi frequency asks for calibration."""
        config = ExperimentConfig(**{"run.master_seed": 1})
        assert config.calibrate_pulse
        assert config.train.pulse.rabi_frequency == pytest.approx(math.pi / (4 * NS))

    def test_seed_is_required(self) -> None:
        """Test that the master seed has no default."""
        with pytest.raises(ConfigurationError) as info:
            ExperimentConfig()
        assert dict(info.value.errors) == {"run.master_seed": "required"}

    @pytest.mark.parametrize(
        "overrides,field",
        [
            ({"run.master_seed": -1}, "run.master_seed"),
            ({"run.master_seed": True}, "run.master_seed"),
            ({"train.cycles": 2.5}, "train.cycles"),
            ({"train.cycles": 0}, "train"),
            ({"emitter.leak_probability": 1.0}, "emitter.leak_probability"),
            ({"emitter.repump": "sometimes"}, "emitter.repump"),
            ({"hbt.trajectories": 0}, "hbt.trajectories"),
            ({"occupancy.mean_occupancy": 2.0}, "occupancy"),
            ({"raman.anchor_power_nw": 0.0}, "raman"),
            ({"chain.splitter_ratio": 1.5}, "chain"),
            ({"train.period_ns": 1.0}, "train"),
        ],
    )
    def test_invalid_field(self, overrides: dict, field: str) -> None:
        """Test that the failing field is named."""
        with pytest.raises(ConfigurationError) as info:
            ExperimentConfig(**{"run.master_seed": 1, **overrides})
        assert field in failing_fields(info.value)

    def test_all_failures_collected(self) -> None:
        """Test that independent failures are reported together."""
        with pytest.raises(ConfigurationError) as info:
            ExperimentConfig(
                **{
                    "train.cycles": "ten",
                    "noise.distribution": "lognormal",
                    "unknown.key": 1,
                }
            )
        assert failing_fields(info.value) >= {
            "run.master_seed",
            "train.cycles",
            "noise",
            "unknown.key",
        }

    def test_integers_accepted_for_floats(self) -> None:
        """Test that integer values fill float keys."""
        config = ExperimentConfig(**{"run.master_seed": 1, "field.magnitude_g": 3})
        assert config["field.magnitude_g"] == 3.0
        assert isinstance(config["field.magnitude_g"], float)

    def test_digest(self) -> None:
        """Test what the digest depends on."""
        config = ExperimentConfig(**{"run.master_seed": 5})
        moved = config.with_overrides(**{"run.output_directory": "elsewhere"})
        reseeded = config.with_overrides(**{"run.master_seed": 6})
        assert moved.digest == config.digest
        assert moved != config
        assert reseeded.digest != config.digest
        assert len(config.digest) == 64

    def test_with_overrides(self) -> None:
        """Test that overrides leave the original untouched."""
        config = ExperimentConfig(**{"run.master_seed": 5})
        changed = config.with_overrides(**{"train.cycles": 3})
        assert changed.train.cycles == 3
        assert config.train.cycles == 100

    def test_from_text_overrides(self) -> None:
        """Test that overrides win over the text."""
        config = ExperimentConfig.from_text(
            "run.master_seed = 1\ntrain.cycles = 4\n", **{"train.cycles": 8}
        )
        assert config["train.cycles"] == 8
