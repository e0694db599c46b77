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

"""This module contains the experiment configuration."""

import hashlib
import math
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional, Tuple, Type, Union

from packages.valory.skills.trapped_atom.bloch import (
    IntensityNoiseModel,
    NoiseDistribution,
    SquarePulse,
)
from packages.valory.skills.trapped_atom.constants import (
    AtomicConstants,
    DetectionChainParams,
    GHZ,
    KHZ,
    MHZ,
    MagneticField,
    MS,
    NS,
    NW,
    US,
    to_angular,
)
from packages.valory.skills.trapped_atom.emitter import PulseTrainConfig, RepumpMode
from packages.valory.skills.trapped_atom.exceptions import (
    ConfigurationError,
    DomainError,
)
from packages.valory.skills.trapped_atom.occupancy import OccupancyMode, OccupancyModel
from packages.valory.skills.trapped_atom.raman import (
    LambdaSystemParams,
    Polarization,
    RamanCalibration,
)


REQUIRED = None
COMMENT = "#"
EXECUTION_ONLY_KEYS = frozenset({"run.output_directory"})

DEFAULTS: Dict[str, Tuple[Type, Any]] = {
    "constants.excited_lifetime_ns": (float, 26.0),
    "constants.hyperfine_splitting_ghz": (float, 6.8),
    "constants.bohr_magneton_mhz_per_g": (float, 1.3996),
    "constants.lande_lower": (float, -0.5),
    "constants.lande_upper": (float, 0.5),
    "field.magnitude_g": (float, 4.2),
    "train.pulse_duration_ns": (float, 4.0),
    "train.rabi_frequency_mhz": (float, 0.0),
    "train.detuning_mhz": (float, 0.0),
    "train.period_ns": (float, 200.0),
    "train.excitation_window_us": (float, 115.0),
    "train.cooling_window_us": (float, 885.0),
    "train.cycles": (int, 100),
    "chain.total_efficiency": (float, 0.006),
    "chain.splitter_ratio": (float, 0.5),
    "chain.dark_rate_per_detector": (float, 100.0),
    "chain.background_rate": (float, 50.0),
    "noise.relative_rms": (float, 0.1),
    "noise.distribution": (str, NoiseDistribution.GAUSSIAN_TRUNCATED_AT_ZERO.value),
    "emitter.leak_probability": (float, 0.0),
    "emitter.repump": (str, RepumpMode.PULSE.value),
    "emitter.batch_size": (int, 128),
    "rabi.rabi_coefficient_mhz_per_sqrt_nw": (float, 12.5),
    "rabi.max_power_nw": (float, 5000.0),
    "rabi.points": (int, 201),
    "rabi.samples_per_point": (int, 200),
    "trace.trajectories": (int, 2000),
    "trace.duration_ns": (float, 134.0),
    "hbt.trajectories": (int, 2400),
    "hbt.bin_width_ns": (float, 1.0),
    "hbt.range_ns": (float, 1000.0),
    "hbt.target_side_coincidences": (int, 10000),
    "hbt.fit_survival": (bool, False),
    "raman.rabi_frequency_khz": (float, 65.0),
    "raman.anchor_power_nw": (float, 60.0),
    "raman.beam2_power_nw": (float, 60.0),
    "raman.omega_1_ghz": (float, 100.0),
    "raman.single_photon_detuning_ghz": (float, 14000.0),
    "raman.two_photon_detuning_khz": (float, 0.0),
    "raman.polarization": (str, Polarization.PI_SIGMA_MINUS.value),
    "raman.damping_rate_per_ms": (float, 0.0),
    "raman.scan_pulse_us": (float, 10.0),
    "raman.scan_pulse_area": (float, 1.0),
    "raman.scan_start_mhz": (float, -12.0),
    "raman.scan_stop_mhz": (float, 0.0),
    "raman.scan_step_khz": (float, 2.0),
    "raman.flop_max_us": (float, 60.0),
    "raman.flop_step_us": (float, 0.1),
    "occupancy.mean_occupancy": (float, 0.5),
    "occupancy.capture_rate": (float, 3.0),
    "occupancy.survival_per_cycle": (float, 1.0),
    "occupancy.target_average_rate": (float, 9600.0),
    "occupancy.mode": (str, OccupancyMode.CONTINUOUS.value),
    "occupancy.duration_s": (float, 1000.0),
    "run.master_seed": (int, REQUIRED),
    "run.output_directory": (str, "results"),
}


def _render(value: Any) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _parse(raw: str, kind: Type) -> Any:
    if kind is bool:
        if raw.lower() not in ("true", "false"):
            raise ValueError(f"expected true or false, got {raw!r}")
        return raw.lower() == "true"
    return kind(raw)


def parse_config_text(text: str) -> Dict[str, Any]:
    """
    Parse flat key = value text.

    :param text: the configuration text.
    :return: the typed values of the keys present in the text.
    """
    values: Dict[str, Any] = {}
    errors: List[Tuple[str, str]] = []
    for number, line in enumerate(text.splitlines(), start=1):
        content = line.split(COMMENT, 1)[0].strip()
        if not content:
            continue
        key, separator, raw = (part.strip() for part in content.partition("="))
        if not separator or not key:
            errors.append((f"line {number}", f"expected 'key = value', got {line!r}"))
            continue
        if key not in DEFAULTS:
            errors.append((key, "unknown key"))
            continue
        if key in values:
            errors.append((key, f"duplicate key on line {number}"))
            continue
        try:
            values[key] = _parse(raw, DEFAULTS[key][0])
        except ValueError as error:
            errors.append((key, str(error)))
    if errors:
        raise ConfigurationError.collect(errors)
    return values


class ExperimentConfig:  # pylint: disable=too-many-instance-attributes
    """Experiment parameters."""

    def __init__(self, **kwargs: Any) -> None:
        """Initialize the parameters."""
        self._values: Dict[str, Any] = {}
        self._errors: List[Tuple[str, str]] = []
        unknown = sorted(set(kwargs) - set(DEFAULTS))
        self._errors.extend((key, "unknown key") for key in unknown)
        self.master_seed: int = self._ensure("run.master_seed", kwargs, int)
        self.output_directory: Path = Path(
            self._ensure("run.output_directory", kwargs, str)
        )
        self.batch_size: int = self._ensure("emitter.batch_size", kwargs, int)
        for key, (kind, _) in DEFAULTS.items():
            if key not in self._values:
                self._ensure(key, kwargs, kind)

        self.constants = self._section("constants", self._build_constants)
        self.field = self._section("field", lambda: MagneticField(self["field.magnitude_g"]))
        self.train = self._section("train", self._build_train)
        self.chain = self._section("chain", self._build_chain)
        self.noise = self._section("noise", self._build_noise)
        self.repump = self._section("emitter.repump", lambda: RepumpMode(self["emitter.repump"]))
        self.leak_probability = self._section("emitter.leak_probability", self._build_leak)
        self.raman_calibration = self._section("raman", self._build_calibration)
        self.lambda_params = self._section("raman", self._build_lambda)
        self.polarization = self._section(
            "raman.polarization", lambda: Polarization(self["raman.polarization"])
        )
        self.occupancy = self._section("occupancy", self._build_occupancy)
        self.occupancy_mode = self._section(
            "occupancy.mode", lambda: OccupancyMode(self["occupancy.mode"])
        )
        self._section("run.master_seed", self._check_seed)
        self._check_counts()
        if self._errors:
            raise ConfigurationError.collect(self._errors)

    def _ensure(self, key: str, kwargs: Dict[str, Any], type_: Type) -> Any:
        """Get and type-check a parameter, falling back to its default."""
        default = DEFAULTS[key][1]
        value = kwargs.get(key, default)
        if value is REQUIRED:
            self._errors.append((key, "required"))
            self._values[key] = value
            return value
        if type_ is float and isinstance(value, int) and not isinstance(value, bool):
            value = float(value)
        if not isinstance(value, type_) or (type_ is int and isinstance(value, bool)):
            self._errors.append(
                (key, f"expected {type_.__name__}, got {type(value).__name__}")
            )
        self._values[key] = value
        return value

    def _section(self, path: str, build: Callable[[], Any]) -> Any:
        """Build a typed section, recording the failure under its path."""
        if any(key.startswith(path) for key, _ in self._errors):
            return None
        try:
            return build()
        except (DomainError, ConfigurationError, ValueError) as error:
            self._errors.append((path, str(error)))
            return None

    def __getitem__(self, key: str) -> Any:
        """Get a raw parameter in interface units."""
        return self._values[key]

    def __eq__(self, other: object) -> bool:
        """Compare two configurations."""
        return isinstance(other, ExperimentConfig) and self._values == other._values

    def __hash__(self) -> int:
        """Hash the configuration."""
        return hash(self.digest)

    def _build_constants(self) -> AtomicConstants:
        return AtomicConstants(
            excited_lifetime=self["constants.excited_lifetime_ns"] * NS,
            hyperfine_splitting=self["constants.hyperfine_splitting_ghz"] * GHZ,
            bohr_magneton_over_h=self["constants.bohr_magneton_mhz_per_g"] * MHZ,
            lande_lower=self["constants.lande_lower"],
            lande_upper=self["constants.lande_upper"],
        )

    def _build_train(self) -> PulseTrainConfig:
        duration = self["train.pulse_duration_ns"] * NS
        rabi = to_angular(self["train.rabi_frequency_mhz"] * MHZ)
        pulse = SquarePulse(
            rabi if rabi > 0 else math.pi / duration,
            duration,
            to_angular(self["train.detuning_mhz"] * MHZ),
        )
        return PulseTrainConfig(
            pulse,
            self["train.period_ns"] * NS,
            self["train.excitation_window_us"] * US,
            self["train.cooling_window_us"] * US,
            self["train.cycles"],
        )

    def _build_chain(self) -> DetectionChainParams:
        return DetectionChainParams(
            self["chain.total_efficiency"],
            self["chain.splitter_ratio"],
            self["chain.dark_rate_per_detector"],
            self["chain.background_rate"],
        )

    def _build_noise(self) -> IntensityNoiseModel:
        return IntensityNoiseModel(
            self["noise.relative_rms"], NoiseDistribution(self["noise.distribution"])
        )

    def _build_leak(self) -> float:
        leak = self["emitter.leak_probability"]
        if not 0 <= leak < 1:
            raise DomainError(f"must lie in [0, 1), got {leak}")
        return leak

    def _build_calibration(self) -> RamanCalibration:
        return RamanCalibration(
            to_angular(self["raman.rabi_frequency_khz"] * KHZ),
            self["raman.anchor_power_nw"] * NW,
        )

    def _build_lambda(self) -> LambdaSystemParams:
        return LambdaSystemParams.from_calibration(
            self._build_calibration(),
            beam2_power=self["raman.beam2_power_nw"] * NW,
            omega_1=to_angular(self["raman.omega_1_ghz"] * GHZ),
            single_photon_detuning=to_angular(self["raman.single_photon_detuning_ghz"] * GHZ),
            two_photon_detuning=to_angular(self["raman.two_photon_detuning_khz"] * KHZ),
        )

    def _build_occupancy(self) -> OccupancyModel:
        return OccupancyModel(
            self["occupancy.mean_occupancy"],
            self["occupancy.capture_rate"],
            self["occupancy.survival_per_cycle"],
        )

    def _check_seed(self) -> None:
        if not 0 <= self.master_seed < 2**64:
            raise DomainError(f"must be a 64-bit unsigned integer, got {self.master_seed}")

    def _check_counts(self) -> None:
        for key in (
            "emitter.batch_size",
            "rabi.points",
            "rabi.samples_per_point",
            "trace.trajectories",
            "hbt.trajectories",
        ):
            if isinstance(self[key], int) and self[key] < 1:
                self._errors.append((key, f"must be >= 1, got {self[key]}"))

    @property
    def calibrate_pulse(self) -> bool:
        """Check whether the pulse must be tuned to the first fluorescence maximum."""
        return self["train.rabi_frequency_mhz"] == 0

    @property
    def raman_damping_rate(self) -> float:
        """Get the Raman damping rate, in s^-1."""
        return self["raman.damping_rate_per_ms"] / MS

    def to_mapping(self) -> Dict[str, Any]:
        """Get the raw parameters in schema order."""
        return {key: self._values[key] for key in DEFAULTS}

    def to_text(self, include_execution: bool = True) -> str:
        """Dump the parameters as flat key = value text, grouped by section."""
        lines: List[str] = []
        section: Optional[str] = None
        for key, value in self.to_mapping().items():
            if not include_execution and key in EXECUTION_ONLY_KEYS:
                continue
            prefix = key.split(".", 1)[0]
            if section is not None and prefix != section:
                lines.append("")
            section = prefix
            lines.append(f"{key} = {_render(value)}")
        return "\n".join(lines) + "\n"

    @property
    def digest(self) -> str:
        """Get the SHA-256 digest of the canonical dump of the physics parameters."""
        return hashlib.sha256(
            self.to_text(include_execution=False).encode("utf-8")
        ).hexdigest()

    def with_overrides(self, **overrides: Any) -> "ExperimentConfig":
        """Get a copy with some dotted keys replaced."""
        values = self.to_mapping()
        values.update(overrides)
        return ExperimentConfig(**values)

    @classmethod
    def from_text(cls, text: str, **overrides: Any) -> "ExperimentConfig":
        """Parse a configuration text, then apply overrides."""
        values = parse_config_text(text)
        values.update(overrides)
        return cls(**values)

    @classmethod
    def from_file(
        cls, path: Union[str, Path], **overrides: Any
    ) -> "ExperimentConfig":
        """Load a configuration file, then apply overrides."""
        return cls.from_text(Path(path).read_text(encoding="utf-8"), **overrides)

    def save(self, path: Union[str, Path]) -> Path:
        """Write the configuration file."""
        path = Path(path)
        path.write_text(self.to_text(), encoding="utf-8")
        return path


DEFAULT_CONFIG_FILE = Path(__file__).parent / "experiment.cfg"
