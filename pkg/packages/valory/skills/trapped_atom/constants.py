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
Physical constants, level structure and unit conventions.

All dynamics run in SI seconds and rad/s. The helpers at the bottom of this
module convert the interface units (ns, MHz, G, nW) at the boundary.
"""

import math
from dataclasses import dataclass, field
from typing import Dict, Optional

from aea.exceptions import enforce

from packages.valory.skills.trapped_atom.exceptions import (
    DomainError,
    RejectedTransitionError,
)


NS = 1e-9
US = 1e-6
MS = 1e-3
KHZ = 1e3
MHZ = 1e6
GHZ = 1e9
THZ = 1e12
NW = 1e-9
MW = 1e-3

DEFAULT_LIFETIME = 26 * NS
DEFAULT_HYPERFINE_SPLITTING = 6.8 * GHZ
DEFAULT_BOHR_MAGNETON_OVER_H = 1.3996 * MHZ
DEFAULT_FIELD = 4.2

LOWER_F = 1
UPPER_F = 2
EXCITED_F = 3

# rubidium-87 ground state; the excited label carries its value for reference
LANDE_FACTORS: Dict[int, float] = {LOWER_F: -0.5, UPPER_F: 0.5, EXCITED_F: 2 / 3}


def to_angular(frequency: float) -> float:
    """Convert a frequency in Hz to an angular rate in rad/s."""
    return 2 * math.pi * frequency


def to_frequency(angular_rate: float) -> float:
    """Convert an angular rate in rad/s to a frequency in Hz."""
    return angular_rate / (2 * math.pi)


def decay_rate_from_lifetime(tau: float) -> float:
    """
    Get the spontaneous decay rate of a level.

    :param tau: the lifetime of the level, in s. An infinite lifetime gives a
        vanishing rate.
    :return: the decay rate, in s^-1.
    """
    enforce(tau > 0, f"Lifetime must be positive, got {tau}.", DomainError)
    return 1 / tau


@dataclass(frozen=True)
class AtomicConstants:
    """Constants of the trapped atom."""

    excited_lifetime: float = DEFAULT_LIFETIME
    hyperfine_splitting: float = DEFAULT_HYPERFINE_SPLITTING
    bohr_magneton_over_h: float = DEFAULT_BOHR_MAGNETON_OVER_H
    lande_lower: float = LANDE_FACTORS[LOWER_F]
    lande_upper: float = LANDE_FACTORS[UPPER_F]

    def __post_init__(self) -> None:
        """Validate the constants."""
        enforce(
            self.excited_lifetime > 0,
            f"Lifetime must be positive, got {self.excited_lifetime}.",
            DomainError,
        )
        enforce(
            self.hyperfine_splitting > 0,
            f"Hyperfine splitting must be positive, got {self.hyperfine_splitting}.",
            DomainError,
        )

    @property
    def decay_rate(self) -> float:
        """Get the decay rate of the excited state, in s^-1."""
        return decay_rate_from_lifetime(self.excited_lifetime)

    def sublevel(self, hyperfine: int, magnetic: int) -> "ZeemanSublevel":
        """Build a ground sublevel carrying the Landé factors of these constants."""
        lande = {LOWER_F: self.lande_lower, UPPER_F: self.lande_upper}
        return ZeemanSublevel(hyperfine, magnetic, lande.get(hyperfine))


@dataclass(frozen=True)
class ZeemanSublevel:
    """A magnetic sublevel |F, mF>."""

    F: int  # pylint: disable=invalid-name
    m_F: int  # pylint: disable=invalid-name
    g_F: Optional[float] = field(default=None, compare=False)  # pylint: disable=invalid-name

    def __post_init__(self) -> None:
        """Validate the quantum numbers and fill in the Landé factor."""
        enforce(
            self.F in LANDE_FACTORS,
            f"Unknown hyperfine level F={self.F}.",
            DomainError,
        )
        enforce(
            abs(self.m_F) <= self.F,
            f"|mF| must not exceed F, got F={self.F}, mF={self.m_F}.",
            DomainError,
        )
        if self.g_F is None:
            object.__setattr__(self, "g_F", LANDE_FACTORS[self.F])

    @property
    def is_excited(self) -> bool:
        """Check whether the sublevel belongs to the excited manifold."""
        return self.F == EXCITED_F

    def __str__(self) -> str:
        """Get a compact label."""
        return f"({self.F},{self.m_F:+d})"


@dataclass(frozen=True)
class MagneticField:
    """A static magnetic field along the quantisation axis."""

    magnitude: float = DEFAULT_FIELD

    def __post_init__(self) -> None:
        """Validate the field."""
        enforce(
            self.magnitude >= 0,
            f"Field magnitude must be non-negative, got {self.magnitude}.",
            DomainError,
        )

    def scaled(self, factor: float) -> "MagneticField":
        """Get the field multiplied by a factor."""
        return MagneticField(self.magnitude * factor)


def _check_probability(name: str, value: float) -> None:
    enforce(0 <= value <= 1, f"{name} must lie in [0, 1], got {value}.", DomainError)


@dataclass(frozen=True)
class DetectionChainParams:
    """Collection, splitting and spurious counts of the detection chain."""

    total_efficiency: float = 0.006
    splitter_ratio: float = 0.5
    dark_rate_per_detector: float = 100.0
    background_rate: float = 50.0

    def __post_init__(self) -> None:
        """Validate the chain."""
        _check_probability("total_efficiency", self.total_efficiency)
        _check_probability("splitter_ratio", self.splitter_ratio)
        enforce(
            self.dark_rate_per_detector >= 0 and self.background_rate >= 0,
            "Spurious count rates must be non-negative.",
            DomainError,
        )

    @property
    def spurious_rate_per_detector(self) -> float:
        """Get the rate of clicks not caused by the atom, per detector."""
        return self.dark_rate_per_detector + self.background_rate


def zeeman_shift(
    level: ZeemanSublevel,
    magnetic_field: MagneticField,
    constants: AtomicConstants = AtomicConstants(),
) -> float:
    """
    Get the linear Zeeman shift of a ground sublevel.

    :param level: the sublevel.
    :param magnetic_field: the applied field.
    :param constants: the atomic constants.
    :return: the shift, in Hz.
    """
    enforce(
        not level.is_excited,
        "The excited manifold is treated as a closed two-level transition.",
        DomainError,
    )
    return level.g_F * level.m_F * constants.bohr_magneton_over_h * magnetic_field.magnitude


def check_raman_pair(lower: ZeemanSublevel, upper: ZeemanSublevel) -> None:
    """
    Check the selection rule of a Raman pair.

    :param lower: the F=1 sublevel.
    :param upper: the F=2 sublevel.
    """
    enforce(
        lower.F == LOWER_F and upper.F == UPPER_F,
        f"Raman pairs couple F={LOWER_F} to F={UPPER_F}, got {lower} -> {upper}.",
        RejectedTransitionError,
    )
    enforce(
        abs(upper.m_F - lower.m_F) <= 1,
        f"|delta mF| must not exceed 1, got {lower} -> {upper}.",
        RejectedTransitionError,
    )


def raman_resonance_offset(
    lower: ZeemanSublevel,
    upper: ZeemanSublevel,
    magnetic_field: MagneticField,
    constants: AtomicConstants = AtomicConstants(),
) -> float:
    """
    Get the position of a Raman resonance relative to the zero-field splitting.

    :param lower: the F=1 sublevel.
    :param upper: the F=2 sublevel.
    :param magnetic_field: the applied field.
    :param constants: the atomic constants.
    :return: the offset, in Hz.
    """
    check_raman_pair(lower, upper)
    return zeeman_shift(upper, magnetic_field, constants) - zeeman_shift(
        lower, magnetic_field, constants
    )
