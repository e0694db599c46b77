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
Seeded random streams.

A stream is a pure function of (master seed, trajectory index, purpose). The
streams are counter-based Philox generators keyed through numpy's
SeedSequence, so they can be split across processes without coordination.
"""

from dataclasses import dataclass
from enum import IntEnum
from typing import Sequence

import numpy as np
from aea.exceptions import enforce

from packages.valory.skills.trapped_atom.exceptions import DomainError


UINT64_MAX = 2**64 - 1
DEFAULT_BUFFER_SIZE = 1024


class Purpose(IntEnum):
    """Independent random consumers of one trajectory."""

    EMISSION = 0
    LEAK = 1
    DETECTION = 2
    SPURIOUS_A = 3
    SPURIOUS_B = 4
    OCCUPANCY = 5
    NOISE = 6


@dataclass(frozen=True)
class TrajectorySeed:
    """The seed of one trajectory."""

    master_seed: int
    trajectory_index: int
    purpose: Purpose = Purpose.EMISSION

    def __post_init__(self) -> None:
        """Validate the seed."""
        enforce(
            0 <= self.master_seed <= UINT64_MAX,
            f"Master seed must be a 64-bit unsigned integer, got {self.master_seed}.",
            DomainError,
        )
        enforce(
            self.trajectory_index >= 0,
            f"Trajectory index must be non-negative, got {self.trajectory_index}.",
            DomainError,
        )

    def for_purpose(self, purpose: Purpose) -> "TrajectorySeed":
        """Get the seed of another consumer of the same trajectory."""
        return TrajectorySeed(self.master_seed, self.trajectory_index, purpose)

    def generator(self) -> np.random.Generator:
        """Get a fresh generator for this stream."""
        sequence = np.random.SeedSequence(
            self.master_seed, spawn_key=(self.trajectory_index, int(self.purpose))
        )
        return np.random.Generator(np.random.Philox(sequence))


class UniformBuffer:
    """
    Buffered uniform draws for a block of trajectories.

    Each row owns the generator of one trajectory and refills independently,
    so the values a trajectory sees never depend on the other rows.
    """

    def __init__(
        self, seeds: Sequence[TrajectorySeed], size: int = DEFAULT_BUFFER_SIZE
    ) -> None:
        """Initialize the buffer."""
        self._generators = [seed.generator() for seed in seeds]
        self._size = size
        self._values = np.empty((len(seeds), size))
        for row, generator in enumerate(self._generators):
            self._values[row] = generator.random(size)
        self._cursor = np.zeros(len(seeds), dtype=np.int64)

    def draw(self, rows: np.ndarray) -> np.ndarray:
        """
        Draw one uniform value in [0, 1) for each of the given rows.

        :param rows: distinct row indices.
        :return: the drawn values, in the order of the rows.
        """
        rows = np.asarray(rows, dtype=np.int64)
        values = self._values[rows, self._cursor[rows]]
        self._cursor[rows] += 1
        for row in rows[self._cursor[rows] == self._size]:
            self._values[row] = self._generators[row].random(self._size)
            self._cursor[row] = 0
        return values
