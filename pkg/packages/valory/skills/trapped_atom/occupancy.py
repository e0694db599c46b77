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

"""This module contains the trap occupancy state machine."""

import logging
import math
from dataclasses import dataclass
from enum import Enum
from typing import Dict, List, Optional, Tuple

import numpy as np
from aea.exceptions import enforce
from scipy.optimize import brentq

from packages.valory.skills.trapped_atom import LOGGER_NAME
from packages.valory.skills.trapped_atom.emitter import PulseTrainConfig
from packages.valory.skills.trapped_atom.exceptions import DomainError
from packages.valory.skills.trapped_atom.random_streams import Purpose, TrajectorySeed


_logger = logging.getLogger(f"{LOGGER_NAME}.occupancy")

DRAW_BLOCK = 4096


class Event(Enum):
    """Event enumeration for the trap occupancy."""

    CAPTURE = "capture"
    COLLISION = "collision"
    TRIGGER = "trigger"
    CYCLE_LOSS = "cycle_loss"
    DONE = "done"


class TrapState(Enum):
    """States of the trap."""

    EMPTY = "empty"
    LOADED = "loaded"
    SEQUENCE = "sequence"


class OccupancyMode(Enum):
    """How the trap is operated."""

    CONTINUOUS = "continuous"
    TRIGGERED = "triggered"


ATOM_NUMBER: Dict[TrapState, int] = {
    TrapState.EMPTY: 0,
    TrapState.LOADED: 1,
    TrapState.SEQUENCE: 1,
}

TransitionFunction = Dict[TrapState, Dict[Event, TrapState]]


class TrapOccupancyApp:
    """TrapOccupancyApp

    Initial state: EMPTY

    Transition states:
        0. EMPTY
            - capture: 1.
        1. LOADED
            - collision: 0.
            - trigger: 2.
        2. SEQUENCE
            - cycle loss: 0.
            - done: 1.

    A second atom entering a loaded trap ejects both (collision), so the atom
    number never exceeds one.
    """

    initial_state: TrapState = TrapState.EMPTY
    transition_function: TransitionFunction = {
        TrapState.EMPTY: {
            Event.CAPTURE: TrapState.LOADED,
        },
        TrapState.LOADED: {
            Event.COLLISION: TrapState.EMPTY,
            Event.TRIGGER: TrapState.SEQUENCE,
        },
        TrapState.SEQUENCE: {
            Event.CYCLE_LOSS: TrapState.EMPTY,
            Event.DONE: TrapState.LOADED,
        },
    }

    def __init__(self) -> None:
        """Initialize the app."""
        self.state = self.initial_state

    @property
    def atom_number(self) -> int:
        """Get the number of trapped atoms."""
        return ATOM_NUMBER[self.state]

    def process(self, event: Event) -> TrapState:
        """Apply an event."""
        transitions = self.transition_function[self.state]
        enforce(
            event in transitions,
            f"Event {event.value} is not allowed in state {self.state.value}.",
            DomainError,
        )
        self.state = transitions[event]
        enforce(self.atom_number <= 1, "Two atoms in the trap.", DomainError)
        return self.state


@dataclass(frozen=True)
class OccupancyModel:
    """Loading and loss of the single-atom trap."""

    mean_occupancy: float = 0.5
    capture_rate: float = 3.0
    survival_per_cycle: float = 1.0

    def __post_init__(self) -> None:
        """Validate the model."""
        enforce(
            0 <= self.mean_occupancy <= 1,
            f"Mean occupancy must lie in [0, 1], got {self.mean_occupancy}.",
            DomainError,
        )
        enforce(
            0 <= self.survival_per_cycle <= 1,
            f"Survival must lie in [0, 1], got {self.survival_per_cycle}.",
            DomainError,
        )
        enforce(
            self.capture_rate >= 0,
            f"Capture rate must be non-negative, got {self.capture_rate}.",
            DomainError,
        )

    @property
    def collision_rate(self) -> float:
        """Get the ejection rate giving the mean occupancy under continuous loading."""
        if self.mean_occupancy == 0:
            return math.inf
        return self.capture_rate * (1 - self.mean_occupancy) / self.mean_occupancy

    def with_survival(self, survival_per_cycle: float) -> "OccupancyModel":
        """Get the same model with another survival probability."""
        return OccupancyModel(self.mean_occupancy, self.capture_rate, survival_per_cycle)


@dataclass(frozen=True)
class SequenceTiming:
    """Timing of the excitation sequence triggered by a loaded atom."""

    cycle_duration: float
    excitation_window: float
    cycles: int

    @classmethod
    def from_train(cls, train: PulseTrainConfig) -> "SequenceTiming":
        """Get the timing of a pulse train."""
        return cls(train.cycle_duration, train.excitation_window, train.cycles)

    @property
    def duration(self) -> float:
        """Get the duration of a full sequence."""
        return self.cycles * self.cycle_duration


@dataclass(frozen=True, eq=False)
class OccupancyTrace:
    """Atom number changes over an observation span."""

    times: np.ndarray
    atom_numbers: np.ndarray
    duration: float
    sequence_starts: np.ndarray
    events: int = 0

    def __post_init__(self) -> None:
        """Check the atom number stays in {0, 1}."""
        enforce(
            bool(np.all((self.atom_numbers == 0) | (self.atom_numbers == 1))),
            "The atom number left {0, 1}.",
            DomainError,
        )

    def __len__(self) -> int:
        """Get the number of recorded changes."""
        return len(self.times)

    def points(self) -> List[Tuple[float, int]]:
        """Get the (time, atom number) pairs."""
        return list(zip(self.times.tolist(), self.atom_numbers.tolist()))

    def occupied_fraction(self) -> float:
        """Get the fraction of the span with an atom in the trap."""
        ends = np.append(self.times[1:], self.duration)
        return float(np.sum((ends - self.times) * self.atom_numbers) / self.duration)


def cycles_present(
    uniforms: np.ndarray, survival_per_cycle: float, cycles: int
) -> np.ndarray:
    """
    Get the number of cycles an atom stays trapped during a sequence.

    The atom is present in the first cycle and survives each cycle with the
    given probability, so it is present in cycle c with probability s^c.

    :param uniforms: one uniform draw per sequence.
    :param survival_per_cycle: the survival probability s.
    :param cycles: the number of cycles of the sequence.
    :return: the number of cycles, between 1 and cycles.
    """
    uniforms = np.asarray(uniforms, dtype=float)
    if survival_per_cycle >= 1:
        return np.full(uniforms.shape, cycles, dtype=np.int64)
    if survival_per_cycle <= 0:
        return np.ones(uniforms.shape, dtype=np.int64)
    with np.errstate(divide="ignore"):
        survived = np.floor(np.log(uniforms) / math.log(survival_per_cycle))
    return (1 + np.minimum(survived, cycles - 1)).astype(np.int64)


class _Draws:
    """Block-buffered draws of one generator."""

    def __init__(self, generator: np.random.Generator) -> None:
        """Initialize the buffer."""
        self._generator = generator
        self._values = np.empty(0)
        self._cursor = 0

    def next(self) -> float:
        """Get the next uniform value in [0, 1)."""
        if self._cursor == len(self._values):
            self._values = self._generator.random(DRAW_BLOCK)
            self._cursor = 0
        value = self._values[self._cursor]
        self._cursor += 1
        return float(value)

    def exponential(self, rate: float) -> float:
        """Get an exponential waiting time."""
        return -math.log1p(-self.next()) / rate


def simulate_occupancy(  # pylint: disable=too-many-locals,too-many-branches
    model: OccupancyModel,
    duration: float,
    seed: TrajectorySeed,
    sequence: Optional[SequenceTiming] = None,
    max_events: Optional[int] = None,
) -> OccupancyTrace:
    """
    Simulate the atom number of the trap.

    Without a sequence the trap loads continuously: atoms arrive at the capture
    rate and a collision empties the trap at the rate giving the mean
    occupancy. With a sequence every loaded atom triggers it, and the atom is
    lost after each cycle with probability 1 - survival.

    :param model: the occupancy model.
    :param duration: the observation span, in s.
    :param seed: the seed; its occupancy stream is used.
    :param sequence: the triggered sequence, if any.
    :param max_events: stop after this many transitions.
    :return: the atom number trace, starting empty.
    """
    enforce(duration > 0, "Duration must be positive.", DomainError)
    draws = _Draws(seed.for_purpose(Purpose.OCCUPANCY).generator())
    app = TrapOccupancyApp()
    times, numbers, starts = [0.0], [0], []
    time, events = 0.0, 0
    while max_events is None or events < max_events:
        if app.state is TrapState.EMPTY:
            if model.capture_rate == 0:
                break
            delay, event = draws.exponential(model.capture_rate), Event.CAPTURE
        elif app.state is TrapState.LOADED:
            if sequence is not None:
                delay, event = 0.0, Event.TRIGGER
            elif model.collision_rate == 0:
                break
            else:
                delay, event = draws.exponential(model.collision_rate), Event.COLLISION
        else:
            present = int(
                cycles_present(
                    np.array([draws.next()]), model.survival_per_cycle, sequence.cycles
                )[0]
            )
            delay = present * sequence.cycle_duration
            lost = present < sequence.cycles
            event = Event.CYCLE_LOSS if lost else Event.DONE
        time += delay
        if time > duration:
            break
        before = app.atom_number
        app.process(event)
        events += 1
        if event is Event.TRIGGER:
            starts.append(time)
        if app.atom_number != before:
            times.append(time)
            numbers.append(app.atom_number)
    _logger.debug(f"Simulated {events} occupancy events.")
    return OccupancyTrace(
        np.array(times),
        np.array(numbers, dtype=np.int8),
        time if events == max_events else duration,
        np.array(starts),
        events,
    )


def window_occupancy(survival_per_cycle: float, cycles: int) -> float:
    """Get the mean fraction of the excitation windows of a sequence with an atom."""
    if survival_per_cycle >= 1:
        return 1.0
    return (1 - survival_per_cycle**cycles) / (cycles * (1 - survival_per_cycle))


def fit_survival(peak_rate: float, target_rate: float, cycles: int) -> float:
    """
    Find the survival per cycle bringing the sequence average to a target rate.

    :param peak_rate: the count rate with an atom present.
    :param target_rate: the average count rate over the excitation windows.
    :param cycles: the number of cycles of the sequence.
    :return: the survival probability.
    """
    enforce(peak_rate > 0, "The peak rate must be positive.", DomainError)
    ratio = target_rate / peak_rate
    if ratio >= 1:
        _logger.warning(f"Target rate {target_rate} is not below the peak rate.")
        return 1.0
    if ratio <= 1 / cycles:
        _logger.warning(f"Target rate {target_rate} needs an atom lost after one cycle.")
        return 0.0
    return float(
        brentq(lambda survival: window_occupancy(survival, cycles) - ratio, 0.0, 1.0 - 1e-9)
    )
