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

"""Detection chain and Hanbury Brown-Twiss start-stop correlations."""

import logging
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, Optional, Sequence, Tuple

import numpy as np
from aea.exceptions import enforce
from scipy.optimize import curve_fit, minimize_scalar

from packages.valory.skills.trapped_atom import LOGGER_NAME
from packages.valory.skills.trapped_atom.constants import DetectionChainParams, NS
from packages.valory.skills.trapped_atom.emitter import EmissionRecord, PulseTrainConfig
from packages.valory.skills.trapped_atom.exceptions import (
    AnalysisError,
    ConfigurationError,
    DomainError,
)
from packages.valory.skills.trapped_atom.random_streams import Purpose, TrajectorySeed


_logger = logging.getLogger(f"{LOGGER_NAME}.detection")

DEFAULT_BIN_WIDTH = 1 * NS
DEFAULT_RANGE = 1000 * NS
DEFAULT_DECAY_TIME_GUESS = 26 * NS
MIN_PERIODS_PER_SIDE = 5
VALLEY_DISTANCE = 3  # in fitted decay times
BIN_ROUNDING = 6
RELATIVE_TOLERANCE = 1e-9
TAG_RESOLUTION = 2.0**-40  # s, binary tick of the time tagger


class DetectorId(Enum):
    """The two detectors behind the beamsplitter."""

    A = "A"
    B = "B"


@dataclass(frozen=True, eq=False)
class ClickStream:
    """The click times of one detector."""

    detector_id: DetectorId
    timestamps: np.ndarray
    span: Tuple[float, float] = (0.0, math.inf)

    def __post_init__(self) -> None:
        """Check the ordering and the span."""
        timestamps = np.asarray(self.timestamps, dtype=float)
        object.__setattr__(self, "timestamps", timestamps)
        enforce(
            bool(np.all(np.diff(timestamps) > 0)),
            f"Clicks of detector {self.detector_id.value} are not increasing.",
            DomainError,
        )
        if timestamps.size:
            enforce(
                self.span[0] <= timestamps[0] and timestamps[-1] <= self.span[1],
                f"Clicks of detector {self.detector_id.value} leave the span.",
                DomainError,
            )

    def __len__(self) -> int:
        """Get the number of clicks."""
        return len(self.timestamps)

    def shifted(self, offset: float) -> "ClickStream":
        """Translate the stream in time."""
        return ClickStream(
            self.detector_id,
            self.timestamps + offset,
            (self.span[0] + offset, self.span[1] + offset),
        )

    def tagged(self, resolution: float = TAG_RESOLUTION) -> "ClickStream":
        """
        Round the clicks to the ticks of a time tagger.

        With the default binary tick, translating tagged clicks by a whole
        number of ticks (any integer number of seconds among them) keeps
        every delay exact. Clicks sharing a tick merge into one.

        :param resolution: the tick, in s.
        :return: the tagged stream.
        """
        enforce(resolution > 0, "The tagger resolution must be positive.", DomainError)
        ticks = np.unique(np.round(self.timestamps / resolution))
        return ClickStream(self.detector_id, ticks * resolution, self.span)


@dataclass(frozen=True)
class GateSchedule:
    """The windows during which the detectors count."""

    windows: Tuple[Tuple[float, float], ...]

    def __post_init__(self) -> None:
        """Check the windows are sorted and disjoint."""
        windows = tuple((float(start), float(end)) for start, end in self.windows)
        object.__setattr__(self, "windows", windows)
        for start, end in windows:
            enforce(start < end, f"Empty gate window ({start}, {end}).", DomainError)
        for (_, end), (start, _) in zip(windows, windows[1:]):
            enforce(end <= start, "Gate windows must be sorted and disjoint.", DomainError)

    @classmethod
    def from_train(cls, train: PulseTrainConfig) -> "GateSchedule":
        """Gate on the excitation windows of a pulse train."""
        return cls(tuple(train.excitation_windows()))

    @property
    def total_duration(self) -> float:
        """Get the total gated time."""
        return sum(end - start for start, end in self.windows)

    @property
    def span(self) -> Tuple[float, float]:
        """Get the interval covered by the schedule."""
        return self.windows[0][0], self.windows[-1][1]

    def contains(self, times: np.ndarray) -> np.ndarray:
        """Check which times fall inside a window."""
        starts = np.array([start for start, _ in self.windows])
        ends = np.array([end for _, end in self.windows])
        index = np.searchsorted(starts, times, side="right") - 1
        inside = index >= 0
        inside[inside] = times[inside] < ends[index[inside]]
        return inside


def _bin_count(bin_width: float, delay_range: float) -> int:
    enforce(
        bin_width > 0 and delay_range > 0,
        "Bin width and range must be positive.",
        ConfigurationError,
    )
    bins = 2 * delay_range / bin_width
    enforce(
        abs(bins - round(bins)) <= RELATIVE_TOLERANCE * bins,
        f"Bin width {bin_width} does not divide the range {delay_range}.",
        ConfigurationError,
    )
    return int(round(bins))


@dataclass(frozen=True, eq=False)
class CoincidenceHistogram:
    """Counts of delays between clicks, over [-range, range)."""

    bin_width: float
    range: float
    counts: np.ndarray
    total_starts: int = 0

    def __post_init__(self) -> None:
        """Check the binning."""
        counts = np.asarray(self.counts, dtype=np.int64)
        object.__setattr__(self, "counts", counts)
        enforce(
            len(counts) == _bin_count(self.bin_width, self.range),
            "Counts do not match the binning.",
            ConfigurationError,
        )
        enforce(bool(np.all(counts >= 0)), "Counts must be non-negative.", DomainError)

    @classmethod
    def empty(
        cls, bin_width: float = DEFAULT_BIN_WIDTH, delay_range: float = DEFAULT_RANGE
    ) -> "CoincidenceHistogram":
        """Get a histogram without counts."""
        return cls(bin_width, delay_range, np.zeros(_bin_count(bin_width, delay_range)))

    def __add__(self, other: "CoincidenceHistogram") -> "CoincidenceHistogram":
        """Merge histograms of disjoint acquisitions."""
        enforce(
            math.isclose(self.bin_width, other.bin_width)
            and math.isclose(self.range, other.range),
            "Only histograms with the same binning can be merged.",
            ConfigurationError,
        )
        return CoincidenceHistogram(
            self.bin_width,
            self.range,
            self.counts + other.counts,
            self.total_starts + other.total_starts,
        )

    def __eq__(self, other: object) -> bool:
        """Compare two histograms."""
        return (
            isinstance(other, CoincidenceHistogram)
            and self.bin_width == other.bin_width
            and self.range == other.range
            and self.total_starts == other.total_starts
            and np.array_equal(self.counts, other.counts)
        )

    def __hash__(self) -> int:
        """Hash the histogram."""
        return hash((self.bin_width, self.range, self.counts.tobytes()))

    @property
    def edges(self) -> np.ndarray:
        """Get the bin edges."""
        return -self.range + self.bin_width * np.arange(len(self.counts) + 1)

    @property
    def delays(self) -> np.ndarray:
        """Get the bin centres."""
        return -self.range + self.bin_width * (np.arange(len(self.counts)) + 0.5)

    @property
    def total(self) -> int:
        """Get the number of recorded coincidences."""
        return int(self.counts.sum())

    def bin_of(self, delays: np.ndarray) -> np.ndarray:
        """Get the bin index of delays, -1 outside the range."""
        index = np.floor(
            np.round((np.asarray(delays) + self.range) / self.bin_width, BIN_ROUNDING)
        ).astype(np.int64)
        return np.where((index >= 0) & (index < len(self.counts)), index, -1)


@dataclass(frozen=True)
class PeakAnalysis:  # pylint: disable=too-many-instance-attributes
    """Background-corrected peaks of a periodic coincidence histogram."""

    peak_positions: Tuple[float, ...]
    peak_areas: Tuple[float, ...]
    zero_delay_residual_ratio: float
    one_over_e_half_width: float
    ratio_error: float = 0.0
    width_error: float = 0.0
    background_per_bin: float = 0.0
    side_peak_coincidences: int = 0
    peak_orders: Tuple[int, ...] = field(default_factory=tuple)

    def __post_init__(self) -> None:
        """Check the ratio and the width."""
        enforce(self.zero_delay_residual_ratio >= 0, "Negative ratio.", DomainError)
        enforce(self.one_over_e_half_width > 0, "Non-positive width.", DomainError)


def thin_and_split(
    emissions: EmissionRecord,
    chain: DetectionChainParams,
    seed: TrajectorySeed,
    span: Tuple[float, float] = (0.0, math.inf),
) -> Tuple[ClickStream, ClickStream]:
    """
    Turn emissions into clicks of the two detectors.

    Each emission is detected with the total efficiency, then routed to A
    with the splitter ratio and to B otherwise.

    :param emissions: the emissions of one trajectory.
    :param chain: the detection chain.
    :param seed: the trajectory seed; its detection stream is used.
    :param span: the acquisition span of the streams.
    :return: the clicks of A and B.
    """
    times = emissions.emission_times
    generator = seed.for_purpose(Purpose.DETECTION).generator()
    detected = generator.random(len(times)) < chain.total_efficiency
    to_a = generator.random(len(times)) < chain.splitter_ratio
    return (
        ClickStream(DetectorId.A, times[detected & to_a], span),
        ClickStream(DetectorId.B, times[detected & ~to_a], span),
    )


def add_spurious_counts(
    stream: ClickStream,
    chain: DetectionChainParams,
    gates: GateSchedule,
    seed: TrajectorySeed,
) -> ClickStream:
    """
    Superpose dark counts and stray light restricted to the gates.

    :param stream: the clicks of one detector.
    :param chain: the detection chain.
    :param gates: the gate schedule.
    :param seed: the trajectory seed; the stream of the detector is used.
    :return: the merged, sorted clicks.
    """
    rate = chain.spurious_rate_per_detector
    if rate == 0:
        return stream
    purpose = Purpose.SPURIOUS_A if stream.detector_id is DetectorId.A else Purpose.SPURIOUS_B
    generator = seed.for_purpose(purpose).generator()
    starts = np.array([start for start, _ in gates.windows])
    lengths = np.array([end - start for start, end in gates.windows])
    numbers = generator.poisson(rate * lengths)
    offsets = generator.random(int(numbers.sum())) * np.repeat(lengths, numbers)
    spurious = np.repeat(starts, numbers) + offsets
    return ClickStream(
        stream.detector_id,
        np.unique(np.concatenate([stream.timestamps, spurious])),
        stream.span,
    )


def _first_stops(starts: np.ndarray, stops: np.ndarray, side: str) -> np.ndarray:
    following = np.searchsorted(stops, starts, side=side)
    valid = following < len(stops)
    return stops[following[valid]] - starts[valid]


def start_stop_histogram(
    a: ClickStream,
    b: ClickStream,
    bin_width: float = DEFAULT_BIN_WIDTH,
    delay_range: float = DEFAULT_RANGE,
) -> CoincidenceHistogram:
    """
    Build the two-sided start-stop histogram.

    Positive delays run from an A start to the first B click at or after it,
    negative delays from a B start to the first A click after it.

    :param a: the clicks of detector A.
    :param b: the clicks of detector B.
    :param bin_width: the bin width, which must divide the range.
    :param delay_range: the largest recorded delay.
    :return: the histogram.
    """
    histogram = CoincidenceHistogram.empty(bin_width, delay_range)
    positive = _first_stops(a.timestamps, b.timestamps, "left")
    negative = _first_stops(b.timestamps, a.timestamps, "right")
    delays = np.concatenate(
        [positive[positive < delay_range], -negative[negative < delay_range]]
    )
    index = histogram.bin_of(delays)
    counts = np.bincount(index[index >= 0], minlength=len(histogram.counts))
    return CoincidenceHistogram(bin_width, delay_range, counts, len(a) + len(b))


def full_cross_correlation(
    a: ClickStream,
    b: ClickStream,
    bin_width: float = DEFAULT_BIN_WIDTH,
    delay_range: float = DEFAULT_RANGE,
) -> CoincidenceHistogram:
    """Histogram the delays of every (A, B) pair closer than the range."""
    histogram = CoincidenceHistogram.empty(bin_width, delay_range)
    low = np.searchsorted(b.timestamps, a.timestamps - delay_range, side="right")
    high = np.searchsorted(b.timestamps, a.timestamps + delay_range, side="left")
    pairs = high - low
    offsets = np.arange(pairs.sum()) - np.repeat(np.cumsum(pairs) - pairs, pairs)
    partners = np.repeat(low, pairs) + offsets
    delays = b.timestamps[partners] - np.repeat(a.timestamps, pairs)
    index = histogram.bin_of(delays)
    counts = np.bincount(index[index >= 0], minlength=len(histogram.counts))
    return CoincidenceHistogram(bin_width, delay_range, counts, len(a))


def detect(
    record: EmissionRecord,
    chain: DetectionChainParams,
    gates: GateSchedule,
    master_seed: int,
) -> Tuple[ClickStream, ClickStream]:
    """Thin, split, add the spurious counts of one trajectory and tag the clicks."""
    seed = TrajectorySeed(master_seed, record.trajectory_id)
    a, b = thin_and_split(record, chain, seed)
    gated = (
        ClickStream(stream.detector_id, stream.timestamps[gates.contains(stream.timestamps)])
        for stream in (a, b)
    )
    return tuple(  # type: ignore
        add_spurious_counts(stream, chain, gates, seed).tagged() for stream in gated
    )


def correlate_records(  # pylint: disable=too-many-arguments
    records: Iterable[EmissionRecord],
    chain: DetectionChainParams,
    gates: GateSchedule,
    master_seed: int,
    bin_width: float = DEFAULT_BIN_WIDTH,
    delay_range: float = DEFAULT_RANGE,
) -> CoincidenceHistogram:
    """
    Accumulate the start-stop histogram of independent trajectories.

    Each trajectory is a separate acquisition; the partial histograms merge
    additively.
    """
    histogram = CoincidenceHistogram.empty(bin_width, delay_range)
    for record in records:
        a, b = detect(record, chain, gates, master_seed)
        histogram += start_stop_histogram(a, b, bin_width, delay_range)
    return histogram


def _peak_shapes(delays: np.ndarray, centers: np.ndarray, decay_time: float) -> np.ndarray:
    return np.exp(-np.abs(delays[:, None] - centers[None, :]) / decay_time)


def _linear_fit(
    counts: np.ndarray, shapes: np.ndarray, weights: np.ndarray
) -> Tuple[np.ndarray, float]:
    design = np.hstack([np.ones((len(counts), 1)), shapes])
    coefficients, *_ = np.linalg.lstsq(
        design * weights[:, None], counts * weights, rcond=None
    )
    residual = float(np.sum(((design @ coefficients - counts) * weights) ** 2))
    return coefficients, residual


def analyze_peaks(  # pylint: disable=too-many-locals
    histogram: CoincidenceHistogram,
    period: float,
    decay_time_guess: float = DEFAULT_DECAY_TIME_GUESS,
) -> PeakAnalysis:
    """
    Measure the peaks of a periodic coincidence histogram.

    Steps:
    - Fit a flat background plus exponential peaks at every multiple of the
      period, including the peaks cut by the histogram edges.
    - Take the background as the median of the bins further than three decay
      times from every peak, once the fitted peak tails are removed.
    - Integrate each peak over +-period/2, removing the background and the
      tails of the other peaks and restoring its own tail outside the window.
    - Compare the zero delay area with the mean side peak area.

    :param histogram: the histogram.
    :param period: the pulse period.
    :param decay_time_guess: the initial guess of the decay time.
    :return: the analysis.
    """
    enforce(histogram.total > 0, "The histogram is empty.", AnalysisError)
    periods = histogram.range / period
    enforce(
        periods >= MIN_PERIODS_PER_SIDE * (1 - RELATIVE_TOLERANCE),
        f"The histogram spans {periods:.2f} periods per side, "
        f"{MIN_PERIODS_PER_SIDE} are needed.",
        AnalysisError,
    )
    delays = histogram.delays
    counts = histogram.counts.astype(float)
    weights = 1 / np.sqrt(np.maximum(counts, 1))
    outer = math.ceil(periods * (1 - RELATIVE_TOLERANCE))
    centers = period * np.arange(-outer, outer + 1)
    analysed = int(math.floor(periods - 0.5 + RELATIVE_TOLERANCE))
    orders = np.arange(-analysed, analysed + 1)

    profile = minimize_scalar(
        lambda tau: _linear_fit(counts, _peak_shapes(delays, centers, tau), weights)[1],
        bounds=(0.2 * decay_time_guess, 5 * decay_time_guess),
        method="bounded",
    )
    coefficients, _ = _linear_fit(counts, _peak_shapes(delays, centers, profile.x), weights)

    def model(x: np.ndarray, background: float, tau: float, *heights: float) -> np.ndarray:
        return background + _peak_shapes(x, centers, tau) @ np.asarray(heights)

    try:
        parameters, covariance = curve_fit(
            model,
            delays,
            counts,
            p0=(coefficients[0], profile.x, *coefficients[1:]),
            sigma=1 / weights,
            absolute_sigma=True,
        )
        decay_time, width_error = parameters[1], math.sqrt(covariance[1, 1])
        heights = parameters[2:]
    except (RuntimeError, ValueError) as error:
        _logger.warning(f"Full peak fit failed, keeping the profile fit: {error}.")
        decay_time, width_error, heights = float(profile.x), 0.0, coefficients[1:]
    enforce(decay_time > 0, "The fitted decay time is not positive.", AnalysisError)

    shapes = _peak_shapes(delays, centers, decay_time)
    peaks = shapes * heights[None, :]
    distance = np.min(np.abs(delays[:, None] - centers[None, :]), axis=1)
    valley = distance > VALLEY_DISTANCE * decay_time
    corrected = counts - peaks.sum(axis=1)
    background = float(np.median(corrected[valley])) if valley.any() else float(
        np.median(corrected)
    )

    areas, variances, positions = [], [], []
    for order in orders:
        column = int(order + outer)
        offset = delays - centers[column]
        window = (offset >= -period / 2) & (offset < period / 2)
        others = peaks.sum(axis=1) - peaks[:, column]
        net = counts - background - others
        own_tail = peaks[~window, column].sum()
        area = float(net[window].sum() + own_tail)
        areas.append(area)
        variances.append(float(counts[window].sum()))
        weight = net[window].sum()
        positions.append(
            float(centers[column] + (offset[window] * net[window]).sum() / weight)
            if weight > 0
            else float(centers[column])
        )

    areas_array = np.array(areas)
    side = orders != 0
    mean_side = float(areas_array[side].mean())
    enforce(mean_side > 0, "The side peaks are empty.", AnalysisError)
    central = float(areas_array[~side][0])
    ratio = central / mean_side
    side_variance = float(np.sum(np.array(variances)[side])) / side.sum() ** 2
    ratio_error = math.sqrt(
        variances[analysed] / mean_side**2 + ratio**2 * side_variance / mean_side**2
    )
    side_coincidences = int(
        sum(
            counts[(np.abs(delays - centers[int(order + outer)]) < period / 2)].sum()
            for order in orders
            if order != 0
        )
    )
    return PeakAnalysis(
        peak_positions=tuple(positions),
        peak_areas=tuple(areas),
        zero_delay_residual_ratio=max(ratio, 0.0),
        one_over_e_half_width=float(decay_time),
        ratio_error=ratio_error,
        width_error=width_error,
        background_per_bin=background,
        side_peak_coincidences=side_coincidences,
        peak_orders=tuple(int(order) for order in orders),
    )


def merge_histograms(histograms: Sequence[CoincidenceHistogram]) -> Optional[CoincidenceHistogram]:
    """Merge partial histograms, None when there are none."""
    if not histograms:
        return None
    merged = histograms[0]
    for histogram in histograms[1:]:
        merged += histogram
    return merged
