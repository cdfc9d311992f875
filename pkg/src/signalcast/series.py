"""Daily time series construction: the date x topic x sentiment count tensor,
its lag-augmented flat dataset, volumetric baselines, and overlap-based
rescaling of search-trend blocks.

Days with no documents are materialized as explicit zeros so that every
downstream lag/difference operation sees a contiguous daily index.
"""

from __future__ import annotations

from dataclasses import dataclass
from datetime import date, timedelta
from typing import Iterable, Sequence, Union

import numpy as np

from .errors import NumericError, ValidationError

N_SENTIMENTS = 3
SENTIMENT_NAMES = ("negative", "neutral", "positive")


def date_range(start: date, end: date) -> list[date]:
    if end < start:
        raise ValidationError(f"end date {end} before start date {start}")
    return [start + timedelta(days=i) for i in range((end - start).days + 1)]


@dataclass(frozen=True)
class SeriesTensor:
    """Daily counts, shape (days, topics, 3 sentiments)."""

    start_date: date
    end_date: date
    counts: np.ndarray

    def __post_init__(self):
        t = (self.end_date - self.start_date).days + 1
        if self.counts.shape[0] != t:
            raise ValidationError(
                f"counts has {self.counts.shape[0]} rows for a {t}-day window"
            )
        if self.counts.ndim != 3 or self.counts.shape[2] != N_SENTIMENTS:
            raise ValidationError("counts must be (days, topics, 3)")

    @property
    def n_days(self) -> int:
        return self.counts.shape[0]

    @property
    def n_topics(self) -> int:
        return self.counts.shape[1]

    def dates(self) -> list[date]:
        return date_range(self.start_date, self.end_date)

    def component(self, topic: int, sentiment: int) -> np.ndarray:
        return self.counts[:, topic, sentiment]

    def component_names(self) -> list[str]:
        return [
            component_name(j, k)
            for j in range(self.n_topics)
            for k in range(N_SENTIMENTS)
        ]

    def flattened(self) -> np.ndarray:
        """(days, topics*3) matrix; column order matches component_names()."""
        return self.counts.reshape(self.n_days, -1)


def component_name(topic: int, sentiment: int) -> str:
    return f"topic{topic}_{SENTIMENT_NAMES[sentiment]}"


@dataclass(frozen=True)
class CaseSeries:
    """Contiguous daily counts (confirmed cases, post volumes, ...)."""

    start_date: date
    values: np.ndarray

    def __post_init__(self):
        if self.values.ndim != 1:
            raise ValidationError("values must be one-dimensional")
        if np.any(self.values < 0):
            raise ValidationError("values must be non-negative")

    @property
    def end_date(self) -> date:
        return self.start_date + timedelta(days=len(self.values) - 1)

    def dates(self) -> list[date]:
        return date_range(self.start_date, self.end_date)


@dataclass(frozen=True)
class LaggedDataset:
    """Target y aligned with exogenous columns at lags 0..max_lag.

    Column names encode (topic, sentiment, lag) as e.g.
    "topic16_negative_lag3"; the first max_lag days of the window are gone,
    so every column is fully observed (no nulls anywhere).
    """

    dates: tuple[date, ...]
    y: np.ndarray
    columns: dict[str, np.ndarray]
    max_lag: int

    def feature_matrix(self) -> tuple[list[str], np.ndarray]:
        names = list(self.columns)
        return names, np.column_stack([self.columns[n] for n in names])


def lagged_column_name(topic: int, sentiment: int, lag: int) -> str:
    return f"{component_name(topic, sentiment)}_lag{lag}"


def build_tensor(
    docs: Iterable[tuple[date, int, int]],
    window: tuple[date, date],
    n_topics: int,
) -> tuple[SeriesTensor, list[tuple[date, int, int]]]:
    """Count (date, topic, sentiment) triples into a daily tensor.

    Docs dated outside the window are excluded and returned in the second
    element; topics must be < n_topics and sentiments in {0,1,2}.
    """
    start, end = window
    days = (end - start).days + 1
    if days < 1:
        raise ValidationError("window must contain at least one day")
    counts = np.zeros((days, n_topics, N_SENTIMENTS), dtype=np.int64)
    rejected: list[tuple[date, int, int]] = []
    for day, topic, sentiment in docs:
        if not 0 <= topic < n_topics:
            raise ValidationError(f"topic {topic} out of range 0..{n_topics - 1}")
        if sentiment not in (0, 1, 2):
            raise ValidationError(f"sentiment {sentiment} not in {{0,1,2}}")
        if day < start or day > end:
            rejected.append((day, topic, sentiment))
            continue
        counts[(day - start).days, topic, sentiment] += 1
    return SeriesTensor(start, end, counts), rejected


def lag_features(
    tensor: SeriesTensor, y: CaseSeries, max_lag: int = 14
) -> LaggedDataset:
    """Flatten the tensor and append 1..max_lag day lags of every component.

    The tensor and y must cover identical date ranges; the first max_lag
    rows are dropped so all columns align with no missing values.
    """
    if max_lag < 0:
        raise ValidationError("max_lag must be >= 0")
    if (y.start_date, y.end_date) != (tensor.start_date, tensor.end_date):
        raise ValidationError(
            f"date ranges differ: tensor {tensor.start_date}..{tensor.end_date}, "
            f"y {y.start_date}..{y.end_date}"
        )
    t = tensor.n_days
    if t <= max_lag:
        raise ValidationError(f"window of {t} days cannot absorb max_lag={max_lag}")
    columns: dict[str, np.ndarray] = {}
    for j in range(tensor.n_topics):
        for k in range(N_SENTIMENTS):
            comp = tensor.component(j, k)
            for lag in range(max_lag + 1):
                # value at row i (date max_lag+i) is comp[max_lag+i-lag]
                columns[lagged_column_name(j, k, lag)] = comp[
                    max_lag - lag : t - lag
                ].copy()
    dates = tuple(tensor.dates()[max_lag:])
    return LaggedDataset(
        dates=dates,
        y=y.values[max_lag:].copy(),
        columns=columns,
        max_lag=max_lag,
    )


def difference(series: Sequence[float], d: int) -> np.ndarray:
    """d-fold first differencing; output length = input length - d."""
    if d < 0:
        raise ValidationError("d must be >= 0")
    arr = np.asarray(series, dtype=float)
    if arr.ndim != 1:
        raise ValidationError("series must be one-dimensional")
    if len(arr) <= d:
        raise ValidationError(f"series of length {len(arr)} too short for d={d}")
    return np.diff(arr, n=d) if d > 0 else arr.copy()


def undifference(diffed: Sequence[float], heads: Sequence[float]) -> np.ndarray:
    """Invert ``difference`` given the d retained leading values.

    heads[i] is the first element of the i-times-differenced series; the
    reconstruction is exact.
    """
    out = np.asarray(diffed, dtype=float)
    for head in reversed(list(heads)):
        out = np.concatenate(([head], head + np.cumsum(out)))
    return out


Mode = Union[str, int]


def volumetric_series(
    docs: Iterable[tuple[date, int, int]],
    window: tuple[date, date],
    mode: Mode = "overall",
) -> CaseSeries:
    """Daily document counts, either overall or restricted to one topic.

    mode="overall" counts every in-window doc; an integer mode j counts the
    docs whose assigned topic is j (any sentiment).
    """
    start, end = window
    values = np.zeros((end - start).days + 1, dtype=np.int64)
    for day, topic, _sentiment in docs:
        if day < start or day > end:
            continue
        if mode == "overall" or topic == mode:
            values[(day - start).days] += 1
    return CaseSeries(start, values)


@dataclass(frozen=True)
class TrendBlock:
    """One contiguous daily block of search-interest values."""

    start_date: date
    values: np.ndarray

    @property
    def end_date(self) -> date:
        return self.start_date + timedelta(days=len(self.values) - 1)


def rescale_trend_blocks(
    blocks: Sequence[TrendBlock],
) -> tuple[CaseSeries, list[float]]:
    """Merge overlapping blocks onto the first block's scale.

    Each block after the first is multiplied by the mean, over overlap days
    where both sides are nonzero, of (already-rescaled previous value /
    current value); factors therefore compose across blocks. On overlap
    days the earlier block's value is kept. Returns the merged daily series
    (start date of the first block) and the per-block factors (first = 1).
    """
    if not blocks:
        raise ValidationError("need at least one block")
    merged_values = list(blocks[0].values.astype(float))
    merged_start = blocks[0].start_date
    merged_end = blocks[0].end_date
    factors = [1.0]
    for block in blocks[1:]:
        if block.start_date > merged_end:
            raise NumericError(
                f"block starting {block.start_date} does not overlap the "
                f"merged series ending {merged_end}"
            )
        ratios = []
        for i, day in enumerate(
            date_range(block.start_date, min(block.end_date, merged_end))
        ):
            prev_val = merged_values[(day - merged_start).days]
            cur_val = float(block.values[i])
            if prev_val > 0 and cur_val > 0:
                ratios.append(prev_val / cur_val)
        if not ratios:
            raise NumericError(
                f"overlap with block starting {block.start_date} has no day "
                "with nonzero values on both sides"
            )
        factor = sum(ratios) / len(ratios)
        factors.append(factor)
        if block.end_date > merged_end:
            tail_from = (merged_end - block.start_date).days + 1
            merged_values.extend(float(v) * factor for v in block.values[tail_from:])
            merged_end = block.end_date
    return CaseSeries(merged_start, np.array(merged_values)), factors
