"""Partitioning a return series into blocks and taking per-block maxima.

The lower tail is handled by negation: its "maxima" are the negated block
minima, so one maxima-oriented fit serves both tails and lower-tail levels
come out as positive loss magnitudes.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .exceptions import DataError

__all__ = ["BlockMaxima", "BlockScheme", "extract_block_maxima", "block_labels"]

CALENDAR_KINDS = ("month", "quarter", "semester")
DEFAULT_MIN_EDGE_OBS = 5


@dataclass(frozen=True)
class BlockScheme:
    """Calendar blocks, or fixed blocks of ``m`` consecutive observations."""

    kind: str
    m: int | None = None

    def __post_init__(self):
        if self.kind == "count":
            if self.m is None or int(self.m) < 2:
                raise ValueError("fixed-count blocks need m >= 2")
            object.__setattr__(self, "m", int(self.m))
        elif self.kind in CALENDAR_KINDS:
            if self.m is not None:
                raise ValueError(f"{self.kind} blocks take no size")
        else:
            raise ValueError(f"unknown block scheme {self.kind!r}")

    @classmethod
    def parse(cls, text):
        """Parse ``month``, ``quarter``, ``semester`` or ``count:<m>``."""
        if isinstance(text, cls):
            return text
        text = str(text).strip().lower()
        if text.startswith("count:"):
            try:
                return cls("count", int(text.split(":", 1)[1]))
            except ValueError:
                raise ValueError(f"bad block size in {text!r}") from None
        return cls(text)

    def __str__(self):
        return f"count:{self.m}" if self.kind == "count" else self.kind

    @property
    def is_calendar(self):
        return self.kind in CALENDAR_KINDS


@dataclass(frozen=True)
class BlockMaxima:
    block_ids: tuple
    values: np.ndarray
    tail: str
    scheme: BlockScheme

    def __post_init__(self):
        arr = np.array(self.values, dtype=float)
        arr.setflags(write=False)
        object.__setattr__(self, "values", arr)
        object.__setattr__(self, "block_ids", tuple(self.block_ids))
        if len(self.block_ids) != arr.size:
            raise ValueError("one block id per value required")
        if not np.all(np.isfinite(arr)):
            raise ValueError("block maxima must be finite")

    def __len__(self):
        return self.values.size

    def to_csv(self, path):
        with Path(path).open("w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(["block_id", "value"])
            for b, v in zip(self.block_ids, self.values.tolist()):
                writer.writerow([b, repr(v)])


def block_labels(dates, scheme):
    """Calendar block label for every date (``1985-01``, ``1985-Q1``, ``1985-S1``)."""
    dates = np.asarray(dates, dtype="datetime64[D]")
    months = dates.astype("datetime64[M]").astype(np.int64)
    year = months // 12 + 1970
    month = months % 12 + 1
    if scheme.kind == "month":
        return [f"{y:04d}-{m:02d}" for y, m in zip(year, month)]
    if scheme.kind == "quarter":
        return [f"{y:04d}-Q{(m - 1) // 3 + 1}" for y, m in zip(year, month)]
    if scheme.kind == "semester":
        return [f"{y:04d}-S{(m - 1) // 6 + 1}" for y, m in zip(year, month)]
    raise ValueError("block labels are only defined for calendar schemes")


def _calendar_groups(dates, scheme, min_edge_obs):
    labels = block_labels(dates, scheme)
    # dates are sorted, so labels arrive in contiguous runs
    bounds = [0] + [i for i in range(1, len(labels)) if labels[i] != labels[i - 1]] + [len(labels)]
    groups = [(labels[a], a, b) for a, b in zip(bounds, bounds[1:])]
    last = len(groups) - 1
    return [
        g for j, g in enumerate(groups)
        if (j not in (0, last)) or g[2] - g[1] >= min_edge_obs
    ]


def _count_groups(n, m, min_edge_obs):
    if m > n:
        raise DataError(f"block size {m} exceeds series length {n}")
    groups = [(f"B{j + 1:05d}", a, min(a + m, n)) for j, a in enumerate(range(0, n, m))]
    tail_len = groups[-1][2] - groups[-1][1]
    if tail_len < m and tail_len < min_edge_obs:
        groups.pop()
    return groups


def extract_block_maxima(series, scheme, tail="upper", min_edge_obs=DEFAULT_MIN_EDGE_OBS):
    """Per-block maxima of ``series`` (negated minima for ``tail="lower"``).

    Calendar blocks follow the observation dates.  The first and last
    calendar blocks, and a trailing short fixed-count block, are dropped
    when they hold fewer than ``min_edge_obs`` observations.

    ``series`` is a :class:`~evtrisk.ingest.ReturnSeries`; a bare array is
    accepted for fixed-count schemes.
    """
    scheme = BlockScheme.parse(scheme)
    if tail not in ("upper", "lower"):
        raise ValueError("tail must be 'upper' or 'lower'")
    values = np.asarray(getattr(series, "values", series), dtype=float).ravel()
    if values.size == 0:
        raise DataError("series is empty")
    signed = values if tail == "upper" else -values

    if scheme.is_calendar:
        dates = getattr(series, "dates", None)
        if dates is None:
            raise DataError("calendar blocks need a dated series")
        groups = _calendar_groups(dates, scheme, min_edge_obs)
    else:
        groups = _count_groups(values.size, scheme.m, min_edge_obs)
    if not groups:
        raise DataError("no block has enough observations")

    ids = [g[0] for g in groups]
    maxima = [signed[a:b].max() for _, a, b in groups]
    return BlockMaxima(ids, maxima, tail, scheme)
