"""Loading price and return series from CSV and computing log returns.

Returns are always in percent: a one percent move is ``1.0``.
"""

from __future__ import annotations

import csv
import datetime as dt
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .exceptions import DataError

__all__ = ["ColumnMap", "PriceSeries", "ReturnSeries", "load_csv", "log_returns", "write_csv"]


def _frozen(values, dtype):
    arr = np.array(values, dtype=dtype)
    arr.setflags(write=False)
    return arr


def _check_dates(dates):
    if dates.size > 1 and np.any(np.diff(dates).astype(np.int64) <= 0):
        raise DataError("dates must be strictly increasing")


@dataclass(frozen=True)
class PriceSeries:
    dates: np.ndarray
    prices: np.ndarray
    label: str = ""

    def __post_init__(self):
        object.__setattr__(self, "dates", _frozen(self.dates, "datetime64[D]"))
        object.__setattr__(self, "prices", _frozen(self.prices, float))
        if self.dates.shape != self.prices.shape:
            raise DataError("dates and prices differ in length")
        if self.prices.size < 2:
            raise DataError("a price series needs at least two observations")
        if not np.all(np.isfinite(self.prices)) or np.any(self.prices <= 0):
            raise DataError("prices must be finite and strictly positive")
        _check_dates(self.dates)

    def __len__(self):
        return self.prices.size


@dataclass(frozen=True)
class ReturnSeries:
    """Dated daily returns in percent."""

    dates: np.ndarray
    values: np.ndarray
    label: str = ""

    def __post_init__(self):
        object.__setattr__(self, "dates", _frozen(self.dates, "datetime64[D]"))
        object.__setattr__(self, "values", _frozen(self.values, float))
        if self.dates.shape != self.values.shape or self.values.ndim != 1:
            raise DataError("dates and returns differ in length")
        if not np.all(np.isfinite(self.values)):
            raise DataError("returns must be finite")
        _check_dates(self.dates)

    def __len__(self):
        return self.values.size

    def __neg__(self):
        return ReturnSeries(self.dates, -self.values, self.label)

    def subset(self, mask):
        return ReturnSeries(self.dates[mask], self.values[mask], self.label)

    @classmethod
    def from_pandas(cls, series, label=None):
        """Build from a :class:`pandas.Series` indexed by dates."""
        dates = np.asarray(series.index.values, dtype="datetime64[D]")
        name = label if label is not None else (series.name or "")
        return cls(dates, np.asarray(series.values, dtype=float), str(name))


@dataclass(frozen=True)
class ColumnMap:
    date: str = "date"
    price: str = "price"
    ret: str = "return"

    @classmethod
    def from_mapping(cls, mapping):
        mapping = dict(mapping or {})
        if "return" in mapping:
            mapping["ret"] = mapping.pop("return")
        return cls(**mapping)


def _parse_date(text, line, path):
    try:
        return dt.date.fromisoformat(text.strip())
    except ValueError:
        raise DataError(f"unparseable date {text!r}", line=line, path=path) from None


def _parse_float(text, what, line, path):
    text = text.strip()
    try:
        value = float(text)
    except ValueError:
        raise DataError(f"unparseable {what} {text!r}", line=line, path=path) from None
    if not math.isfinite(value):
        raise DataError(f"non-finite {what} {text!r}", line=line, path=path)
    return value


def load_csv(path, kind="prices", columns=None, label=None):
    """Read a ``date,price`` or ``date,return`` CSV into a validated series.

    Parameters
    ----------
    path : str or Path
        UTF-8, comma-delimited file with a header row and ISO dates.
    kind : {"prices", "returns"}
    columns : ColumnMap or mapping, optional
        Header names to read; defaults to ``date`` and ``price``/``return``.
    label : str, optional
        Series label; defaults to the file stem.

    Raises
    ------
    DataError
        On an empty file, a malformed row (with its line number), a
        duplicate date or a non-positive price.
    """
    if kind not in ("prices", "returns"):
        raise ValueError("kind must be 'prices' or 'returns'")
    if not isinstance(columns, ColumnMap):
        columns = ColumnMap.from_mapping(columns)
    path = Path(path)
    value_col = columns.price if kind == "prices" else columns.ret
    what = "price" if kind == "prices" else "return"

    rows = []
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None:
            raise DataError("empty file", path=path)
        header = [h.strip() for h in header]
        try:
            i_date, i_val = header.index(columns.date), header.index(value_col)
        except ValueError:
            raise DataError(
                f"header must contain {columns.date!r} and {value_col!r}, got {header}", line=1, path=path
            ) from None
        for row in reader:
            line = reader.line_num
            if not row or all(not cell.strip() for cell in row):
                continue
            if len(row) <= max(i_date, i_val):
                raise DataError(f"expected {len(header)} fields, got {len(row)}", line=line, path=path)
            date = _parse_date(row[i_date], line, path)
            value = _parse_float(row[i_val], what, line, path)
            if kind == "prices" and value <= 0:
                raise DataError(f"non-positive price {value}", line=line, path=path)
            rows.append((date, value, line))
    if not rows:
        raise DataError("file has no data rows", path=path)

    rows.sort(key=lambda r: r[0])
    for prev, cur in zip(rows, rows[1:]):
        if prev[0] == cur[0]:
            raise DataError(f"duplicate date {cur[0].isoformat()}", line=cur[2], path=path)

    dates = [r[0] for r in rows]
    values = [r[1] for r in rows]
    label = path.stem if label is None else label
    if kind == "prices":
        if len(rows) < 2:
            raise DataError("a price series needs at least two observations", path=path)
        return PriceSeries(dates, values, label)
    return ReturnSeries(dates, values, label)


def write_csv(series, path, columns=None):
    """Write a series back out in the format :func:`load_csv` reads."""
    if not isinstance(columns, ColumnMap):
        columns = ColumnMap.from_mapping(columns)
    if isinstance(series, PriceSeries):
        value_col, values = columns.price, series.prices
    else:
        value_col, values = columns.ret, series.values
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow([columns.date, value_col])
        for d, v in zip(series.dates, values):
            writer.writerow([str(d), repr(float(v))])


def log_returns(prices):
    """Percent log returns ``100 * log(p_t / p_{t-1})``, dated at ``t``."""
    p = prices.prices
    rets = 100.0 * np.log(p[1:] / p[:-1])
    return ReturnSeries(prices.dates[1:], rets, prices.label)
