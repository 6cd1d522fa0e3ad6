"""Price panel CSV loading, price mappings and return construction.

CSV layout is ``date,LABEL1,LABEL2,...`` with ISO-8601 dates in the first
column. An optional JSON sidecar next to the file (same stem, ``.json``)
declares the asset class of each column::

    {"r0": 0.04,
     "columns": {"USD3M": {"asset_class": "interest_rate", "r0": 0.04},
                 "SPX": {"asset_class": "log_price"}}}

Columns not listed are log prices.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Literal

import numpy as np
import pandas as pd

from .covariance import ReturnPanel
from .errors import (InvalidArgumentError, MappingError, MissingDataError, OrderingError,
                     ParseError)

DEFAULT_R0 = 0.04
_MISSING_TOKENS = ("", "NA", "NaN", "nan", "null")


@dataclass(frozen=True)
class AssetClass:
    kind: Literal["log_price", "interest_rate"] = "log_price"
    r0: float = DEFAULT_R0

    def __post_init__(self):
        if self.kind not in ("log_price", "interest_rate"):
            raise InvalidArgumentError(f"unknown asset class {self.kind!r}")
        if self.kind == "interest_rate" and self.r0 <= 0:
            raise InvalidArgumentError(f"R0 must be positive, got {self.r0}")

    def to_dict(self) -> dict:
        if self.kind == "log_price":
            return {"asset_class": "log_price"}
        return {"asset_class": "interest_rate", "r0": self.r0}


LOG_PRICE = AssetClass()


@dataclass(frozen=True)
class PricePanel:
    prices: np.ndarray
    dates: pd.DatetimeIndex
    labels: tuple[str, ...]
    asset_classes: tuple[AssetClass, ...]
    filled: tuple[tuple[str, str], ...] = field(default=())

    def __post_init__(self):
        p = np.array(self.prices, dtype=np.float64)
        if p.ndim != 2 or p.shape[1] != len(self.labels) or p.shape[0] != len(self.dates):
            raise InvalidArgumentError("prices, dates and labels do not line up")
        if len(self.asset_classes) != p.shape[1]:
            raise InvalidArgumentError("one asset class per column is required")
        dates = pd.DatetimeIndex(self.dates)
        if not dates.is_monotonic_increasing or dates.has_duplicates:
            raise OrderingError("dates must be strictly ascending")
        p.setflags(write=False)
        object.__setattr__(self, "prices", p)
        object.__setattr__(self, "dates", dates)
        object.__setattr__(self, "labels", tuple(map(str, self.labels)))

    @property
    def gap_report(self) -> list[dict]:
        return [{"date": d, "label": lab} for d, lab in self.filled]


def _read_schema(schema, path: Path, labels) -> tuple[AssetClass, ...]:
    if schema is None:
        side = path.with_suffix(".json")
        schema = json.loads(side.read_text()) if side.exists() else {}
    elif isinstance(schema, (str, Path)):
        schema = json.loads(Path(schema).read_text())
    default_r0 = float(schema.get("r0", DEFAULT_R0))
    cols = schema.get("columns", {})
    unknown = set(cols) - set(labels)
    if unknown:
        raise InvalidArgumentError(f"schema names unknown columns {sorted(unknown)}")
    out = []
    for lab in labels:
        spec = cols.get(lab, {})
        out.append(AssetClass(spec.get("asset_class", "log_price"),
                              float(spec.get("r0", default_r0))))
    return tuple(out)


def load_price_csv(path, schema=None, mode: Literal["strict", "lenient"] = "strict") -> PricePanel:
    """Parse a price CSV.

    ``strict`` rejects any row with a missing value; ``lenient`` forward-fills
    the hole and records each filled (date, label) cell in ``PricePanel.filled``.
    """
    if mode not in ("strict", "lenient"):
        raise InvalidArgumentError(f"mode must be strict or lenient, got {mode!r}")
    path = Path(path)
    try:
        raw = pd.read_csv(path, dtype=str, keep_default_na=False)
    except pd.errors.ParserError as exc:
        raise ParseError(str(exc)) from exc
    except pd.errors.EmptyDataError as exc:
        raise ParseError("empty file", line=1) from exc
    if raw.shape[1] < 2:
        raise ParseError("expected a date column followed by at least one asset", line=1)
    labels = [str(c) for c in raw.columns[1:]]
    if len(set(labels)) != len(labels):
        raise ParseError("duplicate column labels", line=1)

    date_str = raw.iloc[:, 0].str.strip()
    dates = pd.to_datetime(date_str, format="ISO8601", errors="coerce")
    bad = np.nonzero(dates.isna().to_numpy())[0]
    if bad.size:
        raise ParseError(f"invalid date {date_str.iloc[bad[0]]!r}", line=int(bad[0]) + 2)

    cells = raw.iloc[:, 1:].apply(lambda s: s.str.strip())
    text = cells.to_numpy(dtype=object)
    missing = np.isin(text, list(_MISSING_TOKENS))
    values = np.full(text.shape, np.nan)
    for (i, j), cell in np.ndenumerate(text):
        if missing[i, j]:
            continue
        try:
            values[i, j] = float(cell)
        except ValueError:
            raise ParseError(f"cannot parse {cell!r} in column {labels[j]!r}", line=i + 2) from None

    diffs = np.diff(dates.to_numpy()).astype(np.int64)
    if np.any(diffs <= 0):
        i = int(np.argmax(diffs <= 0)) + 1
        raise OrderingError(f"line {i + 2}: date {date_str.iloc[i]} does not follow "
                            f"{date_str.iloc[i - 1]}")

    iso = [d.strftime("%Y-%m-%d") for d in dates]
    filled = []
    if missing.any():
        if mode == "strict":
            i = int(np.argmax(missing.any(axis=1)))
            raise MissingDataError(iso[i], [labels[j] for j in np.nonzero(missing[i])[0]])
        if missing[0].any():
            raise MissingDataError(iso[0], [labels[j] for j in np.nonzero(missing[0])[0]])
        values = pd.DataFrame(values).ffill().to_numpy()
        filled = [(iso[i], labels[j]) for i, j in np.argwhere(missing)]
    return PricePanel(values, pd.DatetimeIndex(dates), tuple(labels),
                      _read_schema(schema, path, labels), tuple(filled))


def map_prices(panel: PricePanel) -> np.ndarray:
    """x = ln(p) for log-price columns, x = ln(1 + R/R0) for interest-rate columns."""
    p = panel.prices
    x = np.empty_like(p)
    for j, ac in enumerate(panel.asset_classes):
        arg = p[:, j] if ac.kind == "log_price" else 1.0 + p[:, j] / ac.r0
        bad = np.nonzero(~(arg > 0.0))[0]
        if bad.size:
            i = int(bad[0])
            raise MappingError(panel.dates[i].strftime("%Y-%m-%d"), panel.labels[j], p[i, j])
        x[:, j] = np.log(arg)
    return x


def unmap_prices(x, asset_classes) -> np.ndarray:
    """Inverse of :func:`map_prices`."""
    x = np.asarray(x, dtype=np.float64)
    p = np.empty_like(x)
    for j, ac in enumerate(asset_classes):
        p[:, j] = np.exp(x[:, j]) if ac.kind == "log_price" else ac.r0 * np.expm1(x[:, j])
    return p


def returns_from_mapped(x, dates=None, labels=None) -> ReturnPanel:
    """r(t) = x(t) - x(t-1); the panel is dated by the later of the two rows."""
    x = np.asarray(x, dtype=np.float64)
    if x.ndim == 1:
        x = x[:, None]
    if x.shape[0] < 3:
        # ReturnPanel needs two returns
        raise InvalidArgumentError("need at least 3 mapped prices")
    r = np.diff(x, axis=0)
    if dates is None:
        return ReturnPanel.from_array(r, labels)
    return ReturnPanel(r, pd.DatetimeIndex(dates)[1:],
                       tuple(labels) if labels is not None else tuple(f"A{j}" for j in range(r.shape[1])))


def load_returns(path, schema=None, mode: Literal["strict", "lenient"] = "strict") -> ReturnPanel:
    prices = load_price_csv(path, schema, mode)
    return returns_from_mapped(map_prices(prices), prices.dates, prices.labels)


def price_panel_from_returns(panel: ReturnPanel) -> PricePanel:
    """Log-price panel whose returns are ``panel``: x(0) = 0 one business day before
    the first return, then the cumulative sum."""
    x = np.vstack([np.zeros((1, panel.n_assets)), np.cumsum(panel.returns, axis=0)])
    first = panel.dates[0] - pd.offsets.BDay(1)
    dates = pd.DatetimeIndex([first]).as_unit(panel.dates.unit).append(panel.dates)
    return PricePanel(np.exp(x), dates, panel.labels, (LOG_PRICE,) * panel.n_assets)


def write_price_csv(path, panel: PricePanel) -> None:
    """Write prices at 17 significant digits plus the asset-class sidecar."""
    path = Path(path)
    with path.open("w", newline="") as fh:
        fh.write(",".join(["date", *panel.labels]) + "\n")
        for d, row in zip(panel.dates, panel.prices):
            fh.write(d.strftime("%Y-%m-%d") + "," + ",".join(f"{v:.17g}" for v in row) + "\n")
    sidecar = {"r0": DEFAULT_R0,
               "columns": {lab: ac.to_dict() for lab, ac in zip(panel.labels, panel.asset_classes)}}
    path.with_suffix(".json").write_text(json.dumps(sidecar, indent=2, sort_keys=True) + "\n")
