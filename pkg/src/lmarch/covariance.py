"""Cross-product covariance, correlation shrinkage and spectrum regularization."""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Any, Sequence

import numpy as np
import pandas as pd

from . import _accel
from .errors import DegenerateAssetError, InvalidArgumentError, WindowTooShortError
from .kernels import WeightKernel


@dataclass(frozen=True)
class ReturnPanel:
    """T x N daily returns with their dates and asset labels."""

    returns: np.ndarray
    dates: pd.DatetimeIndex
    labels: tuple[str, ...]

    def __post_init__(self):
        r = np.array(self.returns, dtype=np.float64)
        if r.ndim == 1:
            r = r[:, None]
        if r.ndim != 2:
            raise InvalidArgumentError(f"returns must be 2-D, got shape {r.shape}")
        if r.shape[0] < 2:
            raise InvalidArgumentError("a return panel needs at least 2 observations")
        if not np.all(np.isfinite(r)):
            raise InvalidArgumentError("returns contain missing or non-finite values")
        dates = pd.DatetimeIndex(self.dates)
        if len(dates) != r.shape[0]:
            raise InvalidArgumentError(f"{len(dates)} dates for {r.shape[0]} rows")
        if not dates.is_monotonic_increasing or dates.has_duplicates:
            raise InvalidArgumentError("dates must be strictly ascending")
        labels = tuple(str(x) for x in self.labels)
        if len(labels) != r.shape[1] or len(set(labels)) != len(labels):
            raise InvalidArgumentError("labels must be unique, one per column")
        r.setflags(write=False)
        object.__setattr__(self, "returns", r)
        object.__setattr__(self, "dates", dates)
        object.__setattr__(self, "labels", labels)

    @classmethod
    def from_array(cls, returns, labels: Sequence[str] | None = None,
                   start: str = "2000-01-03") -> "ReturnPanel":
        """Wrap a raw array, inventing business-day dates and A0, A1, ... labels."""
        r = np.asarray(returns, dtype=np.float64)
        if r.ndim == 1:
            r = r[:, None]
        if labels is None:
            labels = [f"A{j}" for j in range(r.shape[1])]
        return cls(r, pd.bdate_range(start, periods=r.shape[0], unit="s"), tuple(labels))

    @property
    def n_obs(self) -> int:
        return self.returns.shape[0]

    @property
    def n_assets(self) -> int:
        return self.returns.shape[1]

    def index_of(self, t) -> int:
        """Row position of ``t`` which may be an integer position or a date."""
        if isinstance(t, (int, np.integer)):
            pos = int(t)
            if pos < 0:
                pos += self.n_obs
            if not 0 <= pos < self.n_obs:
                raise InvalidArgumentError(f"time index {t} outside the panel")
            return pos
        try:
            return int(self.dates.get_loc(pd.Timestamp(t)))
        except KeyError:
            raise InvalidArgumentError(f"date {t} not in panel") from None

    def scaled(self, c: float) -> "ReturnPanel":
        return ReturnPanel(self.returns * c, self.dates, self.labels)


@dataclass(frozen=True)
class CovarianceEstimate:
    matrix: np.ndarray
    gamma: float = 0.0
    xi: float = 0.0
    kernel_id: str | None = None
    asof: Any = None
    labels: tuple[str, ...] | None = field(default=None, compare=False)

    def __post_init__(self):
        m = np.array(self.matrix, dtype=np.float64)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise InvalidArgumentError(f"covariance must be square, got shape {m.shape}")
        m = 0.5 * (m + m.T)
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    @property
    def n_assets(self) -> int:
        return self.matrix.shape[0]


def as_estimate(cov) -> CovarianceEstimate:
    return cov if isinstance(cov, CovarianceEstimate) else CovarianceEstimate(cov)


def _check_unit(name: str, value: float) -> float:
    if not 0.0 <= value <= 1.0:
        raise InvalidArgumentError(f"{name} must lie in [0, 1], got {value}")
    return float(value)


def window_bounds(panel: ReturnPanel, t: int, kernel: WeightKernel) -> tuple[int, int]:
    need = kernel.i_max + 1
    if t + 1 < need:
        raise WindowTooShortError(need, t + 1,
                                  f"covariance at row {t} needs {need} returns, "
                                  f"only {t + 1} available")
    return t - kernel.i_max, t + 1


def cross_product_covariance(panel: ReturnPanel, t, kernel: WeightKernel) -> CovarianceEstimate:
    """sum_i lambda(i) r(t-i) r(t-i)^T over the kernel window ending at ``t`` (inclusive)."""
    pos = panel.index_of(t)
    lo, hi = window_bounds(panel, pos, kernel)
    m = _accel.cross_product(panel.returns[lo:hi], kernel.weights[::-1])
    return CovarianceEstimate(m, 0.0, 0.0, kernel.kernel_id, panel.dates[pos], panel.labels)


def shrink_correlation(cov, gamma: float) -> CovarianceEstimate:
    """Scale off-diagonal entries by (1 - gamma); the diagonal is left untouched."""
    cov = as_estimate(cov)
    gamma = _check_unit("gamma", gamma)
    if cov.gamma != 0.0:
        raise InvalidArgumentError("covariance is already shrunk")
    m = (1.0 - gamma) * cov.matrix
    np.fill_diagonal(m, np.diag(cov.matrix))
    return replace(cov, matrix=m, gamma=gamma)


def mean_variance(cov) -> float:
    m = as_estimate(cov).matrix
    return float(np.trace(m) / m.shape[0])


def regularize(cov, xi: float) -> CovarianceEstimate:
    """Mix with <sigma^2> I; the trace is preserved and every eigenvalue e maps to
    (1 - xi) e + xi <sigma^2>."""
    cov = as_estimate(cov)
    xi = _check_unit("xi", xi)
    n = cov.n_assets
    m = (1.0 - xi) * cov.matrix
    m[np.diag_indices(n)] += xi * mean_variance(cov)
    return replace(cov, matrix=m, xi=xi)


def effective_covariance(panel: ReturnPanel, t, kernel: WeightKernel,
                         gamma: float = 0.0, xi: float = 0.0) -> CovarianceEstimate:
    """Cross product, then shrinkage, then regularization."""
    return regularize(shrink_correlation(cross_product_covariance(panel, t, kernel), gamma), xi)


def correlation_from_covariance(cov, labels: Sequence[str] | None = None) -> np.ndarray:
    cov = as_estimate(cov)
    d = np.diag(cov.matrix)
    bad = np.nonzero(d <= 0.0)[0]
    if bad.size:
        names = labels or cov.labels
        j = int(bad[0])
        raise DegenerateAssetError(names[j] if names is not None else j)
    s = 1.0 / np.sqrt(d)
    rho = cov.matrix * s[:, None] * s[None, :]
    np.fill_diagonal(rho, 1.0)
    return np.clip(rho, -1.0, 1.0)
