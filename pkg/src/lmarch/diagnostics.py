"""Whitening diagnostics: lag-one correlation matrices, q measures and Monte Carlo bands.

Measure keys, for a panel ``y`` of returns or residuals and ``y2 = y**2``:

    r_r      rho(y, y)           contemporaneous, off-diagonal q
    r2_r2    rho(y2, y2)         contemporaneous volatility, off-diagonal q
    r_r2     rho(y, y2)
    Lr_r     rho(L[y], y)
    Lr2_r2   rho(L[y2], y2)      heteroskedasticity
    Lr_r2    rho(L[y], y2)       leverage
    Lr2_r    rho(L[y2], y)
    unit_var q(eps^2), distance of the second moments from one (not in percent)
"""

from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import _accel
from .errors import DegenerateSeriesError, InvalidArgumentError

logger = logging.getLogger(__name__)

CORRELATION_MEASURES = ("r_r", "r2_r2", "r_r2", "Lr_r", "Lr2_r2", "Lr_r2", "Lr2_r")
OFFDIAG_MEASURES = ("r_r", "r2_r2")
MEASURES = CORRELATION_MEASURES + ("unit_var",)

DISPLAY_NAMES = {
    "r_r": "rho(e, e)",
    "r2_r2": "rho(e^2, e^2)",
    "r_r2": "rho(e, e^2)",
    "Lr_r": "rho(L[e], e)",
    "Lr2_r": "rho(L[e^2], e)",
    "Lr_r2": "rho(L[e], e^2)",
    "Lr2_r2": "rho(L[e^2], e^2)",
    "unit_var": "<e^2> = 1",
}

# (left series, right series, lagged) per measure; "1" is y and "2" is y^2
_PAIRS = {
    "r_r": (1, 1, False), "r2_r2": (2, 2, False), "r_r2": (1, 2, False),
    "Lr_r": (1, 1, True), "Lr2_r2": (2, 2, True), "Lr_r2": (1, 2, True),
    "Lr2_r": (2, 1, True),
}


def _as_array(x) -> np.ndarray:
    a = np.asarray(getattr(x, "residuals", getattr(x, "returns", x)), dtype=np.float64)
    if a.ndim == 1:
        a = a[:, None]
    return a


def _check_variance(a: np.ndarray, labels, measure: str) -> None:
    flat = np.ptp(a, axis=0) == 0.0
    if np.any(flat):
        j = int(np.argmax(flat))
        raise DegenerateSeriesError(labels[j] if labels is not None else j, measure)


def lagged_correlation_matrices(panel, labels=None, backend: str | None = None) -> dict[str, np.ndarray]:
    """The seven lag-<=1 Pearson correlation matrices of a T x N panel.

    Entry (a, b) of ``Lr_r2`` is corr(y_a(t-1), y_b(t)^2); lagged pairs use the
    T-1 overlapping observations with means taken over that overlap.
    """
    y = _as_array(panel)
    labels = labels if labels is not None else getattr(panel, "labels", None)
    if y.shape[0] < 3:
        raise InvalidArgumentError("need at least 3 observations")
    series = {1: y, 2: y * y}
    out = {}
    for name, (left, right, lagged) in _PAIRS.items():
        a, b = series[left], series[right]
        if lagged:
            a, b = a[:-1], b[1:]
        _check_variance(a, labels, name)
        _check_variance(b, labels, name)
        rho = np.clip(_accel.pearson(a, b, backend=backend), -1.0, 1.0)
        if not lagged and left == right:
            rho = 0.5 * (rho + rho.T)
            np.fill_diagonal(rho, 1.0)
        out[name] = rho
    return out


def whitening_quality_offdiag(rho) -> float:
    """100 * RMS of the off-diagonal entries."""
    rho = np.asarray(rho, dtype=np.float64)
    n = rho.shape[0]
    if n < 2:
        raise InvalidArgumentError("off-diagonal quality needs N >= 2")
    off = rho[~np.eye(n, dtype=bool)]
    return float(100.0 * np.sqrt(np.mean(off * off)))


def whitening_quality_full(rho) -> float:
    """100 * RMS of all entries."""
    rho = np.asarray(rho, dtype=np.float64)
    if rho.ndim != 2 or rho.shape[0] < 1:
        raise InvalidArgumentError(f"expected a square matrix, got shape {rho.shape}")
    return float(100.0 * np.sqrt(np.mean(rho * rho)))


def unit_variance_quality(residuals) -> float:
    e = _as_array(residuals)
    if e.shape[0] < 2:
        raise InvalidArgumentError("need at least 2 observations")
    m2 = np.mean(e * e, axis=0)
    return float(np.sqrt(np.mean((m2 - 1.0) ** 2)))


def mean_residual_variance(residuals) -> float:
    e = _as_array(residuals)
    if e.shape[0] < 2:
        raise InvalidArgumentError("need at least 2 observations")
    return float(np.mean(e * e))


def quality_values(correlations: dict[str, np.ndarray]) -> dict[str, float | None]:
    """q for each correlation matrix; off-diagonal measures are None when N = 1."""
    q = {}
    for name in CORRELATION_MEASURES:
        rho = correlations[name]
        if name in OFFDIAG_MEASURES:
            q[name] = whitening_quality_offdiag(rho) if rho.shape[0] >= 2 else None
        else:
            q[name] = whitening_quality_full(rho)
    return q


@dataclass
class MCBand:
    """Empirical quantiles of every quality measure under iid Student-t innovations."""

    n_assets: int
    n_obs: int
    n_rep: int
    dof: float
    quantiles: tuple[float, float]
    seed: int
    low: dict[str, float]
    high: dict[str, float]
    mean: dict[str, float]
    samples: np.ndarray | None = field(default=None, repr=False)

    def to_dict(self) -> dict:
        return {"n_assets": self.n_assets, "n_obs": self.n_obs, "n_rep": self.n_rep,
                "dof": self.dof, "quantiles": list(self.quantiles), "seed": self.seed,
                "low": self.low, "high": self.high, "mean": self.mean}


@dataclass
class WhiteningReport:
    correlations: dict[str, np.ndarray]
    q_values: dict[str, float | None]
    q_unit_variance: float
    mean_residual_variance: float
    mc_band: MCBand | None = None
    labels: tuple[str, ...] | None = None
    config: dict = field(default_factory=dict)

    def measures(self) -> dict[str, float | None]:
        out = dict(self.q_values)
        out["unit_var"] = self.q_unit_variance
        return out

    def to_dict(self, include_matrices: bool = False) -> dict:
        d = {"config": self.config, "labels": list(self.labels) if self.labels else None,
             "q_values": self.q_values, "q_unit_variance": self.q_unit_variance,
             "mean_residual_variance": self.mean_residual_variance,
             "mc_band": self.mc_band.to_dict() if self.mc_band else None}
        if include_matrices:
            d["correlations"] = {k: v.tolist() for k, v in self.correlations.items()}
        return d


def whitening_report(panel, labels=None, config: dict | None = None,
                     band: MCBand | None = None, backend: str | None = None) -> WhiteningReport:
    """All quality measures of a return or residual panel."""
    y = _as_array(panel)
    labels = labels if labels is not None else getattr(panel, "labels", None)
    if config is None:
        config = dict(getattr(panel, "config", {}) or {})
    corr = lagged_correlation_matrices(y, labels, backend=backend)
    return WhiteningReport(corr, quality_values(corr), unit_variance_quality(y),
                           mean_residual_variance(y), band,
                           tuple(labels) if labels is not None else None, config)


def student_innovations(rng: np.random.Generator, shape, dof: float | None) -> np.ndarray:
    """iid unit-variance draws: Student-t scaled by sqrt((dof-2)/dof), or Gaussian when dof is None."""
    if dof is None:
        return rng.standard_normal(shape)
    if dof <= 2:
        raise InvalidArgumentError(f"Student dof must exceed 2 for unit variance, got {dof}")
    return rng.standard_t(dof, size=shape) * np.sqrt((dof - 2.0) / dof)


def _one_replication(seed_seq, n_obs, n_assets, dof, backend):
    rng = np.random.default_rng(seed_seq)
    return _accel.quality_measures(student_innovations(rng, (n_obs, n_assets), dof),
                                   backend=backend)


def mc_confidence_band(n_assets: int, n_obs: int, n_rep: int = 1000, dof: float = 5.0,
                       quantiles: tuple[float, float] = (0.05, 0.95), seed: int = 0,
                       n_jobs: int = 1, keep_samples: bool = False,
                       backend: str | None = None) -> MCBand:
    """Quantiles of the eight quality measures for iid Student-t panels of size T x N.

    Each replication draws from its own child of ``SeedSequence(seed)``, so the
    band does not depend on ``n_jobs``.
    """
    if dof <= 2:
        raise InvalidArgumentError(f"dof must exceed 2, got {dof}")
    if n_assets < 2 or n_obs < 3:
        raise InvalidArgumentError("need N >= 2 assets and T >= 3 observations")
    if n_rep < 2:
        raise InvalidArgumentError("need at least 2 replications")
    if n_rep < 100:
        logger.warning("only %d Monte Carlo replications; quantiles will be rough", n_rep)
    lo_q, hi_q = quantiles
    if not 0.0 <= lo_q <= hi_q <= 1.0:
        raise InvalidArgumentError(f"invalid quantiles {quantiles}")
    children = np.random.SeedSequence(seed).spawn(n_rep)
    job = lambda s: _one_replication(s, n_obs, n_assets, dof, backend)  # noqa: E731
    if n_jobs > 1:
        with ThreadPoolExecutor(max_workers=n_jobs) as pool:
            rows = list(pool.map(job, children))
    else:
        rows = [job(s) for s in children]
    samples = np.vstack(rows)[:, :len(MEASURES)]
    low = np.quantile(samples, lo_q, axis=0)
    high = np.quantile(samples, hi_q, axis=0)
    mean = samples.mean(axis=0)
    as_dict = lambda v: {m: float(x) for m, x in zip(MEASURES, v)}  # noqa: E731
    return MCBand(n_assets, n_obs, n_rep, float(dof), (lo_q, hi_q), seed,
                  as_dict(low), as_dict(high), as_dict(mean),
                  samples if keep_samples else None)
