"""Rolling out-of-sample residuals eps(t+1) = Sigma_eff(t)^(-1/2) r(t+1)."""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Literal

import numpy as np
import pandas as pd

from . import _accel
from .covariance import ReturnPanel, _check_unit
from .errors import InvalidArgumentError, InvalidRankError, SingularMatrixError, WindowTooShortError
from .kernels import WeightKernel
from .spectral import DEFAULT_RELATIVE_FLOOR

_KIND_CODE = {"full": _accel.FULL, "projected": _accel.PROJECTED, "fullrank": _accel.FULLRANK}


@dataclass(frozen=True)
class Scheme:
    """How the inverse volatility is formed from the spectrum.

    ``full`` floors the spectrum at ``floor`` (absolute) or, when ``floor`` is
    None, at ``rel_floor`` times the mean variance. ``projected`` and
    ``fullrank`` use the cut-off rank ``k``.
    """

    kind: Literal["full", "projected", "fullrank"] = "full"
    k: int | None = None
    floor: float | None = None
    rel_floor: float = DEFAULT_RELATIVE_FLOOR

    def __post_init__(self):
        if self.kind not in _KIND_CODE:
            raise InvalidArgumentError(f"unknown scheme {self.kind!r}")
        if self.kind == "full":
            if self.floor is not None and self.floor < 0:
                raise InvalidArgumentError("floor must be non-negative")
            if self.rel_floor < 0:
                raise InvalidArgumentError("rel_floor must be non-negative")
        elif self.k is None or int(self.k) != self.k or self.k < 1:
            raise InvalidArgumentError(f"scheme {self.kind} needs a rank k >= 1, got {self.k}")

    @classmethod
    def full(cls, floor: float | None = None, rel_floor: float = DEFAULT_RELATIVE_FLOOR):
        return cls("full", None, floor, rel_floor)

    @classmethod
    def projected(cls, k: int):
        return cls("projected", int(k))

    @classmethod
    def fullrank(cls, k: int):
        return cls("fullrank", int(k))

    def to_dict(self) -> dict:
        if self.kind == "full":
            return {"kind": "full", "floor": self.floor, "rel_floor": self.rel_floor}
        return {"kind": self.kind, "k": self.k}


@dataclass(frozen=True)
class ResidualPanel:
    residuals: np.ndarray
    dates: pd.DatetimeIndex
    labels: tuple[str, ...]
    config: dict = field(default_factory=dict)
    spectra: np.ndarray | None = field(default=None, repr=False, compare=False)

    @property
    def n_obs(self) -> int:
        return self.residuals.shape[0]

    @property
    def n_assets(self) -> int:
        return self.residuals.shape[1]

    def mean_spectrum(self) -> np.ndarray:
        """Descending eigenvalues of Sigma_eff(gamma, xi) averaged over the covariance dates."""
        if self.spectra is None:
            raise InvalidArgumentError("spectra were not kept for this panel")
        return self.spectra.mean(axis=0)


def _chunks(start: int, stop: int, n: int) -> list[tuple[int, int]]:
    edges = np.linspace(start, stop, n + 1).round().astype(int)
    return [(int(a), int(b)) for a, b in zip(edges[:-1], edges[1:]) if b > a]


def compute_residuals(panel: ReturnPanel, kernel: WeightKernel, gamma: float = 0.0,
                      xi: float = 0.0, scheme: Scheme | None = None, *,
                      rescale: bool = False, keep_spectra: bool = True,
                      n_jobs: int = 1, backend: str | None = None) -> ResidualPanel:
    """Residuals for every date after the ``i_max`` warm-up.

    The covariance at row ``t`` uses rows ``t - i_max .. t`` only and is applied
    to ``r(t+1)``, so the first residual sits at row ``i_max + 1`` and the output
    has ``T - i_max - 1`` rows. Dates are processed independently; ``n_jobs``
    splits them across threads without changing the result.
    """
    scheme = scheme or Scheme.full()
    gamma = _check_unit("gamma", gamma)
    xi = _check_unit("xi", xi)
    i_max = kernel.i_max
    n_obs, n = panel.returns.shape
    if n_obs < i_max + 2:
        raise WindowTooShortError(i_max + 2, n_obs)
    k = scheme.k or 0
    if scheme.kind != "full" and k > n:
        raise InvalidRankError(k, f"rank k={k} exceeds the number of assets {n}")
    floor_abs = -1.0 if scheme.floor is None else float(scheme.floor)
    args = (panel.returns, kernel.weights[::-1], gamma, xi, _KIND_CODE[scheme.kind], k,
            floor_abs, scheme.rel_floor, rescale)

    spans = _chunks(i_max, n_obs - 1, max(1, int(n_jobs)))
    if len(spans) == 1:
        parts = [_accel.residual_loop(*args, *spans[0], backend=backend)]
    else:
        with ThreadPoolExecutor(max_workers=len(spans)) as pool:
            parts = list(pool.map(lambda s: _accel.residual_loop(*args, *s, backend=backend),
                                  spans))
    eps = np.concatenate([p[0] for p in parts])
    spectra = np.concatenate([p[1] for p in parts])
    status = np.concatenate([p[2] for p in parts])
    ranks = np.concatenate([p[3] for p in parts])

    failed = np.nonzero(status)[0]
    if failed.size:
        j = int(failed[0])
        asof = panel.dates[i_max + j]
        if status[j] == _accel.SINGULAR:
            raise SingularMatrixError([int(ranks[j])], date=asof)
        raise InvalidRankError(int(ranks[j]),
                               f"eigenvalue {int(ranks[j])} is not positive for scheme "
                               f"{scheme.kind}(k={k})", date=asof)
    if not np.all(np.isfinite(eps)):
        raise SingularMatrixError([], date=None)

    config = {"kernel": kernel.to_dict(), "kernel_id": kernel.kernel_id, "gamma": gamma,
              "xi": xi, "scheme": scheme.to_dict(), "i_max": i_max, "rescale": rescale}
    return ResidualPanel(eps, panel.dates[i_max + 1:], panel.labels, config,
                         spectra if keep_spectra else None)


def mean_spectrum(panel: ReturnPanel, kernel: WeightKernel, gamma: float = 0.0,
                  xi: float = 0.0, backend: str | None = None) -> np.ndarray:
    """Time-averaged descending spectrum of Sigma_eff(gamma, xi) over the analysis window."""
    res = compute_residuals(panel, kernel, gamma, xi, Scheme.full(rel_floor=1.0),
                            keep_spectra=True, backend=backend)
    return res.mean_spectrum()
