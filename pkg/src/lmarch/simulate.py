"""Synthetic panels from r(t+1) = Sigma_eff(t)^(1/2) eps(t+1)."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Literal

import numpy as np

from . import _accel
from .covariance import ReturnPanel, _check_unit
from .diagnostics import student_innovations
from .errors import InvalidArgumentError, NotPSDError
from .kernels import WeightKernel, long_memory_weights
from .spectral import eig_sym, sqrt_psd


def draw_innovations(n_assets: int, n_obs: int, dist: Literal["student", "gaussian"] = "student",
                     dof: float = 5.0, seed: int = 0) -> np.ndarray:
    """T x N iid unit-variance innovations, reproducible from ``seed``."""
    if dist not in ("student", "gaussian"):
        raise InvalidArgumentError(f"unknown innovation distribution {dist!r}")
    rng = np.random.default_rng(seed)
    return student_innovations(rng, (n_obs, n_assets), dof if dist == "student" else None)


def equicorrelation(n_assets: int, rho: float, variance: float = 1.0) -> np.ndarray:
    """Constant-correlation covariance matrix, PD for -1/(N-1) < rho < 1."""
    s = np.full((n_assets, n_assets), rho * variance)
    np.fill_diagonal(s, variance)
    return s


@dataclass(frozen=True)
class SimulationConfig:
    """``sigma`` is a constant PD matrix or the string "dynamic".

    In dynamic mode the covariance is rebuilt each day from the simulated
    history with ``kernel``, ``gamma`` and ``xi``; the first ``i_max + 1``
    returns are drawn with ``initial_sigma`` (default ``initial_variance * I``).
    ``dof=None`` selects Gaussian innovations.
    """

    n_assets: int
    n_obs: int
    sigma: np.ndarray | str = "dynamic"
    dof: float | None = 5.0
    seed: int = 0
    kernel: WeightKernel | None = None
    gamma: float = 0.0
    xi: float = 0.01
    initial_sigma: np.ndarray | None = None
    initial_variance: float = 1e-4
    start: str = "2000-01-04"

    @property
    def dynamic(self) -> bool:
        return isinstance(self.sigma, str)

    def resolved_kernel(self) -> WeightKernel:
        return self.kernel or long_memory_weights(260)

    def validate(self) -> None:
        if self.n_assets < 1 or self.n_obs < 2:
            raise InvalidArgumentError("need N >= 1 and T >= 2")
        if self.dof is not None and self.dof <= 2:
            raise InvalidArgumentError(f"dof must exceed 2, got {self.dof}")
        if self.dynamic:
            if self.sigma != "dynamic":
                raise InvalidArgumentError(f"sigma must be a matrix or 'dynamic', got {self.sigma!r}")
            _check_unit("gamma", self.gamma)
            _check_unit("xi", self.xi)
            if self.n_obs < self.resolved_kernel().i_max + 2:
                raise InvalidArgumentError("dynamic mode needs T >= i_max + 2")
        else:
            s = np.asarray(self.sigma, dtype=np.float64)
            if s.shape != (self.n_assets, self.n_assets):
                raise InvalidArgumentError(f"sigma has shape {s.shape}, expected N x N")

    def to_dict(self) -> dict:
        d = {"n_assets": self.n_assets, "n_obs": self.n_obs, "dof": self.dof,
             "seed": self.seed, "mode": "dynamic" if self.dynamic else "constant"}
        if self.dynamic:
            d.update(kernel=self.resolved_kernel().to_dict(), gamma=self.gamma, xi=self.xi,
                     initial_variance=self.initial_variance)
        else:
            d["sigma"] = np.asarray(self.sigma).tolist()
        return d


def _pd_sqrt(sigma: np.ndarray) -> np.ndarray:
    dec = eig_sym(sigma)
    if dec.eigenvalues[-1] <= 0.0:
        raise NotPSDError(f"sigma is not positive definite (min eigenvalue {dec.eigenvalues[-1]:.3g})")
    return sqrt_psd(dec)


def simulate_innovations(config: SimulationConfig) -> np.ndarray:
    """The innovations that ``simulate_dgp(config)`` injects."""
    return draw_innovations(config.n_assets, config.n_obs,
                            "gaussian" if config.dof is None else "student",
                            config.dof or 5.0, config.seed)


def simulate_dgp(config: SimulationConfig, backend: str | None = None) -> ReturnPanel:
    config.validate()
    eps = simulate_innovations(config)
    labels = [f"A{j}" for j in range(config.n_assets)]
    if not config.dynamic:
        s = _pd_sqrt(np.asarray(config.sigma, dtype=np.float64))
        r = eps @ s.T
    else:
        kernel = config.resolved_kernel()
        init = config.initial_sigma
        if init is None:
            init = config.initial_variance * np.eye(config.n_assets)
        r, status, t = _accel.dynamic_path(eps, kernel.weights[::-1], config.gamma, config.xi,
                                           _pd_sqrt(np.asarray(init, dtype=np.float64)),
                                           backend=backend)
        if status != _accel.OK:
            raise NotPSDError(f"simulated covariance lost positive semi-definiteness at row {t}")
    return ReturnPanel.from_array(r, labels, start=config.start)
