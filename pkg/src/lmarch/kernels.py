"""Lag-weight kernels lambda(i), i = 0..i_max, used by the cross-product covariance."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .errors import InvalidArgumentError


class KernelShape(str, Enum):
    EQUAL = "equal"
    EXPONENTIAL = "exp"
    LONG_MEMORY = "lm"


@dataclass(frozen=True)
class LongMemoryConfig:
    """Constants of the sum-of-exponentials long-memory kernel.

    Component k has time scale ``tau1 * rho**(k-1)`` and weight proportional
    to ``1 - ln(tau_k) / ln(tau0)``, clipped at zero.
    """

    tau0: float = 1560.0
    tau1: float = 4.0
    rho: float = math.sqrt(2.0)
    n_components: int = 15

    def __post_init__(self):
        if self.tau1 <= 0 or self.rho <= 1 or self.n_components < 1:
            raise InvalidArgumentError(
                f"invalid long-memory constants tau1={self.tau1}, rho={self.rho}, "
                f"n_components={self.n_components}"
            )


@dataclass(frozen=True)
class WeightKernel:
    weights: np.ndarray
    shape: KernelShape
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        w = np.array(self.weights, dtype=np.float64)
        w.setflags(write=False)
        object.__setattr__(self, "weights", w)

    @property
    def i_max(self) -> int:
        return len(self.weights) - 1

    @property
    def kernel_id(self) -> str:
        args = ",".join(f"{k}={v:g}" if isinstance(v, float) else f"{k}={v}"
                        for k, v in sorted(self.params.items()))
        return f"{self.shape.value}(i_max={self.i_max}{',' if args else ''}{args})"

    def to_dict(self) -> dict:
        return {"shape": self.shape.value, "i_max": self.i_max, "params": dict(self.params)}


def _check_i_max(i_max) -> int:
    if int(i_max) != i_max or i_max < 1:
        raise InvalidArgumentError(f"i_max must be an integer >= 1, got {i_max!r}")
    return int(i_max)


def equal_weights(i_max: int) -> WeightKernel:
    i_max = _check_i_max(i_max)
    return WeightKernel(np.full(i_max + 1, 1.0 / (i_max + 1)), KernelShape.EQUAL)


def exponential_weights(i_max: int, mu: float = 0.94) -> WeightKernel:
    i_max = _check_i_max(i_max)
    if not 0.0 < mu < 1.0:
        raise InvalidArgumentError(f"decay mu must lie in (0, 1), got {mu}")
    w = mu ** np.arange(i_max + 1, dtype=np.float64)
    return WeightKernel(w / w.sum(), KernelShape.EXPONENTIAL, {"mu": float(mu)})


def long_memory_components(tau0: float, config: LongMemoryConfig) -> tuple[np.ndarray, np.ndarray]:
    """Return (time scales, normalized component weights) of the long-memory mixture."""
    taus = config.tau1 * config.rho ** np.arange(config.n_components, dtype=np.float64)
    w = np.clip(1.0 - np.log(taus) / math.log(tau0), 0.0, None)
    if w.sum() <= 0.0:
        raise InvalidArgumentError(
            f"tau0={tau0} is below every component time scale (tau1={config.tau1})"
        )
    return taus, w / w.sum()


def long_memory_weights(i_max: int, tau0_days: float | None = None,
                        config: LongMemoryConfig | None = None) -> WeightKernel:
    """Logarithmically decaying weights built as a mixture of exponentials.

    ``tau0_days`` overrides ``config.tau0`` when given.
    """
    i_max = _check_i_max(i_max)
    config = config or LongMemoryConfig()
    tau0 = config.tau0 if tau0_days is None else float(tau0_days)
    if tau0 <= 1.0:
        raise InvalidArgumentError(f"tau0_days must exceed 1, got {tau0}")
    taus, cw = long_memory_components(tau0, config)
    mus = np.exp(-1.0 / taus)
    lags = np.arange(i_max + 1, dtype=np.float64)
    w = (cw[None, :] * mus[None, :] ** lags[:, None]).sum(axis=1)
    params = {"tau0": tau0, "tau1": config.tau1, "rho": config.rho,
              "n_components": config.n_components}
    return WeightKernel(w / w.sum(), KernelShape.LONG_MEMORY, params)


def make_kernel(name: str, i_max: int = 260, mu: float = 0.94, tau0: float = 1560.0,
                config: LongMemoryConfig | None = None) -> WeightKernel:
    shape = KernelShape(name)
    if shape is KernelShape.EQUAL:
        return equal_weights(i_max)
    if shape is KernelShape.EXPONENTIAL:
        return exponential_weights(i_max, mu)
    return long_memory_weights(i_max, tau0, config)


def effective_sample_size(kernel: WeightKernel) -> float:
    """1 / sum(lambda^2): number of equally weighted observations with the same variance."""
    return float(1.0 / np.sum(kernel.weights ** 2))
