"""Symmetric eigendecomposition and inverse-volatility schemes."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .covariance import as_estimate
from .errors import (InvalidArgumentError, InvalidRankError, NotPSDError,
                     NumericFailureError, SingularMatrixError)

DEFAULT_RELATIVE_FLOOR = 1e-12


@dataclass(frozen=True)
class SpectralDecomposition:
    """Eigenvalues in descending order; column ``a`` of ``eigenvectors`` pairs with ``eigenvalues[a]``."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    @property
    def n(self) -> int:
        return self.eigenvalues.shape[0]

    @property
    def mean_eigenvalue(self) -> float:
        return float(self.eigenvalues.mean())

    def reconstruct(self) -> np.ndarray:
        return _weighted_projector(self.eigenvectors, self.eigenvalues)

    def rank(self, rel_tol: float = 1e-10) -> int:
        """Number of eigenvalues above ``rel_tol`` times the mean eigenvalue."""
        return int(np.sum(self.eigenvalues > rel_tol * max(self.mean_eigenvalue, 0.0)))


def _weighted_projector(v: np.ndarray, d: np.ndarray) -> np.ndarray:
    m = (v * d[None, :]) @ v.T
    return 0.5 * (m + m.T)


def eig_sym(matrix, symmetry_tol: float = 1e-9) -> SpectralDecomposition:
    """Eigendecomposition of a real symmetric matrix via LAPACK ``syevd``.

    Output is deterministic: eigenvalues descend and each eigenvector has its
    largest-magnitude component positive.
    """
    a = np.asarray(getattr(matrix, "matrix", matrix), dtype=np.float64)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise InvalidArgumentError(f"matrix must be square, got shape {a.shape}")
    scale = max(float(np.max(np.abs(a))), np.finfo(float).tiny) if a.size else 1.0
    if np.max(np.abs(a - a.T), initial=0.0) > symmetry_tol * scale:
        raise InvalidArgumentError("matrix is not symmetric")
    try:
        e, v = np.linalg.eigh(0.5 * (a + a.T))
    except np.linalg.LinAlgError as exc:
        raise NumericFailureError(f"eigensolver did not converge: {exc}") from exc
    e = e[::-1].copy()
    v = v[:, ::-1].copy()
    lead = np.argmax(np.abs(v), axis=0)
    signs = np.sign(v[lead, np.arange(v.shape[1])])
    signs[signs == 0] = 1.0
    v *= signs[None, :]
    e.setflags(write=False)
    v.setflags(write=False)
    return SpectralDecomposition(e, v)


def default_floor(dec: SpectralDecomposition, relative: float = DEFAULT_RELATIVE_FLOOR) -> float:
    """Spectrum floor as a fraction of the mean variance."""
    return relative * max(dec.mean_eigenvalue, 0.0)


def inverse_sqrt_full(dec: SpectralDecomposition, floor: float = 0.0) -> np.ndarray:
    if floor < 0:
        raise InvalidArgumentError(f"floor must be non-negative, got {floor}")
    e = dec.eigenvalues
    if floor == 0.0:
        bad = np.nonzero(e <= 0.0)[0]
        if bad.size:
            raise SingularMatrixError(bad + 1)
    return _weighted_projector(dec.eigenvectors, 1.0 / np.sqrt(np.maximum(e, floor)))


def _check_rank(dec: SpectralDecomposition, k: int, upper: int) -> int:
    if int(k) != k or not 1 <= k <= upper:
        raise InvalidRankError(int(k), f"rank k={k} outside [1, {upper}]")
    return int(k)


def inverse_sqrt_projected(dec: SpectralDecomposition, k: int) -> np.ndarray:
    """Inverse square root restricted to the leading ``k`` eigendirections."""
    k = _check_rank(dec, k, dec.n)
    e = dec.eigenvalues
    if e[k - 1] <= 0.0:
        raise InvalidRankError(k, f"eigenvalue {k} is {e[k - 1]:.3g}, must be positive")
    d = np.zeros(dec.n)
    d[:k] = 1.0 / np.sqrt(e[:k])
    return _weighted_projector(dec.eigenvectors, d)


def inverse_sqrt_fullrank(dec: SpectralDecomposition, k: int) -> np.ndarray:
    """Leading ``k`` directions inverted, the remaining ones all weighted by e_{k+1}^(-1/2).

    ``k == N`` has an empty tail and coincides with the full inverse.
    """
    k = _check_rank(dec, k, dec.n)
    e = dec.eigenvalues
    if np.any(e[:k] <= 0.0):
        raise InvalidRankError(k, f"leading {k} eigenvalues must be positive")
    d = np.empty(dec.n)
    d[:k] = 1.0 / np.sqrt(e[:k])
    if k < dec.n:
        if e[k] <= 0.0:
            raise InvalidRankError(k, f"tail eigenvalue {k + 1} is {e[k]:.3g}, must be positive")
        d[k:] = 1.0 / np.sqrt(e[k])
    return _weighted_projector(dec.eigenvectors, d)


def sqrt_psd(dec: SpectralDecomposition, tol: float = 1e-10) -> np.ndarray:
    """Symmetric PSD square root; eigenvalues within ``tol * mean`` below zero are clamped."""
    e = dec.eigenvalues
    limit = -tol * max(dec.mean_eigenvalue, 0.0)
    if np.any(e < limit):
        raise NotPSDError(f"smallest eigenvalue {e.min():.3g} below tolerance {limit:.3g}")
    return _weighted_projector(dec.eigenvectors, np.sqrt(np.maximum(e, 0.0)))


def trace_preserving_rescale(inv_sqrt, original, enabled: bool = True) -> np.ndarray:
    """Scale an inverse square root M by c so that the implied covariance proxy,
    the pseudo-inverse of (cM)^2, has the trace of ``original``."""
    m = np.asarray(inv_sqrt, dtype=np.float64)
    if not enabled:
        return m
    if not np.any(m):
        raise InvalidArgumentError("cannot rescale a zero matrix")
    s = np.linalg.eigvalsh(0.5 * (m + m.T))
    keep = np.abs(s) > 1e-12 * np.max(np.abs(s))
    proxy_trace = float(np.sum(s[keep] ** -2.0))
    target = float(np.trace(as_estimate(original).matrix))
    if target <= 0.0:
        raise InvalidArgumentError("original covariance has non-positive trace")
    return m * np.sqrt(proxy_trace / target)
