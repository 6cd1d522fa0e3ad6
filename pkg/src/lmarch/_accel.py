"""Hot numeric kernels with a numba path and a pure-numpy path.

The backend is picked once at import time from the ``LMARCH_BACKEND``
environment variable:

    LMARCH_BACKEND=numba   use the @njit kernels (error if numba is missing)
    LMARCH_BACKEND=numpy   use the vectorized numpy kernels
    LMARCH_BACKEND=auto    numba when importable, numpy otherwise (default)

Every public kernel also accepts ``backend=`` to force a path, which is how
the test-suite checks the two paths against each other.

Conventions shared by all kernels:
    * ``wchron`` is the kernel weight vector in chronological order, i.e.
      ``wchron[j] = lambda(i_max - j)`` so that row ``j`` of the window
      ``returns[t - i_max : t + 1]`` gets its weight.
    * Eigenvalues are handled in descending order.
    * Status codes: 0 ok, 1 singular (non-positive eigenvalue with zero
      floor), 2 invalid rank, 3 not PSD.
"""

from __future__ import annotations

import logging
import os

import numpy as np

logger = logging.getLogger(__name__)

FULL, PROJECTED, FULLRANK = 0, 1, 2
OK, SINGULAR, BAD_RANK, NOT_PSD = 0, 1, 2, 3

_REQUESTED = os.environ.get("LMARCH_BACKEND", "auto").strip().lower()
if _REQUESTED not in ("auto", "numba", "numpy"):
    raise ImportError(f"LMARCH_BACKEND must be auto, numba or numpy, got {_REQUESTED!r}")

try:
    if _REQUESTED == "numpy":
        raise ImportError("numba disabled by LMARCH_BACKEND")
    from numba import njit

    HAS_NUMBA = True
except ImportError:
    if _REQUESTED == "numba":
        raise
    HAS_NUMBA = False

BACKEND = "numba" if HAS_NUMBA else "numpy"
logger.debug("lmarch kernels using %s backend", BACKEND)


def _resolve(backend: str | None) -> str:
    if backend is None:
        return BACKEND
    if backend == "numba" and not HAS_NUMBA:
        raise RuntimeError("numba backend requested but numba is unavailable")
    if backend not in ("numba", "numpy"):
        raise ValueError(f"unknown backend {backend!r}")
    return backend


# ---------------------------------------------------------------------------
# numpy path
# ---------------------------------------------------------------------------

def _cross_product_np(window, wchron):
    c = (window * wchron[:, None]).T @ window
    return 0.5 * (c + c.T)


def _effective_np(window, wchron, gamma, xi):
    c = _cross_product_np(window, wchron)
    n = c.shape[0]
    if gamma != 0.0:
        d = np.diag(c).copy()
        c = (1.0 - gamma) * c
        c[np.diag_indices(n)] = d
    if xi != 0.0:
        m = np.trace(c) / n
        c = (1.0 - xi) * c
        c[np.diag_indices(n)] += xi * m
    return c


def _direction_weights_np(e, kind, k, floor_abs, floor_rel, trace):
    """Per-eigendirection factors of the inverse square root. Returns (d, status, rank)."""
    n = e.shape[0]
    d = np.zeros(n)
    if kind == FULL:
        floor = floor_abs if floor_abs >= 0.0 else floor_rel * trace / n
        if floor <= 0.0:
            bad = np.nonzero(e <= 0.0)[0]
            if bad.size:
                return d, SINGULAR, int(bad[0]) + 1
        d = 1.0 / np.sqrt(np.maximum(e, floor))
    elif kind == PROJECTED:
        if e[k - 1] <= 0.0:
            return d, BAD_RANK, k
        d[:k] = 1.0 / np.sqrt(e[:k])
    else:
        if k < n and e[k] <= 0.0:
            return d, BAD_RANK, k + 1
        d[:k] = 1.0 / np.sqrt(e[:k])
        if k < n:
            d[k:] = 1.0 / np.sqrt(e[k])
    return d, OK, 0


def _residual_loop_np(returns, wchron, gamma, xi, kind, k, floor_abs, floor_rel,
                      rescale, t_start, t_stop):
    n_obs, n = returns.shape
    lag = wchron.shape[0]
    m = t_stop - t_start
    eps = np.zeros((m, n))
    spectra = np.zeros((m, n))
    status = np.zeros(m, dtype=np.int64)
    ranks = np.zeros(m, dtype=np.int64)
    for j in range(m):
        t = t_start + j
        c = _effective_np(returns[t - lag + 1:t + 1], wchron, gamma, xi)
        e, v = np.linalg.eigh(c)
        e = e[::-1]
        v = v[:, ::-1]
        spectra[j] = e
        tr = np.trace(c)
        d, st, rk = _direction_weights_np(e, kind, k, floor_abs, floor_rel, tr)
        if st != OK:
            status[j] = st
            ranks[j] = rk
            continue
        if rescale:
            pos = d > 0.0
            d = d * np.sqrt(np.sum(d[pos] ** -2.0) / tr)
        eps[j] = v @ (d * (v.T @ returns[t + 1]))
    return eps, spectra, status, ranks


def _dynamic_path_np(innov, wchron, gamma, xi, init_sqrt, psd_tol):
    n_obs, n = innov.shape
    lag = wchron.shape[0]
    r = np.zeros((n_obs, n))
    r[:lag] = innov[:lag] @ init_sqrt.T
    for t in range(lag - 1, n_obs - 1):
        c = _effective_np(r[t - lag + 1:t + 1], wchron, gamma, xi)
        e, v = np.linalg.eigh(c)
        if e[0] < -psd_tol * max(np.trace(c) / n, 0.0):
            return r, NOT_PSD, t
        s = np.sqrt(np.maximum(e, 0.0))
        r[t + 1] = v @ (s * (v.T @ innov[t + 1]))
    return r, OK, -1


def _standardize_np(a):
    c = a - a.mean(axis=0)
    return c / np.sqrt((c * c).mean(axis=0))


def _pearson_np(y, z):
    return _standardize_np(y).T @ _standardize_np(z) / y.shape[0]


def _q_off(rho):
    n = rho.shape[0]
    return 100.0 * np.sqrt((np.sum(rho * rho) - np.sum(np.diag(rho) ** 2)) / (n * (n - 1)))


def _q_all(rho):
    return 100.0 * np.sqrt(np.mean(rho * rho))


def _quality_measures_np(x):
    x2 = x * x
    out = np.empty(9)
    out[0] = _q_off(_pearson_np(x, x))
    out[1] = _q_off(_pearson_np(x2, x2))
    out[2] = _q_all(_pearson_np(x, x2))
    out[3] = _q_all(_pearson_np(x[:-1], x[1:]))
    out[4] = _q_all(_pearson_np(x2[:-1], x2[1:]))
    out[5] = _q_all(_pearson_np(x[:-1], x2[1:]))
    out[6] = _q_all(_pearson_np(x2[:-1], x[1:]))
    m2 = x2.mean(axis=0)
    out[7] = np.sqrt(np.mean((m2 - 1.0) ** 2))
    out[8] = m2.mean()
    return out


# ---------------------------------------------------------------------------
# numba path
# ---------------------------------------------------------------------------

if HAS_NUMBA:
    _JIT = dict(nogil=True, cache=True)

    @njit(**_JIT)
    def _cross_product_nb(window, wchron):
        lag, n = window.shape
        a = np.empty((n, lag))
        for i in range(lag):
            wi = wchron[i]
            for p in range(n):
                a[p, i] = window[i, p] * wi
        c = np.dot(a, np.ascontiguousarray(window))
        for p in range(n):
            for q in range(p + 1, n):
                s = 0.5 * (c[p, q] + c[q, p])
                c[p, q] = s
                c[q, p] = s
        return c

    @njit(**_JIT)
    def _effective_nb(window, wchron, gamma, xi):
        c = _cross_product_nb(window, wchron)
        n = c.shape[0]
        if gamma != 0.0:
            for p in range(n):
                for q in range(n):
                    if p != q:
                        c[p, q] *= 1.0 - gamma
        if xi != 0.0:
            m = 0.0
            for p in range(n):
                m += c[p, p]
            m /= n
            for p in range(n):
                for q in range(n):
                    c[p, q] *= 1.0 - xi
                c[p, p] += xi * m
        return c

    @njit(**_JIT)
    def _eigh_desc_nb(c):
        e, v = np.linalg.eigh(c)
        n = e.shape[0]
        ed = np.empty(n)
        vd = np.empty((n, n))
        for a in range(n):
            ed[a] = e[n - 1 - a]
            for p in range(n):
                vd[p, a] = v[p, n - 1 - a]
        return ed, vd

    @njit(**_JIT)
    def _direction_weights_nb(e, kind, k, floor_abs, floor_rel, trace):
        n = e.shape[0]
        d = np.zeros(n)
        if kind == 0:
            floor = floor_abs if floor_abs >= 0.0 else floor_rel * trace / n
            if floor <= 0.0:
                for a in range(n):
                    if e[a] <= 0.0:
                        return d, 1, a + 1
            for a in range(n):
                d[a] = 1.0 / np.sqrt(max(e[a], floor))
        elif kind == 1:
            if e[k - 1] <= 0.0:
                return d, 2, k
            for a in range(k):
                d[a] = 1.0 / np.sqrt(e[a])
        else:
            if k < n and e[k] <= 0.0:
                return d, 2, k + 1
            for a in range(k):
                d[a] = 1.0 / np.sqrt(e[a])
            if k < n:
                tail = 1.0 / np.sqrt(e[k])
                for a in range(k, n):
                    d[a] = tail
        return d, 0, 0

    @njit(**_JIT)
    def _apply_nb(v, d, x):
        n = d.shape[0]
        proj = np.zeros(n)
        for a in range(n):
            s = 0.0
            for p in range(n):
                s += v[p, a] * x[p]
            proj[a] = s * d[a]
        out = np.zeros(n)
        for p in range(n):
            s = 0.0
            for a in range(n):
                s += v[p, a] * proj[a]
            out[p] = s
        return out

    @njit(**_JIT)
    def _residual_loop_nb(returns, wchron, gamma, xi, kind, k, floor_abs, floor_rel,
                          rescale, t_start, t_stop):
        n = returns.shape[1]
        lag = wchron.shape[0]
        m = t_stop - t_start
        eps = np.zeros((m, n))
        spectra = np.zeros((m, n))
        status = np.zeros(m, dtype=np.int64)
        ranks = np.zeros(m, dtype=np.int64)
        for j in range(m):
            t = t_start + j
            c = _effective_nb(returns[t - lag + 1:t + 1], wchron, gamma, xi)
            tr = 0.0
            for p in range(n):
                tr += c[p, p]
            e, v = _eigh_desc_nb(c)
            spectra[j] = e
            d, st, rk = _direction_weights_nb(e, kind, k, floor_abs, floor_rel, tr)
            if st != 0:
                status[j] = st
                ranks[j] = rk
                continue
            if rescale:
                s = 0.0
                for a in range(n):
                    if d[a] > 0.0:
                        s += 1.0 / (d[a] * d[a])
                d *= np.sqrt(s / tr)
            eps[j] = _apply_nb(v, d, returns[t + 1])
        return eps, spectra, status, ranks

    @njit(**_JIT)
    def _dynamic_path_nb(innov, wchron, gamma, xi, init_sqrt, psd_tol):
        n_obs, n = innov.shape
        lag = wchron.shape[0]
        r = np.zeros((n_obs, n))
        for t in range(lag):
            for p in range(n):
                s = 0.0
                for q in range(n):
                    s += init_sqrt[p, q] * innov[t, q]
                r[t, p] = s
        for t in range(lag - 1, n_obs - 1):
            c = _effective_nb(r[t - lag + 1:t + 1], wchron, gamma, xi)
            tr = 0.0
            for p in range(n):
                tr += c[p, p]
            e, v = _eigh_desc_nb(c)
            if e[n - 1] < -psd_tol * max(tr / n, 0.0):
                return r, 3, t
            s = np.empty(n)
            for a in range(n):
                s[a] = np.sqrt(max(e[a], 0.0))
            r[t + 1] = _apply_nb(v, s, innov[t + 1])
        return r, 0, -1

    @njit(**_JIT)
    def _standardize_nb(a):
        t, n = a.shape
        out = np.empty((t, n))
        for p in range(n):
            mean = 0.0
            for i in range(t):
                mean += a[i, p]
            mean /= t
            ss = 0.0
            for i in range(t):
                dv = a[i, p] - mean
                out[i, p] = dv
                ss += dv * dv
            sd = np.sqrt(ss / t)
            for i in range(t):
                out[i, p] /= sd
        return out

    @njit(**_JIT)
    def _pearson_nb(y, z):
        ys = _standardize_nb(y)
        zs = _standardize_nb(z)
        return np.dot(ys.T.copy(), zs) / y.shape[0]

    @njit(**_JIT)
    def _q_off_nb(rho):
        n = rho.shape[0]
        s = 0.0
        for p in range(n):
            for q in range(n):
                if p != q:
                    s += rho[p, q] * rho[p, q]
        return 100.0 * np.sqrt(s / (n * (n - 1)))

    @njit(**_JIT)
    def _q_all_nb(rho):
        n = rho.shape[0]
        s = 0.0
        for p in range(n):
            for q in range(n):
                s += rho[p, q] * rho[p, q]
        return 100.0 * np.sqrt(s / (n * n))

    @njit(**_JIT)
    def _quality_measures_nb(x):
        t, n = x.shape
        x2 = x * x
        out = np.empty(9)
        out[0] = _q_off_nb(_pearson_nb(x, x))
        out[1] = _q_off_nb(_pearson_nb(x2, x2))
        out[2] = _q_all_nb(_pearson_nb(x, x2))
        out[3] = _q_all_nb(_pearson_nb(x[:-1], x[1:]))
        out[4] = _q_all_nb(_pearson_nb(x2[:-1], x2[1:]))
        out[5] = _q_all_nb(_pearson_nb(x[:-1], x2[1:]))
        out[6] = _q_all_nb(_pearson_nb(x2[:-1], x[1:]))
        uv = 0.0
        mv = 0.0
        for p in range(n):
            m2 = 0.0
            for i in range(t):
                m2 += x2[i, p]
            m2 /= t
            uv += (m2 - 1.0) ** 2
            mv += m2
        out[7] = np.sqrt(uv / n)
        out[8] = mv / n
        return out


# ---------------------------------------------------------------------------
# dispatch
# ---------------------------------------------------------------------------

def _f64(a):
    return np.ascontiguousarray(a, dtype=np.float64)


def cross_product(window, wchron, backend=None):
    """Symmetrized sum_j wchron[j] * window[j] window[j]^T."""
    window, wchron = _f64(window), _f64(wchron)
    if _resolve(backend) == "numba":
        return _cross_product_nb(window, wchron)
    return _cross_product_np(window, wchron)


def effective_covariance(window, wchron, gamma, xi, backend=None):
    window, wchron = _f64(window), _f64(wchron)
    if _resolve(backend) == "numba":
        return _effective_nb(window, wchron, float(gamma), float(xi))
    return _effective_np(window, wchron, float(gamma), float(xi))


def residual_loop(returns, wchron, gamma, xi, kind, k, floor_abs, floor_rel, rescale,
                  t_start, t_stop, backend=None):
    """Residuals eps(t+1) for t in [t_start, t_stop); also returns spectra and status."""
    args = (_f64(returns), _f64(wchron), float(gamma), float(xi), int(kind), int(k),
            float(floor_abs), float(floor_rel), bool(rescale), int(t_start), int(t_stop))
    if _resolve(backend) == "numba":
        return _residual_loop_nb(*args)
    return _residual_loop_np(*args)


def dynamic_path(innov, wchron, gamma, xi, init_sqrt, psd_tol=1e-10, backend=None):
    args = (_f64(innov), _f64(wchron), float(gamma), float(xi), _f64(init_sqrt),
            float(psd_tol))
    if _resolve(backend) == "numba":
        return _dynamic_path_nb(*args)
    return _dynamic_path_np(*args)


def pearson(y, z, backend=None):
    """Pearson correlation between every column of y and every column of z."""
    y, z = _f64(y), _f64(z)
    if _resolve(backend) == "numba":
        return _pearson_nb(y, z)
    return _pearson_np(y, z)


def quality_measures(x, backend=None):
    """The seven q values, q(eps^2) and the mean residual variance of one panel."""
    x = _f64(x)
    if _resolve(backend) == "numba":
        return _quality_measures_nb(x)
    return _quality_measures_np(x)
