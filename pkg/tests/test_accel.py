"""numba and numpy kernels must agree to rounding."""

import os
import subprocess
import sys

import numpy as np
import pytest

from lmarch import _accel
from lmarch.diagnostics import MEASURES, lagged_correlation_matrices, quality_values
from lmarch.kernels import long_memory_weights

needs_numba = pytest.mark.skipif(not _accel.HAS_NUMBA, reason="numba not installed")


def both(fn, *args, **kw):
    return fn(*args, backend="numpy", **kw), fn(*args, backend="numba", **kw)


@needs_numba
def test_cross_product_parity(rng):
    w = long_memory_weights(50).weights[::-1]
    a, b = both(_accel.cross_product, rng.standard_normal((51, 7)), w)
    np.testing.assert_allclose(a, b, rtol=1e-12, atol=1e-15)


@needs_numba
def test_effective_parity(rng):
    w = long_memory_weights(30).weights[::-1]
    a, b = both(_accel.effective_covariance, rng.standard_normal((31, 5)), w, 0.3, 0.1)
    np.testing.assert_allclose(a, b, rtol=1e-12, atol=1e-15)


@needs_numba
@pytest.mark.parametrize("kind,k", [(_accel.FULL, 0), (_accel.PROJECTED, 3), (_accel.FULLRANK, 2)])
@pytest.mark.parametrize("rescale", [False, True])
def test_residual_loop_parity(rng, kind, k, rescale):
    r = 0.01 * rng.standard_t(5, (200, 6))
    w = long_memory_weights(60).weights[::-1]
    a, b = both(_accel.residual_loop, r, w, 0.1, 0.0, kind, k, -1.0, 1e-12, rescale, 60, 199)
    np.testing.assert_allclose(a[0], b[0], rtol=1e-9, atol=1e-12)
    np.testing.assert_allclose(a[1], b[1], rtol=1e-10, atol=1e-20)
    np.testing.assert_array_equal(a[2], b[2])


@needs_numba
def test_dynamic_path_parity(rng):
    innov = rng.standard_normal((150, 4))
    w = long_memory_weights(40).weights[::-1]
    a, b = both(_accel.dynamic_path, innov, w, 0.2, 0.05, 0.01 * np.eye(4))
    np.testing.assert_allclose(a[0], b[0], rtol=1e-9, atol=1e-15)
    assert a[1] == b[1] == _accel.OK


@needs_numba
def test_pearson_and_quality_parity(rng):
    x = rng.standard_t(5, (300, 8))
    a, b = both(_accel.pearson, x[:-1], x[1:] ** 2)
    np.testing.assert_allclose(a, b, rtol=1e-12, atol=1e-14)
    a, b = both(_accel.quality_measures, x)
    np.testing.assert_allclose(a, b, rtol=1e-10)


def test_quality_kernel_matches_diagnostics(rng, backend):
    x = rng.standard_t(5, (300, 6))
    fast = _accel.quality_measures(x, backend=backend)
    q = quality_values(lagged_correlation_matrices(x))
    from lmarch.diagnostics import unit_variance_quality, mean_residual_variance
    ref = [q[m] for m in MEASURES[:-1]] + [unit_variance_quality(x), mean_residual_variance(x)]
    np.testing.assert_allclose(fast, ref, rtol=1e-10)


def test_resolve_rejects_unknown():
    with pytest.raises(ValueError):
        _accel._resolve("fortran")


def test_env_flag_forces_numpy():
    code = "from lmarch import _accel; print(_accel.BACKEND, _accel.HAS_NUMBA)"
    env = dict(os.environ, LMARCH_BACKEND="numpy")
    out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True,
                         check=True).stdout.split()
    assert out == ["numpy", "False"]


def test_env_flag_rejects_garbage():
    env = dict(os.environ, LMARCH_BACKEND="gpu")
    proc = subprocess.run([sys.executable, "-c", "import lmarch"], env=env, capture_output=True)
    assert proc.returncode != 0
