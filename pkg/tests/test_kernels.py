import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from lmarch.errors import InvalidArgumentError
from lmarch.kernels import (KernelShape, LongMemoryConfig, effective_sample_size, equal_weights,
                            exponential_weights, long_memory_weights, make_kernel)

# direct scalar evaluation of the sum-of-exponentials construction at i_max=4, tau0=10
LM_4_10 = [0.28961633371715034, 0.23518618312326, 0.19140971300885026,
           0.15613443619918232, 0.12765333395155706]


@pytest.mark.parametrize("i_max,expected", [(3, [0.25] * 4), (1, [0.5, 0.5])])
def test_equal_weights_values(i_max, expected):
    np.testing.assert_array_equal(equal_weights(i_max).weights, expected)


def test_equal_weights_260():
    k = equal_weights(260)
    assert np.all(k.weights == 1 / 261)
    assert abs(k.weights.sum() - 1) < 1e-12
    assert k.weights.max() - k.weights.min() < 1e-15
    assert k.shape is KernelShape.EQUAL and k.i_max == 260


@pytest.mark.parametrize("bad", [0, -3, 2.5])
def test_equal_weights_rejects(bad):
    with pytest.raises(InvalidArgumentError):
        equal_weights(bad)


def test_exponential_two_terms():
    np.testing.assert_allclose(exponential_weights(1, 0.94).weights, [1 / 1.94, 0.94 / 1.94],
                               rtol=1e-15)
    np.testing.assert_allclose(exponential_weights(1, 0.94).weights, [0.51546, 0.48454], atol=1e-5)


def test_exponential_three_terms():
    np.testing.assert_allclose(exponential_weights(2, 0.5).weights, [4 / 7, 2 / 7, 1 / 7],
                               rtol=1e-15)


@pytest.mark.parametrize("mu", [0.0, 1.0, -0.2, 1.5])
def test_exponential_rejects_mu(mu):
    with pytest.raises(InvalidArgumentError):
        exponential_weights(10, mu)


@settings(max_examples=60, deadline=None)
@given(i_max=st.integers(1, 600), mu=st.floats(0.01, 0.999))
def test_exponential_properties(i_max, mu):
    w = exponential_weights(i_max, mu).weights
    assert abs(w.sum() - 1) < 1e-12
    assert np.all(w >= 0)
    # ratio only meaningful while both weights are normal floats
    ok = w[1:] > 1e-290
    np.testing.assert_allclose(w[1:][ok] / w[:-1][ok], mu, rtol=1e-12)


def test_long_memory_small_explicit():
    np.testing.assert_allclose(long_memory_weights(4, 10).weights, LM_4_10, rtol=1e-13)


def test_long_memory_default_shape():
    w = long_memory_weights(260, 1560).weights
    assert np.all(np.diff(w) < 0)
    assert w[-1] >= 0
    assert abs(w.sum() - 1) < 1e-12


def test_long_memory_decays_slower_than_exponential():
    lm = long_memory_weights(260, 1560).weights
    ex = exponential_weights(260, 0.94).weights
    # computed values: about 8.4 versus about 3100
    assert lm[0] / lm[130] < 10
    assert ex[0] / ex[130] > 3000


def test_long_memory_logarithmic_envelope():
    # the mixture tracks 1 - ln(i)/ln(tau0) up to normalization over the middle lags
    w = long_memory_weights(260, 1560).weights
    lags = np.arange(10, 200)
    target = 1 - np.log(lags) / np.log(1560)
    ratio = w[lags] / target
    assert ratio.max() / ratio.min() < 8


@pytest.mark.parametrize("tau0", [1.0, 0.5, -2])
def test_long_memory_rejects_tau0(tau0):
    with pytest.raises(InvalidArgumentError):
        long_memory_weights(10, tau0)


def test_long_memory_config_override():
    cfg = LongMemoryConfig(tau0=1000.0, tau1=2.0, rho=2.0, n_components=6)
    k = long_memory_weights(50, config=cfg)
    assert k.params["tau0"] == 1000.0 and k.params["n_components"] == 6
    assert abs(k.weights.sum() - 1) < 1e-12


@settings(max_examples=40, deadline=None)
@given(i_max=st.integers(1, 520), tau0=st.floats(5.0, 1e4))
def test_long_memory_properties(i_max, tau0):
    w = long_memory_weights(i_max, tau0).weights
    assert abs(w.sum() - 1) < 1e-12
    assert np.all(w >= 0)
    assert np.all(np.diff(w) <= 0)


def test_weights_immutable():
    k = equal_weights(5)
    with pytest.raises(ValueError):
        k.weights[0] = 1.0


def test_make_kernel_and_ids():
    assert make_kernel("equal", 10).shape is KernelShape.EQUAL
    assert make_kernel("exp", 10, mu=0.9).params == {"mu": 0.9}
    assert make_kernel("lm", 10).kernel_id.startswith("lm(i_max=10")
    with pytest.raises(ValueError):
        make_kernel("gauss", 10)


def test_effective_sample_size():
    assert effective_sample_size(equal_weights(260)) == pytest.approx(261)
