import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from conftest import random_psd
from lmarch.errors import (InvalidArgumentError, InvalidRankError, NotPSDError,
                           SingularMatrixError)
from lmarch.spectral import (default_floor, eig_sym, inverse_sqrt_full, inverse_sqrt_fullrank,
                             inverse_sqrt_projected, sqrt_psd, trace_preserving_rescale)


def jacobi_eigenvalues(a, sweeps=100):
    """Cyclic Jacobi rotations; an independent oracle for small symmetric matrices."""
    a = np.array(a, dtype=float)
    n = len(a)
    for _ in range(sweeps):
        off = np.sqrt(np.sum(np.tril(a, -1) ** 2))
        if off < 1e-15 * np.abs(a).max():
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                if a[p, q] == 0.0:
                    continue
                theta = (a[q, q] - a[p, p]) / (2 * a[p, q])
                t = np.sign(theta) / (abs(theta) + np.sqrt(theta ** 2 + 1)) if theta else 1.0
                c = 1 / np.sqrt(t * t + 1)
                s = t * c
                rot = np.eye(n)
                rot[p, p] = rot[q, q] = c
                rot[p, q], rot[q, p] = s, -s
                a = rot.T @ a @ rot
    return np.sort(np.diag(a))[::-1]


def check_invariants(dec, matrix):
    v, e = dec.eigenvectors, dec.eigenvalues
    n = len(e)
    assert np.max(np.abs(v.T @ v - np.eye(n))) < 1e-9
    scale = max(np.trace(matrix) / n, np.abs(matrix).max())
    assert np.max(np.abs(v @ np.diag(e) @ v.T - matrix)) < 1e-9 * scale
    assert np.all(np.diff(e) <= 0)


def test_eig_diagonal():
    dec = eig_sym(np.diag([3.0, 1.0]))
    np.testing.assert_array_equal(dec.eigenvalues, [3.0, 1.0])
    np.testing.assert_array_equal(np.abs(dec.eigenvectors), np.eye(2))


def test_eig_two_by_two():
    dec = eig_sym([[2.0, 1.0], [1.0, 2.0]])
    np.testing.assert_allclose(dec.eigenvalues, [3.0, 1.0], rtol=1e-15)
    h = 1 / np.sqrt(2)
    np.testing.assert_allclose(np.abs(dec.eigenvectors), np.full((2, 2), h), rtol=1e-14)
    np.testing.assert_allclose(dec.eigenvectors[:, 0], [h, h], rtol=1e-14)


def test_eig_sign_convention(rng):
    dec = eig_sym(random_psd(rng, 8))
    v = dec.eigenvectors
    lead = v[np.argmax(np.abs(v), axis=0), np.arange(8)]
    assert np.all(lead > 0)


def test_eig_random_symmetric(rng):
    a = rng.standard_normal((20, 20))
    a = a + a.T
    dec = eig_sym(a)
    check_invariants(dec, a)
    np.testing.assert_allclose(dec.eigenvalues, jacobi_eigenvalues(a), rtol=1e-10, atol=1e-11)


def test_eig_rejects_asymmetric():
    with pytest.raises(InvalidArgumentError):
        eig_sym([[1.0, 0.5], [0.0, 1.0]])
    with pytest.raises(InvalidArgumentError):
        eig_sym(np.ones((2, 3)))


def test_eig_deterministic(rng):
    a = random_psd(rng, 15)
    d1, d2 = eig_sym(a), eig_sym(a.copy())
    np.testing.assert_array_equal(d1.eigenvalues, d2.eigenvalues)
    np.testing.assert_array_equal(d1.eigenvectors, d2.eigenvectors)


@settings(max_examples=60, deadline=None)
@given(st.integers(1, 25), st.integers(0, 2**31), st.floats(1e-8, 1e8))
def test_eig_invariants_property(n, seed, scale):
    a = random_psd(np.random.default_rng(seed), n, scale=scale)
    check_invariants(eig_sym(a), a)


def test_full_examples():
    np.testing.assert_allclose(inverse_sqrt_full(eig_sym(np.diag([4.0, 1.0]))), np.diag([0.5, 1.0]))
    np.testing.assert_allclose(inverse_sqrt_full(eig_sym(np.eye(6))), np.eye(6), atol=1e-15)
    out = inverse_sqrt_full(eig_sym(np.diag([4.0, 1e-18])), floor=1e-12)
    np.testing.assert_allclose(out, np.diag([0.5, 1e6]), rtol=1e-12)


def test_full_singular_lists_ranks():
    with pytest.raises(SingularMatrixError) as info:
        inverse_sqrt_full(eig_sym(np.diag([1.0, 0.0, 0.0])))
    assert list(info.value.ranks) == [2, 3]
    with pytest.raises(InvalidArgumentError):
        inverse_sqrt_full(eig_sym(np.eye(2)), floor=-1.0)


def test_default_floor_is_relative():
    dec = eig_sym(np.diag([4.0, 2.0]))
    assert default_floor(dec) == pytest.approx(3e-12)


def test_full_whitens(rng):
    s = random_psd(rng, 12)
    m = inverse_sqrt_full(eig_sym(s))
    np.testing.assert_allclose(m @ s @ m, np.eye(12), atol=1e-8)


def test_projected_examples():
    np.testing.assert_allclose(inverse_sqrt_projected(eig_sym(np.diag([4.0, 1.0])), 1),
                               [[0.5, 0.0], [0.0, 0.0]])
    np.testing.assert_allclose(inverse_sqrt_projected(eig_sym(np.diag([9.0, 4.0, 1.0])), 2),
                               np.diag([1 / 3, 0.5, 0.0]), rtol=1e-15)


def test_projected_rank(rng):
    dec = eig_sym(random_psd(rng, 10))
    m = inverse_sqrt_projected(dec, 4)
    assert np.linalg.matrix_rank(m) == 4


def test_projected_errors():
    dec = eig_sym(np.diag([1.0, 0.0]))
    with pytest.raises(InvalidRankError):
        inverse_sqrt_projected(dec, 2)
    for k in (0, 3, 1.5):
        with pytest.raises(InvalidRankError):
            inverse_sqrt_projected(dec, k)


def test_fullrank_examples():
    np.testing.assert_allclose(inverse_sqrt_fullrank(eig_sym(np.diag([4.0, 1.0])), 1),
                               [[0.5, 0.0], [0.0, 1.0]])
    np.testing.assert_allclose(inverse_sqrt_fullrank(eig_sym(np.diag([9.0, 4.0, 1.0])), 1),
                               np.diag([1 / 3, 0.5, 0.5]), rtol=1e-15)


def test_fullrank_has_full_rank(rng):
    dec = eig_sym(random_psd(rng, 10))
    assert np.linalg.matrix_rank(inverse_sqrt_fullrank(dec, 3)) == 10


def test_fullrank_errors():
    dec = eig_sym(np.diag([1.0, 0.0]))
    with pytest.raises(InvalidRankError):
        inverse_sqrt_fullrank(dec, 1)


def test_scheme_coincidence(rng):
    dec = eig_sym(random_psd(rng, 7))
    full = inverse_sqrt_full(dec)
    np.testing.assert_array_equal(inverse_sqrt_projected(dec, 7), full)
    np.testing.assert_array_equal(inverse_sqrt_fullrank(dec, 7), full)
    np.testing.assert_allclose(inverse_sqrt_fullrank(dec, 6), full, rtol=1e-13, atol=1e-14)


@settings(max_examples=60, deadline=None)
@given(st.integers(2, 15), st.data())
def test_projected_and_fullrank_agree_on_leading_subspace(n, data):
    seed = data.draw(st.integers(0, 2**31))
    k = data.draw(st.integers(1, n - 1))
    dec = eig_sym(random_psd(np.random.default_rng(seed), n))
    diff = inverse_sqrt_fullrank(dec, k) - inverse_sqrt_projected(dec, k)
    lead = dec.eigenvectors[:, :k]
    scale = 1 / np.sqrt(dec.eigenvalues[-1])
    assert np.max(np.abs(diff @ lead)) < 1e-10 * scale


def test_sqrt_examples(rng):
    np.testing.assert_allclose(sqrt_psd(eig_sym(np.diag([4.0, 9.0]))), np.diag([2.0, 3.0]))
    np.testing.assert_allclose(sqrt_psd(eig_sym(np.eye(5))), np.eye(5), atol=1e-15)
    s = random_psd(rng, 10)
    r = sqrt_psd(eig_sym(s))
    np.testing.assert_allclose(r @ r, s, rtol=1e-9, atol=1e-12)
    np.testing.assert_array_equal(r, r.T)


def test_sqrt_clamps_and_rejects():
    out = sqrt_psd(eig_sym(np.diag([1.0, -1e-14])))
    np.testing.assert_array_equal(out, np.diag([1.0, 0.0]))
    with pytest.raises(NotPSDError):
        sqrt_psd(eig_sym(np.diag([1.0, -1e-3])))


def test_rescale_identity_unchanged():
    np.testing.assert_array_equal(trace_preserving_rescale(np.eye(3), np.eye(3)), np.eye(3))


def test_rescale_projected_example():
    s = np.diag([4.0, 1.0])
    m = inverse_sqrt_projected(eig_sym(s), 1)
    out = trace_preserving_rescale(m, s)
    np.testing.assert_allclose(out, np.sqrt(4 / 5) * m, rtol=1e-15)


def test_rescale_disabled_and_zero():
    m = np.diag([0.5, 0.0])
    assert trace_preserving_rescale(m, np.eye(2), enabled=False) is not None
    np.testing.assert_array_equal(trace_preserving_rescale(m, np.eye(2), enabled=False), m)
    with pytest.raises(InvalidArgumentError):
        trace_preserving_rescale(np.zeros((2, 2)), np.eye(2))


def test_full_inverse_is_exact_for_known_eigensystem():
    # rotation of diag(16, 4, 1)
    c, s = np.cos(0.3), np.sin(0.3)
    q = np.array([[c, -s, 0], [s, c, 0], [0, 0, 1.0]])
    a = q @ np.diag([16.0, 4.0, 1.0]) @ q.T
    np.testing.assert_allclose(inverse_sqrt_full(eig_sym(a)), q @ np.diag([0.25, 0.5, 1.0]) @ q.T,
                               atol=1e-14)
