import numpy as np
import pytest
import scipy.linalg
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays
from scipy.optimize import brentq

from brcaustics.errors import ValidationError
from brcaustics.linalg import cholesky, det, generalized_eigh, jacobi_eigh, laplace_det, lower_solve, solve_generic

entries = st.floats(-5, 5, allow_nan=False)


def spd(m, k):
    return m @ m.T + k * np.eye(k)


@given(st.integers(1, 5).flatmap(lambda k: arrays(float, (k, k), elements=entries)))
def test_det_matches_numpy_and_laplace(a):
    ref = np.linalg.det(a)
    scale = max(1.0, float(np.prod(np.max(np.abs(a), axis=1))))
    assert abs(det(a) - ref) <= 1e-10 * scale * a.shape[0] ** 2
    assert abs(laplace_det(a.tolist()) - ref) <= 1e-10 * scale * a.shape[0] ** 2


def test_det_rejects_non_square():
    with pytest.raises(ValidationError):
        det(np.ones((2, 3)))


@given(st.integers(1, 4).flatmap(lambda k: arrays(float, (k, k), elements=entries)))
def test_cholesky_and_solves(m):
    k = m.shape[0]
    a = spd(m, k)
    L, ok = cholesky(a)
    assert ok
    assert np.allclose(L @ L.T, a, atol=1e-9 * np.max(np.abs(a)))
    b = np.arange(1.0, k + 1)[:, None]
    x = lower_solve(L, b)
    assert np.allclose(L @ x, b, atol=1e-9)
    y = solve_generic(a.tolist(), list(b[:, 0]))
    assert np.allclose(a @ np.array(y), b[:, 0], atol=1e-8 * np.max(np.abs(a)))


def test_cholesky_flags_indefinite():
    _, ok = cholesky(np.array([[[1.0, 0.0], [0.0, -1.0]], [[2.0, 0.0], [0.0, 3.0]]]))
    assert ok.tolist() == [False, True]


@settings(max_examples=100)
@given(st.integers(1, 5).flatmap(lambda k: arrays(float, (k, k), elements=entries)))
def test_jacobi_matches_lapack(m):
    a = m + m.T
    w, v = jacobi_eigh(a)
    assert np.allclose(w, np.linalg.eigvalsh(a), atol=1e-10 * max(1.0, np.max(np.abs(a))))
    assert np.allclose(a @ v, v * w, atol=1e-9 * max(1.0, np.max(np.abs(a))))
    assert np.all(np.diff(w) >= 0)


@settings(max_examples=100)
@given(st.integers(1, 4).flatmap(lambda k: st.tuples(arrays(float, (k, k), elements=entries),
                                                     arrays(float, (k, k), elements=entries))))
def test_generalized_eigh_matches_scipy(pair):
    m, n = pair
    k = m.shape[0]
    g = spd(m, k)
    h = n + n.T
    w, v, ok = generalized_eigh(h, g)
    assert ok
    ref = scipy.linalg.eigh(h, g, eigvals_only=True)
    assert np.allclose(w, ref, atol=1e-8 * max(1.0, np.max(np.abs(ref))))
    assert np.allclose(v.T @ g @ v, np.eye(k), atol=1e-8)


def test_generalized_eigh_against_characteristic_polynomial():
    """Roots of det(h - kappa g) found by bracketing, independent of any eigensolver."""
    rng = np.random.default_rng(3)
    for _ in range(20):
        m = rng.normal(size=(3, 3))
        g = spd(m, 3)
        n = rng.normal(size=(3, 3))
        h = n + n.T
        w, _, _ = generalized_eigh(h, g)
        f = lambda x: det(h - x * g)
        grid = np.linspace(-50, 50, 20001)
        vals = det(h[None] - grid[:, None, None] * g[None])
        roots = [brentq(f, grid[i], grid[i + 1], xtol=1e-14) for i in range(grid.size - 1)
                 if vals[i] * vals[i + 1] < 0]
        assert len(roots) == 3
        assert np.allclose(np.sort(roots), w, atol=1e-8)


def test_batched_shapes():
    rng = np.random.default_rng(0)
    m = rng.normal(size=(7, 5, 2, 2))
    g = m @ np.swapaxes(m, -1, -2) + 2 * np.eye(2)
    h = m + np.swapaxes(m, -1, -2)
    w, v, ok = generalized_eigh(h, g)
    assert w.shape == (7, 5, 2) and v.shape == (7, 5, 2, 2) and ok.all()
    assert np.allclose(h @ v, g @ v * w[..., None, :], atol=1e-10)
