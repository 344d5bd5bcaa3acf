import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from conftest import BACKENDS, _kernels_c
from sshtransfer import _kernels_py, kernels
from sshtransfer.errors import ConvergenceError

offdiags = arrays(float, st.integers(1, 24), elements=st.floats(-3, 3, allow_nan=False))


def test_backend_name_matches_selection():
    assert kernels.BACKEND in ("cython", "python")


@settings(max_examples=60, deadline=None)
@given(e=offdiags, diag_scale=st.floats(0, 2))
def test_ql_matches_dense_solver(e, diag_scale):
    m = e.size + 1
    d = diag_scale * np.cos(np.arange(m))
    dense = np.diag(d) + np.diag(e, 1) + np.diag(e, -1)
    ref = np.linalg.eigvalsh(dense)
    scale = max(1.0, np.max(np.abs(dense)))
    for impl in [_kernels_py] + ([_kernels_c] if _kernels_c else []):
        w, z = impl.tridiag_eigh(d, e, True)
        np.testing.assert_allclose(w, ref, atol=1e-12 * scale * m)
        np.testing.assert_allclose(z.T @ z, np.eye(m), atol=1e-12 * m)
        np.testing.assert_allclose(dense @ z, z * w, atol=1e-11 * scale * m)


def test_ql_without_vectors_returns_none(backend):
    w, z = kernels.tridiag_eigh(np.zeros(3), np.array([1.0, 1.0]), False)
    assert z is None
    np.testing.assert_allclose(w, [-math.sqrt(2), 0, math.sqrt(2)], atol=1e-14)


def test_ql_single_site(backend):
    w, z = kernels.tridiag_eigh(np.array([0.5]), np.zeros(0), True)
    assert w.tolist() == [0.5]
    assert z.tolist() == [[1.0]]


def test_ql_iteration_cap_raises(monkeypatch):
    monkeypatch.setattr(_kernels_py, "MAX_QL_ITER", 0)
    with pytest.raises(ConvergenceError):
        _kernels_py.tridiag_eigh(np.zeros(6), np.ones(5), False)


@pytest.mark.skipif(_kernels_c is None, reason="extension not built")
def test_backends_agree_on_rk4():
    rng = np.random.default_rng(3)
    m, s = 11, 3
    base = 1 + 0.05 * rng.standard_normal(m - 1)
    base = np.tile(base, (s, 1))
    a = (-1.0) ** np.arange(1, m)
    b = np.zeros(m - 1)
    psi = rng.standard_normal((s, m)) + 1j * rng.standard_normal((s, m))
    psi /= np.linalg.norm(psi, axis=1, keepdims=True)
    p1, p2 = psi.copy(), psi.copy()
    d1 = _kernels_py.rk4_advance(p1, base, a, b, 0.1, 0.03, 0.0, 0.01, 500)
    d2 = _kernels_c.rk4_advance(p2, base, a, b, 0.1, 0.03, 0.0, 0.01, 500)
    np.testing.assert_allclose(p1, p2, atol=1e-13)
    np.testing.assert_allclose(d1, d2, atol=1e-13)


def test_rk4_zero_steps_is_noop(backend):
    psi = np.array([[1, 0, 0]], dtype=complex)
    drift = kernels.rk4_advance(psi, np.ones((1, 2)), np.zeros(2), np.zeros(2), 0.0, 1.0, 0.0, 0.01, 0)
    assert psi.tolist() == [[1, 0, 0]]
    assert drift.tolist() == [0.0]


@pytest.mark.parametrize("t", [1e-30, 1e-100, 2.2250738585072014e-308])
def test_ql_negligible_offdiagonals_deflate(backend, t):
    w, _ = kernels.tridiag_eigh(np.zeros(4), np.array([1.0, t, t]), False)
    np.testing.assert_allclose(w, [-1, 0, 0, 1], atol=1e-15)


def test_ql_preserves_absolute_scale(backend):
    e = np.array([3e150, 3e150])
    w, _ = kernels.tridiag_eigh(np.zeros(3), e, False)
    np.testing.assert_allclose(w, [-3e150 * math.sqrt(2), 0, 3e150 * math.sqrt(2)], rtol=1e-14, atol=1e-14 * 3e150)


def test_env_var_forces_python_backend():
    import os
    import subprocess
    import sys

    env = dict(os.environ, SSHTRANSFER_PURE_PYTHON="1")
    out = subprocess.run([sys.executable, "-c", "import sshtransfer; print(sshtransfer.BACKEND)"],
                         capture_output=True, text=True, env=env, check=True)
    assert out.stdout.strip() == "python"
