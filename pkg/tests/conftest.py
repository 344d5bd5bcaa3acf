import math

import numpy as np
import pytest

from sshtransfer import _kernels_py, kernels

try:
    from sshtransfer import _kernels as _kernels_c
except ImportError:  # extension not built
    _kernels_c = None

BACKENDS = ["python"] + (["cython"] if _kernels_c is not None else [])


@pytest.fixture(params=BACKENDS)
def backend(request, monkeypatch):
    """Run the test once per available kernel backend."""
    impl = _kernels_py if request.param == "python" else _kernels_c
    monkeypatch.setattr(kernels, "rk4_advance", impl.rk4_advance)
    monkeypatch.setattr(kernels, "tridiag_eigh", impl.tridiag_eigh)
    monkeypatch.setattr(kernels, "BACKEND", request.param)
    return request.param


def uniform_chain_eigs(m, j=1.0):
    """Open uniform chain: 2 J cos(k pi / (M+1)), k = 1..M."""
    k = np.arange(1, m + 1)
    return np.sort(2 * j * np.cos(k * math.pi / (m + 1)))


def sturm_eigenvalues(offdiag, tol=1e-14):
    """Eigenvalues of a zero-diagonal symmetric tridiagonal matrix by bisection.

    Uses the three-term characteristic-polynomial recurrence in ratio form:
    the number of negative q_k equals the number of eigenvalues below x.
    """
    e = np.asarray(offdiag, dtype=float)
    m = e.size + 1
    bound = 2 * np.max(np.abs(e), initial=0.0) + 1.0

    def count_below(x):
        cnt = 0
        q = -x
        for k in range(m):
            if k > 0:
                q = -x - e[k - 1] ** 2 / q
            if q == 0:
                q = -1e-300
            if q < 0:
                cnt += 1
        return cnt

    out = []
    for idx in range(m):
        lo, hi = -bound, bound
        while hi - lo > tol:
            mid = 0.5 * (lo + hi)
            if count_below(mid) > idx:
                hi = mid
            else:
                lo = mid
        out.append(0.5 * (lo + hi))
    return np.array(out)
