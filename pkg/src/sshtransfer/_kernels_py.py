"""Pure-Python/NumPy reference kernels.

Same signatures and semantics as the compiled ``_kernels`` extension.  Used
when the extension is not built, or when ``SSHTRANSFER_PURE_PYTHON=1``.
"""
import math

import numpy as np

from .errors import ConvergenceError

MAX_QL_ITER = 60
_EPS = np.finfo(float).eps
_TINY = np.finfo(float).eps ** 2


def _hopping(psi, j):
    out = np.zeros_like(psi)
    out[:, :-1] += j * psi[:, 1:]
    out[:, 1:] += j * psi[:, :-1]
    return out


def rk4_advance(psi, base, amp_cos, amp_sin, theta0, omega, t0, dt, nsteps):
    """Advance a batch of single-excitation states by ``nsteps`` RK4 steps.

    Couplings at time t are ``base + amp_cos*cos(th) + amp_sin*sin(th)`` with
    ``th = theta0 + omega*t``.  ``psi`` (S, M) complex is updated in place.
    Returns the per-row maximum of | ||psi|| - 1 | seen after each step.
    """
    drift = np.zeros(psi.shape[0])
    if nsteps <= 0:
        return drift
    half = 0.5 * dt
    for k in range(nsteps):
        t = t0 + k * dt
        th0 = theta0 + omega * t
        th1 = theta0 + omega * (t + half)
        th2 = theta0 + omega * (t + dt)
        j0 = base + (amp_cos * math.cos(th0) + amp_sin * math.sin(th0))
        j1 = base + (amp_cos * math.cos(th1) + amp_sin * math.sin(th1))
        j2 = base + (amp_cos * math.cos(th2) + amp_sin * math.sin(th2))
        k1 = -1j * _hopping(psi, j0)
        k2 = -1j * _hopping(psi + half * k1, j1)
        k3 = -1j * _hopping(psi + half * k2, j1)
        k4 = -1j * _hopping(psi + dt * k3, j2)
        psi += (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        norm = np.sqrt(np.sum(psi.real**2 + psi.imag**2, axis=1))
        np.maximum(drift, np.abs(norm - 1.0), out=drift)
    return drift


def tridiag_eigh(diag, offdiag, want_vectors=False):
    """Implicit-shift QL on a real symmetric tridiagonal matrix.

    Returns ascending eigenvalues and, if requested, the orthonormal
    eigenvectors as columns.  Exactly-zero off-diagonals deflate at once.
    The matrix is scaled to unit norm first so tiny entries cannot stall the
    deflation test in the subnormal range.
    """
    n = len(diag)
    d = [float(x) for x in diag]
    e = [float(x) for x in offdiag] + [0.0]
    anorm = max((abs(x) for x in d), default=0.0) + 2.0 * max((abs(x) for x in e), default=0.0)
    if not math.isfinite(anorm):
        raise ConvergenceError("matrix has non-finite entries")
    if anorm > 0.0:
        d = [x / anorm for x in d]
        e = [x / anorm for x in e]
    z = np.eye(n) if want_vectors else None
    for l in range(n):
        it = 0
        while True:
            m = l
            while m < n - 1:
                dd = abs(d[m]) + abs(d[m + 1])
                if abs(e[m]) <= _EPS * dd or abs(e[m]) < _TINY:
                    break
                m += 1
            if m == l:
                break
            if it == MAX_QL_ITER:
                raise ConvergenceError(
                    f"QL did not converge for eigenvalue {l} after {MAX_QL_ITER} iterations"
                )
            it += 1
            g = (d[l + 1] - d[l]) / (2.0 * e[l])
            r = math.hypot(g, 1.0)
            g = d[m] - d[l] + e[l] / (g + math.copysign(r, g))
            s = c = 1.0
            p = 0.0
            i = m - 1
            underflow = False
            while i >= l:
                f = s * e[i]
                b = c * e[i]
                r = math.hypot(f, g)
                e[i + 1] = r
                if r == 0.0:
                    d[i + 1] -= p
                    e[m] = 0.0
                    underflow = True
                    break
                s = f / r
                c = g / r
                g = d[i + 1] - p
                r = (d[i] - g) * s + 2.0 * c * b
                p = s * r
                d[i + 1] = g + p
                g = c * r - b
                if z is not None:
                    zi = z[:, i].copy()
                    zi1 = z[:, i + 1].copy()
                    z[:, i + 1] = s * zi + c * zi1
                    z[:, i] = c * zi - s * zi1
                i -= 1
            if underflow:
                continue
            d[l] -= p
            e[l] = g
            e[m] = 0.0
    w = np.array(d)
    if anorm > 0.0:
        w *= anorm
    order = np.argsort(w, kind="stable")
    w = w[order]
    if z is not None:
        z = z[:, order]
    return w, z
