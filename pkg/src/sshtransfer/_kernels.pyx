# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot loops: batched RK4 propagation and tridiagonal QL."""
import numpy as np
cimport numpy as cnp
from libc.math cimport cos, sin, sqrt, fabs, hypot, copysign, isfinite
from libc.stdlib cimport malloc, free

from .errors import ConvergenceError

cnp.import_array()

DEF MAX_QL_ITER = 60
cdef double _EPS = 2.220446049250313e-16
cdef double _TINY = _EPS * _EPS


cdef inline void _hop(const double complex *x, const double *j,
                      double complex *out, Py_ssize_t m) noexcept nogil:
    # out = -i * H x for the zero-diagonal tridiagonal H with bonds j
    cdef Py_ssize_t k
    cdef double complex acc
    for k in range(m):
        acc = 0
        if k > 0:
            acc = acc + j[k - 1] * x[k - 1]
        if k < m - 1:
            acc = acc + j[k] * x[k + 1]
        out[k] = -1j * acc


def rk4_advance(double complex[:, ::1] psi, const double[:, ::1] base,
                const double[::1] amp_cos, const double[::1] amp_sin,
                double theta0, double omega, double t0, double dt, long nsteps):
    """Advance a batch of single-excitation states by ``nsteps`` RK4 steps.

    See ``_kernels_py.rk4_advance`` for the contract.
    """
    cdef Py_ssize_t nb = psi.shape[0]
    cdef Py_ssize_t m = psi.shape[1]
    cdef Py_ssize_t nbond = m - 1
    cdef cnp.ndarray[cnp.float64_t, ndim=1] drift_arr = np.zeros(nb)
    cdef double[::1] drift = drift_arr
    if nsteps <= 0:
        return drift_arr
    cdef double *j0 = <double *> malloc(3 * (nbond + 1) * sizeof(double))
    cdef double complex *work = <double complex *> malloc(5 * m * sizeof(double complex))
    if j0 == NULL or work == NULL:
        free(j0)
        free(work)
        raise MemoryError()
    cdef double *j1 = j0 + (nbond + 1)
    cdef double *j2 = j1 + (nbond + 1)
    cdef double complex *k1 = work
    cdef double complex *k2 = work + m
    cdef double complex *k3 = work + 2 * m
    cdef double complex *k4 = work + 3 * m
    cdef double complex *tmp = work + 4 * m
    cdef double half = 0.5 * dt
    cdef double sixth = dt / 6.0
    cdef double t, c0, s0, c1, s1, c2, s2, nrm, dev
    cdef Py_ssize_t b, k, x
    cdef double complex *row
    with nogil:
        for b in range(nb):
            row = &psi[b, 0]
            for k in range(nsteps):
                t = t0 + k * dt
                c0 = cos(theta0 + omega * t)
                s0 = sin(theta0 + omega * t)
                c1 = cos(theta0 + omega * (t + half))
                s1 = sin(theta0 + omega * (t + half))
                c2 = cos(theta0 + omega * (t + dt))
                s2 = sin(theta0 + omega * (t + dt))
                for x in range(nbond):
                    j0[x] = base[b, x] + (amp_cos[x] * c0 + amp_sin[x] * s0)
                    j1[x] = base[b, x] + (amp_cos[x] * c1 + amp_sin[x] * s1)
                    j2[x] = base[b, x] + (amp_cos[x] * c2 + amp_sin[x] * s2)
                _hop(row, j0, k1, m)
                for x in range(m):
                    tmp[x] = row[x] + half * k1[x]
                _hop(tmp, j1, k2, m)
                for x in range(m):
                    tmp[x] = row[x] + half * k2[x]
                _hop(tmp, j1, k3, m)
                for x in range(m):
                    tmp[x] = row[x] + dt * k3[x]
                _hop(tmp, j2, k4, m)
                nrm = 0.0
                for x in range(m):
                    row[x] = row[x] + sixth * (k1[x] + 2.0 * k2[x] + 2.0 * k3[x] + k4[x])
                    nrm = nrm + row[x].real * row[x].real + row[x].imag * row[x].imag
                dev = fabs(sqrt(nrm) - 1.0)
                if dev > drift[b]:
                    drift[b] = dev
    free(j0)
    free(work)
    return drift_arr


def tridiag_eigh(diag, offdiag, bint want_vectors=False):
    """Implicit-shift QL; see ``_kernels_py.tridiag_eigh``."""
    cdef Py_ssize_t n = len(diag)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] d_arr = np.array(diag, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] e_arr = np.zeros(max(n, 1))
    if n > 1:
        e_arr[: n - 1] = np.asarray(offdiag, dtype=np.float64)
    cdef double anorm = float(np.max(np.abs(d_arr), initial=0.0)) + 2.0 * float(np.max(np.abs(e_arr), initial=0.0))
    if not isfinite(anorm):
        raise ConvergenceError("matrix has non-finite entries")
    if anorm > 0.0:
        d_arr /= anorm
        e_arr /= anorm
    cdef cnp.ndarray[cnp.float64_t, ndim=2] z_arr = np.eye(n) if want_vectors else np.zeros((0, 0))
    cdef double[::1] d = d_arr
    cdef double[::1] e = e_arr
    cdef double[:, ::1] z = z_arr
    cdef Py_ssize_t l, m, i, k
    cdef int it
    cdef double dd, g, r, s, c, p, f, b, zk
    cdef bint underflow
    for l in range(n):
        it = 0
        while True:
            m = l
            while m < n - 1:
                dd = fabs(d[m]) + fabs(d[m + 1])
                if fabs(e[m]) <= _EPS * dd or fabs(e[m]) < _TINY:
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
            r = hypot(g, 1.0)
            g = d[m] - d[l] + e[l] / (g + copysign(r, g))
            s = 1.0
            c = 1.0
            p = 0.0
            i = m - 1
            underflow = False
            while i >= l:
                f = s * e[i]
                b = c * e[i]
                r = hypot(f, g)
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
                if want_vectors:
                    for k in range(n):
                        zk = z[k, i + 1]
                        z[k, i + 1] = s * z[k, i] + c * zk
                        z[k, i] = c * z[k, i] - s * zk
                i -= 1
            if underflow:
                continue
            d[l] -= p
            e[l] = g
            e[m] = 0.0
    if anorm > 0.0:
        d_arr *= anorm
    order = np.argsort(d_arr, kind="stable")
    w = d_arr[order]
    if want_vectors:
        return w, z_arr[:, order]
    return w, None
