"""Compare the compiled and pure-Python kernel backends.

Usage: python benchmarks/bench_kernels.py [--repeat N]

Times one full p=2 transfer (M=21, omega=0.01, 31416 RK4 steps), a
16-row batched transfer at M=9, and the eigenvalues of a 201-point
spectrum sweep at M=51.  Prints a table and checks that both backends
agree.
"""
import argparse
import math
import time

import numpy as np

from sshtransfer import _kernels_py
from sshtransfer.model import ChainSpec, RampSchedule, coupling_harmonics, coupling_profile

try:
    from sshtransfer import _kernels as _kernels_c
except ImportError:
    _kernels_c = None


def _transfer_case(m, omega, rows):
    spec = ChainSpec(2, m)
    sch = RampSchedule.sweep(0.0, math.pi, omega)
    a, b = coupling_harmonics(spec)
    base = np.full((rows, spec.bonds), spec.g0)
    dt = 0.01
    n = int(sch.t_final / dt)

    def run(impl):
        psi = np.zeros((rows, m), complex)
        psi[:, 0] = 1.0
        impl.rk4_advance(psi, base, a, b, sch.theta0, sch.omega, 0.0, dt, n)
        return psi

    return run


def _eig_case(m, points):
    spec = ChainSpec(2, m)
    offs = [coupling_profile(spec, th).values for th in np.linspace(0, math.pi, points)]
    diag = np.zeros(m)

    def run(impl):
        return np.array([impl.tridiag_eigh(diag, e, False)[0] for e in offs])

    return run


def _best(fn, impl, repeat):
    best = math.inf
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn(impl)
        best = min(best, time.perf_counter() - t0)
    return best, out


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()
    cases = [
        ("rk4 transfer M=21 omega=0.01", _transfer_case(21, 0.01, 1)),
        ("rk4 batch 16 x M=9 omega=0.04", _transfer_case(9, 0.04, 16)),
        ("QL eigenvalues M=51 x 201 theta", _eig_case(51, 201)),
    ]
    print(f"{'case':34s} {'python [s]':>11s} {'cython [s]':>11s} {'speedup':>8s}")
    for name, fn in cases:
        tp, ref = _best(fn, _kernels_py, args.repeat)
        if _kernels_c is None:
            print(f"{name:34s} {tp:11.4f} {'n/a':>11s} {'n/a':>8s}")
            continue
        tc, out = _best(fn, _kernels_c, args.repeat)
        diff = float(np.max(np.abs(out - ref)))
        print(f"{name:34s} {tp:11.4f} {tc:11.4f} {tp / tc:7.1f}x   max |diff| {diff:.1e}")


if __name__ == "__main__":
    main()
