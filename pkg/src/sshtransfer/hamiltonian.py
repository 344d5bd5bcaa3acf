"""Single-excitation Hamiltonian, its spectrum and the bulk-edge gap.

H = sum_x J_x (s+_x s-_{x+1} + h.c.) conserves the number of excitations;
restricted to one excitation it is the M x M real symmetric tridiagonal
hopping matrix with zero diagonal.  Basis state k is "qubit k+1 excited".
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import kernels
from .edgestates import edge_energies
from .errors import ContractError
from .model import (
    ChainSpec,
    Couplings,
    DisorderRealization,
    WaveVector,
    apply_disorder,
    coupling_profile,
)


@dataclass(frozen=True, eq=False)
class TridiagonalHamiltonian:
    diagonal: np.ndarray
    offdiagonal: np.ndarray

    def __post_init__(self):
        d = np.array(self.diagonal, dtype=float)
        e = np.array(self.offdiagonal, dtype=float)
        if d.ndim != 1 or d.size < 1 or e.shape != (d.size - 1,):
            raise ContractError("need M diagonal and M-1 off-diagonal entries")
        d.setflags(write=False)
        e.setflags(write=False)
        object.__setattr__(self, "diagonal", d)
        object.__setattr__(self, "offdiagonal", e)

    @property
    def dim(self) -> int:
        return self.diagonal.size

    def to_dense(self) -> np.ndarray:
        return np.diag(self.diagonal) + np.diag(self.offdiagonal, 1) + np.diag(self.offdiagonal, -1)

    def matvec(self, v: np.ndarray) -> np.ndarray:
        v = np.asarray(v)
        out = self.diagonal * v
        out[:-1] += self.offdiagonal * v[1:]
        out[1:] += self.offdiagonal * v[:-1]
        return out

    def expectation(self, psi: WaveVector) -> float:
        """<psi|H|psi> / <psi|psi>; the vacuum contributes zero energy."""
        a = psi.amplitudes
        return float(np.real(np.vdot(a, self.matvec(a)))) / psi.norm() ** 2


@dataclass(frozen=True, eq=False)
class Spectrum:
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray | None = None


def build_single_excitation(c: Couplings) -> TridiagonalHamiltonian:
    return TridiagonalHamiltonian(np.zeros(len(c) + 1), c.values)


def eigenvalues(h: TridiagonalHamiltonian, vectors: bool = False) -> Spectrum:
    """All eigenvalues (ascending) by implicit-shift QL.

    Raises :class:`~sshtransfer.errors.ConvergenceError` if any eigenvalue
    needs more than ``MAX_QL_ITER`` sweeps.
    """
    w, z = kernels.tridiag_eigh(h.diagonal, h.offdiagonal, vectors)
    return Spectrum(w, z)


def eigenvector_for(h: TridiagonalHamiltonian, eigenvalue: float, tol: float = 1e-8) -> WaveVector:
    """Unit eigenvector for the eigenvalue closest to ``eigenvalue``.

    For a degenerate eigenvalue any unit vector of the eigenspace may come
    back.  The phase is fixed so the largest-magnitude component is positive.
    """
    spec = eigenvalues(h, vectors=True)
    scale = max(1.0, float(np.max(np.abs(h.offdiagonal), initial=0.0)), float(np.max(np.abs(h.diagonal))))
    k = int(np.argmin(np.abs(spec.eigenvalues - eigenvalue)))
    if abs(spec.eigenvalues[k] - eigenvalue) > tol * scale:
        raise ContractError(
            f"{eigenvalue!r} is {abs(spec.eigenvalues[k] - eigenvalue):.3e} away from the nearest eigenvalue"
        )
    v = spec.eigenvectors[:, k].copy()
    v /= np.linalg.norm(v)
    j = int(np.argmax(np.abs(v)))
    if v[j] < 0:
        v = -v
    resid = np.max(np.abs(h.matvec(v) - spec.eigenvalues[k] * v))
    if resid > 1e-8 * scale:
        raise ContractError(f"eigenvector residual {resid:.3e} exceeds tolerance")
    return WaveVector(v)


def hamiltonian_for(spec: ChainSpec, theta: float, disorder: DisorderRealization | None = None) -> TridiagonalHamiltonian:
    c = coupling_profile(spec, theta)
    if disorder is not None:
        c = apply_disorder(c, disorder)
    return build_single_excitation(c)


def spectrum_sweep(
    spec: ChainSpec,
    theta_grid: Sequence[float],
    disorder: DisorderRealization | None = None,
) -> list[Spectrum]:
    """One spectrum per theta, with the same static disorder at every point."""
    if len(theta_grid) == 0:
        raise ContractError("theta grid must be non-empty")
    return [eigenvalues(hamiltonian_for(spec, th, disorder)) for th in theta_grid]


def default_theta_range(spec: ChainSpec) -> tuple[float, float]:
    """Sweep interval of the transfer protocol: [0, pi] for p=2, [pi/6, pi/2] for p=3."""
    if spec.p == 2:
        return (0.0, math.pi)
    if spec.p == 3:
        return (math.pi / 6, math.pi / 2)
    raise ContractError(f"no transfer protocol for p={spec.p}")


def edge_gap_at(spec: ChainSpec, theta: float, disorder: DisorderRealization | None = None) -> float:
    """Distance from the in-gap eigenvalue(s) to the nearest other eigenvalue at one theta.

    The edge eigenvalue is the one closest to the analytic edge energy; with
    two branches (p=3) the smaller of the two distances is returned.
    """
    w = eigenvalues(hamiltonian_for(spec, theta, disorder)).eigenvalues
    best = math.inf
    for e in edge_energies(spec, theta):
        k = int(np.argmin(np.abs(w - e)))
        others = np.delete(w, k)
        if others.size:
            best = min(best, float(np.min(np.abs(others - w[k]))))
    return best


def bulk_edge_gap(
    spec: ChainSpec,
    theta_range: tuple[float, float] | None = None,
    grid_points: int = 201,
    disorder: DisorderRealization | None = None,
) -> float:
    """Smallest bulk-edge separation over an evenly spaced theta grid.

    The default grid (201 points over the protocol range) contains the
    midpoint, which is where the p=2 gap closes the most.
    """
    if theta_range is None:
        theta_range = default_theta_range(spec)
    if grid_points < 1:
        raise ContractError("grid_points must be >= 1")
    grid = np.linspace(theta_range[0], theta_range[1], grid_points)
    return min(edge_gap_at(spec, th, disorder) for th in grid)


def chiral_residual(h: TridiagonalHamiltonian) -> float:
    """max |Gamma H Gamma + H| with Gamma = diag((-1)**site)."""
    gamma = (-1.0) ** np.arange(h.dim)
    dense = h.to_dense()
    return float(np.max(np.abs(gamma[:, None] * dense * gamma[None, :] + dense)))
