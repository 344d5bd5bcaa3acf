"""Chain geometry, coupling profiles, ramp schedules and quenched disorder.

Natural units throughout: hbar = 1 and energies are measured in g1, so
times are in 1/g1.  Chains are addressed by their total qubit count M and
the bonds are numbered x = 1..M-1 (bond x joins qubits x and x+1).
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ContractError


def _frozen(values, dtype=float) -> np.ndarray:
    arr = np.array(values, dtype=dtype)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class ChainSpec:
    """Static description of a cosine-modulated qubit chain.

    Parameters
    ----------
    p : int
        Unit-cell period.  The transfer protocols exist for p = 2 and 3;
        other periods are accepted for spectra only.
    qubits : int
        Total number of qubits M.
    g0, g1 : float
        Coupling offset and modulation amplitude, J_x = g0 + g1 cos(2 pi x / p + theta).
    """

    p: int
    qubits: int
    g0: float = 1.0
    g1: float = 1.0

    def __post_init__(self):
        if int(self.p) != self.p or self.p < 2:
            raise ContractError(f"period p must be an integer >= 2, got {self.p!r}")
        if int(self.qubits) != self.qubits or self.qubits < 2:
            raise ContractError(f"qubit count must be an integer >= 2, got {self.qubits!r}")
        if not (math.isfinite(self.g0) and math.isfinite(self.g1)):
            raise ContractError("coupling constants must be finite")
        if self.g1 <= 0:
            raise ContractError(f"g1 must be positive, got {self.g1!r}")

    @property
    def bonds(self) -> int:
        return self.qubits - 1

    @property
    def cells(self) -> int:
        """Number of (possibly truncated) unit cells N."""
        return -(-self.qubits // self.p)

    def check_p2_transfer(self) -> None:
        if self.p != 2 or self.qubits % 2 != 1:
            raise ContractError(
                f"p=2 transfer needs p=2 and an odd qubit count (2N-1), got p={self.p}, M={self.qubits}"
            )

    def check_p3_transfer(self) -> None:
        if self.p != 3 or self.qubits % 3 != 2:
            raise ContractError(
                f"p=3 transfer needs p=3 and M = 3N-1 qubits, got p={self.p}, M={self.qubits}"
            )
        if self.g0 != 0:
            raise ContractError(f"p=3 closed-form edge states require g0=0, got g0={self.g0}")


@dataclass(frozen=True, eq=False)
class Couplings:
    """The M-1 nearest-neighbour coupling strengths, bond order."""

    values: np.ndarray

    def __post_init__(self):
        arr = _frozen(self.values)
        if arr.ndim != 1 or arr.size < 1:
            raise ContractError("couplings must be a non-empty 1-d sequence")
        if not np.all(np.isfinite(arr)):
            raise ContractError("couplings must be finite")
        object.__setattr__(self, "values", arr)

    def __len__(self):
        return self.values.size


@dataclass(frozen=True)
class RampSchedule:
    """Linear sweep theta(t) = theta0 + omega * t on [0, t_final]."""

    theta0: float
    omega: float
    t_final: float

    def __post_init__(self):
        if not self.omega > 0:
            raise ContractError(f"ramp rate omega must be positive, got {self.omega!r}")
        if not self.t_final > 0:
            raise ContractError(f"t_final must be positive, got {self.t_final!r}")

    @classmethod
    def sweep(cls, theta_start: float, theta_end: float, omega: float) -> "RampSchedule":
        """Schedule that moves theta from ``theta_start`` to ``theta_end`` at rate ``omega``."""
        if not omega > 0:
            raise ContractError(f"ramp rate omega must be positive, got {omega!r}")
        return cls(theta_start, omega, (theta_end - theta_start) / omega)

    def theta(self, t: float) -> float:
        return self.theta0 + self.omega * t

    @property
    def theta_final(self) -> float:
        return self.theta(self.t_final)


@dataclass(frozen=True, eq=False)
class DisorderRealization:
    """Static bond offsets dJ_x = W * delta_x, delta_x ~ U[-0.5, 0.5]."""

    w: float
    offsets: np.ndarray
    seed: int | None = None

    def __post_init__(self):
        object.__setattr__(self, "offsets", _frozen(self.offsets))
        if self.w < 0:
            raise ContractError(f"imperfection strength must be >= 0, got {self.w!r}")
        if np.any(np.abs(self.offsets) > 0.5 * self.w * (1 + 1e-15)):
            raise ContractError("offset magnitude exceeds W/2")


@dataclass(frozen=True, eq=False)
class WaveVector:
    """Single-excitation amplitudes plus the amplitude of the empty chain |G>.

    ``amplitudes[k]`` multiplies the state with only qubit k+1 excited.
    """

    amplitudes: np.ndarray
    vacuum: complex = 0j

    def __post_init__(self):
        object.__setattr__(self, "amplitudes", _frozen(self.amplitudes, complex))
        object.__setattr__(self, "vacuum", complex(self.vacuum))

    @property
    def dim(self) -> int:
        return self.amplitudes.size

    def norm(self) -> float:
        a = self.amplitudes
        return math.sqrt(float(np.sum(a.real**2 + a.imag**2)) + abs(self.vacuum) ** 2)

    def normalized(self) -> "WaveVector":
        n = self.norm()
        if n == 0:
            raise ContractError("cannot normalize the zero vector")
        return WaveVector(self.amplitudes / n, self.vacuum / n)

    @classmethod
    def basis(cls, dim: int, site: int) -> "WaveVector":
        """Single excitation on qubit ``site`` (1-based)."""
        a = np.zeros(dim, complex)
        a[site - 1] = 1.0
        return cls(a)

    @classmethod
    def vacuum_state(cls, dim: int) -> "WaveVector":
        return cls(np.zeros(dim, complex), 1.0)


def _bond_phases(spec: ChainSpec) -> np.ndarray:
    # reduce x mod p first so large chains keep full phase accuracy
    x = np.arange(1, spec.qubits)
    return 2.0 * math.pi * (x % spec.p) / spec.p


def coupling_profile(spec: ChainSpec, theta: float) -> Couplings:
    """J_x = g0 + g1 cos(2 pi x / p + theta) for x = 1..M-1."""
    return Couplings(spec.g0 + spec.g1 * np.cos(_bond_phases(spec) + theta))


def coupling_harmonics(spec: ChainSpec) -> tuple[np.ndarray, np.ndarray]:
    """Split J_x(theta) - g0 into ``a_x cos(theta) + b_x sin(theta)``.

    Lets the integrator rebuild the couplings at any time from one cosine
    and one sine instead of M-1 of each.
    """
    phase = _bond_phases(spec)
    amp_cos = spec.g1 * np.cos(phase)
    amp_sin = -spec.g1 * np.sin(phase)
    # sin(pi) etc. are ~1e-16, not 0; snap them so p=2 stays exactly alternating
    amp_cos[np.abs(amp_cos) < 1e-15 * spec.g1] = 0.0
    amp_sin[np.abs(amp_sin) < 1e-15 * spec.g1] = 0.0
    return amp_cos, amp_sin


def apply_disorder(c: Couplings, d: DisorderRealization) -> Couplings:
    if len(c) != d.offsets.size:
        raise ContractError(
            f"disorder has {d.offsets.size} offsets but the chain has {len(c)} bonds"
        )
    return Couplings(c.values + d.offsets)


def sample_disorder(w: float, count: int, seed: int) -> DisorderRealization:
    """Draw ``count`` offsets W * U[-0.5, 0.5] from a PCG64 stream seeded by ``seed``.

    The generator is NumPy's ``Generator(PCG64(seed))``, so the offsets are a
    pure function of ``(w, count, seed)``.
    """
    if w < 0:
        raise ContractError(f"imperfection strength must be >= 0, got {w!r}")
    if seed < 0:
        raise ContractError(f"seed must be a non-negative 64-bit integer, got {seed!r}")
    rng = np.random.Generator(np.random.PCG64(seed))
    delta = rng.uniform(-0.5, 0.5, size=count)
    # + 0.0 turns the -0.0 produced by w=0 into +0.0
    return DisorderRealization(w, w * delta + 0.0, seed)


def derive_seed(master_seed: int, w_index: int, sample_index: int) -> int:
    """Per-sample 64-bit seed.

    ``SeedSequence(master_seed, spawn_key=(w_index, sample_index))`` hashes the
    triple, so seeds do not depend on how samples are scheduled.
    """
    ss = np.random.SeedSequence(master_seed, spawn_key=(w_index, sample_index))
    return int(ss.generate_state(1, np.uint64)[0])
