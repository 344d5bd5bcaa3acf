"""Fixed-step RK4 integration of i dpsi/dt = H(theta(t)) psi.

Only the single-excitation block evolves; the vacuum amplitude is carried
along untouched because H|G> = 0.  The heavy loop lives in
:mod:`sshtransfer.kernels`, which evaluates the couplings exactly at t,
t + dt/2 and t + dt for every step.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import kernels
from .errors import ContractError, IntegrationError
from .hamiltonian import TridiagonalHamiltonian, build_single_excitation
from .model import (
    ChainSpec,
    DisorderRealization,
    RampSchedule,
    WaveVector,
    apply_disorder,
    coupling_harmonics,
    coupling_profile,
)

DEFAULT_DT = 0.01


@dataclass(frozen=True)
class EvolutionConfig:
    """Integrator settings.

    ``record_every`` is the snapshot stride in steps (0 keeps only the initial
    and final states).  ``convergence_check`` repeats the run at dt/2.
    """

    dt: float = DEFAULT_DT
    record_every: int = 0
    convergence_check: bool = False
    norm_tolerance: float = 1e-6

    def __post_init__(self):
        if not self.dt > 0:
            raise ContractError(f"dt must be positive, got {self.dt!r}")
        if self.record_every < 0:
            raise ContractError("record_every must be >= 0")


@dataclass(frozen=True, eq=False)
class Trajectory:
    times: list[float]
    states: list[WaveVector]
    final_state: WaveVector
    norm_drift_max: float
    convergence_deviation: float | None = None
    steps: int = 0


def _check_disorder(spec: ChainSpec, disorder: DisorderRealization | None) -> np.ndarray:
    if disorder is None:
        return np.zeros(spec.bonds)
    if disorder.offsets.size != spec.bonds:
        raise ContractError(
            f"disorder has {disorder.offsets.size} offsets but the chain has {spec.bonds} bonds"
        )
    return np.asarray(disorder.offsets, dtype=float)


def hamiltonian_at(
    spec: ChainSpec,
    schedule: RampSchedule,
    disorder: DisorderRealization | None,
    t: float,
) -> TridiagonalHamiltonian:
    slack = 1e-12 * max(1.0, schedule.t_final)
    if t < -slack or t > schedule.t_final + slack:
        raise ContractError(f"t={t!r} outside [0, {schedule.t_final!r}]")
    c = coupling_profile(spec, schedule.theta(t))
    if disorder is not None:
        c = apply_disorder(c, disorder)
    return build_single_excitation(c)


def step_plan(t_start: float, t_end: float, dt: float) -> tuple[int, float]:
    """Number of full steps and the length of the final short step (0 if none)."""
    span = t_end - t_start
    n = int(math.floor(span / dt + 1e-9))
    rem = span - n * dt
    if rem <= 1e-9 * dt:
        rem = 0.0
    return n, rem


def propagate_batch(
    spec: ChainSpec,
    schedule: RampSchedule,
    offsets: np.ndarray,
    psi: np.ndarray,
    dt: float,
    t_start: float = 0.0,
    t_end: float | None = None,
) -> np.ndarray:
    """Integrate a batch of excitation-sector states in place.

    ``offsets`` is (S, M-1), one static disorder vector per row; ``psi`` is a
    C-contiguous complex (S, M) array.  Rows never interact, so each row's
    result is independent of the batch it travels in.  Returns the per-row
    maximum norm drift.
    """
    if t_end is None:
        t_end = schedule.t_final
    amp_cos, amp_sin = coupling_harmonics(spec)
    base = np.ascontiguousarray(spec.g0 + np.asarray(offsets, dtype=float))
    n, rem = step_plan(t_start, t_end, dt)
    drift = kernels.rk4_advance(psi, base, amp_cos, amp_sin, schedule.theta0, schedule.omega, t_start, dt, n)
    if rem > 0:
        d2 = kernels.rk4_advance(
            psi, base, amp_cos, amp_sin, schedule.theta0, schedule.omega, t_start + n * dt, rem, 1
        )
        drift = np.maximum(drift, d2)
    return np.asarray(drift)


def rk4_step(
    spec: ChainSpec,
    schedule: RampSchedule,
    disorder: DisorderRealization | None,
    psi: WaveVector,
    t: float,
    dt: float,
) -> WaveVector:
    """One classical RK4 step of dpsi/dt = -i H(t) psi."""
    offsets = _check_disorder(spec, disorder)[None, :]
    amp_cos, amp_sin = coupling_harmonics(spec)
    arr = np.array(psi.amplitudes, dtype=complex)[None, :].copy()
    kernels.rk4_advance(arr, spec.g0 + offsets, amp_cos, amp_sin, schedule.theta0, schedule.omega, t, dt, 1)
    return WaveVector(arr[0], psi.vacuum)


def evolve(
    spec: ChainSpec,
    schedule: RampSchedule,
    disorder: DisorderRealization | None,
    psi0: WaveVector,
    cfg: EvolutionConfig | None = None,
) -> Trajectory:
    """Integrate from t=0 to ``schedule.t_final``.

    The last step is shortened to land on t_final exactly.  Raises
    :class:`IntegrationError` if the norm drifts by more than
    ``cfg.norm_tolerance``.
    """
    cfg = cfg or EvolutionConfig()
    if psi0.dim != spec.qubits:
        raise ContractError(f"state has {psi0.dim} amplitudes, chain has {spec.qubits} qubits")
    if abs(psi0.norm() - 1.0) > 1e-10:
        raise ContractError(f"initial state must be normalized, norm={psi0.norm()!r}")
    offsets = _check_disorder(spec, disorder)[None, :]
    dt = min(cfg.dt, schedule.t_final)

    exc_norm = float(np.linalg.norm(psi0.amplitudes))
    if exc_norm == 0.0:
        # pure vacuum: H annihilates it, nothing to integrate
        times = [0.0, schedule.t_final]
        return Trajectory(times, [psi0, psi0], psi0, 0.0, 0.0 if cfg.convergence_check else None)

    def run(step: float, record_every: int):
        arr = (np.array(psi0.amplitudes, dtype=complex) / exc_norm)[None, :].copy()
        times, states = [0.0], [psi0]
        drift = 0.0
        n_total, _ = step_plan(0.0, schedule.t_final, step)
        if record_every > 0:
            k = 0
            while k < n_total:
                k_next = min(k + record_every, n_total)
                t_a, t_b = k * step, k_next * step
                drift = max(drift, float(propagate_batch(spec, schedule, offsets, arr, step, t_a, t_b)[0]))
                k = k_next
                times.append(t_b)
                states.append(WaveVector(arr[0] * exc_norm, psi0.vacuum))
            t_done = n_total * step
        else:
            t_done = 0.0
        drift = max(drift, float(propagate_batch(spec, schedule, offsets, arr, step, t_done, schedule.t_final)[0]))
        final = WaveVector(arr[0] * exc_norm, psi0.vacuum)
        if times[-1] != schedule.t_final:
            times.append(schedule.t_final)
            states.append(final)
        return times, states, final, drift, n_total

    times, states, final, drift, n_total = run(dt, cfg.record_every)
    if drift > cfg.norm_tolerance:
        raise IntegrationError(f"norm drift {drift:.3e} exceeds {cfg.norm_tolerance:.1e}; reduce dt")
    deviation = None
    if cfg.convergence_check:
        _, _, fine, _, _ = run(dt / 2, 0)
        deviation = float(np.max(np.abs(fine.amplitudes - final.amplitudes)))
    return Trajectory(times, states, final, drift, deviation, n_total)
