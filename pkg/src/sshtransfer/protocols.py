"""The two transfer protocols and their fidelities.

p=2: a single excitation starts on qubit 1 (theta=0, |L>) and theta is swept
linearly to pi, where the zero mode is |R>.  An arbitrary qubit state
alpha|e> + beta|g> reduces to this because H|G> = 0 and the edge channel sits
at exactly zero energy, so no relative phase builds up between the two
components.

p=3: a Bell pair (|eg> +- |ge>)/sqrt(2) on qubits 1, 2 (theta=pi/6, |L+->)
is carried to qubits M-1, M (theta=pi/2, |R+->).  Each branch is
transferred on its own; the fidelity modulus discards its dynamical phase.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .dynamics import EvolutionConfig, Trajectory, evolve
from .edgestates import landmark
from .errors import ContractError
from .hamiltonian import bulk_edge_gap, default_theta_range
from .model import ChainSpec, DisorderRealization, RampSchedule, WaveVector

P2_REDUCTION_NOTE = (
    "alpha|L>+beta|G> -> alpha|R>+beta|G>: H annihilates |G> and the edge mode has E=0, "
    "so the single-excitation overlap |<R|psi(t_f)>| is the transfer fidelity"
)
P3_PHASE_NOTE = "fidelity modulus discards the branch's dynamical phase; branches are transferred separately"


@dataclass
class TransferReport:
    protocol: str
    qubits: int
    fidelity: float
    t_final: float
    omega: float
    gap: float
    adiabatic_margin: float
    norm_drift_max: float
    branch: str | None = None
    disorder_w: float = 0.0
    disorder_seed: int | None = None
    dt: float = 0.01
    convergence: dict | None = None
    superposition_fidelity: float | None = None
    note: str = ""
    trajectory: Trajectory | None = field(default=None, repr=False)

    def to_dict(self) -> dict:
        out = {
            "protocol": self.protocol,
            "qubits": self.qubits,
            "branch": self.branch,
            "fidelity": self.fidelity,
            "t_final": self.t_final,
            "omega": self.omega,
            "gap": self.gap,
            "adiabatic_margin": self.adiabatic_margin,
            "norm_drift_max": self.norm_drift_max,
            "disorder_w": self.disorder_w,
            "disorder_seed": self.disorder_seed,
            "dt": self.dt,
            "convergence": self.convergence,
            "superposition_fidelity": self.superposition_fidelity,
            "note": self.note,
        }
        return out


def fidelity(target: WaveVector, actual: WaveVector) -> float:
    """|<target|actual>|, vacuum components included."""
    for name, v in (("target", target), ("actual", actual)):
        if abs(v.norm() - 1.0) > 1e-6:
            raise ContractError(f"{name} state is not normalized (norm={v.norm():.9f})")
    if target.dim != actual.dim:
        raise ContractError("states live on chains of different length")
    ov = np.vdot(target.amplitudes, actual.amplitudes) + target.vacuum.conjugate() * actual.vacuum
    return float(abs(ov))


def adiabatic_margin(spec: ChainSpec, omega: float, theta_range: tuple[float, float] | None = None,
                     gap: float | None = None) -> float:
    """sqrt(g1 * omega) / gap; below 1 means the ramp is slow enough."""
    if gap is None:
        gap = bulk_edge_gap(spec, theta_range)
    return math.sqrt(spec.g1 * omega) / gap


def _run(spec, schedule, disorder, psi0, target, cfg, gap):
    traj = evolve(spec, schedule, disorder, psi0, cfg)
    f = fidelity(target, traj.final_state)
    conv = None
    if cfg.convergence_check:
        fine_cfg = EvolutionConfig(dt=cfg.dt / 2, norm_tolerance=cfg.norm_tolerance)
        f_fine = fidelity(target, evolve(spec, schedule, disorder, psi0, fine_cfg).final_state)
        conv = {
            "dt_half": cfg.dt / 2,
            "fidelity_dt_half": f_fine,
            "fidelity_change": abs(f_fine - f),
            "state_deviation": traj.convergence_deviation,
        }
    return traj, f, conv


def transfer_p2(
    spec: ChainSpec,
    omega: float,
    disorder: DisorderRealization | None = None,
    cfg: EvolutionConfig | None = None,
    gap: float | None = None,
    superposition: tuple[complex, complex] | None = None,
) -> TransferReport:
    """Sweep theta from 0 to pi and report |<R|psi(t_f)>|.

    ``superposition=(alpha, beta)`` additionally evolves alpha|L> + beta|G>
    and reports its overlap with alpha|R> + beta|G>, which makes the
    single-excitation reduction checkable.
    """
    spec.check_p2_transfer()
    if spec.g0 != spec.g1:
        raise ContractError(f"p=2 transfer assumes g0 = g1, got g0={spec.g0}, g1={spec.g1}")
    cfg = cfg or EvolutionConfig()
    schedule = RampSchedule.sweep(0.0, math.pi, omega)
    if gap is None:
        gap = bulk_edge_gap(spec)
    psi0, target = landmark(spec, "L"), landmark(spec, "R")
    traj, f, conv = _run(spec, schedule, disorder, psi0, target, cfg, gap)
    sup = None
    if superposition is not None:
        a, b = superposition
        nrm = math.sqrt(abs(a) ** 2 + abs(b) ** 2)
        a, b = a / nrm, b / nrm
        s0 = WaveVector(a * psi0.amplitudes, b)
        st = WaveVector(a * target.amplitudes, b)
        sup = fidelity(st, evolve(spec, schedule, disorder, s0, EvolutionConfig(dt=cfg.dt)).final_state)
    return TransferReport(
        protocol="p2",
        qubits=spec.qubits,
        fidelity=f,
        t_final=schedule.t_final,
        omega=omega,
        gap=gap,
        adiabatic_margin=adiabatic_margin(spec, omega, gap=gap),
        norm_drift_max=traj.norm_drift_max,
        disorder_w=0.0 if disorder is None else disorder.w,
        disorder_seed=None if disorder is None else disorder.seed,
        dt=cfg.dt,
        convergence=conv,
        superposition_fidelity=sup,
        note=P2_REDUCTION_NOTE,
        trajectory=traj,
    )


def transfer_p3(
    spec: ChainSpec,
    omega: float,
    branch: str = "plus",
    disorder: DisorderRealization | None = None,
    cfg: EvolutionConfig | None = None,
    gap: float | None = None,
) -> TransferReport:
    """Sweep theta from pi/6 to pi/2 carrying |L+-> to |R+->."""
    spec.check_p3_transfer()
    if branch not in ("plus", "minus"):
        raise ContractError(f"branch must be 'plus' or 'minus', got {branch!r}")
    cfg = cfg or EvolutionConfig()
    lo, hi = default_theta_range(spec)
    schedule = RampSchedule.sweep(lo, hi, omega)
    if gap is None:
        gap = bulk_edge_gap(spec)
    sign = "+" if branch == "plus" else "-"
    psi0, target = landmark(spec, "L" + sign), landmark(spec, "R" + sign)
    traj, f, conv = _run(spec, schedule, disorder, psi0, target, cfg, gap)
    return TransferReport(
        protocol="p3",
        qubits=spec.qubits,
        fidelity=f,
        t_final=schedule.t_final,
        omega=omega,
        gap=gap,
        adiabatic_margin=adiabatic_margin(spec, omega, gap=gap),
        norm_drift_max=traj.norm_drift_max,
        branch=branch,
        disorder_w=0.0 if disorder is None else disorder.w,
        disorder_seed=None if disorder is None else disorder.seed,
        dt=cfg.dt,
        convergence=conv,
        note=P3_PHASE_NOTE,
        trajectory=traj,
    )


def protocol_endpoints(spec: ChainSpec, protocol: str, branch: str = "plus"):
    """(schedule-independent) initial state, target state and theta range."""
    if protocol == "p2":
        spec.check_p2_transfer()
        return landmark(spec, "L"), landmark(spec, "R"), (0.0, math.pi)
    if protocol == "p3":
        spec.check_p3_transfer()
        sign = "+" if branch == "plus" else "-"
        return landmark(spec, "L" + sign), landmark(spec, "R" + sign), (math.pi / 6, math.pi / 2)
    raise ContractError(f"unknown protocol {protocol!r}")
