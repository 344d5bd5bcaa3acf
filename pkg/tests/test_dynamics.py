import math

import numpy as np
import pytest

from sshtransfer import kernels
from sshtransfer.dynamics import (
    EvolutionConfig,
    evolve,
    hamiltonian_at,
    propagate_batch,
    rk4_step,
    step_plan,
)
from sshtransfer.edgestates import landmark
from sshtransfer.errors import ContractError, IntegrationError
from sshtransfer.hamiltonian import hamiltonian_for
from sshtransfer.model import ChainSpec, DisorderRealization, RampSchedule, WaveVector, coupling_harmonics
from sshtransfer.protocols import fidelity


def random_state(m, seed=1):
    rng = np.random.default_rng(seed)
    v = rng.standard_normal(m) + 1j * rng.standard_normal(m)
    return WaveVector(v / np.linalg.norm(v))


def test_zero_hamiltonian_leaves_state_unchanged(backend):
    psi = random_state(5).amplitudes[None, :].copy()
    before = psi.copy()
    z = np.zeros(4)
    kernels.rk4_advance(psi, np.zeros((1, 4)), z, z, 0.0, 1.0, 0.0, 0.1, 50)
    assert np.array_equal(psi, before)


def test_two_site_rabi_oscillation(backend):
    # constant J = 1: psi(t) = (cos t, -i sin t)
    psi = np.array([[1, 0]], dtype=complex)
    n = 400
    z = np.zeros(1)
    kernels.rk4_advance(psi, np.ones((1, 1)), z, z, 0.0, 1.0, 0.0, math.pi / 2 / n, n)
    assert abs(psi[0, 0]) <= 1e-9
    assert abs(psi[0, 1] + 1j) <= 1e-9


def test_time_reversal_returns_initial_state(backend):
    s = ChainSpec(2, 9)
    sch = RampSchedule.sweep(0.0, math.pi, 0.05)
    psi0 = random_state(9, 4)
    arr = psi0.amplitudes[None, :].copy()
    a, b = coupling_harmonics(s)
    base = np.full((1, 8), s.g0)
    n = 20000
    dt = sch.t_final / n
    kernels.rk4_advance(arr, base, a, b, sch.theta0, sch.omega, 0.0, dt, n)
    kernels.rk4_advance(arr, base, a, b, sch.theta0, sch.omega, sch.t_final, -dt, n)
    assert 1 - abs(np.vdot(psi0.amplitudes, arr[0])) <= 1e-8


def test_local_error_is_fifth_order():
    s = ChainSpec(2, 9)
    sch = RampSchedule.sweep(0.0, math.pi, 0.3)
    psi0 = random_state(9)
    t = 1.0

    def reference(h):
        arr = psi0.amplitudes[None, :].copy()
        propagate_batch(s, sch, np.zeros((1, 8)), arr, h / 2000, t, t + h)
        return arr[0]

    hs = np.array([0.2, 0.1, 0.05, 0.025])
    errs = [np.linalg.norm(rk4_step(s, sch, None, psi0, t, h).amplitudes - reference(h)) for h in hs]
    slope = np.polyfit(np.log(hs), np.log(errs), 1)[0]
    assert abs(slope - 5) <= 0.2


@pytest.mark.parametrize("h", [0.2, 0.1, 0.05, 0.025])
def test_norm_change_per_step_bounded(h):
    s = ChainSpec(2, 9)
    sch = RampSchedule.sweep(0.0, math.pi, 0.3)
    out = rk4_step(s, sch, None, random_state(9), 1.0, h)
    assert abs(out.norm() - 1) <= h**5


def test_sudden_quench_keeps_state():
    s = ChainSpec(2, 9)
    sch = RampSchedule(0.0, 1e6, math.pi / 1e6)
    tr = evolve(s, sch, None, landmark(s, "L"), EvolutionConfig(dt=1e-7))
    assert fidelity(landmark(s, "L"), tr.final_state) >= 1 - 1e-9
    assert fidelity(landmark(s, "R"), tr.final_state) <= 1e-9


def test_vacuum_is_stationary():
    s = ChainSpec(2, 9)
    sch = RampSchedule.sweep(0.0, math.pi, 0.1)
    vac = WaveVector.vacuum_state(9)
    tr = evolve(s, sch, None, vac)
    assert tr.final_state.vacuum == 1
    assert np.all(tr.final_state.amplitudes == 0)


def test_superposed_vacuum_component_is_untouched():
    s = ChainSpec(2, 5)
    sch = RampSchedule.sweep(0.0, math.pi, 0.1)
    psi0 = WaveVector(landmark(s, "L").amplitudes * 0.6, 0.8j)
    tr = evolve(s, sch, None, psi0)
    assert tr.final_state.vacuum == 0.8j
    assert tr.final_state.norm() == pytest.approx(1.0, abs=1e-9)


def test_nine_qubit_transfer_reaches_right_edge():
    s = ChainSpec(2, 9)
    tr = evolve(s, RampSchedule.sweep(0.0, math.pi, 0.04), None, landmark(s, "L"))
    assert fidelity(landmark(s, "R"), tr.final_state) >= 0.99


def test_dt_halving_changes_result_little():
    s = ChainSpec(2, 9)
    tr = evolve(s, RampSchedule.sweep(0.0, math.pi, 0.04), None, landmark(s, "L"),
                EvolutionConfig(dt=0.01, convergence_check=True))
    assert tr.convergence_deviation <= 1e-6


def test_adiabatic_energy_tracking():
    s = ChainSpec(3, 8, 0.0)
    sch = RampSchedule.sweep(math.pi / 6, math.pi / 2, 0.01)
    tr = evolve(s, sch, None, landmark(s, "L+"), EvolutionConfig(record_every=100))
    for t, st in zip(tr.times, tr.states):
        th = sch.theta(t)
        e = hamiltonian_for(s, th).expectation(st)
        assert abs(e - math.cos(2 * math.pi / 3 + th)) <= 1e-2


def test_large_dt_raises_integration_error():
    s = ChainSpec(2, 9)
    with pytest.raises(IntegrationError):
        evolve(s, RampSchedule.sweep(0.0, math.pi, 0.01), None, landmark(s, "L"), EvolutionConfig(dt=1.5))


def test_snapshot_count_and_endpoint():
    s = ChainSpec(2, 5)
    sch = RampSchedule(0.0, 1.0, 1.05)
    tr = evolve(s, sch, None, landmark(s, "L"), EvolutionConfig(dt=0.1, record_every=2))
    # 10 full steps -> snapshots every 2 steps, plus t=0 and the short final step
    assert tr.times[0] == 0.0
    assert tr.times[-1] == 1.05
    assert len(tr.times) == len(tr.states) == 7
    assert tr.steps == 10


def test_step_plan():
    assert step_plan(0.0, 1.0, 0.1) == (10, 0.0)
    n, rem = step_plan(0.0, 1.05, 0.1)
    assert n == 10 and rem == pytest.approx(0.05)


def test_disorder_is_applied_statically():
    s = ChainSpec(2, 5)
    sch = RampSchedule.sweep(0.0, math.pi, 0.1)
    dis = DisorderRealization(0.1, [0.05, -0.05, 0.0, 0.02])
    h = hamiltonian_at(s, sch, dis, 0.0)
    np.testing.assert_allclose(h.offdiagonal, [0.05, 1.95, 0.0, 2.02], atol=1e-15)
    with pytest.raises(ContractError):
        hamiltonian_at(s, sch, dis, sch.t_final * 2)
    with pytest.raises(ContractError):
        evolve(s, sch, DisorderRealization(0.1, [0.0]), landmark(s, "L"))


def test_unnormalized_start_rejected():
    s = ChainSpec(2, 5)
    with pytest.raises(ContractError):
        evolve(s, RampSchedule.sweep(0.0, math.pi, 0.1), None, WaveVector([1, 1, 0, 0, 0]))
