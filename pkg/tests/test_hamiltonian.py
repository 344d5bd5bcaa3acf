import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import sturm_eigenvalues, uniform_chain_eigs
from sshtransfer.errors import ContractError
from sshtransfer.hamiltonian import (
    TridiagonalHamiltonian,
    build_single_excitation,
    bulk_edge_gap,
    chiral_residual,
    edge_gap_at,
    eigenvalues,
    eigenvector_for,
    hamiltonian_for,
    spectrum_sweep,
)
from sshtransfer.model import ChainSpec, Couplings, DisorderRealization, coupling_profile

thetas = st.floats(0, 2 * math.pi)


def test_three_site_uniform_example(backend):
    h = build_single_excitation(Couplings([1.0, 1.0]))
    np.testing.assert_allclose(eigenvalues(h).eigenvalues, [-math.sqrt(2), 0, math.sqrt(2)], atol=1e-14)


def test_decoupled_dimers_example(backend):
    h = hamiltonian_for(ChainSpec(2, 5), 0.0)
    np.testing.assert_allclose(eigenvalues(h).eigenvalues, [-2, -2, 0, 2, 2], atol=1e-14)


def test_dense_matrix_layout():
    h = build_single_excitation(Couplings([0.5, -2.0]))
    assert h.to_dense().tolist() == [[0, 0.5, 0], [0.5, 0, -2.0], [0, -2.0, 0]]


@pytest.mark.parametrize("m", [2, 3, 5, 9, 21, 40])
def test_uniform_chain_cosine_band(backend, m):
    w = eigenvalues(build_single_excitation(Couplings(np.ones(m - 1)))).eigenvalues
    np.testing.assert_allclose(w, uniform_chain_eigs(m), atol=1e-12)


@settings(max_examples=40, deadline=None)
@given(m=st.integers(2, 8), theta=thetas, p=st.sampled_from([2, 3]), g0=st.floats(-1, 1))
def test_matches_characteristic_polynomial_roots(m, theta, p, g0):
    c = coupling_profile(ChainSpec(p, m, g0), theta)
    w = eigenvalues(build_single_excitation(c)).eigenvalues
    np.testing.assert_allclose(w, sturm_eigenvalues(c.values), atol=1e-10)


@settings(max_examples=40, deadline=None)
@given(m=st.integers(2, 40), theta=thetas, p=st.sampled_from([2, 3, 4]))
def test_spectrum_is_chirally_paired(m, theta, p):
    w = eigenvalues(hamiltonian_for(ChainSpec(p, m, 0.7), theta)).eigenvalues
    np.testing.assert_allclose(w, -w[::-1], atol=1e-12)
    if m % 2:
        assert np.min(np.abs(w)) <= 1e-12


@settings(max_examples=40, deadline=None)
@given(m=st.integers(2, 40), theta=thetas, p=st.sampled_from([2, 3]))
def test_trace_and_frobenius_sum_rules(m, theta, p):
    c = coupling_profile(ChainSpec(p, m, 0.3), theta)
    w = eigenvalues(build_single_excitation(c)).eigenvalues
    assert abs(np.sum(w)) <= 1e-12 * m
    assert np.sum(w**2) == pytest.approx(2 * np.sum(c.values**2), rel=1e-12, abs=1e-12)


def test_p2_gap_nine_qubits():
    gap = bulk_edge_gap(ChainSpec(2, 9))
    assert gap == pytest.approx(2 * math.cos(4 * math.pi / 10), abs=1e-6)
    assert edge_gap_at(ChainSpec(2, 9), math.pi / 2) == pytest.approx(gap, abs=1e-12)


def test_p2_gap_shrinks_with_length():
    gaps = [bulk_edge_gap(ChainSpec(2, m)) for m in (9, 15, 21, 31)]
    assert all(a > b for a, b in zip(gaps, gaps[1:]))
    # at theta = pi/2 the gap is 2 cos(pi (N) / (M+1)) of the uniform chain
    for m, g in zip((9, 15, 21, 31), gaps):
        assert g == pytest.approx(2 * math.cos(math.pi * (m - 1) / 2 / (m + 1)), abs=1e-9)


def test_p3_gap_positive_and_shrinking():
    gaps = [bulk_edge_gap(ChainSpec(3, m, 0.0)) for m in (8, 14, 20)]
    assert all(g > 0 for g in gaps)
    assert gaps[0] > gaps[1] > gaps[2]


def test_chiral_residual_zero_diagonal():
    h = hamiltonian_for(ChainSpec(2, 7), 0.3)
    assert chiral_residual(h) == 0.0


def test_chiral_residual_detects_onsite_term():
    h = TridiagonalHamiltonian([0, 0.25, 0], [1.0, 1.0])
    assert chiral_residual(h) == pytest.approx(0.5)


def test_eigenvector_for_zero_mode_and_errors():
    spec = ChainSpec(2, 9)
    h = hamiltonian_for(spec, 0.0)
    v = eigenvector_for(h, 0.0)
    np.testing.assert_allclose(np.abs(v.amplitudes), np.eye(9)[0], atol=1e-12)
    with pytest.raises(ContractError):
        eigenvector_for(h, 0.5)


def test_spectrum_sweep_shapes_and_disorder():
    spec = ChainSpec(2, 5)
    dis = DisorderRealization(0.1, [0.01, -0.02, 0.03, 0.0])
    out = spectrum_sweep(spec, [0.0, 1.0, 2.0], dis)
    assert len(out) == 3
    assert all(s.eigenvalues.shape == (5,) for s in out)
    with pytest.raises(ContractError):
        spectrum_sweep(spec, [])


def test_hamiltonian_shape_validation():
    with pytest.raises(ContractError):
        TridiagonalHamiltonian([0, 0], [1, 1])
