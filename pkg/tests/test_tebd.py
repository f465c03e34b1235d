"""Imaginary- and real-time evolution against exact propagators and ED."""

import numpy as np
import pytest
from scipy.linalg import expm

from conftest import dense_hamiltonian
from tnkit import (
    TruncationSpec,
    bond_gate,
    build_heisenberg,
    build_ising_nn,
    evolve_real_time,
    find_ground_state,
    initial_product_state,
    measure_energy,
    mps_from_state_vector,
    pair_hamiltonian,
    solve_dense,
    to_state_vector,
)
from tnkit.errors import UnsupportedModel

rng = np.random.default_rng(909)


def test_pair_hamiltonian_matches_two_site_dense():
    np.testing.assert_allclose(pair_hamiltonian("ising_nn", 1.0), dense_hamiltonian("ising_nn", 2, j=1.0), atol=1e-14)
    np.testing.assert_allclose(
        pair_hamiltonian("heisenberg", -1.0), dense_hamiltonian("heisenberg", 2, j=-1.0), atol=1e-14
    )


def test_ising_gate_is_diagonal_with_known_entries():
    tau, j = 0.3, 1.0
    g = bond_gate("ising_nn", j, tau, "imaginary").to_ndarray()
    # h = -J SzSz = diag(-J/4, J/4, J/4, -J/4), so exp(-tau h) flips the signs
    lo, hi = np.exp(-tau * j / 4.0), np.exp(tau * j / 4.0)
    np.testing.assert_allclose(g, np.diag([hi, lo, lo, hi]), atol=1e-14)


def test_gate_matches_scipy_expm():
    for model, j in (("ising_nn", 1.0), ("heisenberg", -1.0)):
        h = pair_hamiltonian(model, j)
        np.testing.assert_allclose(
            bond_gate(model, j, 0.17, "imaginary").to_ndarray(), expm(-0.17 * h), atol=1e-10
        )
        np.testing.assert_allclose(
            bond_gate(model, j, 0.17, "real").to_ndarray(), expm(-0.17j * h), atol=1e-10
        )


def test_gate_mode_is_validated():
    with pytest.raises(ValueError):
        bond_gate("ising_nn", 1.0, 0.1, "sideways")


def test_long_range_models_are_refused():
    for model in ("ising_nnn", "exp_decay", "xyz"):
        with pytest.raises(UnsupportedModel):
            pair_hamiltonian(model)
    with pytest.raises(UnsupportedModel):
        find_ground_state("exp_decay", 6)


def test_initial_states():
    neel = to_state_vector(initial_product_state("heisenberg", 4))
    want = np.zeros(16)
    want[0b1010] = 1.0  # |up down up down>: up at site 0, site 0 is bit 0
    np.testing.assert_allclose(neel, want)
    plus = to_state_vector(initial_product_state("ising_nn", 3))
    np.testing.assert_allclose(plus, np.full(8, 2.0**-1.5), atol=1e-14)


def test_ising_ferromagnet_converges_to_aligned_energy():
    n = 8
    rep = find_ground_state("ising_nn", n, j=1.0, spec=TruncationSpec(chi_max=8))
    assert rep.converged
    assert np.isclose(rep.energy, -(n - 1) / 4.0, atol=1e-6)


def test_heisenberg_matches_exact_diagonalization():
    n = 8
    ref = solve_dense(build_heisenberg(n, j=-1.0), n_states=1).energies[0]
    rep = find_ground_state("heisenberg", n, j=-1.0, spec=TruncationSpec(chi_max=32))
    assert rep.converged
    assert abs(rep.energy - ref) / abs(ref) < 1e-6
    # the trace starts from the seed state's energy and ends at the result
    assert rep.energy_trace[-1] == rep.energy
    assert rep.tau_trace[0] == 0.0
    assert len(rep.energy_trace) == rep.n_sweeps + 1


def test_zero_sweeps_returns_the_seed_state():
    rep = find_ground_state("heisenberg", 4, j=-1.0, max_sweeps_per_tau=0)
    assert not rep.converged
    assert rep.n_sweeps == 0
    # Neel expectation of the AFM chain: 3 bonds x (-J/4) with J = -1
    assert np.isclose(rep.energy, -0.75)
    assert len(rep.energy_trace) == 1


def test_energy_decreases_monotonically_in_imaginary_time():
    rep = find_ground_state("heisenberg", 6, j=-1.0, spec=TruncationSpec(chi_max=16), schedule=(0.1,), energy_tol=1e-8)
    diffs = np.diff(rep.energy_trace)
    assert (diffs < 1e-10).all()


def test_real_time_evolution_conserves_energy_and_norm():
    n = 6
    state = initial_product_state("heisenberg", n)
    rep = evolve_real_time(state, "heisenberg", j=-1.0, dt=0.02, n_steps=30, spec=TruncationSpec(chi_max=32))
    # one trace row per completed step
    np.testing.assert_allclose(rep.times, 0.02 * np.arange(1, 31), atol=1e-12)
    e0 = measure_energy(state, build_heisenberg(n, j=-1.0))
    e = np.asarray(rep.energy_trace)
    assert np.abs(e - e0).max() < 1e-6  # energy is conserved by unitaries
    norms = np.asarray(rep.norm_trace)
    assert np.abs(norms - 1.0).max() < 1e-8
    assert rep.max_discarded_weight < 1e-12


def test_real_time_matches_exact_propagator_for_two_sites():
    # with a single bond there is no Trotter splitting at all: one sweep is
    # the exact propagator, so agreement must hold to round-off
    psi = rng.standard_normal(4) + 1j * rng.standard_normal(4)
    psi /= np.linalg.norm(psi)
    state = mps_from_state_vector(psi, 2)
    h = dense_hamiltonian("heisenberg", 2, j=-1.0)
    rep = evolve_real_time(state, "heisenberg", j=-1.0, dt=0.1, n_steps=5)
    np.testing.assert_allclose(to_state_vector(rep.state), expm(-0.5j * h) @ psi, atol=1e-10)


def test_real_time_trotter_error_scales_with_dt():
    n = 4
    psi0 = to_state_vector(initial_product_state("heisenberg", n))
    h = dense_hamiltonian("heisenberg", n, j=-1.0)
    t_final = 0.4
    errs = []
    for dt in (0.1, 0.05, 0.025):
        state = initial_product_state("heisenberg", n)
        rep = evolve_real_time(state, "heisenberg", j=-1.0, dt=dt, n_steps=round(t_final / dt))
        exact = expm(-1j * t_final * h) @ psi0
        errs.append(np.linalg.norm(to_state_vector(rep.state) - exact))
    # halving dt must shrink the error by at least a factor of two
    assert errs[0] / errs[1] > 2.0
    assert errs[1] / errs[2] > 2.0


def test_measure_energy_normalizes():
    state = initial_product_state("ising_nn", 4)
    h = build_ising_nn(4, j=1.0)
    assert np.isclose(measure_energy(state, h), 0.0, atol=1e-12)  # |+> has <SzSz> = 0


if __name__ == "__main__":
    pytest.main([__file__, "-v"])
