"""MPO builders checked element-by-element against dense Hamiltonians."""

import numpy as np
import pytest

from conftest import SZ, dense_hamiltonian, kron_site
from tnkit import (
    build_exp_decay,
    build_heisenberg,
    build_ising_nn,
    build_ising_nnn,
    mpo_expectation,
    mpo_to_dense,
    mps_from_state_vector,
    product_mps,
    scale,
    two_site_matrix,
)
from tnkit.errors import BadXi, TooFewSites

rng = np.random.default_rng(404)


def test_ising_nn_matches_dense_for_many_sizes():
    for n in range(2, 8):
        got = mpo_to_dense(build_ising_nn(n, j=1.3))
        np.testing.assert_allclose(got, dense_hamiltonian("ising_nn", n, j=1.3), atol=1e-12)


def test_ising_nnn_matches_dense():
    for n in (3, 5, 6):
        got = mpo_to_dense(build_ising_nnn(n, j1=0.9, j2=-0.4))
        np.testing.assert_allclose(got, dense_hamiltonian("ising_nnn", n, j1=0.9, j2=-0.4), atol=1e-12)


def test_nnn_with_zero_j2_reduces_to_nn():
    a = mpo_to_dense(build_ising_nnn(6, j1=0.7, j2=0.0))
    b = mpo_to_dense(build_ising_nn(6, j=0.7))
    np.testing.assert_allclose(a, b, atol=1e-12)


def test_heisenberg_matches_dense():
    for n in (2, 4, 7):
        got = mpo_to_dense(build_heisenberg(n, j=-1.0))
        np.testing.assert_allclose(got, dense_hamiltonian("heisenberg", n, j=-1.0), atol=1e-12)


def test_exp_decay_matches_dense():
    got = mpo_to_dense(build_exp_decay(7, xi=2.0, j=1.1))
    np.testing.assert_allclose(got, dense_hamiltonian("exp_decay", 7, xi=2.0, j=1.1), atol=1e-12)


def test_exp_decay_coupling_strength_read_off_directly():
    # project out one coupling coefficient: <ZiZj, H> / <ZiZj, ZiZj>
    n, xi, j = 8, 1.5, 0.8
    h = mpo_to_dense(build_exp_decay(n, xi=xi, j=j))
    for i, k in ((0, 1), (2, 5), (0, 7)):
        string = kron_site(SZ, i, n) @ kron_site(SZ, k, n)
        coeff = np.trace(string @ h).real / np.trace(string @ string).real
        assert np.isclose(coeff, -j * np.exp(-abs(i - k) / xi), atol=1e-12)


def test_ising_boundary_vectors():
    m = build_ising_nn(4, 1.0)
    np.testing.assert_allclose(m.left_bvec, [0, 0, 1])
    np.testing.assert_allclose(m.right_bvec, [1, 0, 0])


def test_two_site_matrix_places_left_op_on_fast_index():
    # basis order |s1 s0>: index = s0 + 2*s1, so the LEFT operator acts on
    # the faster (rightmost-in-kron) slot
    got = two_site_matrix(SZ, 2.0 * SZ)
    np.testing.assert_allclose(got, np.kron(2.0 * SZ, SZ))
    assert np.allclose(np.diag(got), [0.5, -0.5, -0.5, 0.5])


def test_expectation_all_up_ising():
    # every ZZ bond contributes -J/4 in |up...up>
    up = np.array([1.0, 0.0])
    m = product_mps([up] * 4)
    val = mpo_expectation(m, build_ising_nn(4, j=1.0))
    assert np.isclose(val, -3.0 / 4.0, atol=1e-12)


def test_expectation_matches_dense_quadratic_form():
    n = 6
    psi = rng.standard_normal(2**n) + 1j * rng.standard_normal(2**n)
    psi /= np.linalg.norm(psi)
    m = mps_from_state_vector(psi, 2)
    for op, h in (
        (build_heisenberg(n, j=-1.0), dense_hamiltonian("heisenberg", n, j=-1.0)),
        (build_ising_nnn(n, j1=1.0, j2=0.5), dense_hamiltonian("ising_nnn", n, j1=1.0, j2=0.5)),
    ):
        assert np.isclose(mpo_expectation(m, op), np.vdot(psi, h @ psi), atol=1e-10)


def test_expectation_is_a_raw_quadratic_form():
    # no normalization is applied: scaling the state scales the value by |c|^2
    psi = rng.standard_normal(4) + 1j * rng.standard_normal(4)
    psi /= np.linalg.norm(psi)
    m = mps_from_state_vector(psi, 2)
    doubled = mps_from_state_vector(psi, 2)
    scaled = type(doubled)(
        sites=(scale(doubled.sites[0], 2.0), doubled.sites[1]),
        center=doubled.center,
        phys_dim=2,
    )
    op = build_ising_nn(2, j=1.0)
    assert np.isclose(mpo_expectation(scaled, op), 4.0 * mpo_expectation(m, op), atol=1e-12)


def test_two_site_ising_is_diagonal():
    h = mpo_to_dense(build_ising_nn(2, j=1.0))
    np.testing.assert_allclose(h, np.diag([-0.25, 0.25, 0.25, -0.25]), atol=1e-14)


def test_bad_arguments():
    with pytest.raises(BadXi):
        build_exp_decay(6, xi=0.0)
    with pytest.raises(BadXi):
        build_exp_decay(6, xi=-2.0)
    with pytest.raises(TooFewSites):
        build_ising_nn(1)
    with pytest.raises(TooFewSites):
        build_heisenberg(0)


if __name__ == "__main__":
    pytest.main([__file__, "-v"])
