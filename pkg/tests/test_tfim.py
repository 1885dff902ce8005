"""TFIM Hamiltonians, the operator-space Liouvillian, and quantum Lanczos."""

import numpy as np
import pytest

from kryf.chain import build_tridiagonal
from kryf.exceptions import DimensionTooLarge, LanczosBreakdown
from kryf.tfim import (
    PAULI_X,
    PAULI_Y,
    PAULI_Z,
    TfimParams,
    build_hamiltonian,
    initial_operator,
    lanczos_generate,
    liouvillian_apply,
    sample_tfim,
)


def hs_inner(a, b):
    """(A|B) = Tr(A^dag B) / Tr(1)."""
    return np.trace(a.conj().T @ b) / a.shape[0]


class TestHamiltonian:
    def test_ising_point_is_zz(self):
        # g = h = 0 leaves only the Z1 Z2 coupling; oracle: 4x4 diagonalization
        ham = build_hamiltonian(TfimParams(L=2, g=0.0, h=0.0))
        np.testing.assert_array_equal(ham, np.kron(PAULI_Z, PAULI_Z).real)
        np.testing.assert_allclose(np.sort(np.linalg.eigvalsh(ham)), [-1, -1, 1, 1],
                                   atol=1e-12)

    def test_traceless(self):
        ham = build_hamiltonian(TfimParams(L=4, g=1.3, h=0.4))
        assert abs(np.trace(ham)) < 1e-12

    def test_hermitian(self):
        ham = build_hamiltonian(TfimParams(L=3, g=1.7, h=0.9))
        np.testing.assert_array_equal(ham - ham.conj().T, 0.0)

    def test_open_boundary(self):
        # L=2 with J only: no wrap-around term, energy gap structure of Z1 Z2
        ham = build_hamiltonian(TfimParams(L=2, g=0.0, h=0.5))
        expected = np.kron(PAULI_Z, PAULI_Z).real + 0.5 * (
            np.kron(PAULI_Z, np.eye(2)) + np.kron(np.eye(2), PAULI_Z)
        )
        np.testing.assert_allclose(ham, expected, atol=1e-14)

    def test_dimension_limit(self):
        with pytest.raises(DimensionTooLarge):
            build_hamiltonian(TfimParams(L=11, g=1.0, h=0.5))


class TestLiouvillian:
    def test_hamiltonian_commutes_with_itself(self):
        ham = build_hamiltonian(TfimParams(L=3, g=1.2, h=0.3))
        np.testing.assert_array_equal(liouvillian_apply(ham, ham), 0.0)

    def test_single_site_pauli_algebra(self):
        # [gX, Z] = -2ig Y
        g = 0.7
        out = liouvillian_apply(g * PAULI_X.astype(complex), PAULI_Z.astype(complex))
        np.testing.assert_allclose(out, -2j * g * PAULI_Y, atol=1e-14)

    def test_linearity(self):
        rng = np.random.default_rng(0)
        ham = build_hamiltonian(TfimParams(L=2, g=1.5, h=0.8))
        o1 = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
        o2 = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
        a, b = 1.3, -0.6 + 0.2j
        lhs = liouvillian_apply(ham, a * o1 + b * o2)
        rhs = a * liouvillian_apply(ham, o1) + b * liouvillian_apply(ham, o2)
        np.testing.assert_allclose(lhs, rhs, atol=1e-12)

    def test_superoperator_hermiticity(self):
        # (A | L B) = (L A | B) under the HS inner product
        rng = np.random.default_rng(1)
        ham = build_hamiltonian(TfimParams(L=3, g=1.1, h=0.6))
        for _ in range(5):
            a = rng.normal(size=(8, 8)) + 1j * rng.normal(size=(8, 8))
            b = rng.normal(size=(8, 8)) + 1j * rng.normal(size=(8, 8))
            lhs = hs_inner(a, liouvillian_apply(ham, b))
            rhs = hs_inner(liouvillian_apply(ham, a), b)
            assert abs(lhs - rhs) < 1e-10


class TestLanczosGenerate:
    def test_first_coefficient_is_2g(self):
        # A_1 = [H, Z_1] = -2ig Y_1, whose HS norm is 2g
        for seed in range(5):
            params = sample_tfim(seed, L=4)
            b, _ = lanczos_generate(params, 3)
            np.testing.assert_allclose(b[0], 2.0 * params.g, atol=1e-10)

    def test_basis_orthonormality(self):
        params = sample_tfim(7, L=4)
        _, basis = lanczos_generate(params, 20)
        gram = basis.conj() @ basis.T
        assert np.abs(gram - np.eye(gram.shape[0])).max() < 1e-10

    def test_projected_liouvillian_is_tridiagonal(self):
        params = sample_tfim(3, L=3)
        t_steps = 12
        b, basis = lanczos_generate(params, t_steps)
        ham = build_hamiltonian(params)
        dim = ham.shape[0]
        applied = np.empty_like(basis)
        for i in range(basis.shape[0]):
            applied[i] = liouvillian_apply(ham, basis[i].reshape(dim, dim)).reshape(-1)
        projected = (basis.conj() @ applied.T).real
        np.testing.assert_allclose(projected, build_tridiagonal(b), atol=1e-8)

    def test_growing_trend(self):
        # chaotic parameters: linear-fit slope over n in [5, T] is positive
        params = sample_tfim(11, L=5)
        b, _ = lanczos_generate(params, 25)
        n = np.arange(5, 26)
        slope = np.polyfit(n, b[4:], 1)[0]
        assert slope > 0

    def test_breakdown_on_exhausted_space(self):
        # L=1 with H = gX: Krylov space of Z is 2-dimensional (Z, Y), so the
        # recursion must break down quickly
        params = TfimParams(L=1, g=1.0, h=0.0)
        with pytest.raises(LanczosBreakdown):
            lanczos_generate(params, 10)

    def test_initial_operator_norm(self):
        op = initial_operator(5)
        assert abs(hs_inner(op, op) - 1.0) < 1e-12


class TestSampling:
    def test_ranges(self):
        for seed in range(200):
            p = sample_tfim(seed, L=8)
            assert 1.0 <= p.g <= 2.0
            assert 0.1 <= p.h <= 1.0
            assert p.J == 1.0

    def test_deterministic(self):
        assert sample_tfim(42, L=6) == sample_tfim(42, L=6)

    def test_seeds_differ(self):
        assert sample_tfim(1, L=6) != sample_tfim(2, L=6)
