import numpy as np
import pytest

from qrc_lab.circuit import (BrickwallSpec, LocalsPolicy, all_zeros_density,
                             apply_two_site, build_layer, evolve,
                             layer_unitarity_defect, maximally_mixed_density,
                             pure_state_density, validate_density_matrix)
from qrc_lab.gates import SWAP, dual_unitary_gate, haar_unitary, w_local


def partial_trace_keep(rho, n, keep):
    """Marginal on one site, via an explicit einsum contraction."""
    T = rho.reshape([2] * (2 * n))
    row = [chr(97 + i) for i in range(n)]
    col = [row[i] if i != keep else chr(97 + n) for i in range(n)]
    spec = "".join(row + col) + "->" + row[keep] + col[keep]
    return np.einsum(spec, T)


class TestApplyTwoSite:
    def test_adjacent_pair_kron_oracle(self):
        rng = np.random.default_rng(0)
        g = haar_unitary(4, rng)
        n = 4
        M = np.eye(16, dtype=complex)
        assert np.allclose(apply_two_site(M, g, n, 0, 1), np.kron(g, np.eye(4)),
                           atol=1e-12)
        assert np.allclose(apply_two_site(M, g, n, 2, 3), np.kron(np.eye(4), g),
                           atol=1e-12)
        mid = np.kron(np.eye(2), np.kron(g, np.eye(2)))
        assert np.allclose(apply_two_site(M, g, n, 1, 2), mid, atol=1e-12)


class TestBuildLayer:
    def test_identity_template(self):
        U = build_layer(BrickwallSpec(4, np.eye(4, dtype=complex)))
        assert np.allclose(U, np.eye(16), atol=1e-12)

    def test_swap_layer_is_permutation(self):
        U = build_layer(BrickwallSpec(4, SWAP))
        A = np.abs(U)
        assert np.allclose(A @ A.T, np.eye(16), atol=1e-12)
        assert np.all((np.isclose(A, 0) | np.isclose(A, 1)))
        # oracle: track basis vectors through the swap network by hand
        # odd swaps (0,1),(2,3) then even swaps (1,2),(3,0)
        def site_perm(bits):
            b = list(bits)
            b[0], b[1] = b[1], b[0]
            b[2], b[3] = b[3], b[2]
            b[1], b[2] = b[2], b[1]
            b[3], b[0] = b[0], b[3]
            return tuple(b)
        for idx in range(16):
            bits = tuple((idx >> (3 - i)) & 1 for i in range(4))
            out = site_perm(bits)
            j = sum(v << (3 - i) for i, v in enumerate(out))
            assert np.isclose(U[j, idx], 1.0)

    def test_unitarity_all_policies(self):
        kernel = dual_unitary_gate(0.5)
        fixed = tuple(w_local(0.3 * i, 0.7 * i) for i in range(4))
        specs = [
            BrickwallSpec(6, kernel),
            BrickwallSpec(6, kernel, locals_policy=LocalsPolicy.FLOQUET_FIXED,
                          fixed_locals=fixed),
            BrickwallSpec(6, kernel,
                          locals_policy=LocalsPolicy.RESAMPLE_PER_APPLICATION),
        ]
        for spec in specs:
            assert layer_unitarity_defect(spec, rng=1) < 1e-10

    def test_floquet_deterministic(self):
        kernel = dual_unitary_gate(0.4)
        fixed = tuple(w_local(i, 2 * i) for i in range(4))
        spec = BrickwallSpec(6, kernel, locals_policy=LocalsPolicy.FLOQUET_FIXED,
                             fixed_locals=fixed)
        assert np.array_equal(build_layer(spec), build_layer(spec))

    def test_resample_varies(self):
        kernel = dual_unitary_gate(0.4)
        spec = BrickwallSpec(4, kernel,
                             locals_policy=LocalsPolicy.RESAMPLE_PER_APPLICATION)
        rng = np.random.default_rng(2)
        assert not np.allclose(build_layer(spec, rng), build_layer(spec, rng))

    def test_per_slot_templates(self):
        rng = np.random.default_rng(3)
        gates = [haar_unitary(4, rng) for _ in range(4)]
        U = build_layer(BrickwallSpec(4, gates))
        assert np.max(np.abs(U.conj().T @ U - np.eye(16))) < 1e-10

    def test_odd_qubits_rejected(self):
        with pytest.raises(ValueError):
            BrickwallSpec(5, SWAP)

    def test_floquet_needs_locals(self):
        with pytest.raises(ValueError):
            BrickwallSpec(4, SWAP, locals_policy=LocalsPolicy.FLOQUET_FIXED)


class TestEvolve:
    def test_identity_noop(self):
        rho = all_zeros_density(3)
        assert np.allclose(evolve(rho, np.eye(8)), rho, atol=1e-15)

    def test_purity_and_trace_preserved(self):
        rng = np.random.default_rng(4)
        A = rng.standard_normal((8, 8)) + 1j * rng.standard_normal((8, 8))
        rho = A @ A.conj().T
        rho /= np.trace(rho)
        U = haar_unitary(8, rng)
        out = evolve(rho, U)
        assert abs(np.trace(out) - np.trace(rho)) < 1e-12
        assert abs(np.trace(out @ out) - np.trace(rho @ rho)) < 1e-12
        validate_density_matrix(out)

    def test_pure_state_purity(self):
        rng = np.random.default_rng(5)
        rho = evolve(all_zeros_density(4), haar_unitary(16, rng))
        assert abs(np.real(np.trace(rho @ rho)) - 1.0) < 1e-10

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError):
            evolve(all_zeros_density(2), np.eye(8))


class TestDensityHelpers:
    def test_all_zeros(self):
        rho = all_zeros_density(3)
        validate_density_matrix(rho)
        assert rho[0, 0] == 1.0

    def test_maximally_mixed(self):
        validate_density_matrix(maximally_mixed_density(3))

    def test_pure_state_density(self):
        psi = np.array([1, 1j]) / np.sqrt(2)
        validate_density_matrix(pure_state_density(psi))

    def test_validation_rejects(self):
        bad = np.eye(4, dtype=complex)  # trace 4
        with pytest.raises(ValueError):
            validate_density_matrix(bad)
        with pytest.raises(ValueError):
            validate_density_matrix(np.arange(16.0).reshape(4, 4))


class TestLightCone:
    def test_influence_respects_causal_cone(self):
        n = 6
        rng = np.random.default_rng(6)
        kernel = dual_unitary_gate(0.5).matrix
        locs = [haar_unitary(2, rng) for _ in range(4)]
        gate = np.kron(locs[0], locs[1]) @ kernel @ np.kron(locs[2], locs[3])
        U = build_layer(BrickwallSpec(n, gate))
        rho_a = all_zeros_density(n)
        psi = np.zeros(2 ** n, dtype=complex)
        psi[0] = np.sqrt(0.5)
        psi[1 << (n - 1)] = np.sqrt(0.5)  # flip site 0
        rho_b = pure_state_density(psi)
        # one layer: sites 0,1,2 and the wrap neighbour 5 are inside the cone
        # of site 0; site 3 is not
        ra, rb = evolve(rho_a, U), evolve(rho_b, U)
        m_a = partial_trace_keep(ra, n, 3)
        m_b = partial_trace_keep(rb, n, 3)
        assert np.max(np.abs(m_a - m_b)) < 1e-12
        # after a second layer the cone covers every site
        ra2, rb2 = evolve(ra, U), evolve(rb, U)
        m_a2 = partial_trace_keep(ra2, n, 3)
        m_b2 = partial_trace_keep(rb2, n, 3)
        assert np.max(np.abs(m_a2 - m_b2)) > 1e-12
