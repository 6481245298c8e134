import numpy as np
import pytest

from qrc_lab.ergodicity import (MAX_DESIGN_QUBITS, DesignGapReport,
                                MixingReport, design_transfer, design_w_matrix,
                                m_plus, m_plus_matrix, max_mixing_gate,
                                max_mixing_rate_formula, solvable_gap_sweep,
                                sweep_to_csv)
from qrc_lab.gates import (EP_MAX, I2, SWAP, dual_unitary_gate, gate_invariants,
                           haar_unitary, sample_solvable_batch, w_local)


def dress(kernel, rng):
    locs = [haar_unitary(2, rng) for _ in range(4)]
    return np.kron(locs[0], locs[1]) @ kernel @ np.kron(locs[2], locs[3])


def m_plus_cptp_oracle(U):
    """Row-vectorized superoperator of a -> (1/2) tr_1[U^dag (a (x) I) U]."""
    M = np.zeros((4, 4), dtype=complex)
    for j in range(4):
        E = np.zeros((2, 2), dtype=complex)
        E.flat[j] = 1
        out = U.conj().T @ np.kron(E, I2) @ U
        red = np.trace(out.reshape(2, 2, 2, 2), axis1=0, axis2=2) / 2
        M[:, j] = red.reshape(4)
    return M


class TestMPlus:
    def test_matches_cptp_oracle(self):
        rng = np.random.default_rng(0)
        for e_p in (0.2, 0.45, 2 / 3):
            U = dress(dual_unitary_gate(e_p).matrix, rng)
            assert np.allclose(m_plus_matrix(U), m_plus_cptp_oracle(U), atol=1e-12)

    def test_swap_non_mixing(self):
        rep = m_plus(SWAP)
        assert np.allclose(np.abs(rep.eigenvalues), 1.0, atol=1e-12)
        assert rep.mu1 == pytest.approx(0.0, abs=1e-12)
        assert rep.norm_sq == pytest.approx(4.0, abs=1e-10)

    def test_norm_identity_max_entangling(self):
        rng = np.random.default_rng(1)
        U = dress(dual_unitary_gate(2 / 3).matrix, rng)
        assert m_plus(U).norm_sq == pytest.approx(2.0, abs=1e-8)

    def test_norm_identity_grid(self):
        rng = np.random.default_rng(2)
        for _ in range(50):
            e_p = rng.uniform(0.0, EP_MAX)
            U = dress(dual_unitary_gate(e_p).matrix, rng)
            assert abs(m_plus(U).norm_sq - (1 + 3 * (1 - e_p))) < 1e-8

    def test_leading_eigenvalue_unity(self):
        rng = np.random.default_rng(3)
        for _ in range(20):
            U = dress(dual_unitary_gate(rng.uniform(0, EP_MAX)).matrix, rng)
            assert abs(abs(m_plus(U).eigenvalues[0]) - 1.0) < 1e-9

    def test_rejects_non_dual_unitary(self):
        cnot = np.eye(4, dtype=complex)[[0, 1, 3, 2]]
        with pytest.raises(ValueError):
            m_plus(cnot)

    def test_mean_lambda1_scaling(self):
        # mean |lambda_1| over random dressings follows f * sqrt(1 - e_p)
        rng = np.random.default_rng(4)
        grid = [0.1, 0.25, 0.4, 0.55]
        means = []
        for e_p in grid:
            kernel = dual_unitary_gate(e_p).matrix
            vals = []
            for _ in range(200):
                ev = np.sort(np.abs(np.linalg.eigvals(
                    m_plus_matrix(dress(kernel, rng)))))
                vals.append(ev[-2])
            means.append(np.mean(vals))
        x = np.sqrt(1 - np.array(grid))
        f = np.dot(x, means) / np.dot(x, x)
        resid = np.linalg.norm(means - f * x) / np.linalg.norm(means)
        assert resid < 0.05


class TestMaxMixing:
    def test_formula_values(self):
        assert max_mixing_rate_formula(0.0) == 0.0
        assert np.isinf(max_mixing_rate_formula(EP_MAX))
        val = max_mixing_rate_formula(0.4)
        assert val == pytest.approx(-np.log(1 - 0.4 / EP_MAX) / 3)

    def test_sampled_matches_formula(self):
        _, mu = max_mixing_gate(0.4, ensemble_size=400, rng=0)
        pred = max_mixing_rate_formula(0.4)
        assert abs(mu - pred) / pred < 0.05

    def test_returns_dual_unitary_gate_at_target_ep(self):
        gate, _ = max_mixing_gate(0.3, ensemble_size=50, rng=1)
        inv = gate_invariants(gate)
        assert abs(inv.e_p - 0.3) < 1e-9

    def test_range_checks(self):
        with pytest.raises(ValueError):
            max_mixing_gate(0.0)
        with pytest.raises(ValueError):
            max_mixing_gate(0.7)
        with pytest.raises(ValueError):
            max_mixing_rate_formula(-0.1)


class TestDesignTransfer:
    def test_w_matrix_structure(self):
        W = design_w_matrix(0.6, 0.5)
        a = 0.4
        assert np.allclose(W, [[1, 0, 0, 0], [a, 0, 0, a],
                               [a, 0, 0, a], [0, 0, 0, 1]], atol=1e-12)

    def test_haar_anchor(self):
        rep = design_transfer(6, 0.6, 0.5)
        assert abs(rep.lambda3_abs - 0.225) < 0.01

    def test_top_two_unity(self):
        for e_p, g_t in [(0.6, 0.5), (0.3, 0.25), (0.66, 0.55)]:
            ev = design_transfer(4, e_p, g_t).transfer_eigs
            assert abs(abs(ev[0]) - 1.0) < 1e-8
            assert abs(abs(ev[1]) - 1.0) < 1e-8

    def test_ep_zero_no_gap(self):
        rep = design_transfer(4, 0.0, 0.0)
        assert abs(rep.lambda3_abs - 1.0) < 1e-8

    def test_deterministic(self):
        a = design_transfer(6, 0.6, 0.5).transfer_eigs
        b = design_transfer(6, 0.6, 0.5).transfer_eigs
        assert np.array_equal(a, b)

    def test_guards(self):
        with pytest.raises(ValueError):
            design_transfer(5, 0.6, 0.5)
        with pytest.raises(ValueError):
            design_transfer(MAX_DESIGN_QUBITS + 2, 0.6, 0.5)


class TestSolvableSweep:
    def test_gap_trend(self):
        gates = sample_solvable_batch(40, rng=5)
        rows = solvable_gap_sweep(6, gates)
        haar = design_transfer(6, 0.6, 0.5).lambda3_abs
        assert rows == sorted(rows, key=lambda r: r[0])
        high = [r[2] for r in rows if r[0] > 0.6]
        assert high and all(l3 < haar for l3 in high)
        # the uniform-angle sampler concentrates above e_p ~ 0.5, so probe the
        # low end of the e_p = 1.2 g_t line directly
        for e_p in (0.1, 0.2, 0.29):
            assert design_transfer(6, e_p, e_p / 1.2).lambda3_abs > haar

    def test_duplicates_identical(self):
        g = sample_solvable_batch(1, rng=6)[0]
        rows = solvable_gap_sweep(4, [g, g])
        assert rows[0] == rows[1]

    def test_csv_export(self, tmp_path):
        rows = [(0.1, 0.0833, 0.9), (0.6, 0.5, 0.2)]
        path = tmp_path / "sweep.csv"
        sweep_to_csv(rows, path, meta={"n_qubits": 6})
        lines = path.read_text().splitlines()
        assert lines[0] == "# n_qubits=6"
        assert lines[1] == "e_p,g_t,lambda3"
        assert len(lines) == 4
