"""Closed-form ergodicity diagnostics for two-qubit gates.

Covers the correlation CPTP map M+ and its mixing rate for dual-unitary
gates, the ensemble search for the maximally mixing local dressing, and the
permutation-symmetric second-moment transfer matrix whose third eigenvalue
measures the approach to a 2-design.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from typing import Sequence, Union

import numpy as np

from .gates import (EP_MAX, Gate, cartan_gate, gate_invariants, is_dual_unitary,
                    reshuffle, w_local)

MAX_DESIGN_QUBITS = 16


def _as_matrix(g: Union[Gate, np.ndarray]) -> np.ndarray:
    return g.matrix if isinstance(g, Gate) else np.asarray(g, dtype=complex)


@dataclass
class MixingReport:
    """Spectrum of the single-gate correlation map M+.

    ``norm_sq`` is the squared Frobenius norm of M+, which equals
    1 + 3(1 - e_p) for dual-unitary gates.
    """

    eigenvalues: np.ndarray
    norm_sq: float

    @property
    def lambda1_abs(self) -> float:
        """Magnitude of the largest subleading eigenvalue."""
        return float(np.abs(self.eigenvalues[1]))

    @property
    def mu1(self) -> float:
        lam = self.lambda1_abs
        return float(np.inf) if lam <= 0 else float(-np.log(lam))


@dataclass
class DesignGapReport:
    W: np.ndarray
    transfer_eigs: np.ndarray

    @property
    def lambda3_abs(self) -> float:
        return float(np.abs(self.transfer_eigs[2]))


def _sort_by_magnitude(ev: np.ndarray) -> np.ndarray:
    order = np.lexsort((-ev.real, -np.abs(ev)))
    return ev[order]


def m_plus_matrix(Uprime: Union[Gate, np.ndarray]) -> np.ndarray:
    """4x4 superoperator of a -> (1/2) tr_1[U^dag (a (x) I) U], row-vectorized.

    Valid for dual-unitary U, where the map collapses to a single reshuffled
    product of the partially transposed gate.
    """
    U = _as_matrix(Uprime)
    UT2 = reshuffle(U, "T2")
    return reshuffle(UT2 @ UT2.conj().T, "R1") / 2.0


def m_plus(Uprime: Union[Gate, np.ndarray]) -> MixingReport:
    """Eigenvalues and mixing rate of the correlation map of a dual-unitary gate."""
    U = _as_matrix(Uprime)
    if not is_dual_unitary(U):
        raise ValueError("m_plus requires a dual-unitary gate")
    M = m_plus_matrix(U)
    ev = _sort_by_magnitude(np.linalg.eigvals(M))
    return MixingReport(eigenvalues=ev, norm_sq=float(np.linalg.norm(M, "fro") ** 2))


def max_mixing_rate_formula(e_p: float) -> float:
    """-(1/3) ln(1 - e_p / e_p_max), the predicted maximal mixing rate."""
    if not 0.0 <= e_p <= EP_MAX:
        raise ValueError(f"e_p must lie in [0, {EP_MAX}]")
    if e_p == EP_MAX:
        return float(np.inf)
    return float(-np.log(1.0 - e_p / EP_MAX) / 3.0)


def max_mixing_gate(e_p_target: float, ensemble_size: int = 1000,
                    rng: np.random.Generator | int | None = None):
    """Best mixing dual-unitary dressing at fixed entangling power.

    Samples ``ensemble_size`` local 4-tuples of the one-parameter family
    w(phi, psi) with uniform angles around the dual-unitary kernel at the
    requested e_p, and returns the dressed gate maximizing mu1 along with
    the sampled maximum.
    """
    if not 0.0 < e_p_target <= EP_MAX:
        raise ValueError(f"e_p_target must lie in (0, {EP_MAX}]")
    if ensemble_size < 1:
        raise ValueError("ensemble_size must be positive")
    rng = np.random.default_rng(rng)
    gamma = 0.5 * np.arccos(np.sqrt(1.5 * e_p_target))
    kernel = cartan_gate((np.pi / 4, np.pi / 4, gamma)).matrix
    best_mu, best_U = -np.inf, None
    for _ in range(ensemble_size):
        locs = [w_local(*rng.uniform(0, 2 * np.pi, 2)) for _ in range(4)]
        U = np.kron(locs[0], locs[1]) @ kernel @ np.kron(locs[2], locs[3])
        ev = np.sort(np.abs(np.linalg.eigvals(m_plus_matrix(U))))
        lam1 = ev[-2]
        mu = np.inf if lam1 <= 1e-300 else -np.log(lam1)
        if mu > best_mu:
            best_mu, best_U = mu, U
    return Gate(best_U, origin="max_mixing"), float(best_mu)


def _embed_two_site(op4: np.ndarray, n: int, a: int, b: int) -> np.ndarray:
    dim = 2 ** n
    T = np.tensordot(op4.reshape(2, 2, 2, 2),
                     np.eye(dim, dtype=complex).reshape([2] * n + [dim]),
                     axes=([2, 3], [a, b]))
    rest = [s for s in range(n) if s not in (a, b)]
    order = [0 if s == a else 1 if s == b else 2 + rest.index(s) for s in range(n)]
    return np.transpose(T, order + [n]).reshape(dim, dim)


def design_w_matrix(e_p: float, g_t: float) -> np.ndarray:
    """Two-site second-moment operator W in the {I,S} (x) {I,S} basis."""
    a = (2.0 / 3.0) * e_p
    b = 1.0 - (5.0 / 6.0) * e_p - g_t
    c = g_t - (5.0 / 6.0) * e_p
    return np.array([[1, 0, 0, 0],
                     [a, b, c, a],
                     [a, c, b, a],
                     [0, 0, 0, 1]], dtype=complex)


def design_transfer(n_qubits: int, e_p: float, g_t: float) -> DesignGapReport:
    """Brickwall second-moment transfer matrix on the {I,S}^N subspace.

    The even sublayer (with the periodic wrap bond) multiplies the odd
    sublayer; eigenvalues come sorted by descending magnitude, real part
    breaking ties.  The top two are unity; |lambda3| is the design gap.
    """
    if n_qubits < 2 or n_qubits % 2 != 0:
        raise ValueError("n_qubits must be an even integer >= 2")
    if n_qubits > MAX_DESIGN_QUBITS:
        raise ValueError(f"n_qubits capped at {MAX_DESIGN_QUBITS}")
    W = design_w_matrix(e_p, g_t)
    dim = 2 ** n_qubits
    odd = np.eye(dim, dtype=complex)
    for s in range(0, n_qubits, 2):
        odd = _embed_two_site(W, n_qubits, s, s + 1) @ odd
    even = np.eye(dim, dtype=complex)
    for s in range(1, n_qubits, 2):
        even = _embed_two_site(W, n_qubits, s, (s + 1) % n_qubits) @ even
    ev = _sort_by_magnitude(np.linalg.eigvals(even @ odd))
    return DesignGapReport(W=W, transfer_eigs=ev)


def solvable_gap_sweep(n_qubits: int, gate_list: Sequence[Gate]) -> list[tuple]:
    """(e_p, g_t, |lambda3|) per gate, sorted by entangling power."""
    rows = []
    for g in gate_list:
        inv = gate_invariants(_as_matrix(g))
        report = design_transfer(n_qubits, inv.e_p, inv.g_t)
        rows.append((inv.e_p, inv.g_t, report.lambda3_abs))
    rows.sort(key=lambda r: r[0])
    return rows


def sweep_to_csv(rows: Sequence[tuple], path, header=("e_p", "g_t", "lambda3"),
                 meta: dict | None = None) -> None:
    with open(path, "w", newline="") as fh:
        if meta:
            fh.write("# " + " ".join(f"{k}={v}" for k, v in meta.items()) + "\n")
        writer = csv.writer(fh)
        writer.writerow(header)
        for row in rows:
            writer.writerow([repr(x) if isinstance(x, float) else x for x in row])
