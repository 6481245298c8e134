"""Operator-space Krylov analysis of brickwall circuit dynamics.

The Arnoldi construction orthogonalizes the Heisenberg orbit of an initial
observable under the Hilbert-Schmidt inner product; the resulting b_t ladder,
tridiagonal-style coefficients, and Krylov complexity diagnose how close the
dynamics sits to the dual-unitary point.
"""

from __future__ import annotations

import csv
import json
import warnings
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .gates import PAULI_Z

TERMINATION_TOL = 1e-12
REORTH_WARN_THRESHOLD = 1e-6


def hs_inner(A: np.ndarray, B: np.ndarray) -> complex:
    """Hilbert-Schmidt inner product tr(A^dag B)."""
    return complex(np.vdot(A, B))


def single_site_z(n_qubits: int, site: int = 0) -> np.ndarray:
    """Pauli Z acting on one site of an N-qubit register."""
    if not 0 <= site < n_qubits:
        raise ValueError("site out of range")
    op = np.ones(1, dtype=complex)
    for i in range(n_qubits):
        op = np.kron(op, np.diag(PAULI_Z) if i == site else np.ones(2))
    return np.diag(op)


@dataclass
class KrylovRecord:
    """Output of the Arnoldi iteration on an operator orbit.

    ``basis`` rows are the flattened orthonormal Krylov vectors; ``betas[t]``
    holds the projections of the step-t evolved operator onto the basis built
    so far, so complexity and coefficient curves can be recovered without
    re-running the dynamics.
    """

    basis: np.ndarray
    arnoldi_b: np.ndarray
    betas: list = field(default_factory=list)
    terminated_at: Optional[int] = None
    max_reorth_correction: float = 0.0

    @property
    def n_basis(self) -> int:
        return self.basis.shape[0]

    def gram_defect(self) -> float:
        G = self.basis.conj() @ self.basis.T
        return float(np.max(np.abs(G - np.eye(self.n_basis))))

    def to_csv(self, path, U_res: Optional[np.ndarray] = None,
               meta: Optional[dict] = None) -> None:
        """Columns (t, b_t, a_t, c_t, K_C^t); metadata as a comment line."""
        K_C, _ = complexity_curve(self)
        if U_res is not None:
            a_n, _, c_n = superop_coeffs(self, U_res)
        else:
            a_n = c_n = np.full(self.n_basis, np.nan)
        with open(path, "w", newline="") as fh:
            if meta:
                fh.write("# " + " ".join(f"{k}={v}" for k, v in meta.items()) + "\n")
            writer = csv.writer(fh)
            writer.writerow(["t", "b_t", "a_t", "c_t", "K_C_t"])
            writer.writerow([0, "", repr(abs(a_n[0])) if U_res is not None else "",
                             repr(abs(c_n[0])) if U_res is not None else "", repr(0.0)])
            for t in range(1, len(self.arnoldi_b) + 1):
                a = repr(abs(a_n[t])) if U_res is not None and t < self.n_basis else ""
                c = repr(abs(c_n[t])) if U_res is not None and t < self.n_basis else ""
                kc = repr(K_C[t]) if t < len(K_C) else ""
                writer.writerow([t, repr(self.arnoldi_b[t - 1]), a, c, kc])


def max_krylov_dim(dim: int) -> int:
    """K = d^2 - d + 1 for the orbit of a traceless operator."""
    return dim * dim - dim + 1


def arnoldi_iterate(U_res: np.ndarray, O0: np.ndarray,
                    max_steps: int) -> KrylovRecord:
    """Arnoldi iteration on the Heisenberg orbit O_t = U^dag O_{t-1} U.

    Each evolved operator is orthogonalized (with one re-orthogonalization
    pass) against every prior basis vector; b_t is the norm of the remainder.
    Iteration stops early once b_t underflows the termination tolerance.
    """
    U_res = np.asarray(U_res, dtype=complex)
    d = U_res.shape[0]
    cap = max_krylov_dim(d)
    if max_steps > cap:
        raise ValueError(f"max_steps {max_steps} exceeds the cap K = {cap}")
    O0 = np.asarray(O0, dtype=complex)
    norm0 = np.linalg.norm(O0)
    if norm0 == 0:
        raise ValueError("initial operator must be nonzero")
    O0 = O0 / norm0

    basis = np.empty((max_steps + 1, d * d), dtype=complex)
    basis[0] = O0.reshape(-1)
    n_basis = 1
    cur = O0.copy()
    bs = []
    betas = [np.array([1.0 + 0j])]
    terminated = None
    worst_correction = 0.0
    Udag = U_res.conj().T
    for t in range(1, max_steps + 1):
        cur = Udag @ cur @ U_res
        v = cur.reshape(-1).copy()
        B = basis[:n_basis]
        proj = B.conj() @ v
        v -= B.T @ proj
        proj2 = B.conj() @ v
        v -= B.T @ proj2
        correction = float(np.linalg.norm(proj2))
        worst_correction = max(worst_correction, correction)
        b = float(np.linalg.norm(v))
        bs.append(b)
        betas.append(proj + proj2)
        if b < TERMINATION_TOL:
            terminated = t
            break
        basis[n_basis] = v / b
        n_basis += 1
    if worst_correction > REORTH_WARN_THRESHOLD:
        warnings.warn(f"re-orthogonalization correction reached {worst_correction:.2e}",
                      RuntimeWarning)
    return KrylovRecord(basis=basis[:n_basis].copy(),
                        arnoldi_b=np.array(bs),
                        betas=betas,
                        terminated_at=terminated,
                        max_reorth_correction=worst_correction)


def superop_coeffs(record: KrylovRecord, U_res: np.ndarray):
    """(a_n, b_n, c_n) matrix elements of the conjugation superoperator.

    a_n = <O_n|U|O_n>, b_n = <O_n|U|O_{n-1}>, c_n = <O_0|U|O_n> where the
    superoperator sends O to U^dag O U.
    """
    if record.n_basis < 2:
        raise ValueError("record must hold at least two basis vectors")
    d = int(round(np.sqrt(record.basis.shape[1])))
    Udag = np.asarray(U_res).conj().T
    evolved = np.empty_like(record.basis)
    for n in range(record.n_basis):
        O = record.basis[n].reshape(d, d)
        evolved[n] = (Udag @ O @ np.asarray(U_res)).reshape(-1)
    a_n = np.einsum("ij,ij->i", record.basis.conj(), evolved)
    b_n = np.empty(record.n_basis, dtype=complex)
    b_n[0] = np.nan
    b_n[1:] = np.einsum("ij,ij->i", record.basis[1:].conj(), evolved[:-1])
    c_n = record.basis[0].conj() @ evolved.T
    return a_n, b_n, c_n


def complexity_curve(record: KrylovRecord, saturation_fraction: float = 0.2):
    """K_C^t = sum_n n |beta_{n,t}|^2 and its late-time saturation mean.

    The evolved state at each step is re-expressed in the stored basis and
    normalized before weighting, so early exact-growth steps give K_C^t = t.
    Saturation is the mean over the final fraction of computed steps.
    """
    T = len(record.betas)
    K_C = np.zeros(T)
    for t, beta in enumerate(record.betas):
        coeffs = np.abs(np.asarray(beta)) ** 2
        if t < len(record.arnoldi_b) + 1 and t >= 1 and t <= record.n_basis - 1:
            # include the weight landed on the newly generated direction
            full = np.zeros(t + 1)
            full[:len(coeffs)] = coeffs
            full[t] += record.arnoldi_b[t - 1] ** 2
            coeffs = full
        total = coeffs.sum()
        if total > 0:
            coeffs = coeffs / total
        K_C[t] = np.dot(np.arange(len(coeffs)), coeffs)
    tail = max(1, int(np.ceil(saturation_fraction * T)))
    return K_C, float(np.mean(K_C[-tail:]))


def krylov_observability(evolved_ops: Sequence[Sequence[np.ndarray]],
                         V: int, rank_tol: float = 1e-10) -> float:
    """Total Krylov observability sum_i p_i over per-observable orbits.

    p_i adds 1 - F between successive operators over the first R_i steps,
    where F is the normalized Hilbert-Schmidt overlap magnitude and R_i caps
    at min(V, dimension of the linearly independent span).
    """
    total = 0.0
    for seq in evolved_ops:
        mats = [np.asarray(A, dtype=complex) for A in seq]
        if len(mats) < 2:
            continue
        flat = np.array([A.reshape(-1) for A in mats])
        rank = np.linalg.matrix_rank(flat, tol=rank_tol)
        R_i = min(V, rank)
        p = 0.0
        for k in range(1, R_i + 1):
            if k >= len(mats):
                break
            A, B = flat[k], flat[k - 1]
            na, nb = np.linalg.norm(A), np.linalg.norm(B)
            F = abs(np.vdot(A, B)) / (na * nb) if na > 0 and nb > 0 else 0.0
            p += 1.0 - F
        total += p
    return total
