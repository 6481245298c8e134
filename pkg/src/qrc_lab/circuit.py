"""Brickwall circuit assembly and density-matrix evolution.

A single timestep applies the odd-bond sublayer (sites (1,2), (3,4), ...)
followed by the even-bond sublayer, which carries the periodic wrap bond.
Everything is dense; systems up to N ~ 10 qubits are supported.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Optional, Sequence, Union

import numpy as np

from .gates import Gate, haar_unitary, unitarity_defect


class LocalsPolicy(Enum):
    NONE = "none"
    FLOQUET_FIXED = "floquet_fixed"
    RESAMPLE_PER_APPLICATION = "resample_per_application"


@dataclass
class BrickwallSpec:
    """Recipe for the single-timestep reservoir unitary U_res.

    ``template`` is the two-qubit kernel; a sequence of kernels assigns one
    gate per bond slot (odd bonds first, then even bonds including the wrap).
    ``FLOQUET_FIXED`` attaches the same local 4-tuple at every slot, while
    ``RESAMPLE_PER_APPLICATION`` draws fresh independent Haar locals for every
    slot on every call to :func:`build_layer`.
    """

    n_qubits: int
    template: Union[Gate, np.ndarray, Sequence]
    locals_policy: LocalsPolicy = LocalsPolicy.NONE
    fixed_locals: Optional[tuple] = None  # (u1, u2, v1, v2) for FLOQUET_FIXED

    def __post_init__(self):
        if self.n_qubits < 2 or self.n_qubits % 2 != 0:
            raise ValueError("n_qubits must be an even integer >= 2")
        if self.locals_policy == LocalsPolicy.FLOQUET_FIXED and self.fixed_locals is None:
            raise ValueError("FLOQUET_FIXED requires fixed_locals")

    @property
    def dim(self) -> int:
        return 2 ** self.n_qubits

    def bond_slots(self) -> list[tuple[int, int]]:
        """Ordered bond list: odd sublayer then even sublayer with wrap."""
        n = self.n_qubits
        odd = [(s, s + 1) for s in range(0, n, 2)]
        even = [(s, (s + 1) % n) for s in range(1, n, 2)]
        return odd + even

    def slot_kernels(self) -> list[np.ndarray]:
        slots = self.bond_slots()
        if isinstance(self.template, (Gate, np.ndarray)):
            k = self.template.matrix if isinstance(self.template, Gate) else np.asarray(self.template)
            return [k] * len(slots)
        kernels = [t.matrix if isinstance(t, Gate) else np.asarray(t) for t in self.template]
        if len(kernels) != len(slots):
            raise ValueError(f"expected {len(slots)} per-slot kernels, got {len(kernels)}")
        return kernels


def apply_two_site(M: np.ndarray, gate: np.ndarray, n: int, a: int, b: int) -> np.ndarray:
    """Left-multiply a 2^n x 2^n matrix by a two-qubit gate on sites (a, b).

    The gate's first tensor factor acts on site ``a``.
    """
    dim = 2 ** n
    T = np.tensordot(gate.reshape(2, 2, 2, 2), M.reshape([2] * n + [dim]),
                     axes=([2, 3], [a, b]))
    rest = [s for s in range(n) if s not in (a, b)]
    order = [0 if s == a else 1 if s == b else 2 + rest.index(s) for s in range(n)]
    return np.transpose(T, order + [n]).reshape(dim, dim)


def build_layer(spec: BrickwallSpec,
                rng: np.random.Generator | int | None = None) -> np.ndarray:
    """Assemble the 2^N x 2^N single-timestep brickwall unitary.

    Deterministic for ``NONE`` and ``FLOQUET_FIXED`` policies; under
    ``RESAMPLE_PER_APPLICATION`` every call consumes the rng stream to dress
    each gate slot with fresh independent Haar locals.
    """
    n = spec.n_qubits
    kernels = spec.slot_kernels()
    if spec.locals_policy == LocalsPolicy.RESAMPLE_PER_APPLICATION:
        rng = np.random.default_rng(rng)

    U = np.eye(spec.dim, dtype=complex)
    for (a, b), kernel in zip(spec.bond_slots(), kernels):
        if spec.locals_policy == LocalsPolicy.FLOQUET_FIXED:
            u1, u2, v1, v2 = spec.fixed_locals
            g = np.kron(u1, u2) @ kernel @ np.kron(v1, v2)
        elif spec.locals_policy == LocalsPolicy.RESAMPLE_PER_APPLICATION:
            u1, u2, v1, v2 = (haar_unitary(2, rng) for _ in range(4))
            g = np.kron(u1, u2) @ kernel @ np.kron(v1, v2)
        else:
            g = kernel
        U = apply_two_site(U, g, n, a, b)
    return U


def validate_density_matrix(rho: np.ndarray,
                            herm_tol: float = 1e-10,
                            trace_tol: float = 1e-10,
                            eig_tol: float = 1e-9) -> None:
    """Raise ValueError unless rho is Hermitian, unit trace, and positive."""
    rho = np.asarray(rho)
    if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
        raise ValueError("density matrix must be square")
    if np.max(np.abs(rho - rho.conj().T)) > herm_tol:
        raise ValueError("density matrix is not Hermitian")
    if abs(np.trace(rho).real - 1.0) > trace_tol:
        raise ValueError("density matrix trace differs from 1")
    if np.min(np.linalg.eigvalsh(rho)) < -eig_tol:
        raise ValueError("density matrix has negative eigenvalues")


def evolve(rho: np.ndarray, U: np.ndarray) -> np.ndarray:
    """Unitary conjugation rho -> U rho U^dag."""
    rho = np.asarray(rho)
    U = np.asarray(U)
    if rho.shape != U.shape:
        raise ValueError(f"dimension mismatch: rho {rho.shape} vs U {U.shape}")
    return U @ rho @ U.conj().T


def pure_state_density(psi: np.ndarray) -> np.ndarray:
    psi = np.asarray(psi, dtype=complex).reshape(-1)
    return np.outer(psi, psi.conj())


def all_zeros_density(n_qubits: int) -> np.ndarray:
    rho = np.zeros((2 ** n_qubits, 2 ** n_qubits), dtype=complex)
    rho[0, 0] = 1.0
    return rho


def maximally_mixed_density(n_qubits: int) -> np.ndarray:
    dim = 2 ** n_qubits
    return np.eye(dim, dtype=complex) / dim


def layer_unitarity_defect(spec: BrickwallSpec,
                           rng: np.random.Generator | int | None = None) -> float:
    return unitarity_defect(build_layer(spec, rng))
