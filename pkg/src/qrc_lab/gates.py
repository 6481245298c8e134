"""Two-qubit gate construction and local-unitary-invariant characterization.

Gates are plain 4x4 complex numpy arrays wrapped in a small ``Gate`` record
that remembers where they came from (Cartan angles, attached locals, seed).
The invariant measures (entangling power ``e_p``, gate typicality ``g_t``,
operator entanglement) are computed from the operator-Schmidt spectrum.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
from scipy.linalg import expm

I2 = np.eye(2, dtype=complex)
PAULI_X = np.array([[0, 1], [1, 0]], dtype=complex)
PAULI_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
PAULI_Z = np.array([[1, 0], [0, -1]], dtype=complex)

SWAP = np.array(
    [[1, 0, 0, 0],
     [0, 0, 1, 0],
     [0, 1, 0, 0],
     [0, 0, 0, 1]], dtype=complex)

# Operator entanglement of the SWAP gate; normalizes e_p and g_t.
E_SWAP = 0.75

# Maximal entangling power for two-qubit gates.
EP_MAX = 2.0 / 3.0

UNITARITY_TOL = 1e-10

_RESHUFFLE_PERMS = {
    # row/col axes of the rank-4 tensor U[i, j, k, l] with row (i, j), col (k, l)
    "R1": (3, 1, 2, 0),
    "R2": (0, 2, 1, 3),
    "T1": (2, 1, 0, 3),
    "T2": (0, 3, 2, 1),
}


class SolvableRejection(Exception):
    """Raised when a sampled (alpha, beta) pair admits no solvable gamma."""


@dataclass(frozen=True)
class CartanParams:
    """Cartan angles (alpha, beta, gamma) of a two-qubit nonlocal kernel."""

    alpha: float
    beta: float
    gamma: float

    def is_canonical(self, tol: float = 1e-12) -> bool:
        """True when the angles lie in the Weyl chamber pi/4 >= a >= b >= |g|."""
        a, b, g = self.alpha, self.beta, self.gamma
        return (np.pi / 4 + tol >= a >= b - tol) and (b + tol >= abs(g))


@dataclass
class Gate:
    """A 4x4 unitary with provenance and optional single-qubit dressings."""

    matrix: np.ndarray
    origin: str = "composite"
    cartan: Optional[CartanParams] = None
    locals: Optional[tuple] = None  # (u1, u2, v1, v2)
    seed: Optional[int] = None

    def __post_init__(self):
        self.matrix = np.asarray(self.matrix, dtype=complex)
        if self.matrix.shape != (4, 4):
            raise ValueError("gate matrix must be 4x4")
        if unitarity_defect(self.matrix) >= UNITARITY_TOL:
            raise ValueError("gate matrix is not unitary")

    def dressed(self) -> np.ndarray:
        """Reconstruct (u1 x u2) . kernel . (v1 x v2) when locals are attached."""
        if self.locals is None:
            return self.matrix
        u1, u2, v1, v2 = self.locals
        return np.kron(u1, u2) @ self.matrix @ np.kron(v1, v2)


@dataclass(frozen=True)
class GateInvariants:
    """Local-unitary invariants of a two-qubit gate."""

    e_p: float
    g_t: float
    op_ent: float
    op_ent_times_swap: float


def unitarity_defect(U: np.ndarray) -> float:
    """Max-norm deviation of U^dag U from the identity."""
    U = np.asarray(U)
    return float(np.max(np.abs(U.conj().T @ U - np.eye(U.shape[0]))))


def cartan_gate(params: CartanParams | Sequence[float]) -> Gate:
    """exp{i(a XX + b YY + g ZZ)} for Cartan angles (a, b, g)."""
    if not isinstance(params, CartanParams):
        params = CartanParams(*params)
    gen = (params.alpha * np.kron(PAULI_X, PAULI_X)
           + params.beta * np.kron(PAULI_Y, PAULI_Y)
           + params.gamma * np.kron(PAULI_Z, PAULI_Z))
    return Gate(expm(1j * gen), origin="cartan", cartan=params)


def haar_unitary(dim: int, rng: np.random.Generator | int | None = None) -> np.ndarray:
    """Haar-random unitary via QR of a complex Ginibre matrix with phase fix."""
    rng = np.random.default_rng(rng)
    A = (rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))) / np.sqrt(2)
    Q, R = np.linalg.qr(A)
    d = np.diag(R)
    return Q * (d / np.abs(d))


def haar_two_qubit(rng: np.random.Generator | int | None = None,
                   seed: Optional[int] = None) -> Gate:
    """A two-qubit gate drawn from the Haar measure on U(4)."""
    if seed is not None:
        rng = np.random.default_rng(seed)
    return Gate(haar_unitary(4, rng), origin="haar", seed=seed)


def w_local(phi: float, psi: float) -> np.ndarray:
    """SU(2) member u(theta=pi/2, phi, psi); all entries have modulus 1/sqrt(2)."""
    return np.array(
        [[np.exp(1j * phi / 2), np.exp(1j * psi / 2)],
         [-np.exp(-1j * psi / 2), np.exp(-1j * phi / 2)]]) / np.sqrt(2)


def reshuffle(A: np.ndarray, kind: str) -> np.ndarray:
    """Index reshuffling of a 4x4 matrix seen as a rank-4 tensor A[i,j,k,l].

    ``R1``/``R2`` are the realignments, ``T1``/``T2`` the partial transposes.
    Each operation is an involution.
    """
    A = np.asarray(A)
    if A.shape != (4, 4):
        raise ValueError("reshuffle expects a 4x4 matrix")
    try:
        perm = _RESHUFFLE_PERMS[kind]
    except KeyError:
        raise ValueError(f"unknown reshuffle kind {kind!r}") from None
    return np.transpose(A.reshape(2, 2, 2, 2), perm).reshape(4, 4)


def schmidt_coefficients(A: np.ndarray) -> np.ndarray:
    """Operator-Schmidt coefficients gamma_i of a 4x4 matrix across the two qubits.

    Realigns A into the matrix whose singular values squared are the gamma_i
    (unit-Hilbert-Schmidt-norm single-qubit basis). For unitary A they sum to 4.
    """
    A = np.asarray(A, dtype=complex)
    if A.shape != (4, 4):
        raise ValueError("operator entanglement expects a 4x4 matrix")
    M = np.transpose(A.reshape(2, 2, 2, 2), (0, 2, 1, 3)).reshape(4, 4)
    s = np.linalg.svd(M, compute_uv=False)
    return s ** 2


def operator_entanglement(A: np.ndarray) -> float:
    """E(A) = 1 - (1/16) sum_i gamma_i^2 over the operator-Schmidt spectrum."""
    g = schmidt_coefficients(A)
    return float(1.0 - np.sum(g ** 2) / 16.0)


def gate_invariants(U: Gate | np.ndarray) -> GateInvariants:
    """Entangling power e_p and gate typicality g_t of a two-qubit unitary.

    e_p = (E(U) + E(US) - E(S)) / E(S),  g_t = (E(U) - E(US) + E(S)) / (2 E(S)),
    normalized so that g_t(SWAP) = 1 and the Haar means are (0.6, 0.5).
    """
    M = U.matrix if isinstance(U, Gate) else np.asarray(U, dtype=complex)
    e_u = operator_entanglement(M)
    e_us = operator_entanglement(M @ SWAP)
    e_p = (e_u + e_us - E_SWAP) / E_SWAP
    g_t = (e_u - e_us + E_SWAP) / (2 * E_SWAP)
    return GateInvariants(e_p=e_p, g_t=g_t, op_ent=e_u, op_ent_times_swap=e_us)


def is_dual_unitary(U: Gate | np.ndarray, tol: float = 1e-9) -> bool:
    """True iff the realigned matrix U^R1 is unitary within tol."""
    M = U.matrix if isinstance(U, Gate) else np.asarray(U, dtype=complex)
    return unitarity_defect(reshuffle(M, "R1")) < tol


def dual_unitary_gate(e_p: float) -> Gate:
    """Dual-unitary Cartan kernel with the requested entangling power.

    Uses alpha = beta = pi/4 and gamma = arccos(sqrt(3 e_p / 2)) / 2, so that
    e_p = (2/3) cos^2(2 gamma).
    """
    if not 0.0 <= e_p <= EP_MAX:
        raise ValueError(f"entangling power must lie in [0, 2/3], got {e_p}")
    gamma = 0.5 * np.arccos(np.sqrt(1.5 * e_p))
    return cartan_gate(CartanParams(np.pi / 4, np.pi / 4, gamma))


def _solvable_f(x: float, y: float) -> float:
    return np.sin(2 * x) ** 2 * (np.cos(2 * y) ** 2 - 0.6)


def solvable_constraint_residual(p: CartanParams) -> float:
    """f(a,b) + f(b,g) + f(g,a) for the solvable-gate condition."""
    a, b, g = p.alpha, p.beta, p.gamma
    return _solvable_f(a, b) + _solvable_f(b, g) + _solvable_f(g, a)


def sample_solvable(rng: np.random.Generator | int | None = None) -> Gate:
    """Draw one gate from the solvable class (e_p = 1.2 g_t line).

    Samples (alpha, beta) uniformly in [0, pi/4]^2 and solves the constraint,
    which is linear in x = cos^2(2 gamma).  Raises :class:`SolvableRejection`
    when no gamma in range exists; callers retry with fresh draws.
    """
    rng = np.random.default_rng(rng)
    alpha, beta = rng.uniform(0.0, np.pi / 4, size=2)
    sb2 = np.sin(2 * beta) ** 2
    ca2 = np.cos(2 * alpha) ** 2
    # f(a,b) + sb2*(x - 3/5) + (1 - x)*(ca2 - 3/5) = 0, linear in x
    coeff = sb2 - ca2 + 0.6
    const = _solvable_f(alpha, beta) - 0.6 * sb2 + ca2 - 0.6
    if abs(coeff) < 1e-12:
        raise SolvableRejection("degenerate constraint coefficient")
    x = -const / coeff
    if not 0.0 <= x <= 1.0:
        raise SolvableRejection(f"cos^2(2 gamma) = {x:.4f} outside [0, 1]")
    sign = 1.0 if rng.uniform() < 0.5 else -1.0
    gamma = 0.5 * np.arccos(sign * np.sqrt(x))
    return cartan_gate(CartanParams(alpha, beta, gamma))


def sample_solvable_batch(count: int,
                          rng: np.random.Generator | int | None = None,
                          max_tries: int = 100000) -> list[Gate]:
    """Rejection-sample ``count`` solvable gates."""
    rng = np.random.default_rng(rng)
    out: list[Gate] = []
    for _ in range(max_tries):
        try:
            out.append(sample_solvable(rng))
        except SolvableRejection:
            continue
        if len(out) == count:
            return out
    raise RuntimeError(f"could not draw {count} solvable gates in {max_tries} tries")


def _complex_to_list(M: np.ndarray) -> list[float]:
    out: list[float] = []
    for v in np.asarray(M).reshape(-1):
        out.extend((float(v.real), float(v.imag)))
    return out


def _list_to_complex(vals: Sequence[float], shape: tuple[int, int]) -> np.ndarray:
    arr = np.asarray(vals, dtype=float).reshape(-1, 2)
    return (arr[:, 0] + 1j * arr[:, 1]).reshape(shape)


def gate_to_json(gate: Gate) -> str:
    """Serialize a gate record (origin, Cartan angles, locals, seed)."""
    rec = {
        "origin": gate.origin,
        "cartan": ([gate.cartan.alpha, gate.cartan.beta, gate.cartan.gamma]
                   if gate.cartan else None),
        "matrix": _complex_to_list(gate.matrix),
        "locals": ([_complex_to_list(m) for m in gate.locals]
                   if gate.locals else None),
        "seed": gate.seed,
    }
    return json.dumps(rec)


def gate_from_json(text: str) -> Gate:
    """Inverse of :func:`gate_to_json`."""
    rec = json.loads(text)
    cart = CartanParams(*rec["cartan"]) if rec.get("cartan") else None
    locs = (tuple(_list_to_complex(m, (2, 2)) for m in rec["locals"])
            if rec.get("locals") else None)
    return Gate(_list_to_complex(rec["matrix"], (4, 4)),
                origin=rec.get("origin", "composite"),
                cartan=cart, locals=locs, seed=rec.get("seed"))
