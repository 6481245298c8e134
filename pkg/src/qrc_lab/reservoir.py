"""The quantum reservoir computing pipeline.

Inputs are injected into qubit 1 via the CPTP map rho -> rho_s (x) Tr_1[rho],
the state is evolved V times by the brickwall unitary with a Z readout after
each application, and the stacked NV x L feature matrix feeds a pseudoinverse
linear readout.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from enum import Enum
from typing import Optional

import numpy as np

from .circuit import (BrickwallSpec, LocalsPolicy, all_zeros_density, build_layer,
                      evolve, maximally_mixed_density)
from .datasets import TimeSeries


class InitialState(Enum):
    ALL_ZEROS = "all_zeros"
    MAXIMALLY_MIXED = "maximally_mixed"


@dataclass
class ReservoirConfig:
    circuit: BrickwallSpec
    multiplexing: int = 5
    initial_state: InitialState = InitialState.ALL_ZEROS
    reservoir_washout: int = 0
    bias_feature: bool = False
    train_fraction: float = 0.8

    def __post_init__(self):
        if self.multiplexing < 1:
            raise ValueError("multiplexing V must be >= 1")
        if not 0.0 < self.train_fraction < 1.0:
            raise ValueError("train_fraction must lie in (0, 1)")
        if self.reservoir_washout < 0:
            raise ValueError("reservoir_washout must be non-negative")


@dataclass
class FeatureMatrix:
    """NV (+1 bias) x L matrix of rescaled Z expectations.

    Row (v-1)*N + i holds qubit i at multiplex step v; the optional bias row
    of ones comes last.
    """

    data: np.ndarray
    n_qubits: int
    multiplexing: int
    has_bias: bool = False

    def __post_init__(self):
        self.data = np.asarray(self.data, dtype=float)
        expect = self.n_qubits * self.multiplexing + int(self.has_bias)
        if self.data.shape[0] != expect:
            raise ValueError(f"expected {expect} feature rows, got {self.data.shape[0]}")

    @property
    def n_columns(self) -> int:
        return self.data.shape[1]

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            header = ["t"]
            for v in range(1, self.multiplexing + 1):
                header += [f"q{i}_v{v}" for i in range(1, self.n_qubits + 1)]
            if self.has_bias:
                header.append("bias")
            writer.writerow(header)
            for t in range(self.n_columns):
                writer.writerow([t] + [repr(x) for x in self.data[:, t]])


@dataclass
class ReadoutModel:
    weights: np.ndarray

    def __post_init__(self):
        self.weights = np.asarray(self.weights, dtype=float)
        if not np.all(np.isfinite(self.weights)):
            raise ValueError("readout weights must be finite")

    def predict(self, Z: FeatureMatrix | np.ndarray) -> np.ndarray:
        data = Z.data if isinstance(Z, FeatureMatrix) else np.asarray(Z)
        return data.T @ self.weights

    def to_json(self, path) -> None:
        with open(path, "w") as fh:
            json.dump(list(self.weights), fh)


def injection_state(s: float) -> np.ndarray:
    """Density matrix of sqrt(1-s)|0> + sqrt(s)|1>."""
    if not 0.0 <= s < 1.0:
        raise ValueError(f"input value must lie in [0, 1), got {s}")
    a, b = np.sqrt(1.0 - s), np.sqrt(s)
    return np.array([[a * a, a * b], [a * b, b * b]], dtype=complex)


def partial_trace_first(rho: np.ndarray) -> np.ndarray:
    """Trace out qubit 1 (the first tensor factor)."""
    half = rho.shape[0] // 2
    T = rho.reshape(2, half, 2, half)
    return T[0, :, 0, :] + T[1, :, 1, :]


def inject(rho: np.ndarray, s: float) -> np.ndarray:
    """CPTP update rho -> rho_s (x) Tr_1[rho]."""
    return np.kron(injection_state(s), partial_trace_first(rho))


def _z_diagonals(n_qubits: int) -> np.ndarray:
    dim = 2 ** n_qubits
    basis = np.arange(dim)
    rows = []
    for i in range(n_qubits):
        bit = (basis >> (n_qubits - 1 - i)) & 1
        rows.append(1.0 - 2.0 * bit)
    return np.array(rows)


def read_features(rho: np.ndarray, n_qubits: Optional[int] = None) -> np.ndarray:
    """z_i = (tr(Z_i rho) + 1) / 2 for every qubit, computed exactly."""
    if n_qubits is None:
        n_qubits = int(round(np.log2(rho.shape[0])))
    zdiag = _z_diagonals(n_qubits)
    return (zdiag @ np.real(np.diag(rho)) + 1.0) / 2.0


def run_reservoir(series: TimeSeries, cfg: ReservoirConfig,
                  rng: np.random.Generator | int | None = None) -> FeatureMatrix:
    """Drive the reservoir with the input sequence and collect the Z matrix.

    Per input s_k: inject, then V rounds of evolve-and-read.  Under the
    resampling locals policy each evolution consumes the rng stream for a
    fresh layer.  The first ``reservoir_washout`` columns are dropped.
    """
    if len(series) == 0:
        raise ValueError("input series is empty")
    spec = cfg.circuit
    n, V = spec.n_qubits, cfg.multiplexing
    rng = np.random.default_rng(rng)
    resample = spec.locals_policy == LocalsPolicy.RESAMPLE_PER_APPLICATION
    U = None if resample else build_layer(spec)
    zdiag = _z_diagonals(n)

    if cfg.initial_state == InitialState.ALL_ZEROS:
        rho = all_zeros_density(n)
    else:
        rho = maximally_mixed_density(n)

    L = len(series)
    Z = np.empty((n * V, L))
    for k, s in enumerate(series.inputs):
        rho = inject(rho, s)
        for v in range(V):
            if resample:
                U = build_layer(spec, rng)
            rho = evolve(rho, U)
            Z[v * n:(v + 1) * n, k] = (zdiag @ np.real(np.diag(rho)) + 1.0) / 2.0
    if cfg.reservoir_washout:
        Z = Z[:, cfg.reservoir_washout:]
    if cfg.bias_feature:
        Z = np.vstack([Z, np.ones(Z.shape[1])])
    return FeatureMatrix(Z, n_qubits=n, multiplexing=V, has_bias=cfg.bias_feature)


def train_readout(Z_train: FeatureMatrix | np.ndarray, y_train: np.ndarray) -> ReadoutModel:
    """Minimum-norm least-squares weights via the Moore-Penrose pseudoinverse."""
    data = Z_train.data if isinstance(Z_train, FeatureMatrix) else np.asarray(Z_train)
    y_train = np.asarray(y_train, dtype=float)
    if data.shape[1] != len(y_train):
        raise ValueError("training column count must match target length")
    if len(y_train) == 0:
        raise ValueError("empty training set")
    return ReadoutModel(np.linalg.pinv(data.T) @ y_train)


def evaluate(model: ReadoutModel, Z_eval: FeatureMatrix | np.ndarray,
             y_eval: np.ndarray) -> float:
    """Mean squared error of the model's predictions on held-out data."""
    y_eval = np.asarray(y_eval, dtype=float)
    if len(y_eval) == 0:
        raise ValueError("empty evaluation set")
    pred = model.predict(Z_eval)
    if pred.shape != y_eval.shape:
        raise ValueError("prediction/target shape mismatch")
    return float(np.mean((pred - y_eval) ** 2))


def train_eval_split(Z: FeatureMatrix, targets: np.ndarray,
                     train_fraction: float = 0.8):
    """Chronological split: first fraction trains, the remainder evaluates."""
    targets = np.asarray(targets, dtype=float)
    if Z.n_columns != len(targets):
        raise ValueError("feature columns must match target length")
    lt = int(train_fraction * Z.n_columns)
    return (Z.data[:, :lt], targets[:lt]), (Z.data[:, lt:], targets[lt:])


def task_mse(series: TimeSeries, cfg: ReservoirConfig,
             rng: np.random.Generator | int | None = None) -> float:
    """End-to-end run: features, chronological split, train, evaluate."""
    Z = run_reservoir(series, cfg, rng)
    targets = series.targets[cfg.reservoir_washout:]
    (Zt, yt), (Ze, ye) = train_eval_split(Z, targets, cfg.train_fraction)
    model = train_readout(Zt, yt)
    return evaluate(model, Ze, ye)


def overlap_statistics(cfg: ReservoirConfig, n_samples: int, v_max: int,
                       rng: np.random.Generator | int | None = None) -> np.ndarray:
    """Mean pairwise tr(rho_i rho_j) of reservoir states, per multiplex step.

    Each ensemble member injects an independent uniform input into the initial
    state and evolves under its own independently sampled circuit realization;
    the state is recorded before each readout.  Converges to 1/2^N once the
    ensemble is Haar-like (v of order N).
    """
    if n_samples < 2:
        raise ValueError("need at least two ensemble members")
    spec = cfg.circuit
    rng = np.random.default_rng(rng)
    dim = spec.dim
    states = np.empty((v_max, n_samples, dim, dim), dtype=complex)
    for i in range(n_samples):
        if cfg.initial_state == InitialState.ALL_ZEROS:
            rho = all_zeros_density(spec.n_qubits)
        else:
            rho = maximally_mixed_density(spec.n_qubits)
        rho = inject(rho, rng.uniform())
        resample = spec.locals_policy == LocalsPolicy.RESAMPLE_PER_APPLICATION
        U = None if resample else build_layer(spec, rng)
        for v in range(v_max):
            if resample:
                U = build_layer(spec, rng)
            rho = evolve(rho, U)
            states[v, i] = rho
    out = np.empty(v_max)
    iu = np.triu_indices(n_samples, 1)
    for v in range(v_max):
        flat = states[v].reshape(n_samples, -1)
        G = np.real(flat.conj() @ flat.T)  # tr(rho_i rho_j)
        out[v] = np.mean(G[iu])
    return out
