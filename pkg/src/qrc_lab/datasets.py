"""Synthetic benchmark time series: NARMA with a trisine input, Mackey-Glass."""

from __future__ import annotations

import csv
from dataclasses import dataclass, field

import numpy as np

NARMA_COEFFS = (0.3, 0.05, 1.5, 0.1)
NARMA_DIVERGENCE_LIMIT = 10.0

MG_BETA = 0.2
MG_GAMMA = 0.1
MG_OMEGA = 10
MG_DT = 0.1
MG_WASHOUT = 1000
MG_HEADROOM = 1e-6


class DivergenceError(RuntimeError):
    """Raised when a generated series leaves its stable range."""


@dataclass
class TimeSeries:
    """Input/target pair with washout already removed; inputs lie in [0, 1)."""

    inputs: np.ndarray
    targets: np.ndarray
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.inputs = np.asarray(self.inputs, dtype=float)
        self.targets = np.asarray(self.targets, dtype=float)
        if self.inputs.shape != self.targets.shape:
            raise ValueError("inputs and targets must have equal length")
        if len(self.inputs) and (self.inputs.min() < 0.0 or self.inputs.max() >= 1.0):
            raise ValueError("inputs must lie in [0, 1)")

    def __len__(self) -> int:
        return len(self.inputs)

    def to_csv(self, path) -> None:
        """Columns (k, s_k, y_k); metadata as a leading comment line."""
        with open(path, "w", newline="") as fh:
            meta = " ".join(f"{k}={v}" for k, v in self.meta.items())
            fh.write(f"# {meta}\n")
            writer = csv.writer(fh)
            writer.writerow(["k", "s_k", "y_k"])
            for k, (s, y) in enumerate(zip(self.inputs, self.targets)):
                writer.writerow([k, repr(s), repr(y)])


def narma_input(length: int) -> np.ndarray:
    """u_k = 0.1 [sin(2pi 2.11 k/100) sin(2pi 3.73 k/100) sin(2pi 4.11 k/100) + 1]."""
    k = np.arange(length)
    return 0.1 * (np.sin(2 * np.pi * 2.11 * k / 100)
                  * np.sin(2 * np.pi * 3.73 * k / 100)
                  * np.sin(2 * np.pi * 4.11 * k / 100) + 1.0)


def narma_series(order: int, length: int = 6000, washout: int = 1000) -> TimeSeries:
    """NARMA-``order`` series over the trisine input; washout removed.

    y_{n+1} = 0.3 y_n + 0.05 y_n sum_{j<order} y_{n-j} + 1.5 u_{n-order+1} u_n + 0.1
    with the first ``order`` outputs seeded to zero.
    """
    if order < 1:
        raise ValueError("order must be >= 1")
    if length <= washout:
        raise ValueError("length must exceed washout")
    a, b, c, d = NARMA_COEFFS
    u = narma_input(length)
    y = np.zeros(length)
    for n in range(order - 1, length - 1):
        y[n + 1] = (a * y[n]
                    + b * y[n] * np.sum(y[n - order + 1:n + 1])
                    + c * u[n - order + 1] * u[n]
                    + d)
        if abs(y[n + 1]) > NARMA_DIVERGENCE_LIMIT:
            raise DivergenceError(f"NARMA-{order} diverged at step {n + 1}")
    meta = {"generator": "narma", "order": order, "length": length, "washout": washout}
    return TimeSeries(u[washout:], y[washout:], meta)


def mackey_glass(length: int, tau: float = 17.0,
                 rng: np.random.Generator | int | None = None,
                 history: float | None = None) -> TimeSeries:
    """Mackey-Glass series by forward Euler; chaotic for tau > 16.8.

    Random history in [1.2, 1.4] seeds the delay buffer; the first
    1000 + tau_d steps are discarded and the remainder is min-max normalized
    into [0, 1).  Targets are the normalized one-step-ahead values.
    """
    if length < 1:
        raise ValueError("length must be >= 1")
    if tau <= 0:
        raise ValueError("tau must be positive")
    rng = np.random.default_rng(rng)
    tau_d = int(round(tau / MG_DT))
    total = length + MG_WASHOUT + tau_d + 1  # +1 for the one-step-ahead target
    x = np.empty(total)
    if history is None:
        x[:tau_d + 1] = rng.uniform(1.2, 1.4, size=tau_d + 1)
    else:
        x[:tau_d + 1] = history
    for t in range(tau_d, total - 1):
        delayed = x[t - tau_d]
        x[t + 1] = x[t] + MG_DT * (MG_BETA * delayed / (1 + delayed ** MG_OMEGA)
                                   - MG_GAMMA * x[t])
    if not np.all(np.isfinite(x)):
        raise DivergenceError("Mackey-Glass trajectory is not finite")
    kept = x[MG_WASHOUT + tau_d:]
    lo, hi = kept.min(), kept.max()
    span = hi - lo
    if span == 0:
        norm = np.zeros_like(kept)
    else:
        norm = (kept - lo) / span * (1.0 - MG_HEADROOM)
    meta = {"generator": "mackey_glass", "length": length, "tau": tau,
            "tau_d": tau_d, "min": lo, "max": hi}
    return TimeSeries(norm[:length], norm[1:length + 1], meta)
