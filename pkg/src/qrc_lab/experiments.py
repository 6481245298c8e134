"""Experiment definitions behind the ``qrc-lab`` command line runner.

Each experiment expands its config into a deterministic list of grid points,
evaluates them (optionally on a process pool), and writes one CSV of raw
per-seed rows plus a JSON manifest with schema and provenance.  Results are
gathered in grid order regardless of completion order, so reruns with the
same config and seeds produce byte-identical CSV bodies.
"""

from __future__ import annotations

import csv
import json
import subprocess
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .circuit import BrickwallSpec, LocalsPolicy
from .datasets import DivergenceError, mackey_glass, narma_series
from .ergodicity import design_transfer, max_mixing_gate, max_mixing_rate_formula
from .gates import dual_unitary_gate, gate_invariants, gate_to_json, haar_two_qubit, \
    sample_solvable_batch
from .krylov import arnoldi_iterate, complexity_curve, single_site_z
from .reservoir import InitialState, ReservoirConfig, overlap_statistics, task_mse

EXPERIMENTS = ("narma_sweep", "mg_sweep", "krylov_saturation", "coeff_deviation",
               "overlap_saturation", "mixing_validation", "design_gap",
               "solvable_performance")
GATE_FAMILIES = ("HaarTwoQubit", "DualUnitary", "Solvable")

DEFAULT_EP_GRID = [round(x, 3) for x in np.arange(0.06, 0.67, 0.06)]


class ConfigError(ValueError):
    """Invalid experiment configuration."""


@dataclass
class ExperimentConfig:
    experiment: str
    n_qubits: int = 6
    gate_family: str = "DualUnitary"
    e_p_grid: list = field(default_factory=lambda: list(DEFAULT_EP_GRID))
    multiplexing: list = field(default_factory=lambda: [5])
    narma_orders: list = field(default_factory=lambda: [2, 4, 8, 12, 16])
    seeds: list = field(default_factory=lambda: [0, 1, 2])
    tau: float = 17.0
    series_length: int = 6000
    solvable_count: int = 30
    n_samples: int = 100
    v_max: int = 10
    ensemble_size: int = 1000
    max_steps: int = 1500
    output_path: str = "."

    def __post_init__(self):
        if self.experiment not in EXPERIMENTS:
            raise ConfigError(f"unknown experiment {self.experiment!r}; "
                              f"choose from {', '.join(EXPERIMENTS)}")
        if self.gate_family not in GATE_FAMILIES:
            raise ConfigError(f"unknown gate_family {self.gate_family!r}")
        if not self.seeds:
            raise ConfigError("seeds list is empty")
        if len(set(self.seeds)) != len(self.seeds):
            raise ConfigError("seeds must be distinct")
        for name in ("e_p_grid", "multiplexing", "narma_orders"):
            if not getattr(self, name):
                raise ConfigError(f"{name} is empty")

    @classmethod
    def from_file(cls, path: str, experiment: str | None = None) -> "ExperimentConfig":
        try:
            with open(path) as fh:
                raw = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"{path}: {exc}") from exc
        if experiment is not None:
            raw["experiment"] = experiment
        unknown = set(raw) - set(cls.__dataclass_fields__)
        if unknown:
            raise ConfigError(f"{path}: unknown config keys {sorted(unknown)}")
        if "experiment" not in raw:
            raise ConfigError(f"{path}: missing 'experiment' key")
        return cls(**raw)


def _dual_unitary_reservoir_gate(e_p: float, seed: int):
    """Dual-unitary kernel dressed by the best-mixing w-local 4-tuple."""
    gate, _ = max_mixing_gate(min(e_p, 2 / 3 - 1e-12), ensemble_size=200, rng=seed)
    return gate


def _brickwall(cfg_dict: dict, seed: int) -> BrickwallSpec:
    n = cfg_dict["n_qubits"]
    family = cfg_dict["gate_family"]
    if family == "HaarTwoQubit":
        rng = np.random.default_rng(seed)
        gates = [haar_two_qubit(rng) for _ in range(n)]
        return BrickwallSpec(n, gates)
    if family == "DualUnitary":
        gate = _dual_unitary_reservoir_gate(cfg_dict["e_p"], seed)
        return BrickwallSpec(n, gate)
    raise ConfigError(f"gate family {family!r} not valid for this experiment")


def _reservoir_mse(point: dict) -> float:
    if point["task"] == "narma":
        series = narma_series(point["order"], length=point["series_length"])
    else:
        series = mackey_glass(point["series_length"], tau=point["tau"],
                              rng=point["seed"] + 10000)
    spec = _brickwall(point, point["seed"])
    rcfg = ReservoirConfig(spec, multiplexing=point["V"])
    return task_mse(series, rcfg, rng=point["seed"])


def _run_point(point: dict) -> dict:
    """Evaluate one grid point; divergence becomes an error row, not a crash."""
    exp = point["experiment"]
    try:
        if exp in ("narma_sweep", "mg_sweep"):
            return {"mse": _reservoir_mse(point), "error": ""}
        if exp == "krylov_saturation":
            gate = _dual_unitary_reservoir_gate(point["e_p"], point["seed"])
            spec = BrickwallSpec(point["n_qubits"], gate)
            from .circuit import build_layer
            U = build_layer(spec)
            O0 = single_site_z(point["n_qubits"])
            rec = arnoldi_iterate(U, O0, point["max_steps"])
            _, sat = complexity_curve(rec)
            return {"k_sat": sat, "steps": len(rec.arnoldi_b), "error": ""}
        if exp == "coeff_deviation":
            gate = _dual_unitary_reservoir_gate(point["e_p"], point["seed"])
            spec = BrickwallSpec(point["n_qubits"], gate)
            from .circuit import build_layer
            U = build_layer(spec)
            O0 = single_site_z(point["n_qubits"])
            rec = arnoldi_iterate(U, O0, point["max_steps"])
            dev = np.abs(rec.arnoldi_b - 1.0)
            hits = np.nonzero(dev > 0.01)[0]
            onset = int(hits[0]) + 1 if hits.size else len(dev) + 1
            return {"onset": onset, "max_dev": float(dev.max()), "error": ""}
        if exp == "overlap_saturation":
            kernel = dual_unitary_gate(2 / 3)
            spec = BrickwallSpec(point["n_qubits"], kernel,
                                 locals_policy=LocalsPolicy.RESAMPLE_PER_APPLICATION)
            rcfg = ReservoirConfig(spec, multiplexing=point["v_max"],
                                   initial_state=InitialState.ALL_ZEROS)
            means = overlap_statistics(rcfg, point["n_samples"], point["v_max"],
                                       rng=point["seed"])
            return {"overlaps": list(means), "error": ""}
        if exp == "mixing_validation":
            _, mu = max_mixing_gate(point["e_p"], point["ensemble_size"],
                                    rng=point["seed"])
            return {"mu1_sampled": mu,
                    "mu1_formula": max_mixing_rate_formula(point["e_p"]),
                    "error": ""}
        if exp == "design_gap":
            rep = design_transfer(point["n_qubits"], point["e_p"], point["g_t"])
            return {"lambda3": rep.lambda3_abs, "error": ""}
        if exp == "solvable_performance":
            series = mackey_glass(point["series_length"], tau=point["tau"],
                                  rng=point["seed"] + 10000)
            from .gates import gate_from_json
            gate = gate_from_json(point["gate_json"])
            spec = BrickwallSpec(point["n_qubits"], gate)
            rcfg = ReservoirConfig(spec, multiplexing=point["V"])
            return {"mse": task_mse(series, rcfg, rng=point["seed"]), "error": ""}
        raise ConfigError(f"unhandled experiment {exp!r}")
    except (DivergenceError, np.linalg.LinAlgError) as exc:
        return {"error": f"{type(exc).__name__}: {exc}"}


def _expand(cfg: ExperimentConfig) -> tuple[list[str], list[dict]]:
    """Column names and the ordered grid-point list for an experiment."""
    base = {"experiment": cfg.experiment, "n_qubits": cfg.n_qubits,
            "gate_family": cfg.gate_family, "series_length": cfg.series_length,
            "tau": cfg.tau, "max_steps": cfg.max_steps,
            "ensemble_size": cfg.ensemble_size, "n_samples": cfg.n_samples,
            "v_max": cfg.v_max}
    points = []
    if cfg.experiment in ("narma_sweep", "mg_sweep") and cfg.gate_family == "Solvable":
        raise ConfigError("use solvable_performance for the Solvable gate family")
    if cfg.experiment == "mg_sweep" and cfg.gate_family != "DualUnitary":
        raise ConfigError("mg_sweep runs on the DualUnitary family")
    if cfg.experiment == "narma_sweep":
        cols = ["order", "V", "seed", "mse", "error"]
        grid = ([(o, v, None) for o in cfg.narma_orders for v in cfg.multiplexing]
                if cfg.gate_family == "HaarTwoQubit" else
                [(o, v, ep) for o in cfg.narma_orders for v in cfg.multiplexing
                 for ep in cfg.e_p_grid])
        if cfg.gate_family == "DualUnitary":
            cols = ["order", "V", "e_p", "seed", "mse", "error"]
        for key in grid:
            for seed in cfg.seeds:
                p = dict(base, task="narma", order=key[0], V=key[1], seed=seed)
                if key[2] is not None:
                    p["e_p"] = key[2]
                points.append(p)
    elif cfg.experiment == "mg_sweep":
        cols = ["e_p", "V", "seed", "mse", "error"]
        for ep in cfg.e_p_grid:
            for v in cfg.multiplexing:
                for seed in cfg.seeds:
                    points.append(dict(base, task="mg", e_p=ep, V=v, seed=seed))
    elif cfg.experiment == "krylov_saturation":
        cols = ["e_p", "seed", "k_sat", "steps", "error"]
        for ep in cfg.e_p_grid:
            for seed in cfg.seeds:
                points.append(dict(base, e_p=ep, seed=seed))
    elif cfg.experiment == "coeff_deviation":
        cols = ["e_p", "seed", "onset", "max_dev", "error"]
        for ep in cfg.e_p_grid:
            for seed in cfg.seeds:
                points.append(dict(base, e_p=ep, seed=seed))
    elif cfg.experiment == "overlap_saturation":
        cols = ["v", "seed", "mean_overlap", "haar_value", "error"]
        for seed in cfg.seeds:
            points.append(dict(base, seed=seed))
    elif cfg.experiment == "mixing_validation":
        cols = ["e_p", "seed", "mu1_sampled", "mu1_formula", "error"]
        for ep in cfg.e_p_grid:
            for seed in cfg.seeds:
                points.append(dict(base, e_p=ep, seed=seed))
    elif cfg.experiment == "design_gap":
        cols = ["e_p", "g_t", "seed", "lambda3", "error"]
        pairs = [(0.6, 0.5)] + [(ep, ep / 1.2) for ep in cfg.e_p_grid]
        for ep, gt in pairs:
            points.append(dict(base, e_p=ep, g_t=gt, seed=cfg.seeds[0]))
    elif cfg.experiment == "solvable_performance":
        cols = ["gate_index", "e_p", "g_t", "V", "seed", "mse", "error"]
        gates = sample_solvable_batch(cfg.solvable_count, rng=cfg.seeds[0])
        for gi, g in enumerate(gates):
            inv = gate_invariants(g)
            for seed in cfg.seeds:
                points.append(dict(base, task="mg", gate_index=gi,
                                   gate_json=gate_to_json(g), e_p=inv.e_p,
                                   g_t=inv.g_t, V=cfg.multiplexing[0], seed=seed))
    else:
        raise ConfigError(f"unhandled experiment {cfg.experiment!r}")
    return cols, points


def _fmt(x) -> str:
    return repr(float(x)) if isinstance(x, (float, np.floating)) else str(x)


def _rows_from_results(cfg: ExperimentConfig, cols: list[str],
                       points: list[dict], results: list[dict]) -> list[list[str]]:
    rows = []
    for p, r in zip(points, results):
        if cfg.experiment == "overlap_saturation" and not r["error"]:
            haar = 1.0 / 2 ** cfg.n_qubits
            for v, val in enumerate(r["overlaps"], start=1):
                rows.append([str(v), str(p["seed"]), _fmt(val), _fmt(haar), ""])
            continue
        row = []
        for c in cols:
            if c in p:
                row.append(_fmt(p[c]))
            elif c in r:
                row.append(_fmt(r[c]))
            elif c == "error":
                row.append(r["error"])
            else:
                row.append("")
        rows.append(row)
    return rows


def _git_describe() -> str:
    try:
        out = subprocess.run(["git", "describe", "--always", "--dirty"],
                             capture_output=True, text=True, timeout=10)
        return out.stdout.strip() or "unknown"
    except OSError:
        return "unknown"


def run(cfg: ExperimentConfig, out_dir: str | Path = None, jobs: int = 1) -> Path:
    """Execute an experiment; returns the path of the CSV it wrote."""
    out_dir = Path(out_dir if out_dir is not None else cfg.output_path)
    out_dir.mkdir(parents=True, exist_ok=True)
    cols, points = _expand(cfg)
    t0 = time.time()
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_run_point, points))
    else:
        results = [_run_point(p) for p in points]
    wall = time.time() - t0
    rows = _rows_from_results(cfg, cols, points, results)

    csv_path = out_dir / f"{cfg.experiment}.csv"
    with open(csv_path, "w", newline="") as fh:
        fh.write(f"# experiment={cfg.experiment} n_qubits={cfg.n_qubits} "
                 f"gate_family={cfg.gate_family}\n")
        writer = csv.writer(fh)
        writer.writerow(cols)
        writer.writerows(rows)

    manifest = {
        "experiment": cfg.experiment,
        "columns": cols,
        "units": {"mse": "dimensionless", "mu1_sampled": "nats per layer",
                  "mu1_formula": "nats per layer", "k_sat": "basis index",
                  "onset": "layer index", "lambda3": "dimensionless",
                  "mean_overlap": "dimensionless"},
        "config": {k: getattr(cfg, k) for k in cfg.__dataclass_fields__},
        "n_rows": len(rows),
        "n_errors": sum(1 for r in results if r["error"]),
        "build": _git_describe(),
        "wall_clock_s": wall,
    }
    with open(out_dir / f"{cfg.experiment}_manifest.json", "w") as fh:
        json.dump(manifest, fh, indent=2)
    return csv_path
