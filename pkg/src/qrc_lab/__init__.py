"""Quantum reservoir computing with brickwall circuits of two-qubit gates."""

from .gates import (CartanParams, Gate, GateInvariants, SolvableRejection,
                    cartan_gate, dual_unitary_gate, gate_invariants,
                    haar_two_qubit, is_dual_unitary, operator_entanglement,
                    sample_solvable, sample_solvable_batch, w_local)
from .circuit import BrickwallSpec, LocalsPolicy, build_layer, evolve
from .datasets import TimeSeries, mackey_glass, narma_series
from .reservoir import (FeatureMatrix, InitialState, ReadoutModel,
                        ReservoirConfig, evaluate, inject, overlap_statistics,
                        read_features, run_reservoir, task_mse, train_readout)
from .krylov import (KrylovRecord, arnoldi_iterate, complexity_curve,
                     krylov_observability, superop_coeffs)
from .ergodicity import (DesignGapReport, MixingReport, design_transfer,
                         m_plus, max_mixing_gate, max_mixing_rate_formula,
                         solvable_gap_sweep)
from .experiments import ExperimentConfig, run

__version__ = "0.1.0"
