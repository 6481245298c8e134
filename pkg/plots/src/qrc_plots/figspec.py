"""Figure specifications: which CSVs feed which figure, and how to smooth."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

FIGURE_KINDS = ("narma_sweep", "mg_sweep", "krylov_saturation",
                "coeff_deviation", "overlap_saturation", "mixing_validation",
                "design_gap", "solvable_performance")


class SpecError(ValueError):
    """Invalid figure specification."""


@dataclass
class FigureSpec:
    figure_kind: str
    input_csv: list
    output_path: str
    smoothing_window: int = 11
    smoothing_order: int = 3
    smoothing: bool = True
    title: str = ""

    def __post_init__(self):
        if self.figure_kind not in FIGURE_KINDS:
            raise SpecError(f"unknown figure_kind {self.figure_kind!r}; "
                            f"choose from {', '.join(FIGURE_KINDS)}")
        if isinstance(self.input_csv, (str, Path)):
            self.input_csv = [self.input_csv]
        if not self.input_csv:
            raise SpecError("input_csv list is empty")
        if self.smoothing_window % 2 == 0:
            raise SpecError("smoothing window must be odd")
        if self.smoothing_window <= self.smoothing_order:
            raise SpecError("smoothing window must exceed the polynomial order")

    @classmethod
    def from_file(cls, path) -> "FigureSpec":
        try:
            with open(path) as fh:
                raw = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise SpecError(f"{path}: {exc}") from exc
        unknown = set(raw) - set(cls.__dataclass_fields__)
        if unknown:
            raise SpecError(f"{path}: unknown spec keys {sorted(unknown)}")
        try:
            return cls(**raw)
        except TypeError as exc:
            raise SpecError(f"{path}: {exc}") from exc
