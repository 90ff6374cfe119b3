"""Stationarity tests and pattern labels for simulated snapshots."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ecoepi.errors import ValidationError
from ecoepi.pde import FIELDS, FieldGrid
from ecoepi.turing import TURING

STATIONARY_TOL = 1e-2
HOMOGENEOUS_TOL = 1e-6
MIN_SEPARATION = 100.0
EPS = 1e-30

LABELS = ("turing", "stationary_non_turing", "non_stationary_non_turing", "homogeneous")


@dataclass(frozen=True)
class PatternReport:
    times: tuple[float, ...]
    distances: list[dict[str, float]]  # consecutive snapshot pairs
    amplitudes: list[dict[str, float]]  # max - min per field per snapshot
    stationary: bool
    linear_verdict: str
    label: str

    @property
    def final_distance(self) -> dict[str, float]:
        return self.distances[-1]


def snapshot_distance(a: FieldGrid, b: FieldGrid) -> dict[str, float]:
    """Relative L2 change per field: |a - b| / max(|a|, 1e-30)."""
    if a.shape != b.shape:
        raise ValidationError(f"snapshot grids differ: {a.shape} vs {b.shape}")
    out = {}
    for f in FIELDS:
        x, y = a.field(f), b.field(f)
        out[f] = float(np.linalg.norm(x - y) / max(np.linalg.norm(x), EPS))
    return out


def classify(history, linear_verdict: str, tol: float = STATIONARY_TOL,
             min_separation: float = MIN_SEPARATION) -> PatternReport:
    """Label a run from its snapshots and the linear (dispersion) verdict.

    Stationary means every field moved by less than ``tol`` between the last
    two snapshots. A flat final state is ``homogeneous`` regardless.
    """
    history = list(history)
    if len(history) < 2:
        raise ValidationError("classification needs at least two snapshots", key="history")
    times = tuple(float(t) for t, _ in history)
    if times[-1] - times[-2] < min_separation:
        raise ValidationError(
            f"last two snapshots are {times[-1] - times[-2]:g} apart; need >= {min_separation:g}", key="history")
    grids = [g for _, g in history]
    distances = [snapshot_distance(a, b) for a, b in zip(grids, grids[1:])]
    amplitudes = [g.amplitude() for g in grids]
    stationary = all(d < tol for d in distances[-1].values())
    if all(a < HOMOGENEOUS_TOL for a in amplitudes[-1].values()):
        label = "homogeneous"
    elif not stationary:
        label = "non_stationary_non_turing"
    elif linear_verdict == TURING:
        label = "turing"
    else:
        label = "stationary_non_turing"
    return PatternReport(times, distances, amplitudes, stationary, linear_verdict, label)
