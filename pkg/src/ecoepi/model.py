"""Reaction kinetics and their Jacobian."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ecoepi import _kernels
from ecoepi.errors import ValidationError
from ecoepi.params import ModelParams

_rhs = _kernels.rhs_scalar.py_func
_jac = _kernels.model_jac.py_func


def _check_state(state, params: ModelParams):
    u, v, w = (np.asarray(s, dtype=float) for s in state)
    if not (np.all(np.isfinite(u)) and np.all(np.isfinite(v)) and np.all(np.isfinite(w))):
        raise ValidationError(f"state must be finite, got {state!r}")
    if np.any(params.gamma + u <= 0):
        raise ValidationError("gamma + u must be positive")
    return u, v, w


def kinetics(state, params: ModelParams):
    """Reaction terms (G1, G2, G3) at ``state = (u, v, w)``.

    Components may be scalars or equally-shaped arrays.
    """
    u, v, w = _check_state(state, params)
    g1, g2, g3 = _rhs(u, v, w, tuple(params.kinetic_vector()))
    if np.ndim(g1) == 0:
        return float(g1), float(g2), float(g3)
    return g1, g2, g3


@dataclass(frozen=True)
class Jacobian3:
    a11: float
    a12: float
    a13: float
    a21: float
    a22: float
    a23: float
    a31: float
    a32: float
    a33: float

    @classmethod
    def from_array(cls, m) -> "Jacobian3":
        m = np.asarray(m, dtype=float)
        return cls(*(float(x) for x in m.ravel()))

    def as_array(self) -> np.ndarray:
        return np.array([
            [self.a11, self.a12, self.a13],
            [self.a21, self.a22, self.a23],
            [self.a31, self.a32, self.a33],
        ])

    @property
    def trace(self) -> float:
        return self.a11 + self.a22 + self.a33

    @property
    def principal_minor_sum(self) -> float:
        return (self.a11 * self.a22 - self.a12 * self.a21
                + self.a11 * self.a33 - self.a13 * self.a31
                + self.a22 * self.a33 - self.a23 * self.a32)

    @property
    def det(self) -> float:
        return (self.a11 * (self.a22 * self.a33 - self.a23 * self.a32)
                - self.a12 * (self.a21 * self.a33 - self.a23 * self.a31)
                + self.a13 * (self.a21 * self.a32 - self.a22 * self.a31))


def jacobian_at(state, params: ModelParams) -> Jacobian3:
    """Exact partial derivatives of the kinetics at an arbitrary state.

    At an equilibrium these coincide with the reduced textbook entries
    (e.g. a11 = -r u/k + (alpha1 v + alpha2 w) u/(gamma+u)^2, a33 = -sigma w).
    """
    u, v, w = _check_state(state, params)
    x = np.array([float(u), float(v), float(w)])
    return Jacobian3.from_array(_jac(x, params.kinetic_vector()))
