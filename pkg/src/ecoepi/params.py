"""Model parameters and the reference parameter sets."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, fields, replace

import numpy as np

from ecoepi.errors import ValidationError

# Order used by the compiled kernels; must match ``ModelParams.kinetic_vector``.
KINETIC_KEYS = (
    "r", "k", "lam", "alpha1", "alpha2", "gamma", "alpha", "d", "e",
    "sigma", "c1", "c2", "beta", "l", "f",
)
DIFFUSION_KEYS = ("d1", "d2", "d3")

# Public (config-file) names differ from attribute names only for lambda.
CONFIG_NAMES = {"lam": "lambda"}
ATTR_NAMES = {v: k for k, v in CONFIG_NAMES.items()}

_MAY_BE_ZERO = {"lam", "sigma", "d1", "d2", "d3"}


@dataclass(frozen=True)
class ModelParams:
    """Biological rates of the prey / susceptible predator / infected predator model.

    ``lam`` is the disease transmission rate (``lambda`` in config files).
    ``d1, d2, d3`` are the diffusion coefficients of u, v, w.
    """

    r: float
    k: float
    lam: float
    alpha1: float
    alpha2: float
    gamma: float
    alpha: float
    d: float
    e: float
    sigma: float
    c1: float
    c2: float
    beta: float
    l: float  # noqa: E741
    f: float
    d1: float = 0.0
    d2: float = 0.0
    d3: float = 0.0

    def __post_init__(self):
        for fld in fields(self):
            value = getattr(self, fld.name)
            name = CONFIG_NAMES.get(fld.name, fld.name)
            if isinstance(value, bool) or not isinstance(value, (int, float, np.floating, np.integer)):
                raise ValidationError(f"parameter {name} must be a real number, got {value!r}", key=name)
            value = float(value)
            object.__setattr__(self, fld.name, value)
            if not math.isfinite(value):
                raise ValidationError(f"parameter {name} must be finite, got {value}", key=name)
            if fld.name in _MAY_BE_ZERO:
                if value < 0:
                    raise ValidationError(f"parameter {name} must be >= 0, got {value}", key=name)
            elif value <= 0:
                raise ValidationError(f"parameter {name} must be > 0, got {value}", key=name)
        for name in ("c1", "c2"):
            if getattr(self, name) > 1:
                raise ValidationError(f"conversion efficiency {name} must be <= 1", key=name)

    @property
    def transmission_excess(self) -> float:
        """lambda + sigma*l*f - sigma*beta, the net infection gain per susceptible."""
        return self.lam + self.sigma * self.l * self.f - self.sigma * self.beta

    @property
    def diffusion(self) -> tuple[float, float, float]:
        return (self.d1, self.d2, self.d3)

    def kinetic_vector(self) -> np.ndarray:
        return np.array([getattr(self, key) for key in KINETIC_KEYS], dtype=np.float64)

    def with_(self, **changes) -> "ModelParams":
        """Copy with changes; accepts ``lambda`` as an alias of ``lam``."""
        changes = {ATTR_NAMES.get(k, k): v for k, v in changes.items()}
        return replace(self, **changes)

    def to_config_dict(self) -> dict[str, float]:
        return {CONFIG_NAMES.get(k, k): v for k, v in asdict(self).items()}

    @classmethod
    def from_config_dict(cls, data: dict[str, float]) -> "ModelParams":
        known = {CONFIG_NAMES.get(f.name, f.name) for f in fields(cls)}
        unknown = sorted(set(data) - known)
        if unknown:
            raise ValidationError(f"unknown parameter {unknown[0]}", key=unknown[0])
        missing = [name for name in known if name not in data]
        if missing:
            name = sorted(missing)[0]
            raise ValidationError(f"missing parameter {name}", key=name)
        return cls(**{ATTR_NAMES.get(k, k): v for k, v in data.items()})


BASE = dict(
    r=0.4, k=68.0, alpha1=0.3, alpha2=0.1, gamma=10.0, alpha=1.0, c2=0.2, l=0.08,
    f=10.0, lam=0.003, sigma=0.005, d=0.02, e=0.01, beta=0.5, c1=1.0,
)

# Simulation table: row -> (label, d1, d2, d3, sigma)
TABLE3 = {
    "A": ("turing", 1e-5, 1e-3, 1e-10, 0.026),
    "B": ("turing", 1e-6, 1e-3, 1e-10, 0.026),
    "C": ("non_stationary_non_turing", 1e-6, 1e-6, 1e-10, 0.005),
    "D": ("stationary_non_turing", 1e-10, 1e-4, 1e-10, 0.005),
    "E": ("stationary_non_turing", 1e-10, 1e-6, 1e-10, 0.005),
}


def base_params(**overrides) -> ModelParams:
    """Reference parameter set (sigma=0.005, lambda=0.003), diffusion off."""
    overrides = {ATTR_NAMES.get(k, k): v for k, v in overrides.items()}
    return ModelParams(**{**BASE, **overrides})


def turing_params(**overrides) -> ModelParams:
    """Reference set with sigma=0.026, the stable-focus / Turing regime."""
    return base_params(**{"sigma": 0.026, **overrides})


def table3_params(row: str) -> ModelParams:
    try:
        _, d1, d2, d3, sigma = TABLE3[row.upper()]
    except KeyError:
        raise ValidationError(f"unknown simulation row {row!r}; expected one of {sorted(TABLE3)}") from None
    return base_params(sigma=sigma, d1=d1, d2=d2, d3=d3)
