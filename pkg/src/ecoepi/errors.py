"""Exception hierarchy shared by every module."""


class EcoEpiError(Exception):
    """Base class for all package errors."""


class ValidationError(EcoEpiError, ValueError):
    """Bad input: parameters, configs, grids or schedules that fail their contract."""

    def __init__(self, message: str, key: str | None = None):
        super().__init__(message)
        self.key = key


class EquilibriumReductionError(ValidationError):
    """The reduced equilibrium system is undefined (it divides by sigma)."""


class NumericalError(EcoEpiError, RuntimeError):
    """A run produced non-finite, negative or runaway values."""


class DivergenceError(NumericalError):
    """Trajectory left the admissible box; ``step`` and ``time`` locate the failure."""

    def __init__(self, message: str, step: int | None = None, time: float | None = None):
        super().__init__(message)
        self.step = step
        self.time = time
