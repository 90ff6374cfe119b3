"""Worker-count policy shared by the parallel sweeps and the PDE stencil."""

from __future__ import annotations

import os

ENV_VAR = "ECOEPI_THREADS"

_serial = False


def set_serial(flag: bool) -> None:
    """Force single-worker execution everywhere (deterministic golden runs)."""
    global _serial
    _serial = bool(flag)


def worker_count(requested: int | None = None) -> int:
    if _serial:
        return 1
    if requested is not None:
        return max(1, int(requested))
    env = os.environ.get(ENV_VAR)
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            pass
    return os.cpu_count() or 1
