"""INI-style run configuration with strict key checking.

Sections: [params] (every model parameter, no defaults), [grid] (L, h, dt),
[schedule] (``times`` or ``t_end`` + ``interval``), [analysis] (subcommand
settings) and [output] (``dir``, ``run``).
"""

from __future__ import annotations

import configparser
import hashlib
import io
import math
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

from ecoepi.errors import ValidationError
from ecoepi.params import ModelParams

SECTIONS = ("params", "grid", "schedule", "analysis", "output")
GRID_DEFAULTS = {"L": math.pi, "h": 0.01, "dt": 0.01}

# name -> kind; kinds: float, int, str, vec3 (three floats), floats (any length)
ANALYSIS_KEYS = {
    "init": "vec3",
    "near": "vec3",
    "t_end": "float",
    "dt": "float",
    "every": "int",
    "transient": "float",
    "accumulate": "float",
    "renorm_interval": "float",
    "window": "float",
    "parameter": "str",
    "grid_start": "float",
    "grid_stop": "float",
    "grid_points": "int",
    "k_max": "float",
    "k_points": "int",
    "k_values": "floats",
    "axis1": "str",
    "axis1_start": "float",
    "axis1_stop": "float",
    "axis1_points": "int",
    "axis1_scale": "str",
    "axis2": "str",
    "axis2_start": "float",
    "axis2_stop": "float",
    "axis2_points": "int",
    "axis2_scale": "str",
    "w_prime": "float",
    "amplitude": "float",
    "input_dir": "str",
    "input_run": "str",
}
SCHEDULE_KEYS = ("times", "t_end", "interval")
OUTPUT_KEYS = ("dir", "run")


def _float(section: str, key: str, text: str) -> float:
    try:
        return float(text)
    except ValueError:
        raise ValidationError(f"[{section}] {key}: expected a number, got {text!r}", key=key) from None


def _floats(section: str, key: str, text: str) -> tuple[float, ...]:
    return tuple(_float(section, key, t.strip()) for t in text.split(",") if t.strip())


def _parse_analysis(items: dict[str, str]) -> dict[str, object]:
    out: dict[str, object] = {}
    for key, text in items.items():
        kind = ANALYSIS_KEYS.get(key)
        if kind is None:
            raise ValidationError(f"[analysis] unknown key {key!r}", key=key)
        if kind == "float":
            out[key] = _float("analysis", key, text)
        elif kind == "int":
            try:
                out[key] = int(text)
            except ValueError:
                raise ValidationError(f"[analysis] {key}: expected an integer, got {text!r}", key=key) from None
        elif kind == "vec3":
            vec = _floats("analysis", key, text)
            if len(vec) != 3:
                raise ValidationError(f"[analysis] {key}: expected three numbers, got {text!r}", key=key)
            out[key] = vec
        elif kind == "floats":
            out[key] = _floats("analysis", key, text)
        else:
            out[key] = text.strip()
    return out


def _fmt(x) -> str:
    if isinstance(x, float):
        return repr(x)
    if isinstance(x, tuple):
        return ", ".join(_fmt(v) for v in x)
    return str(x)


@dataclass(frozen=True)
class RunConfig:
    params: ModelParams
    grid: dict[str, float] = field(default_factory=lambda: dict(GRID_DEFAULTS))
    times: tuple[float, ...] | None = None
    analysis: dict[str, object] = field(default_factory=dict)
    output_dir: str | None = None
    run_name: str = "run"

    @classmethod
    def from_string(cls, text: str, source: str = "<config>") -> "RunConfig":
        cp = configparser.ConfigParser(interpolation=None, delimiters=("=",))
        cp.optionxform = str  # keep key case (L)
        try:
            cp.read_string(text, source=source)
        except configparser.Error as exc:
            raise ValidationError(f"{source}: {exc}") from None
        unknown = set(cp.sections()) - set(SECTIONS)
        if unknown:
            raise ValidationError(f"{source}: unknown section(s) {sorted(unknown)}", key=sorted(unknown)[0])
        if not cp.has_section("params"):
            raise ValidationError(f"{source}: missing [params] section", key="params")

        raw = {k: _float("params", k, v) for k, v in cp.items("params")}
        params = ModelParams.from_config_dict(raw)

        grid = dict(GRID_DEFAULTS)
        if cp.has_section("grid"):
            for k, v in cp.items("grid"):
                if k not in GRID_DEFAULTS:
                    raise ValidationError(f"[grid] unknown key {k!r}", key=k)
                grid[k] = _float("grid", k, v)

        times = None
        if cp.has_section("schedule"):
            sched = dict(cp.items("schedule"))
            for k in sched:
                if k not in SCHEDULE_KEYS:
                    raise ValidationError(f"[schedule] unknown key {k!r}", key=k)
            if "times" in sched:
                if "t_end" in sched or "interval" in sched:
                    raise ValidationError("[schedule] give either times or t_end + interval", key="times")
                times = _floats("schedule", "times", sched["times"])
            elif sched:
                if "t_end" not in sched or "interval" not in sched:
                    missing = "t_end" if "t_end" not in sched else "interval"
                    raise ValidationError(f"[schedule] missing key {missing!r}", key=missing)
                t_end = _float("schedule", "t_end", sched["t_end"])
                step = _float("schedule", "interval", sched["interval"])
                if not (step > 0 and t_end >= 0):
                    raise ValidationError("[schedule] need interval > 0 and t_end >= 0", key="interval")
                n = int(math.floor(t_end / step + 1e-9))
                times = tuple(i * step for i in range(n + 1))
                if abs(times[-1] - t_end) > 1e-9:
                    times = times + (t_end,)

        analysis = _parse_analysis(dict(cp.items("analysis"))) if cp.has_section("analysis") else {}

        out_dir, run = None, "run"
        if cp.has_section("output"):
            for k, v in cp.items("output"):
                if k not in OUTPUT_KEYS:
                    raise ValidationError(f"[output] unknown key {k!r}", key=k)
            out_dir = cp.get("output", "dir", fallback=None)
            run = cp.get("output", "run", fallback="run")
        return cls(params, grid, times, analysis, out_dir, run)

    @classmethod
    def load(cls, path: Path | str) -> "RunConfig":
        path = Path(path)
        try:
            text = path.read_text()
        except OSError as exc:
            raise ValidationError(f"cannot read config {path}: {exc.strerror}", key="config") from None
        return cls.from_string(text, str(path))

    def to_string(self) -> str:
        cp = configparser.ConfigParser(interpolation=None)
        cp.optionxform = str
        cp["params"] = {k: repr(float(v)) for k, v in self.params.to_config_dict().items()}
        cp["grid"] = {k: repr(float(v)) for k, v in self.grid.items()}
        if self.times is not None:
            cp["schedule"] = {"times": _fmt(tuple(float(t) for t in self.times))}
        if self.analysis:
            cp["analysis"] = {k: _fmt(v) for k, v in self.analysis.items()}
        out = {"run": self.run_name}
        if self.output_dir is not None:
            out["dir"] = self.output_dir
        cp["output"] = out
        buf = io.StringIO()
        cp.write(buf)
        return buf.getvalue()

    def digest(self) -> str:
        return hashlib.sha256(self.to_string().encode()).hexdigest()

    def with_params(self, params: ModelParams) -> "RunConfig":
        return RunConfig(params, dict(self.grid), self.times, dict(self.analysis), self.output_dir, self.run_name)


def preset_names() -> list[str]:
    root = resources.files("ecoepi") / "presets"
    return sorted(p.name[:-4] for p in root.iterdir() if p.name.endswith(".ini"))


def load_preset(name: str) -> RunConfig:
    res = resources.files("ecoepi") / "presets" / f"{name}.ini"
    if not res.is_file():
        raise ValidationError(f"unknown preset {name!r}; available: {', '.join(preset_names())}", key="config")
    return RunConfig.from_string(res.read_text(), f"preset:{name}")


def resolve_config(spec: str) -> RunConfig:
    """A filesystem path, or the name of a bundled preset."""
    path = Path(spec)
    if path.exists():
        return RunConfig.load(path)
    return load_preset(spec.removeprefix("preset:"))
