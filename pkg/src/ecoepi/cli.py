"""Command-line entry point: one analysis per subcommand, configured by INI files.

Exit status: 0 success, 2 invalid input, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import math
import platform
import sys
import time
from importlib import metadata
from pathlib import Path

import numpy as np

from ecoepi import __version__, io
from ecoepi.config import RunConfig, load_preset, preset_names, resolve_config
from ecoepi.equilibria import find_equilibria, select_equilibrium
from ecoepi.errors import NumericalError, ValidationError
from ecoepi.patterns import classify
from ecoepi.pde import FIELDS, FieldGrid, GridSpec, SnapshotSchedule, initial_condition, simulate
from ecoepi.stability import (a_priori_bounds, check_global_stability_conditions,
                              check_local_stability_conditions, temporal_stability)
from ecoepi.temporal import LyapunovSettings, bifurcation_sweep, integrate_rk4, lyapunov_spectrum
from ecoepi.turing import LEGEND, dispersion, nonexistence_thresholds, region_scan, turing_check
from ecoepi.workers import set_serial

EXIT_OK, EXIT_INVALID, EXIT_NUMERICAL = 0, 2, 3
COMMANDS = ("equilibria", "stability", "bounds", "dispersion", "turing-check", "region-scan",
            "integrate", "lyapunov", "bifurcate", "simulate", "classify")
TARGETS = ("table2", "fig8", "fig9", "fig12", "spectra")
COARSE_H = 0.02


class Run:
    """Output directory plus the artifacts written into it."""

    def __init__(self, out: Path, coarse: bool):
        self.out = out
        self.coarse = coarse
        self.artifacts: list[Path] = []
        self.configs: list[RunConfig] = []
        self.notes: list[str] = []
        out.mkdir(parents=True, exist_ok=True)

    def path(self, name: str) -> Path:
        return self.out / name

    def add(self, *paths: Path) -> None:
        self.artifacts.extend(paths)

    def say(self, line: str) -> None:
        self.notes.append(line)
        print(line)


def _equilibrium(cfg: RunConfig):
    return select_equilibrium(cfg.params, near=cfg.analysis.get("near"))


def _grid(cfg: RunConfig, coarse: bool) -> GridSpec:
    h = COARSE_H if coarse else cfg.grid["h"]
    return GridSpec(L=cfg.grid["L"], h=h, dt=cfg.grid["dt"], diffusion=cfg.params.diffusion)


def _axis(a: dict, n: int, default_name: str, start: float, stop: float, points: int, scale: str):
    name = a.get(f"axis{n}", default_name)
    lo = a.get(f"axis{n}_start", start)
    hi = a.get(f"axis{n}_stop", stop)
    count = a.get(f"axis{n}_points", points)
    kind = a.get(f"axis{n}_scale", scale)
    if count < 1:
        raise ValidationError(f"axis{n}_points must be >= 1", key=f"axis{n}_points")
    if kind == "log":
        if not (lo > 0 and hi > 0):
            raise ValidationError(f"axis{n} log scale needs positive bounds", key=f"axis{n}_start")
        values = np.logspace(math.log10(lo), math.log10(hi), count)
    elif kind == "linear":
        values = np.linspace(lo, hi, count)
    else:
        raise ValidationError(f"axis{n}_scale must be linear or log, got {kind!r}", key=f"axis{n}_scale")
    return {"lambda": "lam"}.get(name, name), values


# --- subcommands -----------------------------------------------------------

def cmd_equilibria(cfg: RunConfig, run: Run) -> None:
    eqs = find_equilibria(cfg.params)
    rows = [(e.u_star, e.v_star, e.w_star, e.residual_norm, e.feasible) for e in eqs]
    run.add(io.write_csv(run.path("equilibria.csv"), ["u", "v", "w", "residual", "feasible"], rows))
    run.say(f"{len(eqs)} positive equilibria, {sum(e.feasible for e in eqs)} feasible")
    for e in eqs:
        run.say(f"  u*={e.u_star:.6g} v*={e.v_star:.6g} w*={e.w_star:.6g} feasible={e.feasible}")


def cmd_stability(cfg: RunConfig, run: Run) -> None:
    eq = _equilibrium(cfg)
    rep = temporal_stability(eq, cfg.params)
    local = check_local_stability_conditions(eq, cfg.params)
    glob = check_global_stability_conditions(eq, cfg.params, cfg.analysis.get("w_prime"))
    block = {"equilibrium": eq, "temporal": rep, "local": local, "global": glob}
    run.add(io.write_kv(run.path("stability.txt"), block))
    run.say(f"stable={rep.stable} A1={rep.A1:.6g} A2={rep.A2:.6g} A3={rep.A3:.6g} "
            f"local_conditions={local.holds} global_conditions={glob.holds}")


def cmd_bounds(cfg: RunConfig, run: Run) -> None:
    bounds = a_priori_bounds(cfg.params)
    block = {"bounds": bounds}
    if bounds.valid:
        block["nonexistence"] = nonexistence_thresholds(cfg.params, cfg.grid["L"], cfg.analysis.get("w_prime"))
    run.add(io.write_kv(run.path("bounds.txt"), block))
    run.say(f"valid={bounds.valid} u_max={bounds.u_max:.6g} v_max={bounds.v_max:.6g} w_max={bounds.w_max:.6g}")


def cmd_dispersion(cfg: RunConfig, run: Run) -> None:
    eq = _equilibrium(cfg)
    a = cfg.analysis
    ks = a.get("k_values") or np.linspace(0.0, a.get("k_max", 30.0), a.get("k_points", 301))
    rows = [(s.k, s.rho1, s.rho2, s.rho3, s.phi) for s in (dispersion(eq, cfg.params, k) for k in ks)]
    run.add(io.write_csv(run.path("dispersion.csv"), ["k", "rho1", "rho2", "rho3", "phi"], rows))
    run.say(f"{len(rows)} wave numbers; min rho3 = {min(r[3] for r in rows):.6g}")


def cmd_turing_check(cfg: RunConfig, run: Run) -> None:
    diag = turing_check(_equilibrium(cfg), cfg.params)
    run.add(io.write_kv(run.path("turing.txt"), diag))
    run.say(f"verdict={diag.verdict}")


def cmd_region_scan(cfg: RunConfig, run: Run) -> None:
    a = cfg.analysis
    ax1 = _axis(a, 1, "sigma", 0.001, 0.05, 50, "linear")
    ax2 = _axis(a, 2, "d1", 1e-7, 1e-4, 50, "log")
    rmap = region_scan(cfg.params, ax1, ax2)
    names = [{"lam": "lambda"}.get(n, n) for n in (ax1[0], ax2[0])]
    run.add(io.write_csv(run.path("region.csv"), names + ["verdict"], rmap.rows()))
    legend = run.path("region_legend.txt")
    legend.write_text("".join(f"{k} = {v}\n" for k, v in LEGEND.items()))
    run.add(legend)
    hopf = [(names[h.axis], h.cell_a[0], h.cell_a[1], h.cell_b[0], h.cell_b[1], h.value) for h in rmap.hopf]
    run.add(io.write_csv(run.path("region_hopf.csv"), ["axis", "i_a", "j_a", "i_b", "j_b", "crossing"], hopf))
    run.say(f"cells: {rmap.counts()}; hopf crossings: {len(rmap.hopf)}")


def _init(cfg: RunConfig):
    if "init" not in cfg.analysis:
        raise ValidationError("[analysis] init is required", key="init")
    return cfg.analysis["init"]


def cmd_integrate(cfg: RunConfig, run: Run) -> None:
    a = cfg.analysis
    if "t_end" not in a:
        raise ValidationError("[analysis] t_end is required", key="t_end")
    traj = integrate_rk4(cfg.params, _init(cfg), a.get("dt", 0.01), a["t_end"], every=a.get("every", 100))
    rows = np.column_stack([traj.times, traj.states])
    run.add(io.write_csv(run.path("trajectory.csv"), ["t", "u", "v", "w"], rows))
    run.say(f"{len(rows)} samples; final state {np.array2string(traj.final, precision=6)}")


def _lyapunov_settings(a: dict) -> LyapunovSettings:
    d = LyapunovSettings()
    return LyapunovSettings(dt=a.get("dt", d.dt), transient=a.get("transient", d.transient),
                            accumulate=a.get("accumulate", d.accumulate),
                            renorm_interval=a.get("renorm_interval", d.renorm_interval))


def cmd_lyapunov(cfg: RunConfig, run: Run, name: str = "lyapunov") -> None:
    spec = lyapunov_spectrum(cfg.params, _init(cfg), _lyapunov_settings(cfg.analysis))
    run.add(io.write_kv(run.path(f"{name}.txt"), spec))
    run.say(f"{name}: L = ({spec.L1:.6g}, {spec.L2:.6g}, {spec.L3:.6g}) signs {spec.signs} "
            f"sum={sum(spec.exponents):.6g} mean_trace={spec.mean_trace:.6g} converged={spec.converged}")


def cmd_bifurcate(cfg: RunConfig, run: Run) -> None:
    a = cfg.analysis
    for key in ("parameter", "grid_start", "grid_stop", "grid_points"):
        if key not in a:
            raise ValidationError(f"[analysis] {key} is required", key=key)
    grid = np.linspace(a["grid_start"], a["grid_stop"], a["grid_points"])
    sweep = bifurcation_sweep(cfg.params, a["parameter"], grid, _init(cfg),
                              transient=a.get("transient", 10000.0), window=a.get("window", 5000.0),
                              dt=a.get("dt", 0.01))
    run.add(io.write_csv(run.path("bifurcation.csv"), [sweep.parameter, "extremum_value"], sweep.rows()))
    settled = sweep.settled()
    run.say(f"{grid.size} values; settled at {int(settled.sum())}")


def _simulate(cfg: RunConfig, run: Run, name: str) -> list[tuple[float, FieldGrid]]:
    if not cfg.times:
        raise ValidationError("[schedule] snapshot times are required", key="times")
    grid = _grid(cfg, run.coarse)
    eq = select_equilibrium(cfg.params, near=cfg.analysis.get("near"))
    init = initial_condition(eq, grid, amplitude=cfg.analysis.get("amplitude", 0.1))
    times = tuple(t for t in cfg.times if t > 0)
    history = simulate(cfg.params, eq, grid, SnapshotSchedule(times), initial=init)
    for t, snap in history:
        run.add(*io.write_snapshot(run.out, name, t, dict(snap.items()), grid.h))
    summary = {"grid": {"L": grid.L, "h": grid.h, "dt": grid.dt, "nx": grid.nx},
               "amplitude": {f"t{t:g}": s.amplitude() for t, s in history}}
    run.add(io.write_kv(run.path(f"{name}_summary.txt"), summary))
    run.say(f"{name}: {len(history)} snapshots on a {grid.nx}x{grid.ny} grid (h={grid.h:g})")
    return history


def _classify(cfg: RunConfig, run: Run, name: str, history) -> None:
    eq = select_equilibrium(cfg.params, near=cfg.analysis.get("near"))
    verdict = turing_check(eq, cfg.params).verdict
    rep = classify(history, verdict)
    run.add(io.write_kv(run.path(f"{name}_pattern.txt"), rep))
    rows = [(ta, tb, f, d[f]) for (ta, tb), d in zip(zip(rep.times, rep.times[1:]), rep.distances) for f in FIELDS]
    run.add(io.write_csv(run.path(f"{name}_distances.csv"), ["t_a", "t_b", "field", "distance"], rows))
    final = ", ".join(f"{f}={v:.3g}" for f, v in rep.final_distance.items())
    run.say(f"{name}: label={rep.label} (linear verdict {verdict}; last-pair distances {final})")


def cmd_simulate(cfg: RunConfig, run: Run) -> None:
    _simulate(cfg, run, cfg.run_name)


def cmd_classify(cfg: RunConfig, run: Run) -> None:
    src = Path(cfg.analysis.get("input_dir", str(run.out)))
    name = cfg.analysis.get("input_run", cfg.run_name)
    by_time: dict[float, dict[str, np.ndarray]] = {}
    for path in sorted(src.glob(f"{name}_*_t*.csv")):
        meta, data = io.read_snapshot(path)
        by_time.setdefault(meta["t"], {})[meta["field"]] = data
    history = []
    for t in sorted(by_time):
        fields = by_time[t]
        if set(fields) != set(FIELDS):
            raise ValidationError(f"snapshot t={t:g} in {src} lacks fields {sorted(set(FIELDS) - set(fields))}")
        history.append((t, FieldGrid(fields["u"], fields["v"], fields["w"], t)))
    if len(history) < 2:
        raise ValidationError(f"need at least two snapshot times for run {name!r} in {src}", key="input_dir")
    _classify(cfg, run, name, history)


HANDLERS = {
    "equilibria": cmd_equilibria, "stability": cmd_stability, "bounds": cmd_bounds,
    "dispersion": cmd_dispersion, "turing-check": cmd_turing_check, "region-scan": cmd_region_scan,
    "integrate": cmd_integrate, "lyapunov": cmd_lyapunov, "bifurcate": cmd_bifurcate,
    "simulate": cmd_simulate, "classify": cmd_classify,
}


# --- reproduction recipes ----------------------------------------------------

def reproduce_table2(run: Run) -> None:
    rows = []
    for label, preset, k in (("8A,8B", "row_A", 0.0), ("8A", "row_A", 15.0), ("8B", "row_B", 15.0)):
        cfg = load_preset(preset)
        run.configs.append(cfg)
        s = dispersion(select_equilibrium(cfg.params), cfg.params, k)
        rows.append((label, s.k, s.rho1, s.rho2, s.rho3, s.phi))
        run.say(f"{label:6s} k={k:4g} rho1={s.rho1:.4f} rho2={s.rho2:.4f} rho3={s.rho3:.4f} phi={s.phi:.4f}")
    run.add(io.write_csv(run.path("table2.csv"), ["figure", "k", "rho1", "rho2", "rho3", "phi"], rows))


def _pattern_recipe(run: Run, presets) -> None:
    for preset in presets:
        cfg = load_preset(preset)
        run.configs.append(cfg)
        history = _simulate(cfg, run, preset)
        _classify(cfg, run, preset, history)


def reproduce_spectra(run: Run) -> None:
    for preset in ("lyapunov_oscillatory", "lyapunov_focus"):
        cfg = load_preset(preset)
        run.configs.append(cfg)
        cmd_lyapunov(cfg, run, preset)


RECIPES = {
    "table2": reproduce_table2,
    "fig8": lambda run: _pattern_recipe(run, ("row_A", "row_B")),
    "fig9": lambda run: _pattern_recipe(run, ("row_C",)),
    "fig12": lambda run: _pattern_recipe(run, ("row_E",)),
    "spectra": reproduce_spectra,
}


# --- plumbing -----------------------------------------------------------------

def _sha256(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


def _version(dist: str) -> str:
    try:
        return metadata.version(dist)
    except metadata.PackageNotFoundError:
        return "unknown"


def emit_manifest(run: Run, command: str, wall: float, serial: bool) -> Path:
    digest = hashlib.sha256("".join(c.to_string() for c in run.configs).encode()).hexdigest()
    manifest = {
        "command": command,
        "config_hash": digest,
        "serial": serial,
        "coarse": run.coarse,
        "versions": {"ecoepi": __version__, "python": platform.python_version(),
                     "numpy": _version("numpy"), "numba": _version("numba")},
        "wall_time_s": round(wall, 3),
        "artifacts": [{"path": p.relative_to(run.out).as_posix(), "sha256": _sha256(p),
                       "bytes": p.stat().st_size} for p in run.artifacts],
    }
    path = run.path("manifest.json")
    path.write_text(json.dumps(manifest, indent=2) + "\n")
    return path


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="INI config file or bundled preset name")
    common.add_argument("--out", help="output directory (default: [output] dir, else ./out)")
    common.add_argument("--serial", action="store_true", help="single worker, deterministic")
    common.add_argument("--coarse", action="store_true", help=f"PDE runs on h={COARSE_H}")
    parser = argparse.ArgumentParser(prog="ecoepi", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        sub.add_parser(name, parents=[common])
    rep = sub.add_parser("reproduce", parents=[common])
    rep.add_argument("target", choices=TARGETS)
    sub.add_parser("presets", help="list bundled configs")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "presets":
        print("\n".join(preset_names()))
        return EXIT_OK
    set_serial(args.serial)
    t0 = time.perf_counter()
    try:
        cfg = None
        if args.command != "reproduce":
            if not args.config:
                raise ValidationError("--config is required", key="config")
            cfg = resolve_config(args.config)
        out = Path(args.out or (cfg.output_dir if cfg and cfg.output_dir else "out"))
        run = Run(out, args.coarse)
        if cfg is None:
            RECIPES[args.target](run)
            label = f"reproduce {args.target}"
        else:
            run.configs.append(cfg)
            HANDLERS[args.command](cfg, run)
            label = args.command
        emit_manifest(run, label, time.perf_counter() - t0, args.serial)
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    finally:
        set_serial(False)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
