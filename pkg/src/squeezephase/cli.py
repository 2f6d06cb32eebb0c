"""Configuration parsing, subcommand dispatch, and machine-readable output.

Config files are plain UTF-8 key=value lines with '#' comments; bare keys
before any [section] header select the schedule, hbar, and integrator;
sections hold subcommand-specific fields.  All numeric output is written
with 17 significant digits and '\\n' line endings so identical configs
produce byte-identical artifacts.
"""

from __future__ import annotations

import argparse
import math
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import checks, dynamics, floquet, hannay, orbits
from .errors import (ConfigError, ConvergenceError, IntegrationError,
                     NonEllipticError)
from .monodromy import compute_monodromy
from .params import Constants, ParameterSchedule

EXIT_OK = 0
EXIT_NUMERIC = 1
EXIT_CONFIG = 2

SUBCOMMANDS = ("simulate", "orbit", "hannay", "floquet", "sweep", "check")


# ----------------------------------------------------------------------
# Config model
# ----------------------------------------------------------------------

@dataclass
class SimulateConfig:
    q0: float = 0.0
    p0: float = 0.0
    g0: float = 0.5
    pi0: float = 0.0
    t1: float | None = None      # defaults to one period
    samples: int = 256


@dataclass
class OrbitConfig:
    samples: int = 1024
    tol: float = 1e-10
    max_iter: int = 25
    guess_g: float | None = None
    guess_pi: float | None = None


@dataclass
class HannayConfig:
    n_t: int = 512
    n_phi: int = 512
    i_bar: float = 1.0
    ensemble: int = 256


@dataclass
class FloquetConfig:
    n: tuple = (0,)
    ensemble: int = 256


@dataclass
class SweepConfig:
    eps: tuple = ()
    omega: tuple = ()
    ensemble: int = 256
    workers: int = 0             # 0 = one per grid point, capped by CPUs


@dataclass
class RunConfig:
    schedule: ParameterSchedule
    constants: Constants
    options: dynamics.IntegratorOptions
    simulate: SimulateConfig = field(default_factory=SimulateConfig)
    orbit: OrbitConfig = field(default_factory=OrbitConfig)
    hannay: HannayConfig = field(default_factory=HannayConfig)
    floquet: FloquetConfig = field(default_factory=FloquetConfig)
    sweep: SweepConfig = field(default_factory=SweepConfig)


# key -> parser kind; sections not listed reject every key
_GLOBAL_KEYS = {
    "epsilon": "float", "omega": "float", "hbar": "float",
    "method": "str", "rtol": "float", "atol": "float", "step": "float",
    "max_steps": "int", "period": "float",
    "a_cos": "float_list", "a_sin": "float_list",
    "b_cos": "float_list", "b_sin": "float_list",
    "c_cos": "float_list", "c_sin": "float_list",
}
_SECTION_KEYS = {
    "simulate": {"q0": "float", "p0": "float", "g0": "float", "pi0": "float",
                 "t1": "float", "samples": "int"},
    "orbit": {"samples": "int", "tol": "float", "max_iter": "int",
              "guess_g": "float", "guess_pi": "float"},
    "hannay": {"n_t": "int", "n_phi": "int", "i_bar": "float",
               "ensemble": "int"},
    "floquet": {"n": "int_list", "ensemble": "int"},
    "sweep": {"eps": "float_list", "omega": "float_list", "ensemble": "int",
              "workers": "int"},
}

_FOURIER_KEYS = ("period", "a_cos", "a_sin", "b_cos", "b_sin",
                 "c_cos", "c_sin")


def _parse_scalar(kind, raw):
    if kind == "str":
        return raw
    if kind == "int":
        return int(raw)
    if kind == "float":
        value = float(raw)
        if not math.isfinite(value):
            raise ValueError(raw)
        return value
    if kind == "float_list":
        return tuple(float(part) for part in raw.split(","))
    if kind == "int_list":
        return tuple(int(part) for part in raw.split(","))
    raise AssertionError(kind)


def parse_config(text: str) -> RunConfig:
    """Parse and validate a config; raises ConfigError listing every
    problem (line number, message), not just the first."""
    errors = []
    values = {}          # (section, key) -> value
    lines = {}           # (section, key) -> line number
    section = None
    for lineno, raw_line in enumerate(text.splitlines(), start=1):
        line = raw_line.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("[") and line.endswith("]"):
            section = line[1:-1].strip()
            if section not in _SECTION_KEYS:
                errors.append((lineno, f"unknown section [{section}]"))
                section = "__invalid__"
            continue
        if "=" not in line:
            errors.append((lineno, f"expected key=value, got {line!r}"))
            continue
        key, raw = (part.strip() for part in line.split("=", 1))
        if section == "__invalid__":
            continue
        schema = _GLOBAL_KEYS if section is None else _SECTION_KEYS[section]
        where = "" if section is None else f" in [{section}]"
        if key not in schema:
            errors.append((lineno, f"unknown key {key!r}{where}"))
            continue
        try:
            value = _parse_scalar(schema[key], raw)
        except ValueError:
            errors.append((lineno, f"malformed value for {key}: {raw!r}"))
            continue
        values[(section, key)] = value
        lines[(section, key)] = lineno

    cfg = _build_config(values, lines, errors)
    if errors:
        raise ConfigError(sorted(errors))
    return cfg


def _get(values, section, key, default=None):
    return values.get((section, key), default)


def _build_config(values, lines, errors):
    def complain(section, key, msg):
        errors.append((lines.get((section, key), 0), msg))

    # ---- schedule -------------------------------------------------
    has_standard = (None, "epsilon") in values or (None, "omega") in values
    has_fourier = any((None, k) in values for k in _FOURIER_KEYS)
    schedule = ParameterSchedule.standard(0.0, 1.0)
    if has_standard and has_fourier:
        complain(None, "period",
                 "cannot mix epsilon/omega with fourier schedule keys")
    elif has_fourier:
        period = _get(values, None, "period")
        if period is None:
            errors.append((0, "fourier schedule requires period"))
        elif period <= 0:
            complain(None, "period", "period must be > 0")
        else:
            def pairs(name):
                cos = _get(values, None, f"{name}_cos", (0.0,))
                sin = _get(values, None, f"{name}_sin", ())
                n = max(len(cos), len(sin))
                cos = cos + (0.0,) * (n - len(cos))
                sin = sin + (0.0,) * (n - len(sin))
                return tuple(zip(cos, sin))
            try:
                schedule = ParameterSchedule.fourier(
                    period, pairs("a"), pairs("b"), pairs("c"))
            except NonEllipticError as exc:
                complain(None, "period", str(exc))
    else:
        epsilon = _get(values, None, "epsilon", 0.0)
        omega = _get(values, None, "omega", 1.0)
        if not 0.0 <= epsilon < 1.0:
            complain(None, "epsilon", "epsilon must be < 1 and >= 0")
        elif not omega > 0.0:
            complain(None, "omega", "omega must be > 0")
        else:
            schedule = ParameterSchedule.standard(epsilon, omega)

    # ---- constants and integrator ---------------------------------
    constants = Constants()
    hbar = _get(values, None, "hbar", 1.0)
    if hbar <= 0.0:
        complain(None, "hbar", "hbar must be > 0")
    else:
        constants = Constants(hbar=hbar)

    options = dynamics.IntegratorOptions()
    try:
        options = dynamics.IntegratorOptions(
            method=_get(values, None, "method", dynamics.RK45),
            rtol=_get(values, None, "rtol", 1e-10),
            atol=_get(values, None, "atol", 1e-10),
            step=_get(values, None, "step", 1e-3),
            max_steps=_get(values, None, "max_steps", 2_000_000),
        )
    except ValueError as exc:
        complain(None, "method", str(exc))

    # ---- sections ---------------------------------------------------
    def section_obj(cls, name, **overrides):
        kwargs = {}
        for key in _SECTION_KEYS[name]:
            if (name, key) in values:
                kwargs[key] = values[(name, key)]
        kwargs.update(overrides)
        return cls(**kwargs)

    simulate = section_obj(SimulateConfig, "simulate")
    if simulate.samples < 1:
        complain("simulate", "samples", "samples must be >= 1")
    if simulate.g0 <= 0:
        complain("simulate", "g0", "g0 must be > 0")
    if simulate.t1 is not None and simulate.t1 <= 0:
        complain("simulate", "t1", "t1 must be > 0")

    orbit = section_obj(OrbitConfig, "orbit")
    if orbit.samples < 8:
        complain("orbit", "samples", "samples must be >= 8")
    if orbit.tol <= 0:
        complain("orbit", "tol", "tol must be > 0")

    hannay_cfg = section_obj(HannayConfig, "hannay")
    for key in ("n_t", "n_phi"):
        if getattr(hannay_cfg, key) < 64:
            complain("hannay", key, f"{key} must be >= 64")
    if hannay_cfg.i_bar <= 0:
        complain("hannay", "i_bar", "i_bar must be > 0")
    if hannay_cfg.ensemble < 64:
        complain("hannay", "ensemble", "ensemble must be >= 64")

    floquet_cfg = section_obj(FloquetConfig, "floquet")
    if any(n < 0 for n in floquet_cfg.n):
        complain("floquet", "n", "state numbers must be >= 0")
    if floquet_cfg.ensemble < 8:
        complain("floquet", "ensemble", "ensemble must be >= 8")

    sweep = section_obj(SweepConfig, "sweep")
    if any(not 0.0 <= e < 1.0 for e in sweep.eps):
        complain("sweep", "eps", "sweep eps values must lie in [0, 1)")
    if any(w <= 0.0 for w in sweep.omega):
        complain("sweep", "omega", "sweep omega values must be > 0")

    return RunConfig(schedule=schedule, constants=constants, options=options,
                     simulate=simulate, orbit=orbit, hannay=hannay_cfg,
                     floquet=floquet_cfg, sweep=sweep)


# ----------------------------------------------------------------------
# Deterministic writers (17 significant digits, '\n' endings)
# ----------------------------------------------------------------------

def _fmt(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    value = float(value)
    if math.isnan(value):
        return "null"
    return format(value, ".17g")


def _dump_json(obj, indent=0) -> str:
    pad = " " * indent
    if isinstance(obj, dict):
        body = ",\n".join(
            f'{pad}  "{key}": {_dump_json(val, indent + 2).lstrip()}'
            for key, val in obj.items())
        return f"{pad}{{\n{body}\n{pad}}}"
    if isinstance(obj, (list, tuple)):
        body = ", ".join(_dump_json(v).strip() for v in obj)
        return f"{pad}[{body}]"
    if isinstance(obj, str):
        return f'{pad}"{obj}"'
    if obj is None:
        return f"{pad}null"
    return pad + _fmt(obj)


def _write_json(path: Path, obj):
    path.write_text(_dump_json(obj) + "\n", encoding="utf-8", newline="\n")


def _write_csv(path: Path, header, rows):
    out = [",".join(header)]
    out.extend(",".join(_fmt(v) for v in row) for row in rows)
    path.write_text("\n".join(out) + "\n", encoding="utf-8", newline="\n")


def _write_table(out_dir: Path, stem: str, header, rows, fmt: str):
    if fmt == "json":
        cols = list(zip(*rows)) if rows else [[] for _ in header]
        obj = {name: list(col) for name, col in zip(header, cols)}
        _write_json(out_dir / f"{stem}.json", obj)
        return out_dir / f"{stem}.json"
    _write_csv(out_dir / f"{stem}.csv", header, rows)
    return out_dir / f"{stem}.csv"


# ----------------------------------------------------------------------
# Subcommands
# ----------------------------------------------------------------------

def _run_simulate(cfg: RunConfig, out_dir: Path, fmt: str):
    sc = cfg.simulate
    t1 = sc.t1 if sc.t1 is not None else cfg.schedule.period
    state0 = dynamics.ExtendedState(q=sc.q0, p=sc.p0, G=sc.g0, Pi=sc.pi0)
    grid = np.linspace(0.0, t1, sc.samples + 1)
    traj = dynamics.integrate(state0, t1, cfg.schedule, cfg.constants,
                              cfg.options, output_times=grid[1:-1])
    keep = np.searchsorted(traj.t, grid)
    header = ["t", "q", "p", "G", "Pi", "lambda_G", "lambda_D",
              "I", "J", "H_eff"]
    rows = []
    for i in keep:
        st = traj.state_at_index(i)
        I, J = dynamics.actions(st)
        a, b, c = cfg.schedule.eval(st.t)
        rows.append([st.t, st.q, st.p, st.G, st.Pi, st.lambda_G, st.lambda_D,
                     I, J, dynamics.h_eff(st.q, st.p, st.G, st.Pi, a, b, c,
                                          cfg.constants.hbar)])
    path = _write_table(out_dir, "trajectory", header, rows, fmt)
    return [path]


def _run_orbit(cfg: RunConfig, out_dir: Path, fmt: str):
    oc = cfg.orbit
    guess = None
    if oc.guess_g is not None:
        guess = (oc.guess_g, oc.guess_pi or 0.0)
    orb = orbits.find_periodic_orbit(
        cfg.schedule, guess=guess, opts=cfg.options, newton_tol=oc.tol,
        max_iter=oc.max_iter, n_samples=oc.samples)
    rows = [[t, g, pi] for t, g, pi in zip(orb.t, orb.G, orb.Pi)]
    paths = [_write_table(out_dir, "orbit", ["t", "G", "Pi"], rows, fmt)]
    summary = {
        "G0": orb.G0, "Pi0": orb.Pi0, "residual": orb.residual,
        "lambda_G": orb.lambda_G_cycle, "lambda_D": orb.lambda_D_cycle,
    }
    _write_json(out_dir / "orbit_summary.json", summary)
    paths.append(out_dir / "orbit_summary.json")
    return paths


def _run_hannay(cfg: RunConfig, out_dir: Path, fmt: str):
    hc = cfg.hannay
    result = hannay.hannay_report(
        cfg.schedule, I_bar=hc.i_bar, N=hc.ensemble, n_t=hc.n_t,
        n_phi=hc.n_phi, consts=cfg.constants)
    obj = {
        "theta_closed": result.theta_closed,
        "theta_quadrature": result.theta_quadrature,
        "theta_trajectory": result.theta_trajectory,
        "rho": result.rho,
    }
    obj.update(result.diagnostics)
    _write_json(out_dir / "hannay.json", obj)
    return [out_dir / "hannay.json"]


def _run_floquet(cfg: RunConfig, out_dir: Path, fmt: str):
    reports = floquet.floquet_reports(
        cfg.schedule, cfg.floquet.n, consts=cfg.constants,
        N=cfg.floquet.ensemble, opts=cfg.options)
    paths = []
    for rep in reports:
        path = out_dir / f"floquet_n{rep.n}.json"
        _write_json(path, rep.as_dict())
        paths.append(path)
    return paths


def _sweep_point(args):
    eps, omega, ensemble = args
    sched = ParameterSchedule.standard(eps, omega)
    model = hannay.PerturbativeModel(epsilon=eps, omega=omega)
    theta_closed = hannay.hannay_closed_form(model)
    theta_traj = hannay.hannay_trajectory_estimate(sched, N=ensemble)
    rho = compute_monodromy(sched).rho
    orb = orbits.find_periodic_orbit(sched)
    lam_g0 = orb.lambda_G_cycle
    return [eps, omega, theta_closed, theta_traj, rho, lam_g0,
            lam_g0 + 0.5 * theta_closed]


def _run_sweep(cfg: RunConfig, out_dir: Path, fmt: str):
    sw = cfg.sweep
    if not sw.eps or not sw.omega:
        raise ConfigError([(0, "sweep requires non-empty eps and omega lists")])
    grid = [(e, w, sw.ensemble) for e in sw.eps for w in sw.omega]
    workers = sw.workers if sw.workers > 0 else min(len(grid), _cpu_count())
    if workers > 1:
        try:
            with ProcessPoolExecutor(max_workers=workers) as pool:
                rows = list(pool.map(_sweep_point, grid))
        except OSError:
            rows = [_sweep_point(point) for point in grid]
    else:
        rows = [_sweep_point(point) for point in grid]
    header = ["eps", "omega", "theta_closed", "theta_traj", "rho",
              "lambda_G_R_n0", "residual_45_n0"]
    return [_write_table(out_dir, "sweep", header, rows, fmt)]


def _cpu_count():
    import os
    return os.cpu_count() or 1


def _run_check(cfg, out_dir, fmt):
    results = checks.run_builtin_checks()
    for res in results:
        mark = "PASS" if res.passed else "FAIL"
        print(f"{mark} {res.name}: {res.detail}")
    if not all(res.passed for res in results):
        raise ConvergenceError("one or more built-in checks failed")
    return []


_RUNNERS = {
    "simulate": _run_simulate,
    "orbit": _run_orbit,
    "hannay": _run_hannay,
    "floquet": _run_floquet,
    "sweep": _run_sweep,
    "check": _run_check,
}


def run(subcommand: str, config: RunConfig, out_dir=".", fmt="csv") -> int:
    """Execute one subcommand; returns the process exit code."""
    out = Path(out_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
        paths = _RUNNERS[subcommand](config, out, fmt)
    except ConfigError as exc:
        for line, msg in exc.errors:
            print(f"config error (line {line}): {msg}", file=sys.stderr)
        return EXIT_CONFIG
    except (NonEllipticError, ConvergenceError, IntegrationError,
            ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    for path in paths:
        print(f"wrote {path}")
    return EXIT_OK


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="squeeze-phase",
        description="Squeezed-state phases of the driven oscillator")
    parser.add_argument("subcommand", choices=SUBCOMMANDS)
    parser.add_argument("--config", help="key=value config file")
    parser.add_argument("--out", default=".", help="output directory")
    parser.add_argument("--format", choices=("csv", "json"), default="csv")
    args = parser.parse_args(argv)

    if args.config is None:
        if args.subcommand != "check":
            print("error: --config is required", file=sys.stderr)
            return EXIT_CONFIG
        text = ""
    else:
        try:
            text = Path(args.config).read_text(encoding="utf-8")
        except OSError as exc:
            print(f"error: cannot read config: {exc}", file=sys.stderr)
            return EXIT_CONFIG
    try:
        config = parse_config(text)
    except ConfigError as exc:
        for line, msg in exc.errors:
            print(f"config error (line {line}): {msg}", file=sys.stderr)
        return EXIT_CONFIG
    return run(args.subcommand, config, out_dir=args.out, fmt=args.format)


if __name__ == "__main__":
    raise SystemExit(main())
