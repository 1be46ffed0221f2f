"""Command-line front end: scenario runs, verification, point evaluation.

Subcommands:

  run <config>       integrate a scenario file and write its outputs
  verify             run registered checks, one JSON report per line
  field --at x,y     evaluate either vector field at one point

Scenario files are strict JSON: unknown fields are errors, so a config
reproduces the same figure or not at all.  Fields:

  mu, c              system parameters
  initial_states     list of [x, y] pairs -- or instead:
  grid               {"x_range": [a,b], "y_range": [a,b], "nx": n, "ny": m}
  t_max              integration horizon (top level, not inside integrator)
  integrator         optional {"method","step","rel_tol","abs_tol","max_steps"}
  outputs            list of {"kind","format","path"}; kind is one of
                     original | covered | energy_angle, format csv | svg
  description        optional free text documenting the choice of orbits

CSV schemas (17-significant-digit decimals, '\\n' line endings):
  original      t,x,y
  covered       t,x1,y1,sheet        (sheet is U or L)
  energy_angle  theta_unwrapped,h

Rows are ordered by initial-state index, then time.  SVG outputs are
self-contained: one polyline per orbit, viewBox fitted to the data with a
5% margin, and covered-plane orbits drawn in two stroke colors (red for
the Upper sheet, green for Lower).

Exit codes: run 0/2/3 (ok / config error / integration failure), verify
0/1 (all passed / failures listed on stderr).  The environment variable
DUFFING_SEED overrides the default verification seed 42; --seed overrides
both.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import dataclass
from importlib import resources

import numpy as np

from .actionangle import energy_angle_curve
from .covering import CoveredState, Sheet, covered_field
from .dynamics import Params, State, duffing_field
from .exceptions import ConfigError, DuffingError
from .integrate import IntegratorConfig, Trajectory, integrate_original
from .verify import CHECKS, run_check

KINDS = ("original", "covered", "energy_angle")
FORMATS = ("csv", "svg")

_SCENARIO_KEYS = {
    "mu", "c", "initial_states", "grid", "t_max", "integrator", "outputs",
    "description",
}
_GRID_KEYS = {"x_range", "y_range", "nx", "ny"}
_INTEGRATOR_KEYS = {"method", "step", "rel_tol", "abs_tol", "max_steps"}
_OUTPUT_KEYS = {"kind", "format", "path"}

_STROKE = "#1f4e9c"
_STROKE_UPPER = "#c0392b"
_STROKE_LOWER = "#1e8449"


@dataclass(frozen=True)
class OutputSpec:
    kind: str
    format: str
    path: str


@dataclass(frozen=True)
class Scenario:
    mu: float
    c: float
    initial_states: tuple[State, ...]
    t_max: float
    integrator: IntegratorConfig
    outputs: tuple[OutputSpec, ...]
    description: str = ""


def _fmt(v: float) -> str:
    return format(float(v), ".17g")


def _num(obj: dict, key: str, where: str) -> float:
    v = obj[key]
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ConfigError(f"{where}.{key}: expected a number, got {v!r}")
    return float(v)


def _unknown(keys, allowed, where: str) -> None:
    extra = sorted(set(keys) - allowed)
    if extra:
        raise ConfigError(f"{where}: unknown field(s) {', '.join(extra)}")


def _expand_grid(grid: dict) -> tuple[State, ...]:
    _unknown(grid.keys(), _GRID_KEYS, "grid")
    for key in _GRID_KEYS:
        if key not in grid:
            raise ConfigError(f"grid.{key}: missing")
    for key in ("nx", "ny"):
        v = grid[key]
        if isinstance(v, bool) or not isinstance(v, int) or v < 1:
            raise ConfigError(f"grid.{key}: expected an integer >= 1, got {v!r}")
    ranges = {}
    for key in ("x_range", "y_range"):
        rng = grid[key]
        if not (isinstance(rng, list) and len(rng) == 2):
            raise ConfigError(f"grid.{key}: expected [lo, hi], got {rng!r}")
        ranges[key] = (float(rng[0]), float(rng[1]))
    xs = np.linspace(*ranges["x_range"], grid["nx"])
    ys = np.linspace(*ranges["y_range"], grid["ny"])
    return tuple(State(float(x), float(y)) for x in xs for y in ys)


def load_scenario(path: str) -> Scenario:
    """Parse and validate a scenario file (strict: unknown fields fail)."""
    resolved = _resolve_config_path(path)
    try:
        with open(resolved, encoding="utf-8") as f:
            raw = json.load(f)
    except OSError as e:
        raise ConfigError(f"cannot read {path}: {e}") from e
    except json.JSONDecodeError as e:
        raise ConfigError(
            f"{path}: invalid JSON at line {e.lineno}, column {e.colno}: {e.msg}"
        ) from e
    if not isinstance(raw, dict):
        raise ConfigError(f"{path}: top level must be an object")
    _unknown(raw.keys(), _SCENARIO_KEYS, "scenario")

    for key in ("mu", "t_max", "outputs"):
        if key not in raw:
            raise ConfigError(f"scenario.{key}: missing")
    mu = _num(raw, "mu", "scenario")
    c = _num(raw, "c", "scenario") if "c" in raw else 0.0
    t_max = _num(raw, "t_max", "scenario")

    has_states = "initial_states" in raw
    has_grid = "grid" in raw
    if has_states == has_grid:
        raise ConfigError(
            "scenario: provide exactly one of initial_states or grid"
        )
    if has_states:
        lst = raw["initial_states"]
        if not isinstance(lst, list) or not lst:
            raise ConfigError(
                "scenario.initial_states: expected a nonempty list of [x, y]"
            )
        states = []
        for i, pair in enumerate(lst):
            if not (isinstance(pair, list) and len(pair) == 2):
                raise ConfigError(
                    f"scenario.initial_states[{i}]: expected [x, y], got {pair!r}"
                )
            states.append(State(float(pair[0]), float(pair[1])))
        initial_states = tuple(states)
    else:
        if not isinstance(raw["grid"], dict):
            raise ConfigError("scenario.grid: expected an object")
        initial_states = _expand_grid(raw["grid"])

    integ_raw = raw.get("integrator", {})
    if not isinstance(integ_raw, dict):
        raise ConfigError("scenario.integrator: expected an object")
    if "t_max" in integ_raw:
        raise ConfigError("integrator.t_max: set the top-level t_max instead")
    _unknown(integ_raw.keys(), _INTEGRATOR_KEYS, "integrator")
    try:
        integrator = IntegratorConfig(t_max=t_max, **integ_raw)
    except (TypeError, ValueError) as e:
        raise ConfigError(f"integrator: {e}") from e

    outs_raw = raw["outputs"]
    if not isinstance(outs_raw, list):
        raise ConfigError("scenario.outputs: expected a list")
    outputs = []
    for i, out in enumerate(outs_raw):
        if not isinstance(out, dict):
            raise ConfigError(f"outputs[{i}]: expected an object")
        _unknown(out.keys(), _OUTPUT_KEYS, f"outputs[{i}]")
        for key in _OUTPUT_KEYS:
            if key not in out:
                raise ConfigError(f"outputs[{i}].{key}: missing")
        if out["kind"] not in KINDS:
            raise ConfigError(
                f"outputs[{i}].kind: expected one of {', '.join(KINDS)}, "
                f"got {out['kind']!r}"
            )
        if out["format"] not in FORMATS:
            raise ConfigError(
                f"outputs[{i}].format: expected csv or svg, got {out['format']!r}"
            )
        outputs.append(OutputSpec(out["kind"], out["format"], str(out["path"])))

    try:
        Params(mu=mu, c=c)
    except ValueError as e:
        raise ConfigError(f"scenario: {e}") from e

    return Scenario(
        mu, c, initial_states, t_max, integrator, tuple(outputs),
        str(raw.get("description", "")),
    )


def _resolve_config_path(path: str) -> str:
    if os.path.exists(path):
        return path
    name = path if path.endswith(".json") else path + ".json"
    bundled = resources.files("duffing_aa") / "scenarios" / name
    if bundled.is_file():
        return str(bundled)
    raise ConfigError(f"no such config file or bundled scenario: {path}")


def bundled_scenarios() -> list[str]:
    """Names of the scenario files shipped with the package."""
    d = resources.files("duffing_aa") / "scenarios"
    return sorted(p.name for p in d.iterdir() if p.name.endswith(".json"))


def _csv_rows(kind: str, traj: Trajectory, curve: np.ndarray | None):
    if kind == "original":
        for i in range(len(traj)):
            yield (_fmt(traj.t[i]), _fmt(traj.states[i, 0]), _fmt(traj.states[i, 1]))
    elif kind == "covered":
        for i in range(len(traj)):
            yield (
                _fmt(traj.t[i]),
                _fmt(traj.covered[i, 0]),
                _fmt(traj.covered[i, 1]),
                traj.sheet_at(i).value,
            )
    else:
        for i in range(curve.shape[0]):
            yield (_fmt(curve[i, 0]), _fmt(curve[i, 1]))


_CSV_HEADERS = {
    "original": "t,x,y",
    "covered": "t,x1,y1,sheet",
    "energy_angle": "theta_unwrapped,h",
}


def _write_csv(path: str, kind: str, trajs, curves) -> None:
    with open(path, "w", newline="", encoding="utf-8") as f:
        f.write(_CSV_HEADERS[kind] + "\n")
        for traj, curve in zip(trajs, curves):
            for row in _csv_rows(kind, traj, curve):
                f.write(",".join(row) + "\n")


def _polylines(kind: str, trajs, curves):
    """(points, color) pairs to draw; covered orbits split at sheet flips."""
    lines = []
    for traj, curve in zip(trajs, curves):
        if kind == "original":
            lines.append((traj.states, _STROKE))
        elif kind == "energy_angle":
            lines.append((curve, _STROKE))
        else:
            sheets = traj.sheets
            start = 0
            for i in range(1, len(traj) + 1):
                if i == len(traj) or sheets[i] != sheets[start]:
                    stop = min(i + 1, len(traj))  # overlap keeps the curve joined
                    color = _STROKE_UPPER if sheets[start] > 0 else _STROKE_LOWER
                    lines.append((traj.covered[start:stop], color))
                    start = i
    return lines


def _write_svg(path: str, kind: str, trajs, curves) -> None:
    lines = _polylines(kind, trajs, curves)
    pts = np.vstack([p for p, _ in lines])
    x_min, y_min = pts.min(axis=0)
    x_max, y_max = pts.max(axis=0)
    w = x_max - x_min or 1.0
    h = y_max - y_min or 1.0
    x_min -= 0.05 * w
    y_min -= 0.05 * h
    w *= 1.1
    h *= 1.1
    stroke = 0.004 * max(w, h)

    # SVG y grows downward: emit with y negated
    vb_y = -(y_min + h)
    out = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" '
        f'viewBox="{x_min:.9g} {vb_y:.9g} {w:.9g} {h:.9g}">',
    ]
    axis = f'stroke="#999999" stroke-width="{stroke / 2:.9g}"'
    if x_min < 0.0 < x_min + w:
        out.append(f'<line x1="0" y1="{vb_y:.9g}" x2="0" y2="{vb_y + h:.9g}" {axis}/>')
    if y_min < 0.0 < y_min + h:
        out.append(
            f'<line x1="{x_min:.9g}" y1="0" x2="{x_min + w:.9g}" y2="0" {axis}/>'
        )
    for points, color in lines:
        coords = " ".join(f"{p[0]:.9g},{-p[1]:.9g}" for p in points)
        out.append(
            f'<polyline fill="none" stroke="{color}" '
            f'stroke-width="{stroke:.9g}" points="{coords}"/>'
        )
    out.append("</svg>")
    with open(path, "w", newline="", encoding="utf-8") as f:
        f.write("\n".join(out) + "\n")


def run_scenario(path: str, quiet: bool = False) -> int:
    """Integrate every initial state of a scenario and write its outputs."""
    try:
        scenario = load_scenario(path)
    except ConfigError as e:
        print(f"config error: {e}", file=sys.stderr)
        return 2

    p = Params(mu=scenario.mu, c=scenario.c)
    needs_curve = any(o.kind == "energy_angle" for o in scenario.outputs)
    trajs = []
    curves = []
    for idx, s0 in enumerate(scenario.initial_states):
        try:
            traj = integrate_original(s0, p, scenario.integrator)
            curves.append(energy_angle_curve(traj) if needs_curve else None)
            trajs.append(traj)
        except DuffingError as e:
            print(
                f"integration failed for initial state #{idx} "
                f"({_fmt(s0.x)}, {_fmt(s0.y)}): {e}",
                file=sys.stderr,
            )
            return 3

    try:
        for out in scenario.outputs:
            if out.format == "csv":
                _write_csv(out.path, out.kind, trajs, curves)
            else:
                _write_svg(out.path, out.kind, trajs, curves)
            if not quiet:
                print(f"wrote {out.path}")
    except OSError as e:
        print(f"config error: cannot write output: {e}", file=sys.stderr)
        return 2
    return 0


def verify_all(
    seed: int, tolerance: float | None = None, only: str | None = None
) -> int:
    """Stream one JSON report per check to stdout; 0 iff all passed."""
    names = [only] if only else list(CHECKS)
    failed = []
    for name in names:
        try:
            report = run_check(name, seed=seed, tolerance=tolerance)
        except ValueError as e:
            print(str(e), file=sys.stderr)
            return 2
        print(report.to_json())
        if not report.passed:
            failed.append(report.name)
    if failed:
        print(f"failed checks: {', '.join(failed)}", file=sys.stderr)
        return 1
    return 0


def _cmd_field(args) -> int:
    try:
        sx, sy = args.at.split(",")
        x, y = float(sx), float(sy)
    except ValueError:
        print(f"--at expects 'x,y', got {args.at!r}", file=sys.stderr)
        return 2
    try:
        p = Params(mu=args.mu)
        if args.covered:
            u, v = covered_field(CoveredState(x, y, Sheet.UPPER), p)
        else:
            u, v = duffing_field(State(x, y), p)
    except ValueError as e:
        print(str(e), file=sys.stderr)
        return 2
    print(f"{_fmt(u)} {_fmt(v)}")
    return 0


def _default_seed() -> int:
    return int(os.environ.get("DUFFING_SEED", "42"))


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="duffing-aa",
        description="Phase portraits and global angle diagnostics for the "
        "double-well Duffing oscillator.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run a scenario file (or bundled name)")
    p_run.add_argument("config", help="path to a JSON scenario, or a bundled "
                       "scenario name such as fig1")
    p_run.add_argument("--quiet", action="store_true", help="suppress the "
                       "per-file 'wrote ...' lines")

    p_ver = sub.add_parser("verify", help="run the numerical cross-checks")
    p_ver.add_argument("--only", metavar="NAME", help="run a single check")
    p_ver.add_argument("--tolerance", type=float, help="override every "
                       "check's tolerance")
    p_ver.add_argument("--seed", type=int, help="sampling seed (default: "
                       "DUFFING_SEED or 42)")

    p_fld = sub.add_parser("field", help="evaluate a vector field at a point")
    p_fld.add_argument("--at", required=True, metavar="X,Y")
    p_fld.add_argument("--mu", type=float, default=0.0)
    p_fld.add_argument("--covered", action="store_true",
                       help="evaluate the covered-plane field instead")

    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    if args.command == "run":
        return run_scenario(args.config, quiet=args.quiet)
    if args.command == "verify":
        seed = args.seed if args.seed is not None else _default_seed()
        return verify_all(seed, tolerance=args.tolerance, only=args.only)
    return _cmd_field(args)


if __name__ == "__main__":
    sys.exit(main())
