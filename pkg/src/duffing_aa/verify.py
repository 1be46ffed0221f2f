"""Independent numerical cross-checks, packaged as reusable reports.

Each closed-form formula in the library is re-derived here by a second
route (Jacobian pushforward, gradient products, chain rules, round trips,
long integrations) and compared against the production implementation on
a deterministic sample set.  Reports are plain data, not assertions: the
test suite asserts on ``report.passed``, while the CLI streams them as
JSON for diagnostic runs.

Sampling uses a 64-bit linear congruential generator rather than numpy's
bit generators so that a (seed, tolerance, config) triple yields
bit-identical reports on any platform.  The sampling box [-3, 3]^2 covers
both wells, the separatrix and outer orbits.

``FORMULA_COVERAGE`` records which checks exercise which formula; a
registry test keeps it total, so no formula can silently lose its oracle.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, replace

import numpy as np

from .actionangle import dH_dtheta, theta_dot_of, theta_of, unwrap_theta
from .covering import CoveredState, Sheet, cover_map, covered_field, inverse_cover
from .dynamics import Params, State, duffing_field, energy_rate, state_on_level
from .exceptions import OnSeparatrix
from .integrate import DEFAULT_CONFIG, find_period, integrate_original

DEFAULT_N = 10_000
DEFAULT_SEED = 42
SAMPLE_BOX = 3.0

PUSHFORWARD_MUS = (0.0, 0.1, 0.5)
CONSERVATION_LEVELS = (-0.2, 0.005, 0.5)
WINDING_LEVELS = (-0.2, 0.5)

_LCG_MULT = 6364136223846793005
_LCG_INC = 1442695040888963407
_LCG_MASK = (1 << 64) - 1


@dataclass(frozen=True)
class CheckReport:
    """Outcome of one check; passed iff the governing metric <= tolerance."""

    name: str
    n_samples: int
    max_abs_error: float
    max_rel_error: float
    passed: bool
    tolerance: float

    def as_dict(self) -> dict:
        return asdict(self)

    def to_json(self) -> str:
        return json.dumps(self.as_dict())


def lcg_uniform(seed: int, n: int) -> np.ndarray:
    """n floats in [0, 1) from a 64-bit linear congruential generator."""
    out = np.empty(n, dtype=np.float64)
    s = seed & _LCG_MASK
    for i in range(n):
        s = (s * _LCG_MULT + _LCG_INC) & _LCG_MASK
        out[i] = (s >> 11) * 2.0**-53
    return out


def _sample_box(seed: int, n: int) -> tuple[np.ndarray, np.ndarray]:
    u = lcg_uniform(seed, 2 * n)
    x = -SAMPLE_BOX + 2.0 * SAMPLE_BOX * u[0::2]
    y = -SAMPLE_BOX + 2.0 * SAMPLE_BOX * u[1::2]
    return x, y


def _require_positive(n: int) -> None:
    if n <= 0:
        raise ValueError(f"sample count must be > 0, got {n}")


def _max_rel(diff: np.ndarray, ref: np.ndarray) -> float:
    if diff.size == 0:
        return 0.0
    return float(np.max(np.abs(diff) / np.maximum(np.abs(ref), 1e-300)))


def check_pushforward(
    n: int, mu: float, seed: int = DEFAULT_SEED, tolerance: float = 1e-10
) -> CheckReport:
    """covered_field composed with cover_map vs. the Jacobian pushforward.

    The oracle applies J = [[2x, -2y], [2y, 2x]] to the original field at
    n sampled states; the production route evaluates the closed covered
    field at the covered images.  Governing metric: max absolute
    componentwise difference.
    """
    _require_positive(n)
    x, y = _sample_box(seed, n)
    p = Params(mu=mu)
    fx, fy = duffing_field(State(x, y), p)
    oracle_u = 2.0 * x * fx - 2.0 * y * fy
    oracle_v = 2.0 * y * fx + 2.0 * x * fy
    got_u, got_v = covered_field(
        CoveredState(x * x - y * y, 2.0 * x * y, Sheet.UPPER), p
    )
    diff = np.concatenate((got_u - oracle_u, got_v - oracle_v))
    ref = np.concatenate((oracle_u, oracle_v))
    max_abs = float(np.max(np.abs(diff)))
    return CheckReport(
        "check_pushforward", n, max_abs, _max_rel(diff, ref),
        max_abs <= tolerance, tolerance,
    )


def check_theta_dot(
    n: int = DEFAULT_N, seed: int = DEFAULT_SEED, tolerance: float = 1e-10
) -> CheckReport:
    """Closed-form angular velocity vs. the chain rule on the covered flow.

    Oracle: theta' = ((x1-1)*y1' - y1*x1') / ((x1-1)^2 + y1^2) with the
    conservative covered field.  Samples within 1e-3 of (+-1, 0) are
    skipped (0/0 there and excluded from the claim); the anchor states
    (0, 1) and (2, 0) are always included.  Governing metric: max
    relative difference.
    """
    _require_positive(n)
    x, y = _sample_box(seed, n)
    keep = ((x - 1.0) ** 2 + y**2 >= 1e-6) & ((x + 1.0) ** 2 + y**2 >= 1e-6)
    x = np.append(x[keep], [0.0, 2.0])
    y = np.append(y[keep], [1.0, 0.0])

    closed = theta_dot_of(State(x, y))
    p0 = Params(mu=0.0)
    fx, fy = duffing_field(State(x, y), p0)
    x1 = x * x - y * y
    y1 = 2.0 * x * y
    du = 2.0 * x * fx - 2.0 * y * fy
    dv = 2.0 * y * fx + 2.0 * x * fy
    oracle = ((x1 - 1.0) * dv - y1 * du) / ((x1 - 1.0) ** 2 + y1**2)

    diff = closed - oracle
    max_rel = _max_rel(diff, oracle)
    return CheckReport(
        "check_theta_dot", int(x.size), float(np.max(np.abs(diff))), max_rel,
        max_rel <= tolerance, tolerance,
    )


def check_conservation(
    h_levels, t_max: float = 100.0, tolerance: float = 1e-8
) -> CheckReport:
    """Energy drift of the conservative flow over [0, t_max].

    One orbit per level, launched from (x, 0) on the level set, adaptive
    tolerances 1e-10.  Governing metric: max |H(t) - H(0)| over all
    samples of all orbits.  Separatrix levels are rejected.
    """
    cfg = DEFAULT_CONFIG
    if t_max != cfg.t_max:
        cfg = replace(cfg, t_max=t_max)
    p = Params(mu=0.0)
    max_abs = 0.0
    max_rel = 0.0
    for h in h_levels:
        if abs(h) < 1e-9:
            raise OnSeparatrix(f"level {h} is the separatrix; no drift check there")
        traj = integrate_original(state_on_level(h), p, cfg)
        drift = float(np.max(np.abs(traj.energies() - h)))
        max_abs = max(max_abs, drift)
        max_rel = max(max_rel, drift / abs(h))
    n = len(list(h_levels))
    return CheckReport(
        "check_conservation", n, max_abs, max_rel, max_abs <= tolerance, tolerance
    )


def check_winding(h_levels, tolerance: float = 1e-6) -> CheckReport:
    """Total unwrapped angle over one measured period per level.

    Orbits inside the separatrix (h < 0) must wind by -2pi, orbits outside
    (h > 0) by -4pi: the covering doubles the turning of symmetric orbits.
    Governing metric: max |total - expected|.
    """
    p = Params(mu=0.0)
    max_abs = 0.0
    max_rel = 0.0
    for h in h_levels:
        if abs(h) < 1e-9:
            raise OnSeparatrix(f"level {h} is the separatrix; no period there")
        s0 = state_on_level(h)
        period = find_period(s0, p, DEFAULT_CONFIG)
        traj = integrate_original(s0, p, replace(DEFAULT_CONFIG, t_max=period))
        tw = unwrap_theta(traj)
        total = float(tw[-1, 1] - tw[0, 1])
        expected = -2.0 * math.pi if h < 0 else -4.0 * math.pi
        err = abs(total - expected)
        max_abs = max(max_abs, err)
        max_rel = max(max_rel, err / abs(expected))
    n = len(list(h_levels))
    return CheckReport(
        "check_winding", n, max_abs, max_rel, max_abs <= tolerance, tolerance
    )


def check_roundtrip(
    n: int = DEFAULT_N, seed: int = DEFAULT_SEED, tolerance: float = 1e-12
) -> CheckReport:
    """inverse_cover(cover_map(s)) = s, componentwise, on sampled states."""
    _require_positive(n)
    x, y = _sample_box(seed, n)
    max_abs = 0.0
    max_rel = 0.0
    for i in range(n):
        s = State(float(x[i]), float(y[i]))
        back = inverse_cover(cover_map(s))
        err = max(abs(back.x - s.x), abs(back.y - s.y))
        max_abs = max(max_abs, err)
        max_rel = max(max_rel, err / max(abs(s.x), abs(s.y), 1e-300))
    return CheckReport(
        "check_roundtrip", n, max_abs, max_rel, max_abs <= tolerance, tolerance
    )


def check_energy_rate(
    n: int = DEFAULT_N,
    mu: float = 0.5,
    seed: int = DEFAULT_SEED,
    tolerance: float = 1e-12,
) -> CheckReport:
    """Closed-form dH/dt = -mu*y^2 vs. the gradient product grad(H).f."""
    _require_positive(n)
    x, y = _sample_box(seed, n)
    p = Params(mu=mu)
    fx, fy = duffing_field(State(x, y), p)
    # cube spelled as in the field so the conservative part cancels exactly
    oracle = (x * x * x - x) * fx + y * fy
    closed = energy_rate(State(x, y), p)
    diff = closed - oracle
    max_abs = float(np.max(np.abs(diff)))
    return CheckReport(
        "check_energy_rate", n, max_abs, _max_rel(diff, oracle),
        max_abs <= tolerance, tolerance,
    )


def check_theta_angle(
    n: int = DEFAULT_N, seed: int = DEFAULT_SEED, tolerance: float = 1e-12
) -> CheckReport:
    """Consistency of the angle chart with the covered geometry.

    Two identities per sample (skipping 1e-2 disks around (+-1, 0), where
    both sides cancel to rounding noise):

      * (x1-1)*sin(theta) - y1*cos(theta) = 0, scaled by rho;
      * the angular-velocity denominator equals rho^2.

    Governing metric: max of the two scaled residuals.
    """
    _require_positive(n)
    x, y = _sample_box(seed, n)
    keep = ((x - 1.0) ** 2 + y**2 >= 1e-4) & ((x + 1.0) ** 2 + y**2 >= 1e-4)
    x, y = x[keep], y[keep]
    worst = 0.0
    for i in range(x.size):
        s = State(float(x[i]), float(y[i]))
        th = theta_of(s)
        c = cover_map(s)
        rho = math.hypot(c.x1 - 1.0, c.y1)
        r1 = abs((c.x1 - 1.0) * math.sin(th) - c.y1 * math.cos(th)) / rho
        den = (
            s.x**4 + 2.0 * s.x**2 * s.y**2 + s.y**4
            - 2.0 * s.x**2 + 2.0 * s.y**2 + 1.0
        )
        r2 = abs(den - rho * rho) / (rho * rho)
        worst = max(worst, r1, r2)
    return CheckReport(
        "check_theta_angle", int(x.size), worst, worst, worst <= tolerance, tolerance
    )


def check_dh_dtheta(
    n: int = DEFAULT_N,
    mu: float = 0.1,
    seed: int = DEFAULT_SEED,
    tolerance: float = 1e-10,
) -> CheckReport:
    """dH/dtheta vs. the fully independent ratio of oracle rates.

    Oracle: (grad(H).f) / (chain-rule theta') with both pieces computed
    from the raw fields.  Samples skip 1e-3 disks around (+-1, 0) and a
    1e-6 disk around the origin.  Governing metric: max relative
    difference.
    """
    _require_positive(n)
    x, y = _sample_box(seed, n)
    keep = (
        ((x - 1.0) ** 2 + y**2 >= 1e-6)
        & ((x + 1.0) ** 2 + y**2 >= 1e-6)
        & (x**2 + y**2 >= 1e-12)
    )
    x, y = x[keep], y[keep]
    p = Params(mu=mu)
    p0 = Params(mu=0.0)
    max_abs = 0.0
    max_rel = 0.0
    for i in range(x.size):
        s = State(float(x[i]), float(y[i]))
        got = dH_dtheta(s, p)
        fx, fy = duffing_field(s, p)
        h_dot = (s.x * s.x * s.x - s.x) * fx + s.y * fy
        gx, gy = duffing_field(s, p0)
        du = 2.0 * s.x * gx - 2.0 * s.y * gy
        dv = 2.0 * s.y * gx + 2.0 * s.x * gy
        x1 = s.x**2 - s.y**2
        y1 = 2.0 * s.x * s.y
        th_dot = ((x1 - 1.0) * dv - y1 * du) / ((x1 - 1.0) ** 2 + y1**2)
        oracle = h_dot / th_dot
        err = abs(got - oracle)
        max_abs = max(max_abs, err)
        max_rel = max(max_rel, err / max(abs(oracle), 1e-300))
    return CheckReport(
        "check_dh_dtheta", int(x.size), max_abs, max_rel,
        max_rel <= tolerance, tolerance,
    )


def _merged(name: str, reports: list[CheckReport], tolerance: float) -> CheckReport:
    return CheckReport(
        name,
        sum(r.n_samples for r in reports),
        max(r.max_abs_error for r in reports),
        max(r.max_rel_error for r in reports),
        all(r.passed for r in reports),
        tolerance,
    )


def _run_pushforward(seed: int, tolerance: float | None) -> CheckReport:
    tol = 1e-10 if tolerance is None else tolerance
    return _merged(
        "check_pushforward",
        [check_pushforward(DEFAULT_N, mu, seed, tol) for mu in PUSHFORWARD_MUS],
        tol,
    )


def _run_theta_dot(seed: int, tolerance: float | None) -> CheckReport:
    return check_theta_dot(DEFAULT_N, seed, 1e-10 if tolerance is None else tolerance)


def _run_conservation(seed: int, tolerance: float | None) -> CheckReport:
    return check_conservation(
        CONSERVATION_LEVELS, 100.0, 1e-8 if tolerance is None else tolerance
    )


def _run_winding(seed: int, tolerance: float | None) -> CheckReport:
    return check_winding(WINDING_LEVELS, 1e-6 if tolerance is None else tolerance)


def _run_roundtrip(seed: int, tolerance: float | None) -> CheckReport:
    return check_roundtrip(DEFAULT_N, seed, 1e-12 if tolerance is None else tolerance)


def _run_energy_rate(seed: int, tolerance: float | None) -> CheckReport:
    tol = 1e-12 if tolerance is None else tolerance
    return _merged(
        "check_energy_rate",
        [check_energy_rate(DEFAULT_N, mu, seed, tol) for mu in PUSHFORWARD_MUS],
        tol,
    )


def _run_theta_angle(seed: int, tolerance: float | None) -> CheckReport:
    return check_theta_angle(DEFAULT_N, seed, 1e-12 if tolerance is None else tolerance)


def _run_dh_dtheta(seed: int, tolerance: float | None) -> CheckReport:
    tol = 1e-10 if tolerance is None else tolerance
    return _merged(
        "check_dh_dtheta",
        [check_dh_dtheta(DEFAULT_N, mu, seed, tol) for mu in PUSHFORWARD_MUS],
        tol,
    )


CHECKS = {
    "check_pushforward": _run_pushforward,
    "check_theta_dot": _run_theta_dot,
    "check_conservation": _run_conservation,
    "check_winding": _run_winding,
    "check_roundtrip": _run_roundtrip,
    "check_energy_rate": _run_energy_rate,
    "check_theta_angle": _run_theta_angle,
    "check_dh_dtheta": _run_dh_dtheta,
}

# formula -> checks exercising it; the registry test keeps this total
FORMULA_COVERAGE = {
    "duffing_field": ("check_pushforward", "check_conservation"),
    "hamiltonian": ("check_conservation", "check_energy_rate"),
    "energy_rate": ("check_energy_rate", "check_dh_dtheta"),
    "cover_map": ("check_pushforward", "check_roundtrip"),
    "inverse_cover": ("check_roundtrip",),
    "covered_field": ("check_pushforward", "check_theta_dot"),
    "theta_of": ("check_theta_angle", "check_winding"),
    "theta_dot_of": ("check_theta_dot", "check_dh_dtheta"),
    "dH_dtheta": ("check_dh_dtheta",),
}


def run_check(
    name: str, seed: int = DEFAULT_SEED, tolerance: float | None = None
) -> CheckReport:
    """Run one registered check by name with optional tolerance override."""
    try:
        runner = CHECKS[name]
    except KeyError:
        known = ", ".join(sorted(CHECKS))
        raise ValueError(f"unknown check {name!r}; known checks: {known}") from None
    return runner(seed, tolerance)


def run_all(
    seed: int = DEFAULT_SEED, tolerance: float | None = None
) -> list[CheckReport]:
    """Run every registered check, in registry order."""
    return [run_check(name, seed, tolerance) for name in CHECKS]
