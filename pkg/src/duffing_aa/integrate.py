"""Time integration of both planes, with events and sheet bookkeeping.

Two steppers are provided: a fixed-step classic RK4 baseline and an
embedded Dormand-Prince 5(4) adaptive pair (the default).  Both record the
field value at every accepted node, so trajectories support cubic Hermite
dense output -- accurate enough to bisect event times far below the step
size.

Event kinds:

  * ``cut_crossing``: the covered-plane path crossed {y1 = 0, x1 < 0}.
    The sheet tag toggles there.  Crossing times are refined by bisection
    on the dense output until |y1| <= 1e-12.
  * ``section_return``: the original-plane path crossed the section
    {y = 0} (recorded only when requested; used for period measurement),
    refined until |y| <= 1e-10.

The sheet column of a trajectory is *evolved*: it starts from the initial
tag and toggles at each cut crossing, rather than being recomputed per
sample.  Within one accepted step, cut crossings are located before
section returns, and multiple events are emitted in increasing time.

Each integration is an independent single-threaded computation over
immutable inputs; returned trajectories are frozen (array buffers are
marked read-only) and safe to share between threads.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import _kernels
from .covering import BRANCH_TOL as BRANCH_CUT_TOL
from .covering import CoveredState, Sheet, cover_map, inverse_cover
from .dynamics import Params, State, _require_finite, hamiltonian
from .exceptions import (
    BranchPointApproach,
    DegenerateCrossing,
    MaxStepsExceeded,
    NoReturn,
    OnSeparatrix,
    StepFailure,
)

CUT_CROSSING = "cut_crossing"
SECTION_RETURN = "section_return"

CUT_REFINE_TOL = 1e-12
SECTION_REFINE_TOL = 1e-10
BRANCH_RADIUS = 1e-10
SEPARATRIX_TOL = 1e-9

_SHEET_SIGN = {Sheet.UPPER: 1, Sheet.LOWER: -1}
_SIGN_SHEET = {1: Sheet.UPPER, -1: Sheet.LOWER}


@dataclass(frozen=True)
class IntegratorConfig:
    """Stepper selection and tolerances.

    ``step`` is the fixed step for ``rk4`` and the initial step for
    ``rk45``.  ``max_steps`` bounds attempted steps (accepted + rejected)
    and therefore every loop in this module.
    """

    method: str = "rk45"
    step: float = 0.01
    rel_tol: float = 1e-10
    abs_tol: float = 1e-10
    t_max: float = 100.0
    max_steps: int = 10_000_000

    def __post_init__(self):
        if self.method not in ("rk4", "rk45"):
            raise ValueError(f"method must be 'rk4' or 'rk45', got {self.method!r}")
        for name in ("step", "rel_tol", "abs_tol", "t_max"):
            v = getattr(self, name)
            if not np.isfinite(v) or v <= 0.0:
                raise ValueError(f"{name} must be finite and > 0, got {v}")
        if int(self.max_steps) <= 0:
            raise ValueError(f"max_steps must be > 0, got {self.max_steps}")


DEFAULT_CONFIG = IntegratorConfig()


@dataclass(frozen=True)
class Event:
    """Something that happened at time ``t`` along a trajectory."""

    t: float
    kind: str
    data: dict = field(default_factory=dict)


@dataclass(frozen=True)
class Trajectory:
    """Time-ordered samples of one orbit in both charts.

    ``states`` are original-plane points, ``covered`` their covered-plane
    images, ``sheets`` the evolved tag per sample (+1 Upper, -1 Lower).
    ``derivs`` holds the field value at each node *in the integrated
    plane* (``plane`` says which), feeding the Hermite dense output.
    """

    t: np.ndarray
    states: np.ndarray
    covered: np.ndarray
    sheets: np.ndarray
    derivs: np.ndarray
    events: tuple[Event, ...]
    params: Params
    config: IntegratorConfig
    plane: str

    def __post_init__(self):
        for arr in (self.t, self.states, self.covered, self.sheets, self.derivs):
            arr.setflags(write=False)

    def __len__(self) -> int:
        return self.t.shape[0]

    def state_at(self, i: int) -> State:
        return State(float(self.states[i, 0]), float(self.states[i, 1]))

    def covered_at(self, i: int) -> CoveredState:
        return CoveredState(
            float(self.covered[i, 0]), float(self.covered[i, 1]), self.sheet_at(i)
        )

    def sheet_at(self, i: int) -> Sheet:
        return _SIGN_SHEET[int(self.sheets[i])]

    def energies(self) -> np.ndarray:
        """H evaluated at every sample."""
        x = self.states[:, 0]
        y = self.states[:, 1]
        return x**4 / 4.0 + y**2 / 2.0 - x**2 / 2.0 + self.params.c

    def dense_point(self, tq: float) -> tuple[float, float]:
        """Cubic Hermite interpolant in the integrated plane at time tq."""
        if self.plane == "original":
            pts = self.states
        else:
            pts = self.covered
        t = self.t
        if tq <= t[0]:
            return float(pts[0, 0]), float(pts[0, 1])
        if tq >= t[-1]:
            return float(pts[-1, 0]), float(pts[-1, 1])
        i = int(np.searchsorted(t, tq, side="right")) - 1
        return (
            _hermite(tq, t[i], t[i + 1], pts[i, 0], pts[i + 1, 0],
                     self.derivs[i, 0], self.derivs[i + 1, 0]),
            _hermite(tq, t[i], t[i + 1], pts[i, 1], pts[i + 1, 1],
                     self.derivs[i, 1], self.derivs[i + 1, 1]),
        )


def _hermite(tq, t0, t1, u0, u1, f0, f1) -> float:
    h = t1 - t0
    if h == 0.0:
        return float(u0)
    s = (tq - t0) / h
    s2 = s * s
    s3 = s2 * s
    return float(
        (2.0 * s3 - 3.0 * s2 + 1.0) * u0
        + (s3 - 2.0 * s2 + s) * h * f0
        + (-2.0 * s3 + 3.0 * s2) * u1
        + (s3 - s2) * h * f1
    )


def _run_kernel(field_id: int, u0: float, v0: float, p: Params, cfg: IntegratorConfig):
    if cfg.method == "rk45":
        t, u, v, du, dv, status = _kernels.adaptive_path(
            field_id, u0, v0, p.mu, cfg.t_max, cfg.rel_tol, cfg.abs_tol,
            cfg.step, int(cfg.max_steps),
        )
    else:
        t, u, v, du, dv, status = _kernels.rk4_path(
            field_id, u0, v0, p.mu, cfg.t_max, cfg.step, int(cfg.max_steps)
        )
    if status == _kernels.STATUS_STEP_UNDERFLOW:
        raise StepFailure(
            f"adaptive step fell below {_kernels.MIN_STEP:g} at t={t[-1]:.6g}"
        )
    if status == _kernels.STATUS_MAX_STEPS:
        reached = t[-1] if len(t) else 0.0
        raise MaxStepsExceeded(
            f"{cfg.max_steps} steps exhausted at t={reached:.6g} (t_max={cfg.t_max:g})"
        )
    return t, u, v, du, dv


def _sign(v: float) -> int:
    if v > 0.0:
        return 1
    if v < 0.0:
        return -1
    return 0


def _bisect_crossing(
    g: Callable[[float], float], ta: float, tb: float, sign_a: int, tol: float
) -> tuple[float, float]:
    """Bisect g on [ta, tb] (opposite signs at the ends) until |g| <= tol.

    Returns (t_star, g(t_star)).  The interval-width stop only kicks in if
    g is steep enough that |g| <= tol is unreachable in double precision.
    """
    a, b = ta, tb
    m = 0.5 * (a + b)
    gm = g(m)
    for _ in range(200):
        if abs(gm) <= tol or (b - a) <= 1e-15 * (1.0 + abs(b)):
            break
        if _sign(gm) == sign_a:
            a = m
        else:
            b = m
        m = 0.5 * (a + b)
        gm = g(m)
    return m, gm


def _cut_crossings(
    t: np.ndarray,
    x1: np.ndarray,
    y1: np.ndarray,
    dense_cov: Callable[[float], tuple[float, float]],
) -> tuple[list[Event], list[int]]:
    """Locate cut crossings along sampled covered coordinates.

    Walks the sign of y1, skipping exact zeros (a sample *on* the cut,
    e.g. a trajectory launched from the y-axis, carries the conventional
    tag already and must not toggle).  A strict sign flip brackets a root
    of y1; the root is refined on the dense output and kept only when it
    lies on the cut (x1 < 0).  Returns the events plus, for each, the
    sample index from which the toggled sheet applies.
    """
    events: list[Event] = []
    toggle_from: list[int] = []
    prev_sign = 0
    prev_idx = -1
    for i in range(t.shape[0]):
        s = _sign(y1[i])
        if s == 0:
            continue
        if prev_sign != 0 and s != prev_sign:
            t_star, _ = _bisect_crossing(
                lambda tq: dense_cov(tq)[1], t[prev_idx], t[i], prev_sign,
                CUT_REFINE_TOL,
            )
            x1_star = dense_cov(t_star)[0]
            if abs(x1_star) <= BRANCH_CUT_TOL:
                raise DegenerateCrossing(
                    f"trajectory met the cut at x1={x1_star:.3e}, t={t_star:.6g}, "
                    "within tolerance of the branch point"
                )
            if x1_star < 0.0:
                events.append(Event(t_star, CUT_CROSSING, {"x1": x1_star}))
                toggle_from.append(prev_idx + 1)
        prev_sign = s
        prev_idx = i
    # a trailing sample landing exactly on the cut: the transversal flow
    # assigns on-cut points to the destination sheet, so toggle there too
    z = prev_idx + 1
    if prev_sign != 0 and z < t.shape[0] and y1[z] == 0.0:
        if abs(x1[z]) <= BRANCH_CUT_TOL:
            raise DegenerateCrossing(
                f"trajectory ended on the cut at x1={x1[z]:.3e}, t={t[z]:.6g}, "
                "within tolerance of the branch point"
            )
        if x1[z] < 0.0:
            events.append(Event(float(t[z]), CUT_CROSSING, {"x1": float(x1[z])}))
            toggle_from.append(z)
    return events, toggle_from


def _evolve_sheets(n: int, start_sign: int, toggle_from: list[int]) -> np.ndarray:
    sheets = np.empty(n, dtype=np.int8)
    cur = start_sign
    last = 0
    for k in toggle_from:
        sheets[last:k] = cur
        cur = -cur
        last = k
    sheets[last:] = cur
    return sheets


def _section_crossings(
    t: np.ndarray, y: np.ndarray, dense: Callable[[float], tuple[float, float]]
) -> list[Event]:
    """Sign-walk y to locate transversal returns to the section {y = 0}."""
    events: list[Event] = []
    prev_sign = 0
    prev_idx = -1
    for i in range(t.shape[0]):
        s = _sign(y[i])
        if s == 0:
            continue
        if prev_sign != 0 and s != prev_sign:
            t_star, _ = _bisect_crossing(
                lambda tq: dense(tq)[1], t[prev_idx], t[i], prev_sign,
                SECTION_REFINE_TOL,
            )
            x_star = dense(t_star)[0]
            events.append(
                Event(t_star, SECTION_RETURN, {"x": x_star, "direction": s})
            )
        prev_sign = s
        prev_idx = i
    return events


def integrate_original(
    s0: State,
    p: Params,
    cfg: IntegratorConfig = DEFAULT_CONFIG,
    *,
    detect_sections: bool = False,
) -> Trajectory:
    """Advance the original-plane field from s0 over [0, t_max].

    The covered columns are the images of the samples; the sheet starts
    from the conventional tag of s0 and toggles at each cut crossing.
    """
    s0 = State(float(s0[0]), float(s0[1]))
    _require_finite(s0)
    t, x, y, dx, dy = _run_kernel(_kernels.FIELD_ORIGINAL, s0.x, s0.y, p, cfg)
    states = np.column_stack((x, y))
    covered = np.column_stack((x * x - y * y, 2.0 * x * y))
    derivs = np.column_stack((dx, dy))

    traj_plane = Trajectory(
        t, states, covered, np.zeros(len(t), dtype=np.int8), derivs,
        (), p, cfg, "original",
    )

    def dense_cov(tq: float) -> tuple[float, float]:
        xa, ya = traj_plane.dense_point(tq)
        return xa * xa - ya * ya, 2.0 * xa * ya

    events, toggle_from = _cut_crossings(t, covered[:, 0], covered[:, 1], dense_cov)
    if detect_sections:
        events = sorted(
            events + _section_crossings(t, y, traj_plane.dense_point),
            key=lambda e: (e.t, 0 if e.kind == CUT_CROSSING else 1),
        )
    sheets = _evolve_sheets(len(t), _SHEET_SIGN[cover_map(s0).sheet], toggle_from)
    return Trajectory(t, states, covered, sheets, derivs, tuple(events), p, cfg,
                      "original")


def integrate_covered(
    c0: CoveredState, p: Params, cfg: IntegratorConfig = DEFAULT_CONFIG
) -> Trajectory:
    """Advance the covered-plane field from c0 over [0, t_max].

    Original-plane samples are reconstructed through the inverse covering
    with the *tracked* sheet, so the reconstruction stays continuous
    across cut transits.  Any sample within BRANCH_RADIUS of the branch
    point aborts with BranchPointApproach (the inverse loses accuracy
    there); integrate the original plane instead for saddle studies.
    """
    x10, y10 = float(c0[0]), float(c0[1])
    if not (math.isfinite(x10) and math.isfinite(y10)):
        raise ValueError(f"covered state must be finite, got {c0!r}")
    t, x1, y1, dx1, dy1 = _run_kernel(_kernels.FIELD_COVERED, x10, y10, p, cfg)
    radius = np.hypot(x1, y1)
    if np.any(radius < BRANCH_RADIUS):
        i = int(np.argmin(radius))
        raise BranchPointApproach(
            f"covered trajectory within {BRANCH_RADIUS:g} of the branch point "
            f"at t={t[i]:.6g} (|x1,y1|={radius[i]:.3e})"
        )
    covered = np.column_stack((x1, y1))
    derivs = np.column_stack((dx1, dy1))

    traj_plane = Trajectory(
        t, np.zeros_like(covered), covered, np.zeros(len(t), dtype=np.int8),
        derivs, (), p, cfg, "covered",
    )
    events, toggle_from = _cut_crossings(t, x1, y1, traj_plane.dense_point)
    sheets = _evolve_sheets(len(t), _SHEET_SIGN[c0.sheet], toggle_from)

    states = np.empty_like(covered)
    for i in range(len(t)):
        states[i] = inverse_cover(
            CoveredState(x1[i], y1[i], _SIGN_SHEET[int(sheets[i])])
        )

    return Trajectory(t, states, covered, sheets, derivs, tuple(events), p, cfg,
                      "covered")


def find_period(
    s0: State, p: Params, cfg: IntegratorConfig = DEFAULT_CONFIG
) -> float:
    """Period of the closed orbit through s0 (conservative case only).

    Measures the first return to the section {y = 0} crossed in the same
    direction: started on the section that is one full revolution; started
    off it, the time between the first two same-direction crossings.
    Section times are refined to |y| <= 1e-10.

    Raises OnSeparatrix within 1e-9 of the separatrix level (no finite
    period), NoReturn if t_max expires first, and ValueError for mu != 0.
    """
    s0 = State(float(s0[0]), float(s0[1]))
    if p.mu != 0.0:
        raise ValueError("period is defined for the conservative flow (mu = 0) only")
    level = hamiltonian(s0, p) - p.c
    if abs(level) < SEPARATRIX_TOL:
        raise OnSeparatrix(
            f"|H - c| = {abs(level):.2e} < {SEPARATRIX_TOL:g}: state is on the "
            "separatrix (or the saddle), which has no finite period"
        )
    traj = integrate_original(s0, p, cfg, detect_sections=True)
    returns = [e for e in traj.events if e.kind == SECTION_RETURN]

    if s0.y == 0.0:
        d0 = _sign(s0.x - s0.x**3)
        if d0 == 0:
            raise NoReturn("initial state is a fixed point; no section return")
        for e in returns:
            if e.data["direction"] == d0:
                return e.t
        raise NoReturn(f"no same-direction section return before t_max={cfg.t_max:g}")

    if not returns:
        raise NoReturn(f"no section crossing before t_max={cfg.t_max:g}")
    t_ref = returns[0].t
    d0 = returns[0].data["direction"]
    for e in returns[1:]:
        if e.data["direction"] == d0:
            return e.t - t_ref
    raise NoReturn(f"no same-direction section return before t_max={cfg.t_max:g}")
