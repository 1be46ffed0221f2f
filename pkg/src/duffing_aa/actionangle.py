"""The global angle about the covered-plane center, and action integrals.

Every orbit of the covered flow turns clockwise around the single center
(1, 0): the angle

    theta = atan2(y1, x1 - 1)        (range (-pi, pi])

decreases strictly along every trajectory except at the origin, so its
continuous unwrapping serves as a global clock.  The angular velocity has
the closed rational form implemented by ``theta_dot_of``; it is negative
everywhere except the origin (where it vanishes) and is 0/0 at (+-1, 0),
the two preimages of the center, so angle operations reject a hard
exclusion disk of radius 1e-9 around those points rather than clamp.

Two action integrals are provided:

  * ``action_covered``: (1/2pi) * loop integral of y1 dx1 along the
    covered trajectory over one full global revolution (theta decreasing
    by exactly 2pi).
  * ``action_original``: the classical per-region (1/2pi) * loop integral
    of y dx over one original period, kept as an independent reference.

Near a well the covering map scales areas by |det J| = 4(x^2+y^2) ~= 4,
so the covered action approaches 4x the classical one there; for orbits
outside the separatrix one global revolution is half an original period.
Both integrals use trapezoid quadrature on the adaptive samples with the
closing segment added explicitly.
"""

from __future__ import annotations

import math
from dataclasses import replace
from typing import NamedTuple

import numpy as np

from .covering import CoveredState, Sheet, cover_map
from .dynamics import Params, State, _require_finite, energy_rate, hamiltonian
from .exceptions import (
    CenterSingular,
    NoReturn,
    OnSeparatrix,
    OriginSingular,
    UnwrapAmbiguous,
)
from .integrate import (
    DEFAULT_CONFIG,
    IntegratorConfig,
    Trajectory,
    find_period,
    integrate_covered,
    integrate_original,
)

CENTER_EXCLUSION = 1e-9
ORIGIN_EXCLUSION = 1e-9
TWO_PI = 2.0 * math.pi


class PolarState(NamedTuple):
    """Polar coordinates about the covered-plane center (1, 0)."""

    rho: float
    theta: float


class EnergyAngleSample(NamedTuple):
    """One point of the (unwrapped angle, energy) representation."""

    theta_unwrapped: float
    h: float


def polar_of(c: CoveredState) -> PolarState:
    """Polar chart of a covered point: x1 = 1 + rho*cos(theta),
    y1 = rho*sin(theta)."""
    dx = c.x1 - 1.0
    rho = math.hypot(dx, c.y1)
    theta = math.atan2(c.y1, dx)
    if theta == -math.pi:
        theta = math.pi
    return PolarState(rho, theta)


def covered_from_polar(ps: PolarState, sheet: Sheet = Sheet.UPPER) -> CoveredState:
    """Inverse of the polar chart (sheet tag supplied by the caller)."""
    return CoveredState(
        1.0 + ps.rho * math.cos(ps.theta), ps.rho * math.sin(ps.theta), sheet
    )


def _check_away_from_centers(x, y) -> None:
    d2_plus = (np.asarray(x) - 1.0) ** 2 + np.asarray(y) ** 2
    d2_minus = (np.asarray(x) + 1.0) ** 2 + np.asarray(y) ** 2
    if np.any(d2_plus < CENTER_EXCLUSION**2) or np.any(d2_minus < CENTER_EXCLUSION**2):
        raise CenterSingular(
            "state within 1e-9 of (+-1, 0); the angle is undefined at the "
            "covered center"
        )


def theta_of(s: State) -> float:
    """Global angle of a state, via its covered image, in (-pi, pi]."""
    _require_finite(s)
    _check_away_from_centers(s.x, s.y)
    c = cover_map(State(float(s[0]), float(s[1])))
    theta = math.atan2(c.y1, c.x1 - 1.0)
    if theta == -math.pi:
        theta = math.pi
    return theta


def theta_dot_of(s: State) -> float:
    """Angular velocity of the conservative flow at s (closed form).

    Equal to d/dt atan2(y1, x1 - 1) along the mu = 0 flow.  Always <= 0;
    zero exactly at the origin.  The numerator decomposes as
    x^2 (x^2 - 1)^2 + y^2 (x^4 + y^2 + 1) and the denominator equals
    rho^2 = (x1 - 1)^2 + y1^2, which pins the 0/0 points to (+-1, 0).
    """
    _require_finite(s)
    _check_away_from_centers(s.x, s.y)
    x, y = s.x, s.y
    x2 = x * x
    y2 = y * y
    num = x2 * x2 * x2 + x2 * x2 * y2 - 2.0 * x2 * x2 + y2 * y2 + x2 + y2
    den = x2 * x2 + 2.0 * x2 * y2 + y2 * y2 - 2.0 * x2 + 2.0 * y2 + 1.0
    return -2.0 * num / den


def _principal_thetas(traj: Trajectory) -> np.ndarray:
    x1 = traj.covered[:, 0]
    y1 = traj.covered[:, 1]
    return np.arctan2(y1, x1 - 1.0)


def unwrap_theta(traj: Trajectory) -> np.ndarray:
    """Continuous angle along a trajectory, as an (n, 2) array [t, theta].

    Each consecutive principal-value jump is shifted by a multiple of 2pi
    into (-pi, pi) and accumulated.  The integrator's step control keeps
    true increments well below pi; an adjusted increment of magnitude pi
    or more therefore means the branch is unrecoverable and raises
    UnwrapAmbiguous.
    """
    _check_away_from_centers(traj.states[:, 0], traj.states[:, 1])
    raw = _principal_thetas(traj)
    d = np.diff(raw)
    d -= TWO_PI * np.round(d / TWO_PI)
    if d.size and np.any(np.abs(d) >= math.pi):
        raise UnwrapAmbiguous(
            "consecutive angle samples differ by half a turn or more; "
            "sampling is too sparse to unwrap"
        )
    theta0 = raw[0] if raw[0] != -math.pi else math.pi
    theta_u = np.empty_like(raw)
    theta_u[0] = theta0
    if d.size:
        theta_u[1:] = theta0 + np.cumsum(d)
    return np.column_stack((np.asarray(traj.t, dtype=np.float64), theta_u))


def _reject_nonperiodic(s0: State, p: Params) -> None:
    if p.mu != 0.0:
        raise ValueError("actions are defined for the conservative flow (mu = 0)")
    level = hamiltonian(s0, p) - p.c
    if abs(level) < 1e-9:
        raise OnSeparatrix(
            f"|H - c| = {abs(level):.2e} < 1e-9: no closed orbit on the separatrix"
        )


def action_covered(
    s0: State, p: Params, cfg: IntegratorConfig = DEFAULT_CONFIG
) -> float:
    """Action from the covered loop: (1/2pi) * integral of y1 dx1 over one
    global revolution (theta down by exactly 2pi), sign-normalized.

    The revolution endpoint is refined by bisection on the dense output;
    quadrature is trapezoidal with the partial last segment and the
    closing segment back to the start added explicitly.
    """
    s0 = State(float(s0[0]), float(s0[1]))
    _reject_nonperiodic(s0, p)
    traj = integrate_covered(cover_map(s0), p, cfg)
    tw = unwrap_theta(traj)
    theta_u = tw[:, 1]
    target = theta_u[0] - TWO_PI
    below = np.nonzero(theta_u <= target)[0]
    if below.size == 0:
        raise NoReturn(
            f"angle decreased by only {theta_u[0] - theta_u.min():.4g} rad "
            f"within t_max={cfg.t_max:g}; increase t_max"
        )
    k = int(below[0])

    raw = _principal_thetas(traj)

    def theta_u_at(tq: float) -> float:
        x1q, y1q = traj.dense_point(tq)
        th = math.atan2(y1q, x1q - 1.0)
        dd = th - raw[k - 1]
        dd -= TWO_PI * round(dd / TWO_PI)
        return theta_u[k - 1] + dd

    ta, tb = float(traj.t[k - 1]), float(traj.t[k])
    for _ in range(200):
        tm = 0.5 * (ta + tb)
        if theta_u_at(tm) > target:
            ta = tm
        else:
            tb = tm
        if (tb - ta) <= 1e-15 * (1.0 + abs(tb)):
            break
    t_star = 0.5 * (ta + tb)
    x1_star, y1_star = traj.dense_point(t_star)

    x1 = traj.covered[: k, 0]
    y1 = traj.covered[: k, 1]
    s = float(np.sum(0.5 * (y1[1:] + y1[:-1]) * np.diff(x1)))
    s += 0.5 * (y1[-1] + y1_star) * (x1_star - x1[-1])
    s += 0.5 * (y1_star + y1[0]) * (x1[0] - x1_star)  # close the loop
    return abs(s) / TWO_PI


def action_original(
    s0: State, p: Params, cfg: IntegratorConfig = DEFAULT_CONFIG
) -> float:
    """Classical action: (1/2pi) * integral of y dx over one original
    period (measured by find_period), sign-normalized."""
    s0 = State(float(s0[0]), float(s0[1]))
    _reject_nonperiodic(s0, p)
    period = find_period(s0, p, cfg)
    traj = integrate_original(s0, p, replace(cfg, t_max=period))
    x = traj.states[:, 0]
    y = traj.states[:, 1]
    s = float(np.sum(0.5 * (y[1:] + y[:-1]) * np.diff(x)))
    s += 0.5 * (y[-1] + y[0]) * (x[0] - x[-1])  # close the loop
    return abs(s) / TWO_PI


def dH_dtheta(s: State, p: Params) -> float:
    """Energy change per unit of global angle, dH/dtheta = H'/theta'.

    Zero for mu = 0 or on the axis y = 0; strictly positive elsewhere when
    mu > 0 (both rates are negative).  Raises OriginSingular at the origin
    where the angular velocity vanishes, CenterSingular near (+-1, 0).
    """
    td = theta_dot_of(s)
    if td == 0.0:
        raise OriginSingular("theta' = 0 at the origin; dH/dtheta is undefined")
    return energy_rate(s, p) / td


def energy_angle_curve(traj: Trajectory) -> np.ndarray:
    """(unwrapped angle, energy) pairs along a trajectory, shape (n, 2).

    For mu = 0 the energy column is constant (orbits are horizontal
    lines); for mu > 0 both columns decrease in time, so energy is a
    non-decreasing function of the angle.  A trajectory pinned at the
    origin (where the angle stops) is rejected with OriginSingular.
    """
    d2 = traj.states[:, 0] ** 2 + traj.states[:, 1] ** 2
    if np.any(d2 < ORIGIN_EXCLUSION**2):
        raise OriginSingular(
            "trajectory reaches the origin, where the angle is not a clock"
        )
    tw = unwrap_theta(traj)
    return np.column_stack((tw[:, 1], traj.energies()))
