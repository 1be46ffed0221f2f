import math
from dataclasses import replace

import numpy as np
import pytest

from duffing_aa import (
    DEFAULT_CONFIG,
    CenterSingular,
    CoveredState,
    OnSeparatrix,
    OriginSingular,
    Params,
    PolarState,
    Sheet,
    State,
    Trajectory,
    UnwrapAmbiguous,
    action_covered,
    action_original,
    cover_map,
    covered_field,
    covered_from_polar,
    dH_dtheta,
    duffing_field,
    energy_angle_curve,
    find_period,
    hamiltonian,
    integrate_original,
    polar_of,
    state_on_level,
    theta_dot_of,
    theta_of,
    unwrap_theta,
)

TWO_PI = 2.0 * math.pi


def chain_rule_theta_dot(s: State) -> float:
    # oracle: d/dt atan2(y1, x1 - 1) along the conservative covered flow
    fx, fy = duffing_field(s, Params(mu=0.0))
    du = 2.0 * s.x * fx - 2.0 * s.y * fy
    dv = 2.0 * s.y * fx + 2.0 * s.x * fy
    c = cover_map(s)
    return ((c.x1 - 1.0) * dv - c.y1 * du) / ((c.x1 - 1.0) ** 2 + c.y1**2)


def constant_trajectory(s: State, n: int = 4) -> Trajectory:
    t = np.linspace(0.0, 1.0, n)
    states = np.tile(np.array(s, dtype=float), (n, 1))
    c = cover_map(s)
    covered = np.tile(np.array([c.x1, c.y1]), (n, 1))
    sheets = np.full(n, 1 if c.sheet is Sheet.UPPER else -1, dtype=np.int8)
    return Trajectory(
        t, states, covered, sheets, np.zeros((n, 2)), (), Params(), DEFAULT_CONFIG,
        "original",
    )


def test_theta_examples():
    assert theta_of(State(0.0, 1.0)) == math.pi
    assert theta_of(State(math.sqrt(2.0), 0.0)) == 0.0
    assert abs(theta_of(State(1.0, 1.0)) - math.atan2(2.0, -1.0)) <= 1e-15
    assert abs(theta_of(State(1.0, 1.0)) - 2.0344439357957027) <= 1e-7
    assert theta_of(State(0.0, 0.0)) == math.pi


def test_theta_range(rng):
    for _ in range(2000):
        s = State(*rng.uniform(-3.0, 3.0, size=2))
        th = theta_of(s)
        assert -math.pi < th <= math.pi
    # the lower-axis image lands on the closed end of the branch
    assert theta_of(State(0.0, -1.0)) == math.pi


def test_theta_center_singular():
    for s in (State(1.0, 0.0), State(-1.0, 0.0), State(1.0, 1e-10)):
        with pytest.raises(CenterSingular):
            theta_of(s)
        with pytest.raises(CenterSingular):
            theta_dot_of(s)


def test_theta_dot_examples():
    assert theta_dot_of(State(0.0, 0.0)) == 0.0
    assert theta_dot_of(State(0.0, 1.0)) == -1.0
    assert theta_dot_of(State(2.0, 0.0)) == -8.0
    assert abs(theta_dot_of(State(2.0, 0.0)) - chain_rule_theta_dot(State(2.0, 0.0))) == 0.0


def test_theta_dot_chain_rule(rng):
    worst = 0.0
    n = 0
    while n < 10_000:
        s = State(*rng.uniform(-3.0, 3.0, size=2))
        if (s.x - 1.0) ** 2 + s.y**2 < 1e-6 or (s.x + 1.0) ** 2 + s.y**2 < 1e-6:
            continue
        n += 1
        oracle = chain_rule_theta_dot(s)
        worst = max(worst, abs(theta_dot_of(s) - oracle) / abs(oracle))
    assert worst <= 1e-10


def test_theta_dot_sign(rng):
    n = 0
    while n < 10_000:
        s = State(*rng.uniform(-3.0, 3.0, size=2))
        if s.x**2 + s.y**2 < 1e-12:
            continue
        if (s.x - 1.0) ** 2 + s.y**2 < 1e-12 or (s.x + 1.0) ** 2 + s.y**2 < 1e-12:
            continue
        n += 1
        assert theta_dot_of(s) < 0.0


def test_denominator_is_rho_squared(rng):
    n = 0
    while n < 10_000:
        x, y = rng.uniform(-3.0, 3.0, size=2)
        if (x - 1.0) ** 2 + y**2 < 1e-4 or (x + 1.0) ** 2 + y**2 < 1e-4:
            continue
        n += 1
        den = x**4 + 2 * x**2 * y**2 + y**4 - 2 * x**2 + 2 * y**2 + 1
        c = cover_map(State(x, y))
        rho2 = (c.x1 - 1.0) ** 2 + c.y1**2
        assert abs(den - rho2) <= 1e-12 * rho2


def test_polar_chart_round_trip(rng):
    for _ in range(2000):
        x1, y1 = rng.uniform(-4.0, 4.0, size=2)
        ps = polar_of(CoveredState(x1, y1, Sheet.UPPER))
        back = covered_from_polar(ps)
        assert abs(back.x1 - x1) <= 1e-12 and abs(back.y1 - y1) <= 1e-12
    assert polar_of(CoveredState(2.0, 0.0, Sheet.UPPER)) == PolarState(1.0, 0.0)


def test_unwrap_constant_trajectory():
    tw = unwrap_theta(constant_trajectory(State(0.0, 1.0)))
    np.testing.assert_array_equal(tw[:, 1], math.pi)


def test_unwrap_windings(p0):
    s0 = State(1.2, 0.0)
    tw = unwrap_theta(
        integrate_original(s0, p0, replace(DEFAULT_CONFIG, t_max=find_period(s0, p0)))
    )
    assert abs((tw[-1, 1] - tw[0, 1]) + TWO_PI) <= 1e-6

    s1 = State(0.0, 2.0)
    tw = unwrap_theta(
        integrate_original(s1, p0, replace(DEFAULT_CONFIG, t_max=find_period(s1, p0)))
    )
    assert abs((tw[-1, 1] - tw[0, 1]) + 2.0 * TWO_PI) <= 1e-6


def test_unwrap_rejects_center(p0):
    with pytest.raises(CenterSingular):
        unwrap_theta(constant_trajectory(State(1.0, 0.0)))


def test_unwrap_ambiguous():
    # two samples half a turn apart cannot be unwrapped
    t = np.array([0.0, 1.0])
    states = np.array([[math.sqrt(2.0), 0.0], [0.0, 1.0]])
    covered = np.array([[2.0, 0.0], [-1.0, 0.0]])
    traj = Trajectory(
        t, states, covered, np.ones(2, dtype=np.int8), np.zeros((2, 2)), (),
        Params(), DEFAULT_CONFIG, "original",
    )
    with pytest.raises(UnwrapAmbiguous):
        unwrap_theta(traj)


def test_theta_strictly_decreasing_along_flow(p_damped):
    traj = integrate_original(
        State(0.0, 1.5), p_damped, replace(DEFAULT_CONFIG, t_max=50.0)
    )
    tw = unwrap_theta(traj)
    assert np.all(np.diff(tw[:, 1]) < 0.0)


def test_action_covered_harmonic_limit(p0):
    s0 = State(1.0 + 1e-3, 0.0)
    h = hamiltonian(s0, p0)
    expected = 4.0 * (h + 0.25) / math.sqrt(2.0)
    got = action_covered(s0, p0)
    assert abs(got - expected) <= 0.05 * expected


def test_action_covered_polygon_oracle(p0):
    from duffing_aa import integrate_covered

    s0 = State(1.2, 0.0)
    got = action_covered(s0, p0)
    traj = integrate_covered(cover_map(s0), p0, DEFAULT_CONFIG)
    tw = unwrap_theta(traj)
    k = int(np.nonzero(tw[:, 1] <= tw[0, 1] - TWO_PI)[0][0])
    x1, y1 = traj.covered[:k, 0], traj.covered[:k, 1]
    area = 0.5 * abs(np.sum(x1 * np.roll(y1, -1) - np.roll(x1, -1) * y1))
    assert abs(got - area / TWO_PI) <= 1e-4


def test_action_covered_errors(p0):
    with pytest.raises(OnSeparatrix):
        action_covered(State(math.sqrt(2.0), 0.0), p0)
    with pytest.raises(ValueError):
        action_covered(State(1.2, 0.0), Params(mu=0.1))


def test_action_original_harmonic_limit(p0):
    s0 = State(1.0 + 1e-3, 0.0)
    h = hamiltonian(s0, p0)
    expected = (h + 0.25) / math.sqrt(2.0)
    got = action_original(s0, p0)
    assert abs(got - expected) <= 0.05 * expected


def test_action_derivative_is_period(p0):
    # classical identity dI/dH = T / 2pi, by finite differences
    h = hamiltonian(State(1.2, 0.0), p0)
    dh = 1e-4
    d_action = (
        action_original(state_on_level(h + dh), p0)
        - action_original(state_on_level(h), p0)
    ) / dh
    want = find_period(state_on_level(h), p0) / TWO_PI
    assert abs(d_action - want) <= 1e-2 * want


def test_action_original_positive(p0):
    a = action_original(State(0.0, 0.1), p0)
    assert a > 0.0 and np.isfinite(a)


def test_dh_dtheta_values(p0, p_damped):
    assert dH_dtheta(State(0.0, 1.0), p_damped) == 0.1
    assert dH_dtheta(State(0.7, -0.4), p0) == 0.0
    assert dH_dtheta(State(2.0, 0.0), Params(mu=0.5)) == 0.0


def test_dh_dtheta_positive(rng, p_damped):
    n = 0
    while n < 2000:
        s = State(*rng.uniform(-3.0, 3.0, size=2))
        if s.x**2 + s.y**2 < 1e-6:
            continue
        if (s.x - 1.0) ** 2 + s.y**2 < 1e-6 or (s.x + 1.0) ** 2 + s.y**2 < 1e-6:
            continue
        n += 1
        v = dH_dtheta(s, p_damped)
        assert v >= 0.0
        assert (v > 0.0) == (s.y != 0.0)


def test_dh_dtheta_singularities(p_damped):
    with pytest.raises(OriginSingular):
        dH_dtheta(State(0.0, 0.0), p_damped)
    with pytest.raises(CenterSingular):
        dH_dtheta(State(1.0, 0.0), p_damped)


def test_energy_angle_conservative_is_flat(p0):
    s0 = State(1.2, 0.0)
    traj = integrate_original(s0, p0, replace(DEFAULT_CONFIG, t_max=find_period(s0, p0)))
    curve = energy_angle_curve(traj)
    assert float(np.max(curve[:, 1]) - np.min(curve[:, 1])) <= 1e-8


def test_energy_angle_dissipative_spiral(p_damped):
    traj = integrate_original(
        State(0.0, 1.5), p_damped, replace(DEFAULT_CONFIG, t_max=50.0)
    )
    curve = energy_angle_curve(traj)
    dth = np.diff(curve[:, 0])
    dh = np.diff(curve[:, 1])
    assert np.all(dth < 0.0)
    assert np.all(dh <= 1e-12)  # slack for integrator rounding near y = 0
    # h as a function of ascending theta is non-decreasing
    order = np.argsort(curve[:, 0])
    assert np.all(np.diff(curve[order, 1]) >= -1e-12)


def test_energy_angle_rejects_origin(p0):
    with pytest.raises(OriginSingular):
        energy_angle_curve(constant_trajectory(State(0.0, 0.0)))


def test_theta_dot_matches_flow_direction(p0):
    # the covered flow must rotate the way theta_dot_of says
    s = State(0.5, 0.8)
    c = cover_map(s)
    du, dv = covered_field(c, p0)
    numeric = ((c.x1 - 1.0) * dv - c.y1 * du) / ((c.x1 - 1.0) ** 2 + c.y1**2)
    assert numeric < 0.0
    assert abs(numeric - theta_dot_of(s)) <= 1e-12 * abs(numeric)
