import math
from dataclasses import replace

import numpy as np
import pytest

from duffing_aa import (
    CUT_CROSSING,
    DEFAULT_CONFIG,
    SECTION_RETURN,
    BranchPointApproach,
    IntegratorConfig,
    MaxStepsExceeded,
    NoReturn,
    OnSeparatrix,
    Params,
    State,
    StepFailure,
    cover_map,
    find_period,
    hamiltonian,
    integrate_covered,
    integrate_original,
    state_on_level,
)


def test_config_validation():
    with pytest.raises(ValueError):
        IntegratorConfig(method="euler")
    with pytest.raises(ValueError):
        IntegratorConfig(step=0.0)
    with pytest.raises(ValueError):
        IntegratorConfig(rel_tol=-1e-10)
    with pytest.raises(ValueError):
        IntegratorConfig(t_max=0.0)
    with pytest.raises(ValueError):
        IntegratorConfig(max_steps=0)


def test_fixed_points_stay_put(p0, p_damped):
    cfg = replace(DEFAULT_CONFIG, t_max=10.0)
    for s0, p in ((State(0.0, 0.0), p0), (State(1.0, 0.0), p_damped)):
        traj = integrate_original(s0, p, cfg)
        assert np.max(np.abs(traj.states - np.array(s0))) <= 1e-12
    traj = integrate_covered(cover_map(State(1.0, 0.0)), p0, cfg)
    assert np.max(np.abs(traj.covered - np.array([1.0, 0.0]))) <= 1e-12


def test_conservation_near_separatrix(p0):
    traj = integrate_original(State(0.0, 0.1), p0, DEFAULT_CONFIG)
    h0 = hamiltonian(State(0.0, 0.1), p0)
    assert abs(h0 - 0.005) <= 1e-17
    assert np.max(np.abs(traj.energies() - h0)) <= 1e-8


def test_rk4_order():
    # halving the step must shrink the one-period endpoint error ~2^4
    p = Params(mu=0.0)
    s0 = State(1.2, 0.0)
    period = find_period(s0, p)
    ref = integrate_original(
        s0, p, replace(DEFAULT_CONFIG, t_max=period, rel_tol=1e-12, abs_tol=1e-12)
    ).states[-1]

    def endpoint_error(h):
        cfg = IntegratorConfig(method="rk4", step=h, t_max=period)
        end = integrate_original(s0, p, cfg).states[-1]
        return float(np.max(np.abs(end - ref)))

    h = period / 200.0
    ratio = endpoint_error(h) / endpoint_error(h / 2.0)
    assert 12.0 <= ratio <= 20.0, ratio


def test_rk4_nodes_are_uniform():
    cfg = IntegratorConfig(method="rk4", step=0.1, t_max=1.0)
    traj = integrate_original(State(0.0, 0.1), Params(), cfg)
    assert len(traj) == 11
    assert traj.t[-1] == 1.0
    np.testing.assert_allclose(np.diff(traj.t), 0.1, atol=1e-12)


def test_cross_integration_equivalence(p0):
    # same orbit advanced in either chart, compared through dense output
    for h in (-0.2, 0.005, 0.5):
        s0 = state_on_level(h)
        period = find_period(s0, p0)
        cfg = replace(DEFAULT_CONFIG, t_max=period)
        orig = integrate_original(s0, p0, cfg)
        cov = integrate_covered(cover_map(s0), p0, cfg)
        worst = 0.0
        for i in range(len(cov)):
            ref = orig.dense_point(float(cov.t[i]))
            worst = max(
                worst,
                abs(ref[0] - cov.states[i, 0]),
                abs(ref[1] - cov.states[i, 1]),
            )
        assert worst <= 1e-6, f"h={h}: {worst}"


def test_cut_crossings_twice_per_period(p0):
    # outer orbits pass the y-axis twice per revolution; margin of a
    # quarter period keeps the count away from endpoint coincidences
    s0 = State(0.0, 2.0)
    period = find_period(s0, p0)
    cfg = replace(DEFAULT_CONFIG, t_max=2.25 * period)
    for traj in (
        integrate_covered(cover_map(s0), p0, cfg),
        integrate_original(s0, p0, cfg),
    ):
        cuts = [e for e in traj.events if e.kind == CUT_CROSSING]
        assert len(cuts) == 4
        for e in cuts:
            assert e.data["x1"] < 0.0


def test_no_crossings_inside_well(p0):
    traj = integrate_original(State(1.2, 0.0), p0, replace(DEFAULT_CONFIG, t_max=20.0))
    assert traj.events == ()
    assert np.all(traj.sheets == 1)


def test_sheet_toggles_match_events(p0):
    traj = integrate_covered(
        cover_map(State(0.0, 2.0)), p0, replace(DEFAULT_CONFIG, t_max=10.0)
    )
    cuts = [e for e in traj.events if e.kind == CUT_CROSSING]
    toggles = int(np.sum(traj.sheets[1:] != traj.sheets[:-1]))
    assert toggles == len(cuts)


def test_evolved_sheet_matches_pointwise_tag(p0):
    # away from the axis, the evolved tag must agree with sign(x)
    traj = integrate_original(
        State(0.0, 2.0), p0, replace(DEFAULT_CONFIG, t_max=10.0)
    )
    x = traj.states[:, 0]
    mask = np.abs(x) > 1e-12
    assert np.array_equal(traj.sheets[mask], np.sign(x[mask]).astype(np.int8))


def test_reconstruction_is_continuous(p0):
    # a wrong sheet would reflect a sample to its negative: a jump O(1)
    traj = integrate_covered(
        cover_map(State(0.0, 2.0)), p0, replace(DEFAULT_CONFIG, t_max=10.0)
    )
    jumps = np.max(np.abs(np.diff(traj.states, axis=0)), axis=1)
    assert float(np.max(jumps)) < 0.2


def test_covered_samples_are_images(p0):
    traj = integrate_original(
        State(0.0, 1.5), p0, replace(DEFAULT_CONFIG, t_max=10.0)
    )
    x, y = traj.states[:, 0], traj.states[:, 1]
    np.testing.assert_allclose(traj.covered[:, 0], x * x - y * y, atol=1e-14)
    np.testing.assert_allclose(traj.covered[:, 1], 2.0 * x * y, atol=1e-14)


def test_dense_output_matches_nodes_and_midpoints(p0):
    traj = integrate_original(State(0.0, 0.1), p0, replace(DEFAULT_CONFIG, t_max=20.0))
    for i in (0, len(traj) // 2, len(traj) - 1):
        u, v = traj.dense_point(float(traj.t[i]))
        assert (u, v) == (traj.states[i, 0], traj.states[i, 1])
    ref = integrate_original(
        State(0.0, 0.1), p0,
        replace(DEFAULT_CONFIG, t_max=20.0, rel_tol=1e-12, abs_tol=1e-12),
    )
    for tq in np.linspace(0.37, 19.63, 40):
        u, v = traj.dense_point(float(tq))
        ru, rv = ref.dense_point(float(tq))
        assert abs(u - ru) <= 1e-6 and abs(v - rv) <= 1e-6


def test_find_period_small_oscillation(p0):
    period = find_period(State(1.001, 0.0), p0)
    assert abs(period - 2.0 * math.pi / math.sqrt(2.0)) <= 1e-2


def test_find_period_conserves_energy(p0):
    s0 = State(0.0, 0.1)
    period = find_period(s0, p0)
    assert 0.0 < period < 100.0
    end = integrate_original(s0, p0, replace(DEFAULT_CONFIG, t_max=period)).state_at(-1)
    assert abs(hamiltonian(end, p0) - hamiltonian(s0, p0)) <= 1e-8
    # and the endpoint is back at the start
    assert abs(end.x - s0.x) <= 1e-6 and abs(end.y - s0.y) <= 1e-6


def test_find_period_errors(p0):
    with pytest.raises(OnSeparatrix):
        find_period(State(math.sqrt(2.0), 0.0), p0)
    with pytest.raises(OnSeparatrix):
        find_period(State(0.0, 0.0), p0)
    with pytest.raises(ValueError):
        find_period(State(1.2, 0.0), Params(mu=0.1))
    with pytest.raises(NoReturn):
        find_period(State(1.0, 0.0), p0)  # fixed point, off the separatrix
    with pytest.raises(NoReturn):
        find_period(State(0.0, 0.1), p0, replace(DEFAULT_CONFIG, t_max=1.0))


def test_section_events_recorded(p0):
    traj = integrate_original(
        State(1.2, 0.0), p0, replace(DEFAULT_CONFIG, t_max=20.0),
        detect_sections=True,
    )
    returns = [e for e in traj.events if e.kind == SECTION_RETURN]
    assert returns
    ts = [e.t for e in traj.events]
    assert ts == sorted(ts)
    for e in returns:
        assert e.data["direction"] in (-1, 1)
        # refined section times sit on the section to 1e-10
        _, y_at = traj.dense_point(e.t)
        assert abs(y_at) <= 1e-10


def test_step_failure():
    cfg = replace(DEFAULT_CONFIG, rel_tol=1e-300, abs_tol=1e-300, t_max=1.0)
    with pytest.raises(StepFailure):
        integrate_original(State(0.0, 1.0), Params(), cfg)


def test_max_steps_exceeded():
    cfg = replace(DEFAULT_CONFIG, max_steps=10)
    with pytest.raises(MaxStepsExceeded):
        integrate_original(State(0.0, 1.0), Params(), cfg)
    with pytest.raises(MaxStepsExceeded):
        integrate_original(
            State(0.0, 1.0), Params(), IntegratorConfig(method="rk4", max_steps=10)
        )


def test_branch_point_guard(p0):
    with pytest.raises(BranchPointApproach):
        integrate_covered(cover_map(State(0.0, 0.0)), p0)


def test_trajectory_is_frozen(p0):
    traj = integrate_original(State(0.0, 1.0), p0, replace(DEFAULT_CONFIG, t_max=1.0))
    with pytest.raises(ValueError):
        traj.states[0, 0] = 99.0
    with pytest.raises(ValueError):
        traj.t[0] = -1.0


def test_time_strictly_increasing(p0):
    traj = integrate_original(State(0.0, 1.5), p0, replace(DEFAULT_CONFIG, t_max=30.0))
    assert np.all(np.diff(traj.t) > 0.0)
    assert traj.t[0] == 0.0 and traj.t[-1] == 30.0


def test_typed_accessors(p0):
    traj = integrate_original(State(0.0, 1.0), p0, replace(DEFAULT_CONFIG, t_max=1.0))
    s = traj.state_at(0)
    assert isinstance(s, State) and s == State(0.0, 1.0)
    c = traj.covered_at(0)
    assert (c.x1, c.y1) == (-1.0, 0.0)
    assert c.sheet is cover_map(State(0.0, 1.0)).sheet
