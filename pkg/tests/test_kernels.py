import os
import subprocess
import sys
import textwrap

import numpy as np

from duffing_aa import CoveredState, Params, Sheet, State, covered_field, duffing_field
from duffing_aa import _kernels


def test_rhs_matches_public_fields(rng):
    for _ in range(300):
        x, y = rng.uniform(-3.0, 3.0, size=2)
        mu = rng.uniform(0.0, 0.5)
        p = Params(mu=mu)
        assert _kernels.rhs(_kernels.FIELD_ORIGINAL, x, y, mu) == duffing_field(
            State(x, y), p
        )
        ku, kv = _kernels.rhs(_kernels.FIELD_COVERED, x, y, mu)
        fu, fv = covered_field(CoveredState(x, y, Sheet.UPPER), p)
        assert abs(ku - fu) <= 1e-15 * max(1.0, abs(fu))
        assert abs(kv - fv) <= 1e-15 * max(1.0, abs(fv))


def test_adaptive_path_reaches_t_end():
    t, u, v, du, dv, status = _kernels.adaptive_path(
        _kernels.FIELD_ORIGINAL, 0.0, 1.0, 0.0, 5.0, 1e-10, 1e-10, 0.01, 10**7
    )
    assert status == _kernels.STATUS_OK
    assert t[0] == 0.0 and t[-1] == 5.0
    assert np.all(np.diff(t) > 0.0)
    assert u.shape == v.shape == du.shape == dv.shape == t.shape


def test_adaptive_path_status_codes():
    _, _, _, _, _, status = _kernels.adaptive_path(
        _kernels.FIELD_ORIGINAL, 0.0, 1.0, 0.0, 5.0, 1e-300, 1e-300, 0.01, 10**7
    )
    assert status == _kernels.STATUS_STEP_UNDERFLOW
    _, _, _, _, _, status = _kernels.adaptive_path(
        _kernels.FIELD_ORIGINAL, 0.0, 1.0, 0.0, 5.0, 1e-10, 1e-10, 0.01, 5
    )
    assert status == _kernels.STATUS_MAX_STEPS


def test_numpy_fallback_selected_by_env_flag():
    # the same kernels must run uncompiled when the flag disables numba
    code = textwrap.dedent(
        """
        import numpy as np
        from duffing_aa import _kernels
        assert not _kernels.USING_NUMBA
        t, u, v, du, dv, status = _kernels.adaptive_path(
            _kernels.FIELD_ORIGINAL, 0.0, 0.1, 0.0, 20.0, 1e-8, 1e-8, 0.01, 10**6
        )
        assert status == _kernels.STATUS_OK
        h = u**4 / 4 + v**2 / 2 - u**2 / 2
        print(float(np.max(np.abs(h - h[0]))))
        """
    )
    env = dict(os.environ, DUFFING_AA_NUMBA="0")
    out = subprocess.run(
        [sys.executable, "-c", code], env=env, capture_output=True, text=True
    )
    assert out.returncode == 0, out.stderr
    assert float(out.stdout.strip()) <= 1e-6


def test_backend_flag_parser(monkeypatch):
    for value, expect in (
        ("0", False), ("false", False), ("OFF", False), ("no", False),
        ("1", True), ("on", True), ("", True),
    ):
        monkeypatch.setenv("DUFFING_AA_NUMBA", value)
        assert _kernels._numba_requested() is expect
    monkeypatch.delenv("DUFFING_AA_NUMBA")
    assert _kernels._numba_requested() is True
