"""The double covering of the phase plane by complex squaring.

The map

    x1 = x^2 - y^2,    y1 = 2*x*y

is (x + iy) -> (x + iy)^2.  It is two-to-one away from the origin: s and -s
land on the same covered point, which is exactly the reflection symmetry of
the Duffing field.  Slitting the covered plane along the negative x1-axis
("the cut") turns it into two full copies glued crosswise:

  * Upper sheet  = image of the right half-plane (x > 0),
  * Lower sheet  = image of the left half-plane  (x < 0),
  * cut ownership: a point with x1 < 0, y1 = 0 (preimage x = 0, y != 0)
    carries Upper when y > 0 and Lower when y < 0,
  * the branch point (0, 0) carries Upper purely so the API stays total;
    inverse_cover ignores the tag there.

With these conventions cover_map/inverse_cover are exact set inverses, and
a continuous trajectory changes sheet precisely when it crosses the cut.

The pushed-forward vector field closes in (x1, y1).  Writing
R = sqrt(x1^2 + y1^2) (= x^2 + y^2 on images of real points):

    x1' = (x1 + R)*y1/2 + mu*(R - x1)
    y1' = -x1^2 - y1^2/2 + R*(2 - x1) - mu*y1

The mu terms come from the identities 2*mu*y^2 = mu*(R - x1) and
2*mu*x*y = mu*y1, so one closed form covers the conservative and the
dissipative flow.  The field does not depend on the sheet tag.
"""

from __future__ import annotations

import enum
import math
from typing import NamedTuple, Optional

import numpy as np

from .dynamics import Params, State, _require_finite
from .exceptions import DegenerateCrossing

BRANCH_TOL = 1e-12


class Sheet(enum.Enum):
    """Which copy of the covered plane a point lives on."""

    UPPER = "U"
    LOWER = "L"


class CoveredState(NamedTuple):
    """A covered-plane point (x1, y1) plus its sheet tag."""

    x1: float
    y1: float
    sheet: Sheet


def cover_map(s: State) -> CoveredState:
    """Forward map (x, y) -> (x^2 - y^2, 2xy) with the sheet conventions
    documented in the module docstring."""
    _require_finite(s)
    x, y = float(s[0]), float(s[1])
    if x > 0.0:
        sheet = Sheet.UPPER
    elif x < 0.0:
        sheet = Sheet.LOWER
    else:
        sheet = Sheet.UPPER if y >= 0.0 else Sheet.LOWER
    return CoveredState(x * x - y * y, 2.0 * x * y, sheet)


def inverse_cover(c: CoveredState) -> State:
    """The unique preimage of a covered point on its tagged sheet.

    Computed as the principal square root of x1 + i*y1 (the root with
    x > 0, or x = 0 and y >= 0), negated on the Lower sheet.  Uses the
    cancellation-free real formulation rather than complex sqrt so the
    cut side is decided by an explicit sign test.
    """
    if not (np.isfinite(c.x1) and np.isfinite(c.y1)):
        raise ValueError(f"covered state must be finite, got {c!r}")
    r = math.hypot(c.x1, c.y1)
    x = math.sqrt(max(0.5 * (r + c.x1), 0.0))
    y = math.sqrt(max(0.5 * (r - c.x1), 0.0))
    if c.y1 < 0.0:
        y = -y
    if c.sheet is Sheet.LOWER:
        x, y = -x, -y
    return State(x, y)


def covered_field(c: CoveredState, p: Params) -> tuple[float, float]:
    """Pushed-forward vector field at a covered point.

    Independent of the sheet tag: the two preimages +-s have opposite
    field vectors and an opposite-signed Jacobian, so both push to the
    same covered vector.
    """
    if not (np.all(np.isfinite(c.x1)) and np.all(np.isfinite(c.y1))):
        raise ValueError(f"covered state must be finite, got {c!r}")
    x1, y1 = c.x1, c.y1
    r = np.sqrt(x1 * x1 + y1 * y1)
    du = 0.5 * (x1 + r) * y1 + p.mu * (r - x1)
    dv = -x1 * x1 - 0.5 * y1 * y1 + r * (2.0 - x1) - p.mu * y1
    return du, dv


def crosses_cut(
    a: tuple[float, float], b: tuple[float, float]
) -> Optional[float]:
    """Crossing fraction of the cut {y1 = 0, x1 < 0} on the segment a->b.

    Returns lambda in [0, 1) such that a + lambda*(b - a) sits on the cut,
    using linear interpolation, or None when the segment does not cross.
    A sample landing exactly on the cut belongs to the *next* segment
    (half-open convention), so long trajectories count each transit once.
    Callers with dense integrator output refine the returned fraction by
    bisection.

    Raises DegenerateCrossing when the interpolated crossing lies within
    BRANCH_TOL of the branch point, where the sheet hand-off is undefined.
    """
    y1a, y1b = a[1], b[1]
    if y1a == 0.0:
        if y1b == 0.0 or a[0] >= 0.0:
            return None
        lam = 0.0
    elif y1b != 0.0 and (y1a > 0.0) != (y1b > 0.0):
        # sign test, not a product: opposite tiny values must not underflow
        lam = y1a / (y1a - y1b)
    else:
        return None
    x_at = a[0] + lam * (b[0] - a[0])
    if abs(x_at) <= BRANCH_TOL:
        raise DegenerateCrossing(
            f"segment {a}->{b} meets the cut at x1={x_at:.3e}, inside the "
            f"branch-point tolerance {BRANCH_TOL:g}"
        )
    if x_at > 0.0:
        return None
    return lam


def toggle_sheet(sh: Sheet) -> Sheet:
    """The other sheet; involutive."""
    return Sheet.LOWER if sh is Sheet.UPPER else Sheet.UPPER
