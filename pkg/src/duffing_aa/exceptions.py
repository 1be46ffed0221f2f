"""Exception hierarchy shared by all subsystems."""


class DuffingError(Exception):
    """Base class for every error raised by this package."""


class ConfigError(DuffingError):
    """A scenario file or option set failed validation."""


class StepFailure(DuffingError):
    """The adaptive integrator could not keep its step above 1e-14."""


class MaxStepsExceeded(DuffingError):
    """The integrator hit the configured step budget before t_max."""


class BranchPointApproach(DuffingError):
    """A covered-plane trajectory came within 1e-10 of the branch point
    (0, 0), where the inverse of the covering map is ill-conditioned."""


class NoReturn(DuffingError):
    """A Poincare-section return was not observed before t_max."""


class OnSeparatrix(DuffingError):
    """Period finding rejected a state on (or within 1e-9 of) the
    separatrix energy level, where no finite period exists."""


class CenterSingular(DuffingError):
    """An angle operation was evaluated at or within 1e-9 of (+-1, 0),
    whose shared covered image is the rotation center itself."""


class OriginSingular(DuffingError):
    """An operation needing a nonzero angular velocity was evaluated at
    the origin, the only point where the angular velocity vanishes."""


class UnwrapAmbiguous(DuffingError):
    """Consecutive angle samples differed by a half turn or more, so the
    continuous branch cannot be identified."""


class DegenerateCrossing(DuffingError):
    """A trajectory segment met the cut within tolerance of the branch
    point, where the sheet hand-off is undefined."""
