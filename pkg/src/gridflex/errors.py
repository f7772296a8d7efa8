"""Exception and warning types shared across the package."""


class GridflexError(Exception):
    """Base class for all package errors."""


class DegenerateTemperature(GridflexError):
    """Zone temperature is too close to ambient for tangent-space quantities.

    The tangent energy and thermal reactive-power rate divide by (T - T0);
    below ``EPS_TEMP`` the result is reported as this error, never silently
    zeroed.
    """


class SeriesTooShort(GridflexError):
    """A sampled series is shorter than the finite-difference stencil needs."""


class StepTooLarge(GridflexError):
    """Integration step exceeds the stiffness guard dt <= tau/100."""


class ZeroBand(GridflexError):
    """Droop gain requested with a zero sliding-surface band."""


class RankDeficient(GridflexError):
    """Regression input does not carry enough independent excitation."""


class DimensionMismatch(GridflexError):
    """Optimization problem pieces disagree about sizes."""


class Infeasible(GridflexError):
    """LP has no feasible point (only possible with softening disabled)."""


class Unbounded(GridflexError):
    """LP objective is unbounded below; indicates a model-building bug."""


class WindowTooShort(GridflexError):
    """Trajectory does not span the required evaluation window."""


class ConfigError(GridflexError):
    """Scenario configuration is malformed; message carries field context."""


class SchemaError(GridflexError):
    """An ingested CSV/JSON file does not match the expected schema."""


class AssumptionViolated(UserWarning):
    """A modeling assumption (e.g. tau_on/(RC) << 1) is outside its comfort zone."""
