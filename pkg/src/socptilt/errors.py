"""Exception types shared across the package."""


class SchemaError(ValueError):
    """Instance document is structurally malformed."""


class ValidationError(ValueError):
    """Instance document parses but violates a model invariant
    (g(x_base) != 0, nonstationary base point, sigma <= 0, ...)."""


class UnboundedMultiplierSet(RuntimeError):
    """The directional multiplier argmax does not exist (objective unbounded
    or supremum not attained over the multiplier slice)."""


class DegenerateScaling(RuntimeError):
    """The out-of-kernel multiplier formula has a vanishing denominator
    while the objective gradient does not vanish."""


class NumericalIndefiniteness(RuntimeError):
    """The reduced quadratic of the infimum function has a significantly
    negative eigenvalue; signals lambda outside the dual cone or bad data."""


class NoFeasiblePoint(RuntimeError):
    """A feasibility restoration failed to produce any point of the
    constraint set."""
