"""Exception and warning types shared across the package."""


class HorizonError(ValueError):
    """A power beyond the faithful truncation horizon was requested."""


class PreconditionError(ValueError):
    """Inputs are valid but a numerical precondition of the method fails.

    Examples are a spectral radius estimate >= 1 where < 1 is required, or
    an ill-conditioned operator where negative powers are needed.
    """


class HypothesisWarning(UserWarning):
    """A standing hypothesis could not be confirmed at desk scale."""


class ScenarioError(ValueError):
    """A scenario file does not parse against the schema."""
