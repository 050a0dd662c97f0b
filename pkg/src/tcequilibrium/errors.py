"""Exception types shared across the package."""


class ModelError(Exception):
    """Base class for all errors raised by tcequilibrium."""


class InvalidParams(ModelError, ValueError):
    """Parameters violate a model invariant (e.g. alpha <= 0, beta_tilde <= 0)."""


class NumericalFailure(ModelError, RuntimeError):
    """A root search did not meet its tolerance."""


class PreconditionViolated(ModelError):
    """An operation was called outside the hypotheses under which it applies."""


class RegimeMismatch(ModelError):
    """The parameters put the economy in a regime the operation does not handle."""


class MismatchedInputs(ModelError, ValueError):
    """A solution and simulated incomes were built from different inputs."""
