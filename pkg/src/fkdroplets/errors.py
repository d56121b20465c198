"""Exception types shared across the package."""


class FKDropletsError(Exception):
    pass


class DegenerateParameterError(FKDropletsError):
    """p in {0, 1}: log-weights undefined, dynamics frozen."""


class EnumerationTooLargeError(FKDropletsError):
    """Exact enumeration requested on a graph with too many bonds."""


class InsufficientDecayError(FKDropletsError):
    """Dual connectivity does not decay; surface tension fit has slope <= 0."""


class MalformedCircuitError(FKDropletsError):
    """Input circuit is not a valid non-self-crossing lattice circuit."""


class RejectionFloorError(FKDropletsError):
    """Rejection-mode conditioning fell below the acceptance-rate floor."""


class SpecError(FKDropletsError):
    """Invalid experiment specification (CLI exit code 2)."""


class NonConvergenceError(FKDropletsError):
    """Estimator or bias adaptation failed to converge (CLI exit code 3)."""
