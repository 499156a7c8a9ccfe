"""Exception hierarchy shared by all modules."""


class GraphNLSError(Exception):
    """Base class for all errors raised by this package."""


class DisconnectedGraph(GraphNLSError):
    pass


class NonPositiveWeight(GraphNLSError):
    pass


class DuplicateEdge(GraphNLSError):
    pass


class SelfLoop(GraphNLSError):
    pass


class NonInteriorDensity(GraphNLSError):
    """Density has a non-positive (or numerically vanishing) entry."""


class NonZeroMean(GraphNLSError):
    """Vector expected to be orthogonal to the all-ones vector is not."""


class NearSingular(GraphNLSError):
    """Spectral gap of the weighted Laplacian is below the safe threshold."""


class ZeroModulus(GraphNLSError):
    """Wave function vanishes at a node."""


class NewtonDivergence(GraphNLSError):
    """Implicit solve failed to reach tolerance within the iteration cap."""


class StepLeftSimplex(GraphNLSError):
    """A time step produced a density outside the interior of the simplex."""


class IncommensurateWaveNumber(GraphNLSError):
    pass


class MaxIterations(GraphNLSError):
    """Iterative solver hit its iteration cap before converging.

    Carries the partial result in the ``result`` attribute when available.
    """

    def __init__(self, message, result=None):
        super().__init__(message)
        self.result = result


class ConfigError(GraphNLSError):
    """Invalid run configuration or input file."""
