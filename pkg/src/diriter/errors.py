"""Exception hierarchy shared across the package."""


class DiriterError(Exception):
    """Base class for all package errors."""


class SpacingTooCoarse(DiriterError):
    """Grid spacing leaves fewer than 3 nodes on some axis."""


class GridTooCoarse(DiriterError):
    """Operation needs more nodes per axis than the grid has."""


class NotConforming(DiriterError):
    """Field violates the boundary values required by the operation."""


class NoConvergence(DiriterError):
    """Linear solve stopped before reaching the residual tolerance."""

    def __init__(self, message, residual=None):
        super().__init__(message)
        self.residual = residual


class SingularSystem(DiriterError):
    """Linear system factorization failed; internal error for the Dirichlet Laplacian."""


class MissingNorm(DiriterError):
    """A data norm required by the selected nonlinearity is absent."""


class BracketNotFound(DiriterError):
    """Fixed-point search exhausted its interval while the gap was still shrinking."""


class InvalidArc(DiriterError):
    """Circular-arc profile does not exist for the requested width/curvature."""


class IterationFailure(DiriterError):
    """Base for outer-iteration failures; carries the partial report and last iterate."""

    def __init__(self, message, report=None, last_iterate=None):
        super().__init__(message)
        self.report = report
        self.last_iterate = last_iterate


class IterationDiverged(IterationFailure):
    """Iterates blew up in sup norm or ratios stayed above 1."""


class IterationMaxIters(IterationFailure):
    """Iteration budget exhausted without meeting the stopping tolerance."""


class ConfigError(DiriterError):
    """Experiment configuration file is malformed or incomplete."""
