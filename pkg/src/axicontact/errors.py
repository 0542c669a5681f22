"""Exception hierarchy for the solver.

Every error raised on purpose derives from :class:`SolverError` so callers
(the command line driver in particular) can map failures to exit codes.
"""


class SolverError(Exception):
    """Base class for all deliberate failures."""


class NonPositive(SolverError, ValueError):
    pass


class SupersonicBackground(SolverError, ValueError):
    pass


class CompatibilityViolation(SolverError, ValueError):
    pass


class NonPositiveFlux(SolverError, ValueError):
    pass


class RootBracketFailure(SolverError):
    pass


class DegenerateFlow(SolverError):
    pass


class JacobianDegenerate(SolverError):
    pass


class NonMonotoneRadius(SolverError):
    pass


class VacuumOrCavitation(SolverError, ValueError):
    pass


class BallExit(SolverError):
    """The iterate left the admissible set (density, Mach, Jacobian bounds)."""


class LinearSolveFailure(SolverError):
    pass


class NoConvergence(SolverError):
    """Inner Picard iteration failed; ``trace`` holds the difference history."""

    def __init__(self, message, trace=()):
        super().__init__(message)
        self.trace = list(trace)


class OuterDivergence(SolverError):
    def __init__(self, message, history=()):
        super().__init__(message)
        self.history = list(history)


class DomainError(SolverError, ValueError):
    pass


class ConfigError(SolverError):
    pass
