"""Exception types raised across the toolkit."""


class LsiMdpError(Exception):
    """Base class for all toolkit errors."""


class ModelError(LsiMdpError, ValueError):
    """A model file or array set violates the data model.

    ``row`` holds the offending ``(a, x_o, x_u)`` index when the failure is a
    stochasticity violation of a single kernel row.
    """

    def __init__(self, message, row=None):
        super().__init__(message)
        self.row = row


class ZeroProbabilityObservation(LsiMdpError):
    """The observed transition has probability zero under the current belief."""


class NotConverged(LsiMdpError):
    """Value iteration hit its iteration cap; ``value`` holds the last iterate."""

    def __init__(self, message, value=None, iterations=0):
        super().__init__(message)
        self.value = value
        self.iterations = iterations


class IterationLimit(LsiMdpError):
    """The simplex method exceeded its pivot budget."""


class SingularSystem(LsiMdpError):
    """A policy-evaluation linear system could not be solved."""


class Disagreement(LsiMdpError):
    """Value iteration and the LP formulations returned different optima."""


class BudgetExceeded(LsiMdpError):
    """The belief recursion outgrew its memo cap; ``partial`` is a shorter-horizon report."""

    def __init__(self, message, partial=None):
        super().__init__(message)
        self.partial = partial


class KeyNotCovered(LsiMdpError, KeyError):
    """A belief lies outside the region solved by the belief recursion."""

    def __init__(self, message, episode=None):
        super().__init__(message)
        self.episode = episode

    def __str__(self):
        return self.args[0] if self.args else ""


class NotApplicable(LsiMdpError):
    """Preconditions of a reduction do not hold."""


class HypothesisNotSatisfied(LsiMdpError):
    """The kernel does not factorize, so the comparison theorem does not apply."""


class Infeasible(LsiMdpError):
    """An LP has no feasible point; ``solution`` carries the phase-one result."""

    def __init__(self, message, solution=None):
        super().__init__(message)
        self.solution = solution
