class CtrlqError(Exception):
    """The base class of errors raised by ctrlq computations."""


class InvalidArgumentError(CtrlqError, ValueError):
    """Raised if an argument violates an operation's precondition."""


class EvaluationError(CtrlqError):
    """Raised if a problem or policy function returns a non-finite value."""


class OutOfDomainError(CtrlqError):
    """Raised if a point lies outside the grid of a value surface."""


class InsufficientDataError(CtrlqError):
    """Raised if a fit does not have enough usable points."""


class SimulationBlowUpError(CtrlqError):
    """Raised if a simulated state becomes non-finite or exceeds the blow-up guard."""

    def __init__(self, message: str, *, step: int):
        """
        Parameters
        ----------
        message: str
            A message describing the error.
        step: int
            The index of the Euler step that produced the bad state.
        """

        super().__init__(message)
        self.step = step


class ConfigurationError(CtrlqError):
    """Raised if an experiment or solver configuration is invalid.

    ``required`` optionally carries the value that would make the configuration valid,
    for example the number of time steps that satisfies the CFL condition.
    """

    def __init__(self, message: str, *, required=None):
        super().__init__(message)
        self.required = required


class DivergenceError(CtrlqError):
    """Raised if a learning iteration produces a non-finite parameter.

    The trace recorded up to (not including) the failing iteration is attached as ``trace``.
    """

    def __init__(self, message: str, *, n: int, phi, trace=None):
        super().__init__(message)
        self.n = n
        self.phi = phi
        self.trace = trace
