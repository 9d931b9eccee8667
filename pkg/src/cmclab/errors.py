"""Exception hierarchy for cmclab."""


class CMCLabError(Exception):
    """Base class for all cmclab errors."""


class InvalidInput(CMCLabError, ValueError):
    """An argument violates an operation's precondition."""


class SingularImmersion(InvalidInput):
    """The chart degenerates (vanishing conformal factor)."""


class UmbilicObstruction(InvalidInput):
    """The Hopf function is too small to choose a square-root branch."""


class InvalidPath(InvalidInput):
    """A path leaves the patch domain or is not closed when it must be."""


class InvalidCurve(InvalidInput):
    """A path is not a symmetry curve of the configuration."""


class IntegrationFailure(CMCLabError, RuntimeError):
    """An ODE solve could not reach the requested accuracy."""


class IntegrabilityError(CMCLabError):
    """A first-order system failed its integrability (loop) test.

    The measured loop defect is kept on the instance so callers can
    report it.
    """

    def __init__(self, message, defect):
        super().__init__(message)
        self.defect = float(defect)
