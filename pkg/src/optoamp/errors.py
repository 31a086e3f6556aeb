"""Exception hierarchy.

Configuration-type problems derive from :class:`ParamError` (a ``ValueError``);
numerical failures derive from :class:`ComputeError`. The CLI maps the two
families onto distinct exit codes.
"""


class OptoAmpError(Exception):
    """Base class for all package errors."""


class ParamError(OptoAmpError, ValueError):
    """Invalid input parameters or configuration."""


class NonPositiveRate(ParamError):
    pass


class NegativeValue(ParamError):
    pass


class EmptyGrid(ParamError):
    pass


class UnknownParam(ParamError):
    pass


class UnknownMetric(ParamError):
    pass


class Kappa2NotZero(ParamError):
    """The closed-form gain only holds for a lossless auxiliary cavity."""


class ComputeError(OptoAmpError):
    """A numerical operation could not produce a trustworthy result."""


class NearSingular(ComputeError):
    """``i*omega + M`` is too close to singular (at or beyond an instability)."""

    def __init__(self, omega, cond):
        self.omega = omega
        self.cond = cond
        super().__init__(f"near-singular system at omega={omega!r} (condition number {cond:.3g})")


class DenominatorUnderflow(ComputeError):
    pass


class EigenSolverFailure(ComputeError):
    pass


class NoPeakInBracket(ComputeError):
    pass


class MultiplePeaks(ComputeError):
    pass


class NotStable(ComputeError):
    pass


class StepTooLarge(ComputeError):
    pass
