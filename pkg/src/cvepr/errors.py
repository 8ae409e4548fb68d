"""Exception hierarchy shared by all modules."""


class CvEprError(Exception):
    """Base class for every error raised by :mod:`cvepr`."""


class InvalidArgumentError(CvEprError, ValueError):
    pass


class OutOfRangeError(InvalidArgumentError):
    """A physical parameter lies outside the validity range of a model fit."""


class UnphysicalInputError(CvEprError, ValueError):
    pass


class NotPhysicalError(CvEprError, ValueError):
    """A covariance matrix violates positivity or the uncertainty bound."""


class DegenerateCalibrationError(CvEprError, ValueError):
    pass


class NoSolutionError(CvEprError, RuntimeError):
    pass


class SpanTooNarrowError(CvEprError, ValueError):
    pass


class InsufficientSamplesError(CvEprError, ValueError):
    pass


class ConfigValidationError(CvEprError, ValueError):
    """Raised with every violated field collected in :attr:`problems`."""

    def __init__(self, problems):
        self.problems = list(problems)
        super().__init__("invalid configuration:\n  " + "\n  ".join(self.problems))
