"""Exception types raised across the toolkit.

Every error names the violated contract; validation errors include the
offending magnitude in their message so reports stay diagnosable.
"""


class ToolkitError(Exception):
    """Base class for all toolkit errors."""


class NotHermitian(ToolkitError):
    """Matrix deviates from A = A^dagger beyond tolerance."""


class NotPsd(ToolkitError):
    """Operator has an eigenvalue below the negative tolerance."""


class BadTrace(ToolkitError):
    """Operator trace is not 1 within tolerance."""


class DimMismatch(ToolkitError):
    """Operands have incompatible dimensions."""


class TooLarge(ToolkitError):
    """Requested computation exceeds the dense-enumeration size cap."""


class BadOverlap(ToolkitError):
    """Pure-state overlap parameter outside [0, 1]."""


class BadParams(ToolkitError):
    """Parameters violate an operation precondition."""


class BadRange(ToolkitError):
    """Scalar argument outside its documented range."""


class ZeroMass(ToolkitError):
    """Conditioning event has zero prior probability."""


class ZeroMassOutcome(ToolkitError):
    """Posterior requested for an outcome with zero probability."""


class NonUniformPrior(ToolkitError):
    """Joint distribution does not have a uniform row marginal."""


class NotBinaryResidual(ToolkitError):
    """Leak does not leave exactly one unknown bit."""


class BadSeedLength(ToolkitError):
    """Toeplitz seed length is not rows + cols - 1."""


class BadShape(ToolkitError):
    """Matrix shape violates an operation precondition."""


class ParseError(ToolkitError):
    """Experiment parameters could not be parsed."""


class UnknownExperiment(ToolkitError):
    """No experiment registered under the requested name."""
