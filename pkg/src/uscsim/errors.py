"""Error and warning taxonomy shared by all modules.

Every physics-validity failure raises a subclass of UscError so callers (and
the CLI, which maps them to exit code 3) can catch one base type.
"""


class UscError(Exception):
    """Base class for all physics/validity errors raised by this package."""


class InvalidDimensionError(UscError):
    """A Hilbert-space dimension or cutoff is out of range."""


class ShapeError(UscError):
    """Operator/state data does not match the declared space."""


class DomainError(UscError):
    """An argument lies outside the mathematical domain of the operation."""


class BistabilityError(UscError):
    """The optomechanical fixed-point iteration failed to converge."""


class InstabilityError(UscError):
    """A quadratic model has no stable normal-mode decomposition."""


class AmplificationDomainError(UscError):
    """Amplification parameters leave the validity domain (e.g. |arctanh| >= 1)."""


class DegenerateManifoldError(UscError):
    """A perturbative energy denominator vanishes."""


class ResolventSingularError(UscError):
    """E0 - H_B is singular; the resolvent cannot be formed."""


class NotRepresentableError(UscError):
    """An effective block cannot be written in the requested operator form."""


class FrameMismatchError(UscError):
    """Scheme parameters violate the frame/resonance condition they assume."""


class TruncationError(UscError):
    """Population reached the truncation boundary; results untrustworthy."""


class StiffnessError(UscError):
    """The ODE integrator failed (step size underflow / too stiff)."""


class PositivityViolationError(UscError):
    """A density matrix developed an eigenvalue below the positivity floor."""


class NonuniqueSteadyStateError(UscError):
    """The Liouvillian nullspace is degenerate; no unique steady state."""


class NotBracketedError(UscError):
    """A search target (minimum / root) is not bracketed by the data."""


class TruncationWarning(UserWarning):
    """State support is close to the truncation boundary."""


class ValidityWarning(UserWarning):
    """A derivation assumption (scale separation, pole distance...) is marginal."""
