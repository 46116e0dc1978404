"""Exception taxonomy shared across the toolkit.

Every error raised on a user-facing code path derives from ToolkitError so
the CLI can translate failures into its exit-code discipline (2 for bad
input or configuration, 1 for a certificate that ran but did not pass).
"""


class ToolkitError(Exception):
    """Base class for all hardylab errors."""


class OutsideDomain(ToolkitError):
    """A point does not belong to the model space."""


class DomainError(ToolkitError):
    """A profile or kernel was evaluated where it is undefined."""


class NonFiniteMass(ToolkitError):
    """A ball mass integral diverges or could not be evaluated."""


class DivergentIntegral(ToolkitError):
    """A weight average diverges on the requested ball."""


class QuadratureFailure(ToolkitError):
    """Adaptive quadrature could not reach the requested tolerance."""


class DegenerateBall(ToolkitError):
    """A ball carries no mass for the measure at hand."""


class DegenerateFit(ToolkitError):
    """Too few usable samples to fit a slope."""


class InvalidAtom(ToolkitError):
    """An atom candidate fails validation."""


class UnsupportedGeometry(ToolkitError):
    """The support geometry falls outside the implemented dyadic setting."""


class NotDecomposable(ToolkitError):
    """The decomposition residual exceeds tolerance at the configured depth."""


class ConfigError(ToolkitError):
    """Malformed CLI arguments, files, or run configuration."""
