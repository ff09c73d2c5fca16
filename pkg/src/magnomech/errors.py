"""Exception types raised across the package."""


class MagnomechError(Exception):
    """Base class for all package errors."""


class SchemaError(MagnomechError, ValueError):
    """Configuration input does not match the documented schema."""


class UnphysicalInput(MagnomechError, ValueError):
    """Parameter value outside its physically meaningful range."""


class NoPhysicalRoot(MagnomechError, ArithmeticError):
    """Steady-state cubic produced no admissible occupation root."""


class InconsistentRoot(MagnomechError, ArithmeticError):
    """Mean fields reconstructed from a root fail the fixed-point residual check."""


class NonConvergence(MagnomechError, RuntimeError):
    """Time integration ended without settling onto a fixed point."""


class SingularSystem(MagnomechError, ArithmeticError):
    """Steady covariance system is singular, drift has a marginal eigenvalue."""


class Unstable(MagnomechError, ArithmeticError):
    """Requested quantity is undefined because the working point is unstable."""


class MismatchedConfigs(MagnomechError, ValueError):
    """Paired configurations differ where they are required to agree."""
