"""Exception hierarchy.

``exit_code`` drives the CLI process status: 1 for domain errors (bad user
input), 2 for budget or certification failures (resource limits and internal
precision problems).
"""


class FrolovError(Exception):
    exit_code = 1


class InvalidSpecError(FrolovError):
    """User-supplied parameters violate a precondition."""


class UnsupportedClassError(FrolovError):
    """Smoothness parameters fall outside every covered rate regime."""


class RadiusTooSmallError(FrolovError):
    """A dual-lattice search box contains no nonzero point."""


class BudgetExceededError(FrolovError):
    """Enumeration would visit more candidates than the configured budget."""

    exit_code = 2


class CertificationError(FrolovError):
    """A numerical guarantee could not be established (a precision bug, not
    a user error)."""

    exit_code = 2
