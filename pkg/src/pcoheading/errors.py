"""Exception types shared across the package.

The CLI maps these onto its exit codes: configuration problems exit 2,
violated convergence preconditions exit 3, broken internal invariants
exit 4.
"""

from __future__ import annotations


class ConfigError(ValueError):
    """A configuration value is malformed, out of range, or unknown."""


class TheoremViolationError(ConfigError):
    """A hard precondition of a convergence guarantee is violated.

    Carries the full list of violations so callers can report all of
    them at once.
    """

    def __init__(self, violations):
        self.violations = list(violations)
        msg = "; ".join(str(v) for v in self.violations) or "precondition violated"
        super().__init__(msg)


class EngineInvariantError(AssertionError):
    """The simulator broke one of its own invariants (a bug, not bad input)."""
