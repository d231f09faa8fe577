"""Exception and warning types shared across the package."""


class ValidationError(ValueError):
    """Parameters violate a physical or geometric invariant."""

    def __init__(self, violations):
        if isinstance(violations, str):
            violations = [violations]
        self.violations = list(violations)
        super().__init__("; ".join(self.violations))


class ConfigError(ValueError):
    """Malformed configuration file. ``key`` names the offending entry."""

    def __init__(self, message, key=None):
        self.key = key
        super().__init__(message if key is None else f"{key}: {message}")


class NumericalGuardError(RuntimeError):
    """A numerical guard tripped (aliasing, non-convergence, lattice snapping).

    ``guard`` is a short machine-readable name of the guard.
    """

    def __init__(self, guard, message):
        self.guard = guard
        super().__init__(f"[{guard}] {message}")


class NoSplitResonanceError(ValueError):
    pass


class ValidityWarning(UserWarning):
    """An approximation is evaluated outside its stated range of validity."""


class SingularityWarning(UserWarning):
    """A removable singularity was met and its algebraic limit used."""


class DegenerateWarning(UserWarning):
    """Quantity is degenerate (zero splitting, infinite delay, ...)."""
