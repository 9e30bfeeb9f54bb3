"""Exception and warning classes raised across the package."""


class DomainError(ValueError):
    """An argument lies outside the domain where a formula is defined."""


class QuadratureError(RuntimeError):
    """Adaptive quadrature failed to reach the requested tolerance."""


class DivergenceError(ArithmeticError):
    """An integral was detected to diverge under refinement."""


class ConvergenceError(RuntimeError):
    """An iterative solver ran out of iterations."""


class SingularIntegrandError(ValueError):
    """A principal-value integrand is not integrable at the origin."""


class ConservationError(RuntimeError):
    """A conserved quantity drifted beyond the abort threshold during a run."""


class ConfigError(ValueError):
    """Invalid job configuration. ``field`` names the offending key path."""

    def __init__(self, message, field=None, line=None):
        self.field = field
        self.line = line
        where = []
        if field:
            where.append(f"field '{field}'")
        if line is not None:
            where.append(f"line {line}")
        prefix = f"{', '.join(where)}: " if where else ""
        super().__init__(prefix + message)


class CFLWarning(UserWarning):
    """The drift moves data across many cells per step (semi-Lagrangian tolerates it)."""
