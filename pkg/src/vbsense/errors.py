"""Exception types raised across the package."""


class VbsenseError(Exception):
    """Base class for all package-specific errors."""


class ValidationError(VbsenseError):
    """Invalid input or configuration (user error, not a runtime failure)."""


class NonUnitMass(ValidationError):
    """Degree fractions do not sum to one."""


class DuplicateDegree(ValidationError):
    """A degree appears more than once in a distribution."""


class NonPositiveDegree(ValidationError):
    """A degree or fraction is not positive."""


class InfeasibleEdgeBudget(ValidationError):
    """No integer node assignment on the degree support hits the edge budget."""


class RepairStall(VbsenseError):
    """Parallel-edge repair exceeded its iteration cap."""


class DimensionMismatch(ValidationError):
    """Array lengths disagree with the graph dimensions."""


class AlreadyVerified(VbsenseError):
    """A rule tried to verify a variable twice (scheduling bug)."""


class ConflictingAssignment(VbsenseError):
    """Two degree-one checks implied different values for one variable."""


class OracleRequired(ValidationError):
    """The operation needs the true signal attached."""


class BadBracket(ValidationError):
    """Initial bracket does not straddle the success transition."""


class BudgetExhausted(VbsenseError):
    """Probe budget ran out before the search completed."""
