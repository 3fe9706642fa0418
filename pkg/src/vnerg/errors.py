"""Exception hierarchy shared by all vnerg modules."""


class VnergError(Exception):
    """Base class for all library errors."""


class NonFinite(VnergError):
    """A matrix contains NaN or Inf entries."""


class NotPSD(VnergError):
    """A matrix required to be positive semidefinite is not."""


class SingularMatrix(VnergError):
    """A (near-)singular matrix was passed where invertibility is required."""


class DimensionMismatch(VnergError):
    """Operands have incompatible dimensions."""


class NotFaithful(VnergError):
    """A density matrix has an eigenvalue at or below the faithfulness floor."""


class NotContraction(VnergError):
    """An operator norm exceeds the contraction bound."""


class NotInPHalf(VnergError):
    """A map failed the L2-contraction class membership check."""


class NotInvariant(VnergError):
    """A state is not invariant under the given dynamics."""


class SingularResolvent(VnergError):
    """lambda*I - L is singular; the generator is invalid for Abel averaging."""


class GroupRelationViolated(VnergError):
    """Generator unitaries do not satisfy the defining group relations."""


class UnsupportedGroup(VnergError):
    """The requested operation is not available for this group."""


class MemoryGuardExceeded(VnergError):
    """A set-arithmetic computation would exceed the configured size cap."""


class VerificationError(VnergError):
    """A construction-time invariant failed to verify numerically."""


class ParseError(VnergError):
    """Problem-description text failed to parse."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class ValidationError(VnergError):
    """A parsed configuration is internally inconsistent."""
