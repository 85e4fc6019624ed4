"""Exception hierarchy.

Every error raised by the library derives from :class:`VerblunskyError`.
Errors that signal a violated mathematical precondition (non-positive input,
a coefficient outside its admissible set, a point outside the domain) derive
from :class:`PreconditionError`; the CLI maps those to exit code 3.
"""


class VerblunskyError(Exception):
    """Base class for all library errors."""


class DimensionError(VerblunskyError, ValueError):
    """Blocks or matrices with inconsistent shapes."""


class PreconditionError(VerblunskyError, ValueError):
    """A mathematical precondition of an operation does not hold."""


class PositivityError(PreconditionError):
    """A matrix required to be positive definite is not."""


class RankError(PreconditionError):
    """A matrix required to be nonsingular is singular."""


class ContractionError(PreconditionError):
    """A coefficient required to be a strict contraction is not."""


class StructureError(PreconditionError):
    """A potential is not J-unitary positive, or is otherwise corrupted."""


class PoleError(PreconditionError):
    """Evaluation requested at a pole."""


class DomainError(PreconditionError):
    """Evaluation requested outside the admissible half-plane."""


class InvalidCoefficientError(PreconditionError):
    """A Verblunsky-type sequence violates its admissibility relations."""


class DegenerateChainError(PreconditionError):
    """Consecutive Hamiltonian factors are not linked by a nonsingular pairing."""


class DegenerateParameterError(PreconditionError):
    """The linear-fractional denominator vanishes identically."""


class NotHerglotzError(PreconditionError):
    """A function expected to be real-symmetric Herglotz has non-real poles."""


class NumericalDegeneracyError(PreconditionError):
    """Residues that should be positive semidefinite are not, beyond tolerance."""


class InconsistentInputError(PreconditionError):
    """A measure and a Hankel matrix that should be compatible are not."""


class MomentMismatchError(PreconditionError):
    """A measure fails to reproduce a Hankel block it is required to match."""

    def __init__(self, index, message=None):
        self.index = index
        super().__init__(message or f"moment mismatch at index {index}")


class ReconstructionError(VerblunskyError, RuntimeError):
    """An iterative reconstruction did not converge."""

    def __init__(self, message, residual=None, block=None):
        self.residual = residual
        self.block = block
        super().__init__(message)
