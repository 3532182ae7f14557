"""Exception and warning types raised across the package."""


class SpecmixError(Exception):
    """Base class for all package-specific errors."""


class NonFiniteError(SpecmixError):
    """An input matrix or vector contains NaN or infinity."""


class NumericalError(SpecmixError):
    """A numerical routine produced output violating its own contract."""


class DimensionMismatchError(SpecmixError):
    """Operands have incompatible shapes."""


class CountExceedsDimError(SpecmixError):
    """More eigenpairs or modes requested than the matrix dimension allows."""


class LengthMismatchError(SpecmixError):
    """Weight vector length does not match the number of matrices."""


class NonPositiveSigmaError(SpecmixError):
    """Kernel bandwidth must be strictly positive."""


class DegenerateBandwidthError(SpecmixError):
    """Self-tuned bandwidths collapsed below the numerical floor."""


class IsolatedNodeError(SpecmixError):
    """An affinity matrix has rows with non-positive degree."""

    def __init__(self, indices, context=""):
        self.indices = list(indices)
        msg = f"isolated nodes at indices {self.indices}"
        if context:
            msg += f" ({context})"
        super().__init__(msg)


class UnknownRecipeError(SpecmixError):
    """Block-matrix recipe identifier is not one of the known kinds."""


class ZeroModeAmbiguityError(SpecmixError):
    """Combined Laplacian is numerically disconnected; the zero mode to drop
    is not unique."""


class NonFiniteObjectiveError(SpecmixError):
    """Objective became NaN or infinite during ascent.

    Carries the partial trace collected so far in ``trace``.
    """

    def __init__(self, msg, trace=None):
        super().__init__(msg)
        self.trace = trace


class NonOrthonormalEmbeddingError(SpecmixError):
    """Embedding columns are not orthonormal within tolerance."""


class NonOrthogonalInitError(SpecmixError):
    """User-supplied rotation basis is not orthogonal within tolerance."""


class ZeroNormRowError(SpecmixError):
    """A feature row has zero norm and cannot be projected to the sphere."""


class EmptyClusterError(SpecmixError):
    """A cluster stayed empty after the bounded re-seeding retries."""


class KExceedsNError(SpecmixError):
    """Requested more clusters than there are points."""


class SpectralGapWarning(UserWarning):
    """The eigenvalue gap delimiting the selected modes is numerically
    closed; downstream quantities may be unstable."""
