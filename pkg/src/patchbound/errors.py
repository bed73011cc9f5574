"""Exception types shared across the package."""


class PatchBoundError(Exception):
    """Base class for all package-specific errors."""


class InvalidCoefficientError(PatchBoundError, ValueError):
    """A coefficient field violates its requirements (e.g. non-s.p.d. diffusion)."""


class KernelMismatchError(PatchBoundError):
    """The kernel of a reference block is not contained in the kernel of the
    operator block, so the patch eigenvalue bounds are not valid.

    Attributes
    ----------
    patch_index : int or None
        Index of the offending local contribution (edge or element), when known.
    """

    def __init__(self, message, patch_index=None):
        super().__init__(message)
        self.patch_index = patch_index


class NumericalDegeneracyError(PatchBoundError):
    """A dense factorization or eigensolve degenerated (e.g. non-positive pivot
    on a matrix that passed the kernel split)."""


class NotPositiveDefiniteError(PatchBoundError):
    """A matrix required to be symmetric positive definite is not."""


class SpectrumSizeError(PatchBoundError, ValueError):
    """A dense spectrum oracle was asked for a matrix above its size cap."""


class NumericalFailureError(PatchBoundError):
    """An eigenvalue iteration failed to converge."""
