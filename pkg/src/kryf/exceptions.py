"""Exception types raised across the package."""


class KryfError(Exception):
    """Base class for all package-specific errors."""


class NonPositiveCoefficient(KryfError, ValueError):
    """A Lanczos coefficient (or a reconstructed partial sum) is <= 0."""


class LanczosBreakdown(KryfError):
    """The Lanczos recursion produced a residual below the breakdown
    threshold: the Krylov space is exhausted at this step."""

    def __init__(self, step, norm):
        self.step = step
        self.norm = norm
        super().__init__(f"Lanczos breakdown at step {step}: residual norm {norm:.3e}")


class NonPositiveSquare(KryfError, ValueError):
    """The moment recursion produced b_n^2 <= 0 for noisy/invalid moments."""


class SingularDesign(KryfError, ValueError):
    """The least-squares design matrix is rank deficient or too short."""


class AllMasked(KryfError, ValueError):
    """Every entry of a softmax input is -inf."""


class SequenceTooLong(KryfError, ValueError):
    """Input sequence exceeds the model's maximum position."""


class DimensionTooLarge(KryfError, ValueError):
    """Requested Hilbert-space dimension exceeds the configured dense limit."""


class PrefixMismatch(KryfError, ValueError):
    """A prediction does not share the ground-truth prefix it claims to extend."""


class DataLeak(KryfError, ValueError):
    """An operation received data from the wrong dataset split."""


class VersionMismatch(KryfError, ValueError):
    """A file carries an unsupported format version or incompatible config."""


class GenerationExhausted(KryfError, RuntimeError):
    """Repeated resampling failed to produce a valid sequence."""
