"""Exception types shared across the toolkit."""


class KdstatsError(Exception):
    """Base class for all toolkit errors."""


class DimensionMismatch(KdstatsError):
    """Operands live in Hilbert spaces of different dimension."""


class NotHermitian(KdstatsError):
    """Matrix deviates from its conjugate transpose beyond tolerance."""


class DegenerateSpectrum(KdstatsError):
    """Eigenvalue gap below the degeneracy threshold.

    Basis-indexed conditional probabilities need unambiguous outcome labels,
    so operations that consume individual eigenvectors refuse degenerate
    spectra unless the caller opts in.
    """


class OrthogonalPostselection(KdstatsError):
    """Pre- and post-selection states are numerically orthogonal; conditioning is undefined."""


class OrthogonalBasisPair(KdstatsError):
    """A basis-vector pair has numerically zero overlap; the conditional is undefined there."""


class GridTooCoarse(KdstatsError):
    """Pointer displacement would push the wave packet outside the safe grid window."""


class KernelTooNarrow(KdstatsError):
    """Smoothing kernel narrower than two lattice spacings."""


class TruncationViolated(KdstatsError):
    """State population leaked into the truncation guard levels."""


class ConfigInvalid(KdstatsError):
    """Scenario document failed validation; carries the offending field path."""

    def __init__(self, path: str, message: str):
        super().__init__(f"{path}: {message}")
        self.path = path


class IoFailure(KdstatsError):
    """Reading or writing a report/config file failed."""
