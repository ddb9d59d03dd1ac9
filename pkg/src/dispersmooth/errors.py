"""Exception hierarchy shared across the package."""

from __future__ import annotations


class DispersmoothError(Exception):
    """Base class for all package-specific errors."""


class ConfigurationError(DispersmoothError):
    """Invalid grid/run/experiment configuration (bad value, unknown key, ...)."""


class GridMismatchError(DispersmoothError):
    """Operands live on different grids."""


class AdmissibilityError(DispersmoothError):
    """Regularity parameters violate a theorem hypothesis; message names it."""


class HypothesisError(DispersmoothError):
    """Parameters violate the hypotheses of the calculus-lemma check."""


class ResolutionError(DispersmoothError):
    """Requested lattice cannot resolve the structures it must represent."""


class ResourceLimitError(DispersmoothError):
    """Requested computation exceeds the configured size guard."""


class BlowUpError(DispersmoothError):
    """Numerical blow-up detected during time integration.

    Carries the abort time and the offending norms for diagnostics.
    """

    def __init__(self, t: float, norms: dict[str, float], threshold: float):
        self.t = t
        self.norms = norms
        self.threshold = threshold
        detail = ", ".join(f"{k}={v:.3e}" for k, v in norms.items())
        super().__init__(
            f"blow-up detected at t={t:.6g}: {detail} (threshold {threshold:.1e})"
        )


class CheckpointFormatError(DispersmoothError):
    """Checkpoint file has wrong magic, version, or is truncated."""
