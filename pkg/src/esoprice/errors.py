"""Exception types raised by the pricing engine."""

from __future__ import annotations


class EsoPriceError(Exception):
    """Base class for all library errors."""


class InfeasibleProbabilities(EsoPriceError, ValueError):
    """Calibration produced a joint probability outside [0, 1]."""

    def __init__(self, probs: tuple[float, float, float, float], message: str | None = None):
        self.probs = probs
        bad = [f"p{i + 1}={p:.6g}" for i, p in enumerate(probs) if not 0.0 <= p <= 1.0]
        super().__init__(message or f"infeasible joint probabilities: {', '.join(bad)}")


class DegenerateBranch(EsoPriceError, ValueError):
    """One S-branch of the one-step law carries zero probability mass."""


class NoThreshold(EsoPriceError):
    """Immediate exercise never beats continuation on the searched bracket."""


class DimensionMismatch(EsoPriceError, ValueError):
    """Grid and step parameters come from different calibrations."""


class InconsistentGrid(EsoPriceError, ValueError):
    """Policy, grid and market parameters disagree."""


class EmptyPolicy(EsoPriceError, ValueError):
    """Simulation requested for a package with no options."""


class SizeGuard(EsoPriceError, ValueError):
    """Problem too large for the brute-force evaluator."""
