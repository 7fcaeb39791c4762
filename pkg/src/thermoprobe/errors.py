"""Typed exceptions shared across the package."""


class ThermoprobeError(Exception):
    """Base class for all package errors."""


class DimensionMismatchError(ThermoprobeError):
    """Operands live on different spaces or have incompatible shapes."""


class CutoffInsufficientError(ThermoprobeError):
    """Fock-space truncation tail exceeds the requested tolerance."""


class InvalidProbeError(ThermoprobeError):
    """Probe family unknown or parameters outside the family domain."""


class UnreachableEnergyError(ThermoprobeError):
    """Energy target below the family minimum or not representable."""


class PureStateError(ThermoprobeError):
    """Gaussian QFI evaluated at (or too close to) the pure-state singularity."""


class InstabilityError(ThermoprobeError):
    """Two-mode squeezing at or beyond the stability boundary r >= omega."""


class SoftModeError(ThermoprobeError):
    """Normal-mode frequency so small that equilibrium occupancies diverge."""


class IntegrationError(ThermoprobeError):
    """Step-size underflow or other integrator failure."""


class TailBreachError(IntegrationError):
    """Population reached the top Fock levels during evolution; raise cutoff."""


class DegenerateSteadyStateError(ThermoprobeError):
    """Generator null space is not one-dimensional."""


class GridError(ThermoprobeError):
    """Sampling grid too coarse or otherwise unusable."""


class ConfigError(ThermoprobeError):
    """Experiment configuration invalid or incomplete."""
