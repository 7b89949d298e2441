"""Exception types shared across the library.

Input-contract violations subclass ValueError; conditions that indicate a
broken run (a coupling order inversion, a factorization failure, a chain
that never coalesces) subclass RuntimeError.
"""


class NegativeWeight(ValueError):
    """A kernel weight is negative."""


class AsymmetricKernel(ValueError):
    """J(z) and J(-z) were both given but differ."""


class EmptyKernel(ValueError):
    """All kernel weights vanish, violating 0 < sum J."""


class ZeroOffsetPresent(ValueError):
    """The zero offset was supplied; self-coupling is not allowed."""


class GeometryTooSmall(ValueError):
    """Torus extent does not exceed twice the kernel range on some axis."""


class GeometryMismatch(ValueError):
    """Two objects assume different geometries (or an incomplete shell)."""


class DegenerateInterval(ValueError):
    """The interval carries no representable normal mass for this mean."""


class ProbabilityOutOfRange(ValueError):
    """A probability argument lies outside [0, 1]."""


class OutOfRange(ValueError):
    """A value lies outside the attainable range of the function."""


class MissingSite(ValueError):
    """A configuration does not cover a required site."""


class BoundarySite(ValueError):
    """A dynamics operation was addressed to a frozen boundary site."""


class EmptyVolume(ValueError):
    """The requested volume contains no sites."""


class VolumeTooLarge(ValueError):
    """The volume exceeds what the tensor-grid oracle can enumerate."""


class NotTorus(ValueError):
    """The operation requires the translation-invariant torus geometry."""


class TooFewSamples(ValueError):
    """Not enough samples for a meaningful empirical comparison."""


class NonpositiveBeta(ValueError):
    """Inverse temperature must be strictly positive."""


class IncompatiblePartition(ValueError):
    """The kernel couples two sites within one class of the partition."""


class ConfigInvalid(ValueError):
    """An experiment configuration failed validation (message carries the field path)."""


class NotPositiveDefinite(RuntimeError):
    """Symmetric factorization of the precision matrix failed."""


class OrderViolation(RuntimeError):
    """Pointwise order between coupled chains was broken; must never fire."""


class NoCoalescence(RuntimeError):
    """Coupling from the past exceeded its horizon cap without coalescing."""
