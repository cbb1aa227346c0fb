"""Exception types raised by the toolkit."""


class DimensionMismatch(ValueError):
    """Operands have incompatible shapes."""


class NotHermitian(ValueError):
    """A matrix required to be Hermitian is not, beyond tolerance."""


class NegativeEigenvalue(ValueError):
    """A matrix required to be positive semidefinite has a significantly negative eigenvalue."""


class ZeroVector(ValueError):
    """An amplitude vector that must be normalizable is (numerically) zero."""


class NoConvergence(RuntimeError):
    """An eigenvalue iteration exceeded its cap."""


class DegeneratePairing(RuntimeError):
    """Left/right eigenvector pairing is ill-conditioned (near-defective spectrum)."""

    def __init__(self, message, condition=None):
        super().__init__(message)
        self.condition = condition


class DegenerateVariance(ValueError):
    """The energy variance vanishes, so the inverse-temperature ratio is undefined."""


class ZeroTau(ValueError):
    """The relaxation time is zero (or not evaluable) where a finite value is required."""


class ZeroEntropyRate(ValueError):
    """The fluctuation-ratio relaxation time needs a nonzero entropy-rate estimate."""


class EnergyOutOfRange(ValueError):
    """Requested mean energy lies outside the spectrum of the Hamiltonian."""


class SingularEpsilon(ValueError):
    """The level-elimination energy denominator is (numerically) zero."""


class NegativeProduct(ValueError):
    """The product of effective couplings must be nonnegative for a real Hamiltonian entry."""


class StepSizeUnderflow(RuntimeError):
    """The adaptive integrator reduced its step below the representable minimum."""


class PositivityLoss(RuntimeError):
    """The integrated state developed an eigenvalue too negative to repair by clipping."""


class Infeasible(RuntimeError):
    """A constrained search exhausted its budget without satisfying all constraints."""

    def __init__(self, message, residuals=None):
        super().__init__(message)
        self.residuals = residuals or {}


class ConfigError(ValueError):
    """A run configuration, manifest, or data file failed validation."""
