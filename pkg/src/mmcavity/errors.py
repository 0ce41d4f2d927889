"""Exception types shared across the workbench."""


class MMCavityError(Exception):
    """Base class for all workbench errors."""


class DomainError(MMCavityError, ValueError):
    """A physical parameter is outside its validity domain."""


class UnknownPresetError(MMCavityError, LookupError):
    """Requested cavity preset does not exist."""


class CapacityError(MMCavityError, MemoryError):
    """Discretization exceeds the memory budget.

    Carries ``suggested_resolution``, the largest resolution estimated to fit.
    """

    def __init__(self, message, suggested_resolution=None):
        super().__init__(message)
        self.suggested_resolution = suggested_resolution


class ConvergenceError(MMCavityError, RuntimeError):
    """Iterative solver failed to converge; carries residual norms."""

    def __init__(self, message, residuals=None):
        super().__init__(message)
        self.residuals = list(residuals) if residuals is not None else []


class EmptySelectionError(MMCavityError, ValueError):
    """A surface-patch selector matched no boundary faces."""


class NoResonanceError(MMCavityError, RuntimeError):
    """Reflection trace shows no resonant feature above the noise floor."""


class UnderConstrainedError(MMCavityError, RuntimeError):
    """Fit data cannot constrain all model parameters.

    Carries ``free_parameters``, the names left effectively unconstrained.
    """

    def __init__(self, message, free_parameters=()):
        super().__init__(message)
        self.free_parameters = list(free_parameters)


class NoBifurcationError(MMCavityError, ValueError):
    """Linear resonator (no Kerr shift): bistability threshold undefined."""


class ShapeError(MMCavityError, RuntimeError):
    """Spectrum does not have the expected number of peaks.

    Carries ``n_peaks``, the number actually found.
    """

    def __init__(self, message, n_peaks=0):
        super().__init__(message)
        self.n_peaks = n_peaks


class ConfigError(MMCavityError, ValueError):
    """Run configuration failed schema validation; carries the field path."""

    def __init__(self, message, field_path=""):
        super().__init__(message)
        self.field_path = field_path


class PlotSpecError(MMCavityError, ValueError):
    """Plot specification references columns missing from the CSV."""
