"""Long-wavelength light-matter Hamiltonians with and without the dipole self-energy."""

from .hilbert import (
    ATOMIC_UNITS,
    CompositeBasis,
    FockSpec,
    GridSpec,
    HermitianOperator,
    PhysicalConstants,
    StateVector,
)
from .hamiltonians import ExternalPotential, Mode, ModeSet

__version__ = "0.1.0"
