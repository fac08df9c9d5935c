from .modes import Mode, ModeSet, mode_constant
from .potentials import ExternalPotential
from .pauli_fierz import (
    LengthGaugeParts,
    TranslationDefect,
    bilinear_coupling,
    build_length_gauge,
    build_velocity_gauge,
    dipole_self_energy,
    electronic_hamiltonian,
    electronic_matrix,
    length_gauge_parts,
    photon_energy,
    polaritonic_translation,
    translation_defect,
)
from .models import (
    TwoLevelReduction,
    build_dicke,
    build_jaynes_cummings,
    build_rabi,
    collective_spin,
    excitation_number,
    rabi_frequency_from_field,
    two_level_reduction,
)
from .field_energy import FieldEnergyDemo, dipole_field_energy_demo
