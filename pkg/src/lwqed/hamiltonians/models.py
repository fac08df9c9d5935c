"""Few-level reductions: two-level projection, Rabi, Jaynes-Cummings and Dicke.

Spin factors use the ordering [e, g] (spin up first), so sigma_z = diag(1, -1)
and sigma_+ = |e><g| has its single entry in the upper right corner.  The
collective spin of the Dicke model uses m = j, j-1, ..., -j in the same
spirit, which makes one atom coincide with the two-level basis.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla
import scipy.sparse as sp

from ..errors import InvariantViolation, PreconditionError
from ..hilbert import (
    ATOMIC_UNITS,
    FockSpec,
    GridSpec,
    HermitianOperator,
    ModelBasis,
    PhysicalConstants,
    ladder_operators,
)
from .modes import Mode
from .pauli_fierz import electronic_matrix
from .potentials import ExternalPotential

__all__ = [
    "TwoLevelReduction",
    "two_level_reduction",
    "rabi_frequency_from_field",
    "build_rabi",
    "build_jaynes_cummings",
    "build_dicke",
    "excitation_number",
    "PARITY_TOL",
]

PARITY_TOL = 1e-8

SIGMA_Z = sp.csr_matrix(np.diag([1.0, -1.0]))
SIGMA_X = sp.csr_matrix(np.array([[0.0, 1.0], [1.0, 0.0]]))
SIGMA_PLUS = sp.csr_matrix(np.array([[0.0, 1.0], [0.0, 0.0]]))
SIGMA_MINUS = SIGMA_PLUS.T.tocsr()


@dataclass(frozen=True)
class TwoLevelReduction:
    E_g: float
    E_e: float
    d_ge: float
    Omega_R: float
    G: float
    x_gg: float = 0.0
    x_ee: float = 0.0
    x2_ge: float = 0.0

    def __post_init__(self):
        if not self.E_e > self.E_g:
            raise PreconditionError("excited level must lie above the ground level")
        if self.Omega_R < 0 or self.G < 0:
            raise PreconditionError("Rabi frequency and offset must be non-negative")

    @property
    def parity_defect(self) -> float:
        return max(abs(self.x_gg), abs(self.x_ee), abs(self.x2_ge))

    @property
    def parity_ok(self) -> bool:
        return self.parity_defect <= PARITY_TOL

    @classmethod
    def from_parameters(cls, Omega_R: float, G: float = 0.0, E_g: float = -0.5, E_e: float = 0.5) -> "TwoLevelReduction":
        """Hand-specified model parameters (no underlying grid)."""
        return cls(E_g, E_e, 0.0, Omega_R, G)


def rabi_frequency_from_field(mode: Mode, d_ge: float, C: float, constants: PhysicalConstants = ATOMIC_UNITS) -> float:
    """Omega_R = sqrt(2 omega) e C d_ge / (c hbar), the mode-constant form."""
    return math.sqrt(2.0 * mode.omega) * constants.e * C * d_ge / (constants.c * constants.hbar)


def two_level_reduction(electron, mode: Mode, v_ext: ExternalPotential | None = None,
                        constants: PhysicalConstants = ATOMIC_UNITS) -> TwoLevelReduction:
    """Project the length-gauge coupling onto the two lowest electronic levels.

    ``electron`` is either an electron-only :class:`HermitianOperator` on a grid
    basis (``v_ext`` must then be None) or a :class:`GridSpec`, in which case
    T + v_ext is built on it.  The parity conditions that make the projection
    a pure sigma_x coupling are measured; a violation above ``PARITY_TOL`` is
    reported through a warning and the ``x_gg``/``x_ee``/``x2_ge`` fields.
    """
    if isinstance(electron, GridSpec):
        if v_ext is None:
            raise PreconditionError("a grid needs an external potential")
        grid = electron
        H = electronic_matrix(grid, v_ext, constants)
    else:
        if v_ext is not None:
            raise PreconditionError("pass v_ext only together with a bare grid")
        grid = electron.basis.grid
        if electron.basis.dims != (grid.n_points,):
            raise PreconditionError("two-level reduction needs an electron-only operator")
        H = electron.matrix
    vals, vecs = sla.eigh(H.toarray(), subset_by_index=[0, 1])
    if not vals[1] > vals[0]:
        raise PreconditionError("need two non-degenerate bound levels")
    g, e = vecs[:, 0].real, vecs[:, 1].real
    x = grid.points
    x_gg, x_ee = float(g @ (x * g)), float(e @ (x * e))
    x2_gg, x2_ee, x2_ge = float(g @ (x**2 * g)), float(e @ (x**2 * e)), float(g @ (x**2 * e))
    d_ge = abs(float(g @ (x * e)))

    lam = abs(mode.coupling)
    omega_proj = math.sqrt(2.0) * lam * d_ge / constants.hbar
    # cross-check against the mode-constant form with C = lam c / (sqrt(omega) e)
    C = lam * constants.c / (math.sqrt(mode.omega) * constants.e)
    omega_field = rabi_frequency_from_field(mode, d_ge, C, constants)
    if abs(omega_proj - omega_field) > 1e-12 * max(1.0, omega_proj):
        raise InvariantViolation(f"Rabi frequency routes disagree: {omega_proj!r} vs {omega_field!r}")
    G = lam**2 / (2.0 * constants.hbar * mode.omega) * (x2_gg + x2_ee)
    red = TwoLevelReduction(float(vals[0]), float(vals[1]), d_ge, omega_proj, G, x_gg, x_ee, x2_ge)
    if not red.parity_ok:
        warnings.warn(
            f"two-level projection has non-vanishing parity terms (max {red.parity_defect:.3e})",
            RuntimeWarning,
            stacklevel=2,
        )
    return red


def _spin_fock_basis(spin_dim: int, fock: FockSpec) -> ModelBasis:
    return ModelBasis(("spin", "photon"), (spin_dim, fock.dim))


def build_rabi(red: TwoLevelReduction, mode: Mode, fock: FockSpec, with_offset: bool = False,
               constants: PhysicalConstants = ATOMIC_UNITS) -> HermitianOperator:
    """(hbar w/2) s_z + hbar w n - (hbar Omega_R/2) s_x (a + a^+) [+ G]."""
    hw = constants.hbar * mode.omega
    lad = ladder_operators(fock)
    eye_f = sp.identity(fock.dim, format="csr")
    h = (
        0.5 * hw * sp.kron(SIGMA_Z, eye_f)
        + hw * sp.kron(sp.identity(2), lad.number)
        - 0.5 * constants.hbar * red.Omega_R * sp.kron(SIGMA_X, lad.lower + lad.raise_)
    )
    if with_offset:
        h = h + red.G * sp.identity(2 * fock.dim)
    return HermitianOperator(h, _spin_fock_basis(2, fock))


def build_jaynes_cummings(red: TwoLevelReduction, mode: Mode, fock: FockSpec,
                          constants: PhysicalConstants = ATOMIC_UNITS) -> HermitianOperator:
    """Rotating-wave form: the counter-rotating s_+ a^+ and s_- a terms are dropped."""
    hw = constants.hbar * mode.omega
    lad = ladder_operators(fock)
    h = (
        0.5 * hw * sp.kron(SIGMA_Z, sp.identity(fock.dim))
        + hw * sp.kron(sp.identity(2), lad.number)
        - 0.5 * constants.hbar * red.Omega_R * (sp.kron(SIGMA_PLUS, lad.lower) + sp.kron(SIGMA_MINUS, lad.raise_))
    )
    return HermitianOperator(h, _spin_fock_basis(2, fock))


def collective_spin(n_atoms: int) -> tuple[sp.csr_matrix, sp.csr_matrix, sp.csr_matrix]:
    """J_+, J_-, J_z of spin j = n_atoms/2 in the basis m = j, ..., -j."""
    if int(n_atoms) != n_atoms or n_atoms < 1:
        raise PreconditionError(f"n_atoms must be a positive integer, got {n_atoms!r}")
    j = 0.5 * n_atoms
    m = j - np.arange(n_atoms + 1)
    # J_+ |m> = sqrt(j(j+1) - m(m+1)) |m+1>, i.e. row index one above the column
    up = np.sqrt(j * (j + 1) - m[1:] * (m[1:] + 1))
    jp = sp.diags(up, 1, format="csr")
    return jp, jp.T.tocsr(), sp.diags(m, 0, format="csr")


def build_dicke(red: TwoLevelReduction, mode: Mode, fock: FockSpec, n_atoms: int,
                constants: PhysicalConstants = ATOMIC_UNITS) -> HermitianOperator:
    """hbar w n - (hbar Omega_R/2)(S_+ a + S_- a^+) + (hbar w/2) S_z in the symmetric sector.

    S_+- = J_+- and S_z = 2 J_z (sum of Pauli matrices, not of spin-1/2 operators).
    """
    hw = constants.hbar * mode.omega
    lad = ladder_operators(fock)
    jp, jm, jz = collective_spin(n_atoms)
    dim_s = n_atoms + 1
    h = (
        0.5 * hw * sp.kron(2.0 * jz, sp.identity(fock.dim))
        + hw * sp.kron(sp.identity(dim_s), lad.number)
        - 0.5 * constants.hbar * red.Omega_R * (sp.kron(jp, lad.lower) + sp.kron(jm, lad.raise_))
    )
    return HermitianOperator(h, _spin_fock_basis(dim_s, fock))


def excitation_number(n_atoms: int, fock: FockSpec) -> sp.csr_matrix:
    """a^+ a + J_z + j; for one atom this is a^+ a + s_+ s_-."""
    _, _, jz = collective_spin(n_atoms)
    dim_s = n_atoms + 1
    spin = jz + 0.5 * n_atoms * sp.identity(dim_s)
    return (sp.kron(spin, sp.identity(fock.dim)) + sp.kron(sp.identity(dim_s), ladder_operators(fock).number)).tocsr()
