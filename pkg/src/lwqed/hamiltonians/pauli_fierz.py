"""Dipole-limit Pauli-Fierz Hamiltonians for one electron on a 1D grid.

Length gauge::

    H_L = T + V + sum_a [hbar w_a (n_a + 1/2) - lam_a x p_a] (+ sum_a (lam_a x)^2 / (2 hbar w_a))

Velocity gauge, with g_a = lam_a / w_a and q_a = (a_a + a_a^+)/sqrt(2)::

    H_V = (p_x - sum_a g_a q_a)^2 / 2m + V + sum_a hbar w_a (n_a + 1/2)

The two are unitarily equivalent when the self-energy term is kept in H_L.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla
import scipy.sparse as sp

from ..errors import ConfigurationError, PreconditionError
from ..hilbert import (
    ATOMIC_UNITS,
    CompositeBasis,
    HermitianOperator,
    PhysicalConstants,
    grid_derivative,
    grid_laplacian,
    ladder_operators,
    position_operator,
    tensor_embed,
)
from .modes import ModeSet
from .potentials import ExternalPotential

__all__ = [
    "LengthGaugeParts",
    "electronic_matrix",
    "electronic_hamiltonian",
    "photon_energy",
    "bilinear_coupling",
    "dipole_self_energy",
    "length_gauge_parts",
    "build_length_gauge",
    "build_velocity_gauge",
    "polaritonic_translation",
    "TranslationDefect",
    "translation_defect",
]


def _check(basis: CompositeBasis, modes: ModeSet):
    if basis.n_modes != len(modes):
        raise ConfigurationError(f"basis has {basis.n_modes} photon factors but {len(modes)} modes were given")


def electronic_matrix(grid, v_ext: ExternalPotential, constants: PhysicalConstants = ATOMIC_UNITS) -> sp.csr_matrix:
    """T + V on the grid alone."""
    kinetic = -(constants.hbar**2 / (2.0 * constants.m)) * grid_laplacian(grid)
    return (kinetic + sp.diags(v_ext.on_grid(grid, constants), 0)).tocsr()


def electronic_hamiltonian(basis: CompositeBasis, v_ext: ExternalPotential, constants=ATOMIC_UNITS) -> HermitianOperator:
    return HermitianOperator(tensor_embed(electronic_matrix(basis.grid, v_ext, constants), 0, basis), basis)


def photon_energy(basis: CompositeBasis, modes: ModeSet) -> HermitianOperator:
    _check(basis, modes)
    hbar = modes.constants.hbar
    out = sp.csr_matrix((basis.dim, basis.dim))
    for slot, (mode, fock) in enumerate(zip(modes, basis.focks), start=1):
        n = ladder_operators(fock).number
        out = out + tensor_embed(hbar * mode.omega * (n + 0.5 * sp.identity(fock.dim)), slot, basis)
    return HermitianOperator(out, basis)


def bilinear_coupling(basis: CompositeBasis, modes: ModeSet) -> HermitianOperator:
    """-sum_a lam_a x p_a."""
    _check(basis, modes)
    x = tensor_embed(position_operator(basis.grid), 0, basis)
    out = sp.csr_matrix((basis.dim, basis.dim))
    for slot, (mode, fock) in enumerate(zip(modes, basis.focks), start=1):
        p = tensor_embed(ladder_operators(fock).p, slot, basis)
        out = out - mode.coupling * (x @ p)
    return HermitianOperator(out, basis)


def dipole_self_energy(basis: CompositeBasis, modes: ModeSet) -> HermitianOperator:
    """sum_a (lam_a x)^2 / (2 hbar w_a), acting on the electron only."""
    _check(basis, modes)
    x = basis.grid.points
    diag = np.zeros_like(x)
    for m in modes:
        diag = diag + (m.coupling * x) ** 2 / (2.0 * modes.constants.hbar * m.omega)
    return HermitianOperator(tensor_embed(sp.diags(diag, 0), 0, basis), basis)


@dataclass(frozen=True, eq=False)
class LengthGaugeParts:
    electronic: HermitianOperator
    photon: HermitianOperator
    bilinear: HermitianOperator
    dipole_self_energy: HermitianOperator

    def total(self, include_dip: bool = True) -> HermitianOperator:
        h = self.electronic.matrix + self.photon.matrix + self.bilinear.matrix
        if include_dip:
            h = h + self.dipole_self_energy.matrix
        return HermitianOperator(h, self.electronic.basis)


def length_gauge_parts(basis, modes, v_ext, constants=None) -> LengthGaugeParts:
    constants = constants or modes.constants
    return LengthGaugeParts(
        electronic_hamiltonian(basis, v_ext, constants),
        photon_energy(basis, modes),
        bilinear_coupling(basis, modes),
        dipole_self_energy(basis, modes),
    )


def build_length_gauge(basis: CompositeBasis, modes: ModeSet, v_ext: ExternalPotential, include_dip: bool = True) -> HermitianOperator:
    return length_gauge_parts(basis, modes, v_ext).total(include_dip)


def build_velocity_gauge(basis: CompositeBasis, modes: ModeSet, v_ext: ExternalPotential, subtract_dip: bool = False) -> HermitianOperator:
    """Minimal coupling with a uniform vector potential.

    The shift of the electron momentum by mode a is g_a q_a with
    g_a = lam_a / w_a, which is (e/c) A_a written through the coupling
    strength, so no quantization volume is needed.  ``subtract_dip`` adds
    -sum_a (lam_a x)^2 / (2 hbar w_a), the velocity-gauge image of dropping
    the self-energy in the length gauge.
    """
    _check(basis, modes)
    c = modes.constants
    grid = basis.grid
    lap = tensor_embed(grid_laplacian(grid), 0, basis)
    mom = tensor_embed(-1j * c.hbar * grid_derivative(grid), 0, basis)
    shift = sp.csr_matrix((basis.dim, basis.dim))
    for slot, (mode, fock) in enumerate(zip(modes, basis.focks), start=1):
        q = tensor_embed(ladder_operators(fock).p, slot, basis)
        shift = shift + (mode.coupling / mode.omega) * q
    # shift is electron-independent, so the cross term needs no ordering; the
    # final symmetrization only removes round-off asymmetry
    kinetic = (-(c.hbar**2) * lap - (mom @ shift + shift @ mom) + shift @ shift) / (2.0 * c.m)
    h = kinetic + tensor_embed(sp.diags(v_ext.on_grid(grid, c), 0), 0, basis) + photon_energy(basis, modes).matrix
    if subtract_dip:
        h = h - dipole_self_energy(basis, modes).matrix
    return HermitianOperator.build(h, basis, symmetrize=True)


def polaritonic_translation(basis: CompositeBasis, modes: ModeSet, shift: float, n_electrons: int = 1) -> sp.csr_matrix:
    """Joint translation of the electron and the photon displacement coordinates.

    (T psi)(x, p_1, ...) = psi(x + shift, p_1 + a_1, ...) with
    a_a = lam_a N shift / (hbar w_a), built as the lattice shift on the grid
    times exp(a_a d/dp_a) in each truncated Fock space.
    """
    _check(basis, modes)
    grid = basis.grid
    if not grid.periodic:
        raise PreconditionError("polaritonic translation needs a periodic grid")
    steps = shift / grid.spacing
    n_steps = int(round(steps))
    if abs(steps - n_steps) > 1e-9 * max(1.0, abs(steps)):
        raise PreconditionError(f"shift {shift!r} is not a multiple of the grid spacing {grid.spacing!r}")
    n = grid.n_points
    idx = np.arange(n)
    perm = sp.csr_matrix((np.ones(n), (idx, (idx + n_steps) % n)), shape=(n, n))
    out = perm
    hbar = modes.constants.hbar
    for mode, fock in zip(modes, basis.focks):
        a = mode.coupling * n_electrons * (n_steps * grid.spacing) / (hbar * mode.omega)
        disp = sla.expm(a * ladder_operators(fock).dp.toarray())
        disp[np.abs(disp) < 1e-300] = 0.0
        out = sp.kron(out, sp.csr_matrix(disp), format="csr")
    return sp.csr_matrix(out)


@dataclass(frozen=True)
class TranslationDefect:
    eigenspace_norm: float
    bulk_norm: float
    k: int


def translation_defect(hamiltonian: HermitianOperator, translation, k: int = 4, seam_sites: int = 1,
                       seed: int = 0) -> TranslationDefect:
    """Size of [H, T] on the lowest-k eigenspace and away from the ring seam.

    On a periodic grid the coordinate x jumps at the seam, so the coupling
    term cannot commute there.  ``bulk_norm`` (max absolute row sum) drops
    ``seam_sites`` grid sites at each end (use the shift in sites plus one)
    and the upper half of every Fock ladder, which isolates the Fock
    truncation error.
    """
    from ..spectra import EigenRequest, lowest_eigenpairs

    basis = hamiltonian.basis
    H = hamiltonian.matrix
    T = sp.csr_matrix(translation)
    comm = (H @ T - T @ H).tocsr()
    _, vecs = lowest_eigenpairs(EigenRequest(hamiltonian, k=k, seed=seed))
    small = vecs.conj().T @ (comm @ vecs)
    eig_norm = float(np.linalg.norm(small, 2))

    n = basis.grid.n_points
    keep = np.ones(basis.dims, dtype=bool)
    keep[:seam_sites] = False
    keep[n - seam_sites:] = False
    for slot, fock in enumerate(basis.focks, start=1):
        sl = [slice(None)] * len(basis.dims)
        sl[slot] = slice(fock.n_max // 2 + 1, None)
        keep[tuple(sl)] = False
    sel = np.flatnonzero(keep.ravel())
    sub = comm[sel][:, sel]
    bulk = float(abs(sub).sum(axis=1).max()) if sub.nnz else 0.0
    return TranslationDefect(eig_norm, bulk, k)
