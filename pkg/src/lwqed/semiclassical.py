"""Static semi-classical limits for one electron on a grid.

Two routes are implemented:

* the standard limit, a classical field E coupled as -eEx, which has no
  ground state for E != 0 (the energy follows the potential drop to the wall);
* the limit taken after the length-gauge transformation, where the photon
  displacements become numbers.  For fixed displacement field D this gives
  T + V - (e/eps0) D x + K x^2 / 2 with K = sum_a lam_a^2 / (hbar w_a); with the
  polarization determined self-consistently it becomes a non-linear problem
  solved here by fixed-point iteration on the dipole <x>.

In the self-consistent route the applied field E enters through
D = eps0 E + P[psi] with P[psi] = eps0 K <x> / e, so the effective Hamiltonian
is T + V - eEx - K<x>x + K x^2/2.  The reported energy is the value of the
functional whose stationary points these are,
<T + V + K x^2/2> - eE<x> - K<x>^2/2.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
import scipy.linalg as sla
import scipy.sparse as sp

from .errors import PreconditionError, ScfConvergenceError
from .hamiltonians.modes import ModeSet
from .hamiltonians.pauli_fierz import electronic_matrix
from .hamiltonians.potentials import ExternalPotential
from .hilbert import CompositeBasis, GridSpec, HermitianOperator, PhysicalConstants
from .spectra import EigenRequest, lowest_eigenpairs

__all__ = [
    "ScfConfig",
    "ScfResult",
    "StarkResult",
    "build_standard_semiclassical",
    "build_fixed_displacement",
    "scf_ground_state",
    "sum_over_states_polarizability",
    "stark_scan",
    "harmonic_closed_forms",
    "HarmonicClosedForms",
]


@dataclass(frozen=True)
class ScfConfig:
    mixing: float = 1.0
    tol: float = 1e-10
    max_iter: int = 500

    def __post_init__(self):
        if not 0.0 < self.mixing <= 1.0:
            raise PreconditionError(f"mixing must lie in (0, 1], got {self.mixing!r}")
        if not self.tol > 0:
            raise PreconditionError("tol must be positive")
        if int(self.max_iter) != self.max_iter or self.max_iter < 1:
            raise PreconditionError("max_iter must be a positive integer")


def _constants(modes: ModeSet | None, constants: PhysicalConstants | None) -> PhysicalConstants:
    if constants is not None:
        return constants
    if modes is not None:
        return modes.constants
    from .hilbert import ATOMIC_UNITS

    return ATOMIC_UNITS


def build_standard_semiclassical(grid: GridSpec, v_ext: ExternalPotential, field: float,
                                 constants: PhysicalConstants | None = None) -> HermitianOperator:
    """T + V - e E x."""
    c = _constants(None, constants)
    h = electronic_matrix(grid, v_ext, c) - c.e * field * sp.diags(grid.points, 0)
    return HermitianOperator(h, CompositeBasis(grid))


def _total_displacement(D) -> float:
    return float(np.sum(np.atleast_1d(np.asarray(D, dtype=float))))


def build_fixed_displacement(grid: GridSpec, v_ext: ExternalPotential, modes: ModeSet, D,
                             constants: PhysicalConstants | None = None) -> HermitianOperator:
    """T + V - (e/eps0) x sum_a D_a + sum_a (lam_a x)^2 / (2 hbar w_a).

    ``D`` is either the total displacement along the axis or one value per
    mode.  The constant sum_a hbar w_a p_a^2 / 2 is dropped.
    """
    c = _constants(modes, constants)
    D_tot = _total_displacement(D)
    x = grid.points
    K = modes.dipole_curvature
    diag = -(c.e / c.eps0) * D_tot * x + 0.5 * K * x**2
    return HermitianOperator(electronic_matrix(grid, v_ext, c) + sp.diags(diag, 0), CompositeBasis(grid))


def _ground(H: sp.csr_matrix, seed: int = 0):
    n = H.shape[0]
    if n <= 4000:
        vals, vecs = sla.eigh(H.toarray(), subset_by_index=[0, 0])
        v = vecs[:, 0]
        return float(vals[0]), v * np.sign(v[np.argmax(np.abs(v))])
    op = HermitianOperator(H, CompositeBasis(GridSpec(0.0, 1.0, n)))
    vals, vecs = lowest_eigenpairs(EigenRequest(op, k=1, seed=seed))
    return float(vals[0]), vecs[:, 0]


@dataclass(frozen=True, eq=False)
class ScfResult:
    state: np.ndarray
    energy: float
    eigenvalue: float
    dipole: float
    P: float
    D: float
    field: float
    iterations: int
    history: list = field(default_factory=list)


def scf_ground_state(grid: GridSpec, v_ext: ExternalPotential, modes: ModeSet, field: float = 0.0,
                     scf: ScfConfig = ScfConfig(), constants: PhysicalConstants | None = None,
                     seed: int = 0) -> ScfResult:
    """Self-consistent ground state of T + V - eEx - K<x>x + K x^2/2.

    The iteration starts from the zero-field ground state of T + V + K x^2/2
    with its dipole taken non-negative (deterministic choice for degenerate
    wells).  Raises :class:`ScfConvergenceError` with the residual history if
    ``scf.max_iter`` is exhausted.
    """
    c = _constants(modes, constants)
    x = grid.points
    K = modes.dipole_curvature
    base = electronic_matrix(grid, v_ext, c) + sp.diags(0.5 * K * x**2, 0)
    _, psi = _ground(base.tocsr(), seed)
    d = abs(float(psi @ (x * psi)))
    history = []
    for it in range(1, scf.max_iter + 1):
        H = (base + sp.diags(-(c.e * field + K * d) * x, 0)).tocsr()
        eig, psi = _ground(H, seed)
        d_out = float(psi @ (x * psi))
        residual = abs(d_out - d)
        history.append(residual)
        if residual < scf.tol:
            d = d_out
            base_energy = float(psi @ (base @ psi))
            energy = base_energy - c.e * field * d - 0.5 * K * d**2
            P = c.eps0 * K * d / c.e
            D = c.eps0 * field + P
            return ScfResult(psi, energy, eig, d, P, D, field, it, history)
        d = (1.0 - scf.mixing) * d + scf.mixing * d_out
    raise ScfConvergenceError(f"SCF did not converge in {scf.max_iter} iterations (last residual {history[-1]:.3e})",
                              history=history)


def sum_over_states_polarizability(grid: GridSpec, v_ext: ExternalPotential, modes: ModeSet,
                                   constants: PhysicalConstants | None = None) -> tuple[float, float]:
    """Second-order response from the full spectrum of T + V + K x^2/2.

    Returns (alpha, chi0) with chi0 = 2 sum_n |<0|x|n>|^2 / (E_n - E_0) and
    alpha = e^2 chi0 / (1 - K chi0); the denominator accounts for the
    polarization feeding back into the effective field.
    """
    c = _constants(modes, constants)
    x = grid.points
    K = modes.dipole_curvature
    H = (electronic_matrix(grid, v_ext, c) + sp.diags(0.5 * K * x**2, 0)).toarray()
    vals, vecs = sla.eigh(H)
    xm = vecs[:, 0] @ (x[:, None] * vecs[:, 1:])
    chi0 = 2.0 * float(np.sum(xm**2 / (vals[1:] - vals[0])))
    return c.e**2 * chi0 / (1.0 - K * chi0), chi0


@dataclass
class StarkResult:
    fields: np.ndarray
    energies: np.ndarray
    dipoles: np.ndarray
    converged: np.ndarray
    alpha: float
    alpha_pt: float
    alpha_dipole: float
    quartic: float
    E0_zero: float
    failures: dict = field(default_factory=dict)

    @property
    def relative_agreement(self) -> float:
        return abs(self.alpha - self.alpha_pt) / abs(self.alpha_pt)

    def even_defect(self) -> float:
        """max |E0(F) - E0(-F)| over field pairs present in the scan."""
        worst = 0.0
        for i, f in enumerate(self.fields):
            j = np.flatnonzero(np.isclose(self.fields, -f, rtol=0.0, atol=1e-15))
            if j.size and self.converged[i] and self.converged[j[0]]:
                worst = max(worst, abs(self.energies[i] - self.energies[j[0]]))
        return worst


def stark_scan(grid: GridSpec, v_ext: ExternalPotential, modes: ModeSet, fields: Sequence[float],
               scf: ScfConfig = ScfConfig(), constants: PhysicalConstants | None = None,
               jobs: int = 1) -> StarkResult:
    """SCF ground energies over a field grid and the fitted polarizability.

    E0(F) - E0(0) is fitted by -alpha F^2/2 + beta F^4 (least squares over the
    converged points).  ``alpha_dipole`` is the mean of e<x>/F over non-zero
    fields.  Fields whose SCF fails are marked in ``converged`` and their
    error message kept in ``failures``.
    """
    c = _constants(modes, constants)
    fields = np.asarray(list(fields), dtype=float)
    zero = scf_ground_state(grid, v_ext, modes, 0.0, scf, c)

    def one(f):
        try:
            return scf_ground_state(grid, v_ext, modes, float(f), scf, c), None
        except ScfConvergenceError as exc:
            return None, str(exc)

    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            out = list(pool.map(one, fields))
    else:
        out = [one(f) for f in fields]
    ok = np.array([r is not None for r, _ in out])
    energies = np.array([r.energy if r is not None else np.nan for r, _ in out])
    dipoles = np.array([r.dipole if r is not None else np.nan for r, _ in out])
    failures = {float(f): msg for f, (_, msg) in zip(fields, out) if msg is not None}

    mask = ok & (fields != 0.0)
    F = fields[mask]
    dE = energies[mask] - zero.energy
    if F.size >= 2:
        A = np.column_stack([-0.5 * F**2, F**4])
        (alpha, quartic), *_ = np.linalg.lstsq(A, dE, rcond=None)
    elif F.size == 1:
        alpha, quartic = -2.0 * dE[0] / F[0] ** 2, 0.0
    else:
        alpha, quartic = float("nan"), float("nan")
    alpha_dip = float(np.mean(c.e * dipoles[mask] / F)) if F.size else float("nan")
    alpha_pt, _ = sum_over_states_polarizability(grid, v_ext, modes, c)
    return StarkResult(fields, energies, dipoles, ok, float(alpha), alpha_pt, alpha_dip, float(quartic),
                       zero.energy, failures)


@dataclass(frozen=True)
class HarmonicClosedForms:
    """Exact results for v_ext = m Omega^2 x^2 / 2 (continuum, no box)."""

    Omega: float
    K: float
    constants: PhysicalConstants

    @property
    def Omega_eff(self) -> float:
        c = self.constants
        return math.sqrt(self.Omega**2 + self.K / c.m)

    def standard_energy(self, field: float) -> float:
        c = self.constants
        return 0.5 * c.hbar * self.Omega - (c.e * field) ** 2 / (2.0 * c.m * self.Omega**2)

    def fixed_displacement_energy(self, D_total: float) -> float:
        c = self.constants
        g = (c.e / c.eps0) * D_total
        return 0.5 * c.hbar * self.Omega_eff - g**2 / (2.0 * c.m * self.Omega_eff**2)

    def scf_dipole(self, field: float) -> float:
        c = self.constants
        return c.e * field / (c.m * self.Omega**2)

    def scf_energy(self, field: float) -> float:
        c = self.constants
        return 0.5 * c.hbar * self.Omega_eff - (c.e * field) ** 2 / (2.0 * c.m * self.Omega**2)

    @property
    def polarizability(self) -> float:
        """d<ex>/dE for the self-consistent route: the self-energy curvature cancels."""
        c = self.constants
        return c.e**2 / (c.m * self.Omega**2)

    @property
    def displacement_polarizability(self) -> float:
        """d<ex>/d(D/eps0) at fixed displacement: e^2 / (m Omega_eff^2)."""
        c = self.constants
        return c.e**2 / (c.m * self.Omega_eff**2)


def harmonic_closed_forms(Omega: float, modes: ModeSet | None = None,
                          constants: PhysicalConstants | None = None) -> HarmonicClosedForms:
    c = _constants(modes, constants)
    K = modes.dipole_curvature if modes is not None else 0.0
    return HarmonicClosedForms(Omega, K, c)
