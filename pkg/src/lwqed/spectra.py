"""Lowest eigenpairs of sparse Hermitian operators and the scans built on them."""

from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
import scipy.linalg as sla
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .errors import EigenSolverError, PreconditionError
from .hilbert import CompositeBasis, FockSpec, GridSpec, HermitianOperator, StateVector

log = logging.getLogger(__name__)

__all__ = [
    "EigenRequest",
    "lowest_eigenpairs",
    "ConvergenceReport",
    "truncation_scan",
    "box_growth_scan",
    "edge_distance",
    "GaugeEquivalenceReport",
    "gauge_equivalence_scan",
    "DENSE_THRESHOLD",
    "ground_state",
    "PhotonLikeExcitation",
    "photon_like_excitation",
]

DENSE_THRESHOLD = 4000


@dataclass(frozen=True, eq=False)
class EigenRequest:
    operator: HermitianOperator
    k: int = 1
    tol: float = 1e-8
    max_subspace: int | None = None
    seed: int = 0
    dense_threshold: int = DENSE_THRESHOLD

    def __post_init__(self):
        if int(self.k) != self.k or self.k < 1:
            raise PreconditionError(f"k must be a positive integer, got {self.k!r}")
        if self.k >= self.operator.dim:
            raise PreconditionError(f"k={self.k} must be smaller than the dimension {self.operator.dim}")
        if not self.tol > 0:
            raise PreconditionError("tol must be positive")


def _fix_phase(vecs: np.ndarray) -> np.ndarray:
    # make the largest component of each vector real and positive
    idx = np.argmax(np.abs(vecs), axis=0)
    piv = vecs[idx, np.arange(vecs.shape[1])]
    return vecs * (np.abs(piv) / piv)[None, :]


def _gershgorin_lower(H: sp.csr_matrix) -> float:
    diag = H.diagonal().real
    radius = np.asarray(abs(H).sum(axis=1)).ravel() - np.abs(H.diagonal())
    return float(np.min(diag - radius))


def _residuals(H, vals, vecs) -> np.ndarray:
    return np.linalg.norm(H @ vecs - vecs * vals[None, :], axis=0)


def lowest_eigenpairs(req: EigenRequest) -> tuple[np.ndarray, np.ndarray]:
    """k smallest eigenvalues (ascending) and orthonormal eigenvectors as columns.

    Small problems are diagonalized densely; larger ones use ARPACK in
    shift-invert mode with the shift placed just below the Gershgorin bound,
    so the wanted eigenvalues are the largest of the inverted operator.
    The starting vector is drawn from a seeded generator.
    """
    H = req.operator.matrix
    n = H.shape[0]
    complex_ = np.iscomplexobj(H.data)
    if n <= req.dense_threshold:
        vals, vecs = sla.eigh(H.toarray(), subset_by_index=[0, req.k - 1])
    else:
        rng = np.random.default_rng(req.seed)
        v0 = rng.standard_normal(n)
        if complex_:
            v0 = v0 + 1j * rng.standard_normal(n)
        lower = _gershgorin_lower(H)
        sigma = lower - 1e-3 * max(1.0, abs(lower))
        ncv = req.max_subspace or min(n - 1, max(2 * req.k + 1, 20))
        A = (H - sigma * sp.identity(n, format="csr", dtype=H.dtype)).tocsc()
        lu = spla.splu(A)
        op = spla.LinearOperator((n, n), matvec=lu.solve, dtype=A.dtype)
        try:
            mu, vecs = spla.eigsh(op, k=req.k, which="LM", v0=v0, ncv=ncv, tol=0.0)
        except spla.ArpackNoConvergence as exc:
            res = None
            if exc.eigenvectors is not None and exc.eigenvectors.size:
                ev = sigma + 1.0 / exc.eigenvalues
                res = _residuals(H, ev.real, exc.eigenvectors)
            raise EigenSolverError(f"ARPACK did not converge for k={req.k}", residuals=res) from exc
        vals = (sigma + 1.0 / mu).real
        order = np.argsort(vals)
        vals, vecs = vals[order], vecs[:, order]
        # re-orthonormalize (degenerate clusters) and take Rayleigh quotients
        vecs, _ = np.linalg.qr(vecs)
        small = vecs.conj().T @ (H @ vecs)
        small = 0.5 * (small + small.conj().T)
        vals, rot = np.linalg.eigh(small)
        vecs = vecs @ rot
    vecs = _fix_phase(np.asarray(vecs))
    if not complex_ and np.iscomplexobj(vecs):
        vecs = vecs.real
    res = _residuals(H, vals, vecs)
    bad = res >= req.tol * max(1.0, float(np.max(np.abs(vals))))
    if np.any(bad):
        raise EigenSolverError(f"eigenpair residuals above tolerance: max {res.max():.3e}", residuals=res)
    return np.asarray(vals, dtype=float), vecs


def ground_state(op: HermitianOperator, seed: int = 0) -> tuple[float, StateVector]:
    vals, vecs = lowest_eigenpairs(EigenRequest(op, k=1, seed=seed))
    return float(vals[0]), StateVector(op.basis, vecs[:, 0])


@dataclass
class ConvergenceReport:
    axis_name: str
    axis: list
    eigenvalues: list[np.ndarray]
    verdict: str
    changes: list[float] = field(default_factory=list)
    decrements: list[float] = field(default_factory=list)
    extras: dict = field(default_factory=dict)

    @property
    def ground_energies(self) -> np.ndarray:
        return np.array([ev[0] for ev in self.eigenvalues])


def _map(fn, items, jobs: int):
    if jobs and jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            return list(pool.map(fn, items))
    return [fn(x) for x in items]


def _is_diverging(energies: np.ndarray, slack: float = 1e-9) -> tuple[bool, list[float]]:
    dec = [float(energies[i] - energies[i + 1]) for i in range(len(energies) - 1)]
    if len(dec) < 3:
        return False, dec
    if not all(d > 0 for d in dec):
        return False, dec
    grows = all(dec[i + 1] >= dec[i] * (1.0 - slack) for i in range(len(dec) - 1))
    return grows, dec


def _verdict(eigs: list[np.ndarray], tol: float) -> tuple[str, list[float], list[float]]:
    changes = [float(np.max(np.abs(eigs[i + 1] - eigs[i]))) for i in range(len(eigs) - 1)]
    ground = np.array([e[0] for e in eigs])
    diverging, dec = _is_diverging(ground)
    if diverging:
        return "diverging", changes, dec
    if changes and changes[-1] < tol:
        return "converged", changes, dec
    return "undecided", changes, dec


def truncation_scan(
    builder: Callable[[int], HermitianOperator],
    n_max_values: Sequence[int],
    k: int = 1,
    tol: float = 1e-8,
    seed: int = 0,
    jobs: int = 1,
) -> ConvergenceReport:
    """Lowest-k eigenvalues along a sequence of Fock cutoffs (usually doublings)."""

    def step(n_max):
        return lowest_eigenpairs(EigenRequest(builder(n_max), k=k, seed=seed))[0]

    eigs = _map(step, list(n_max_values), jobs)
    verdict, changes, dec = _verdict(eigs, tol)
    if verdict == "diverging":
        # more photons can only lower the energy; this is not an instability axis
        verdict = "converged" if changes[-1] < tol else "undecided"
    return ConvergenceReport("n_max", list(n_max_values), eigs, verdict, changes, dec)


def edge_distance(state: StateVector, grid: GridSpec) -> float:
    """Density-weighted mean distance of the electron to the nearest box wall."""
    rho = state.marginal(0)
    lo, hi = grid.walls
    x = grid.points
    return float(np.sum(rho * np.minimum(x - lo, hi - x)))


def box_growth_scan(
    builder: Callable[[float], HermitianOperator],
    lengths: Sequence[float],
    k: int = 1,
    tol: float = 1e-8,
    edge_margin: float = 2.0,
    seed: int = 0,
    jobs: int = 1,
) -> ConvergenceReport:
    """Ground energy and localization as the Dirichlet box grows.

    ``extras`` holds per-length ``edge_distance`` and ``centroid`` of the
    electron density and the flag ``edge_localized`` (last box, mean distance
    to the nearest wall below ``edge_margin``).
    """

    def step(L):
        op = builder(L)
        vals, vecs = lowest_eigenpairs(EigenRequest(op, k=k, seed=seed))
        st = StateVector(op.basis, vecs[:, 0])
        grid = op.basis.grid
        rho = st.marginal(0)
        return vals, edge_distance(st, grid), float(np.sum(rho * grid.points))

    out = _map(step, list(lengths), jobs)
    eigs = [o[0] for o in out]
    verdict, changes, dec = _verdict(eigs, tol)
    edges = [o[1] for o in out]
    extras = {
        "edge_distance": edges,
        "centroid": [o[2] for o in out],
        "edge_localized": bool(edges[-1] < edge_margin),
    }
    return ConvergenceReport("box_length", list(lengths), eigs, verdict, changes, dec, extras)


@dataclass
class GaugeEquivalenceReport:
    n_max: list[int]
    length: list[np.ndarray]
    velocity: list[np.ndarray]
    gaps: list[float]
    tol: float
    floor: float

    @property
    def agree(self) -> bool:
        return self.gaps[-1] < self.tol

    @property
    def monotone(self) -> bool:
        """Gap non-increasing between doublings, up to the discretization floor."""
        return all(b <= a + self.floor for a, b in zip(self.gaps, self.gaps[1:]))

    @property
    def verdict(self) -> str:
        return "converged" if self.agree and self.monotone else "undecided"


def gauge_equivalence_scan(
    grid: GridSpec,
    modes,
    v_ext,
    n_max_values: Sequence[int] = (2, 4, 8, 16),
    k: int = 5,
    tol: float = 1e-6,
    floor: float = 1e-8,
    seed: int = 0,
    jobs: int = 1,
) -> GaugeEquivalenceReport:
    """Compare the lowest-k spectra of the velocity gauge and the length gauge with self-energy."""
    from .hamiltonians import build_length_gauge, build_velocity_gauge

    def step(n_max):
        basis = CompositeBasis(grid, tuple(FockSpec(n_max) for _ in range(len(modes))))
        eL = lowest_eigenpairs(EigenRequest(build_length_gauge(basis, modes, v_ext, True), k=k, seed=seed))[0]
        eV = lowest_eigenpairs(EigenRequest(build_velocity_gauge(basis, modes, v_ext, False), k=k, seed=seed))[0]
        return eL, eV

    out = _map(step, list(n_max_values), jobs)
    gaps = [float(np.max(np.abs(a - b))) for a, b in out]
    return GaugeEquivalenceReport(list(n_max_values), [o[0] for o in out], [o[1] for o in out], gaps, tol, floor)


@dataclass
class PhotonLikeExcitation:
    gap: float
    index: int
    ground_energy: float
    eigenvalues: np.ndarray
    photon_numbers: np.ndarray


def photon_like_excitation(grid: GridSpec, modes, n_max: int, k: int = 30, threshold: float = 0.5,
                           include_dip: bool = True, seed: int = 0) -> PhotonLikeExcitation:
    """Lowest excitation of the free-electron (v_ext = 0) system that carries a photon.

    Diagonalizes the length-gauge Hamiltonian with one mode on the given grid.
    The electron's own kinetic ladder (ring or box levels) also changes the
    photon number, because p is displaced by lam x / (hbar w); the field
    energy (hbar w/2)(pi^2 + (p - lam x/(hbar w))^2) is blind to that shift.
    The first eigenstate whose field energy exceeds the ground state's by
    more than ``threshold`` * hbar w is returned; ``photon_numbers`` holds
    those field-energy excesses in units of hbar w.
    """
    from .hamiltonians import ExternalPotential, length_gauge_parts

    if len(modes) != 1:
        raise PreconditionError("photon-like excitation search is implemented for one mode")
    basis = CompositeBasis(grid, (FockSpec(n_max),))
    parts = length_gauge_parts(basis, modes, ExternalPotential.zero())
    H = parts.total(include_dip)
    vals, vecs = lowest_eigenpairs(EigenRequest(H, k=k, seed=seed))
    field_op = parts.photon.matrix + parts.bilinear.matrix + parts.dipole_self_energy.matrix
    energy = np.real(np.einsum("ij,ij->j", vecs.conj(), field_op @ vecs))
    excess = (energy - energy[0]) / (modes.constants.hbar * modes[0].omega)
    hits = np.flatnonzero(excess > threshold)
    if hits.size == 0:
        raise EigenSolverError(f"no photon-like state among the lowest {k} eigenpairs")
    i = int(hits[0])
    return PhotonLikeExcitation(float(vals[i] - vals[0]), i, float(vals[0]), vals, excess)
