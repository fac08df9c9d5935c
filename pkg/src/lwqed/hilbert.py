"""Bases, index arithmetic and elementary operators on the electron-grid x Fock space.

The electron lives on a uniform one-dimensional grid (slot 0 of every
composite basis); each photon mode contributes a truncated Fock factor
(slots 1..M).  Composite indices are row-major with the grid slowest, which
matches ``scipy.sparse.kron(grid_op, fock_op_1, ..., fock_op_M)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
import scipy.sparse as sp

from .errors import InvariantViolation

__all__ = [
    "PhysicalConstants",
    "ATOMIC_UNITS",
    "GridSpec",
    "FockSpec",
    "CompositeBasis",
    "ModelBasis",
    "HermitianOperator",
    "StateVector",
    "Ladder",
    "ladder_operators",
    "grid_laplacian",
    "grid_derivative",
    "position_operator",
    "tensor_embed",
]


@dataclass(frozen=True)
class PhysicalConstants:
    hbar: float = 1.0
    m: float = 1.0
    e: float = 1.0
    c: float = 137.035999
    eps0: float = 1.0 / (4.0 * math.pi)

    def __post_init__(self):
        for name in ("hbar", "m", "e", "c", "eps0"):
            value = getattr(self, name)
            if not (np.isfinite(value) and value > 0):
                raise ValueError(f"constant {name} must be finite and positive, got {value!r}")

    @property
    def coulomb(self) -> float:
        """Prefactor e^2 / (4 pi eps0) of the Coulomb interaction."""
        return self.e**2 / (4.0 * math.pi * self.eps0)


ATOMIC_UNITS = PhysicalConstants()


@dataclass(frozen=True)
class GridSpec:
    """Uniform grid for the electron coordinate.

    For Dirichlet boundaries the grid points include ``x_min`` and ``x_max``
    and the wave function is taken to vanish one spacing further out, so the
    effective box is ``box_length = (n_points + 1) * spacing``.  For periodic
    boundaries ``x_max`` is identified with ``x_min``.
    """

    x_min: float
    x_max: float
    n_points: int
    boundary: str = "dirichlet"
    stencil_order: int = 2

    def __post_init__(self):
        if self.boundary not in ("dirichlet", "periodic"):
            raise ValueError(f"boundary must be 'dirichlet' or 'periodic', got {self.boundary!r}")
        if self.stencil_order not in (2, 4):
            raise ValueError(f"stencil_order must be 2 or 4, got {self.stencil_order!r}")
        if int(self.n_points) != self.n_points or self.n_points < 3:
            raise ValueError(f"n_points must be an integer >= 3, got {self.n_points!r}")
        if not self.x_max > self.x_min:
            raise ValueError("x_max must exceed x_min")

    @classmethod
    def box(cls, length: float, spacing: float, stencil_order: int = 2, center: float = 0.0) -> "GridSpec":
        """Dirichlet grid of the given effective box length at (approximately) fixed spacing."""
        n = int(round(length / spacing)) - 1
        h = length / (n + 1)
        half = 0.5 * length
        return cls(center - half + h, center + half - h, n, "dirichlet", stencil_order)

    @property
    def periodic(self) -> bool:
        return self.boundary == "periodic"

    @property
    def spacing(self) -> float:
        if self.periodic:
            return (self.x_max - self.x_min) / self.n_points
        return (self.x_max - self.x_min) / (self.n_points - 1)

    @property
    def box_length(self) -> float:
        if self.periodic:
            return self.x_max - self.x_min
        return (self.n_points + 1) * self.spacing

    @property
    def walls(self) -> tuple[float, float]:
        """Positions where the wave function is pinned to zero (Dirichlet only)."""
        h = self.spacing
        return (self.x_min - h, self.x_max + h)

    @property
    def points(self) -> np.ndarray:
        return self.x_min + self.spacing * np.arange(self.n_points)


@dataclass(frozen=True)
class FockSpec:
    n_max: int

    def __post_init__(self):
        if int(self.n_max) != self.n_max or self.n_max < 1:
            raise ValueError(f"n_max must be an integer >= 1, got {self.n_max!r}")

    @property
    def dim(self) -> int:
        return self.n_max + 1


@dataclass(frozen=True)
class CompositeBasis:
    """Electron grid tensored with one truncated Fock space per photon mode."""

    grid: GridSpec
    focks: tuple[FockSpec, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "focks", tuple(self.focks))

    @property
    def n_modes(self) -> int:
        return len(self.focks)

    @property
    def dims(self) -> tuple[int, ...]:
        return (self.grid.n_points,) + tuple(f.dim for f in self.focks)

    @property
    def dim(self) -> int:
        return int(np.prod(self.dims))

    def flatten(self, multi_index) -> np.ndarray | int:
        return np.ravel_multi_index(tuple(multi_index), self.dims)

    def unflatten(self, index) -> tuple:
        return np.unravel_index(index, self.dims)

    def electron_only(self) -> "CompositeBasis":
        return CompositeBasis(self.grid, ())


@dataclass(frozen=True)
class ModelBasis:
    """Generic labelled product basis (e.g. spin x Fock for the few-level models)."""

    labels: tuple[str, ...]
    dims: tuple[int, ...]

    @property
    def dim(self) -> int:
        return int(np.prod(self.dims))

    def flatten(self, multi_index):
        return np.ravel_multi_index(tuple(multi_index), self.dims)

    def unflatten(self, index):
        return np.unravel_index(index, self.dims)


def _canonical(matrix) -> sp.csr_matrix:
    m = sp.csr_matrix(matrix)
    m.sum_duplicates()
    m.eliminate_zeros()
    m.sort_indices()
    if not np.iscomplexobj(m.data):
        m = m.astype(np.float64)
    return m


@dataclass(frozen=True, eq=False)
class HermitianOperator:
    """Sparse Hermitian matrix on a product basis.

    Hermiticity is asserted exactly (bit for bit) at construction; builders
    symmetrize with ``symmetrize=True`` when round-off could break it.
    """

    matrix: sp.csr_matrix
    basis: CompositeBasis | ModelBasis

    def __post_init__(self):
        m = _canonical(self.matrix)
        if m.shape != (self.basis.dim, self.basis.dim):
            raise ValueError(f"matrix shape {m.shape} does not match basis dimension {self.basis.dim}")
        defect = m - m.conj().T
        if defect.count_nonzero() != 0:
            raise InvariantViolation(
                f"operator is not exactly Hermitian (max defect {abs(defect).max():.3e})"
            )
        object.__setattr__(self, "matrix", m)

    @classmethod
    def build(cls, matrix, basis, symmetrize: bool = False) -> "HermitianOperator":
        m = sp.csr_matrix(matrix)
        if symmetrize:
            m = (m + m.conj().T) * 0.5
        return cls(m, basis)

    @property
    def dim(self) -> int:
        return self.basis.dim

    @property
    def is_real(self) -> bool:
        return not np.iscomplexobj(self.matrix.data) or not np.any(self.matrix.data.imag)

    def dense(self) -> np.ndarray:
        return self.matrix.toarray()

    def equals(self, other: "HermitianOperator") -> bool:
        """Bit-exact matrix equality (the canonical CSR layout is deterministic)."""
        if self.matrix.shape != other.matrix.shape:
            return False
        return (self.matrix != other.matrix).count_nonzero() == 0

    def expectation(self, vector) -> float:
        v = np.asarray(vector)
        return float(np.real(np.vdot(v, self.matrix @ v)) / np.real(np.vdot(v, v)))

    def __add__(self, other):
        if isinstance(other, HermitianOperator):
            other = other.matrix
        return HermitianOperator(self.matrix + other, self.basis)

    def __sub__(self, other):
        if isinstance(other, HermitianOperator):
            other = other.matrix
        return HermitianOperator(self.matrix - other, self.basis)


@dataclass(frozen=True, eq=False)
class StateVector:
    basis: CompositeBasis | ModelBasis
    amplitudes: np.ndarray

    def __post_init__(self):
        amps = np.asarray(self.amplitudes)
        if amps.shape != (self.basis.dim,):
            raise ValueError(f"expected {self.basis.dim} amplitudes, got shape {amps.shape}")
        if not np.all(np.isfinite(amps)):
            raise ValueError("state amplitudes must be finite")
        object.__setattr__(self, "amplitudes", amps)

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def normalized(self) -> "StateVector":
        return StateVector(self.basis, self.amplitudes / self.norm)

    def tensor(self) -> np.ndarray:
        return self.amplitudes.reshape(self.basis.dims)

    def marginal(self, slot: int = 0) -> np.ndarray:
        """Probability distribution over one factor, summed over the others."""
        prob = np.abs(self.tensor()) ** 2
        axes = tuple(i for i in range(len(self.basis.dims)) if i != slot)
        return prob.sum(axis=axes) / prob.sum()

    def overlap(self, other: "StateVector") -> complex:
        return complex(np.vdot(self.amplitudes, other.amplitudes))


class Ladder(NamedTuple):
    """Truncated ladder operators of one oscillator and their quadratures.

    ``p = (lower + raise_) / sqrt(2)`` is the displacement coordinate and
    ``dp = (lower - raise_) / sqrt(2)`` its derivative d/dp; ``i_dp`` is the
    Hermitian combination i d/dp.
    """

    lower: sp.csr_matrix
    raise_: sp.csr_matrix
    number: sp.csr_matrix
    p: sp.csr_matrix
    dp: sp.csr_matrix
    i_dp: sp.csr_matrix


def ladder_operators(fock: FockSpec) -> Ladder:
    d = fock.dim
    lower = sp.diags(np.sqrt(np.arange(1, d, dtype=float)), 1, shape=(d, d), format="csr")
    raise_ = lower.T.tocsr()
    number = sp.diags(np.arange(d, dtype=float), 0, format="csr")
    p = ((lower + raise_) / math.sqrt(2.0)).tocsr()
    dp = ((lower - raise_) / math.sqrt(2.0)).tocsr()
    return Ladder(lower, raise_, number, p, dp, (1j * dp).tocsr())


_LAPLACIAN = {2: np.array([1.0, -2.0, 1.0]), 4: np.array([-1.0 / 12, 4.0 / 3, -5.0 / 2, 4.0 / 3, -1.0 / 12])}
_FIRST = {2: np.array([-0.5, 0.0, 0.5]), 4: np.array([1.0 / 12, -2.0 / 3, 0.0, 2.0 / 3, -1.0 / 12])}


def _stencil_matrix(grid: GridSpec, weights: np.ndarray) -> sp.csr_matrix:
    n = grid.n_points
    width = len(weights)
    if n < width:
        raise ValueError(f"grid with {n} points is smaller than the {width}-point stencil")
    half = width // 2
    offsets = list(range(-half, half + 1))
    rows, cols, vals = [], [], []
    idx = np.arange(n)
    for off, w in zip(offsets, weights):
        if w == 0.0:
            continue
        j = idx + off
        if grid.periodic:
            j = j % n
            keep = np.ones(n, dtype=bool)
        else:
            keep = (j >= 0) & (j < n)
        rows.append(idx[keep])
        cols.append(j[keep])
        vals.append(np.full(keep.sum(), w))
    m = sp.coo_matrix((np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))), shape=(n, n))
    return m.tocsr()


def grid_laplacian(grid: GridSpec) -> sp.csr_matrix:
    """Finite-difference second derivative (symmetric).

    With fourth-order Dirichlet stencils the ghost value two spacings outside
    the domain is the odd reflection of the boundary value, which keeps the
    sine modes of the box exact eigenvectors and the matrix symmetric.
    """
    m = _stencil_matrix(grid, _LAPLACIAN[grid.stencil_order]).tolil()
    if grid.stencil_order == 4 and not grid.periodic:
        n = grid.n_points
        m[0, 0] += 1.0 / 12
        m[n - 1, n - 1] += 1.0 / 12
    return (m.tocsr() / grid.spacing**2).tocsr()


def grid_derivative(grid: GridSpec) -> sp.csr_matrix:
    """Central first derivative (antisymmetric).

    Dirichlet grids simply truncate the stencil; this keeps ``-i hbar D``
    Hermitian but is only accurate for states that vanish near the walls.
    """
    return (_stencil_matrix(grid, _FIRST[grid.stencil_order]) / grid.spacing).tocsr()


def position_operator(grid: GridSpec) -> sp.csr_matrix:
    return sp.diags(grid.points, 0, format="csr")


def tensor_embed(op, slot: int, basis: CompositeBasis | ModelBasis) -> sp.csr_matrix:
    """Lift a single-factor matrix to the full space, identity on all other factors."""
    dims = basis.dims
    if not 0 <= slot < len(dims):
        raise IndexError(f"slot {slot} out of range for {len(dims)} factors")
    op = sp.csr_matrix(op)
    if op.shape != (dims[slot], dims[slot]):
        raise ValueError(f"operator shape {op.shape} does not match factor dimension {dims[slot]}")
    left = int(np.prod(dims[:slot]))
    right = int(np.prod(dims[slot + 1:]))
    out = op
    if right > 1:
        out = sp.kron(out, sp.identity(right, format="csr"), format="csr")
    if left > 1:
        out = sp.kron(sp.identity(left, format="csr"), out, format="csr")
    return sp.csr_matrix(out)
