"""Exact analysis of the length-gauge Hamiltonian at v_ext = 0.

Without an external potential the Hamiltonian is quadratic in the normalized
centre-of-mass coordinate X = R / sqrt(N) (R = sum of electron positions) and
the photon displacements p_a::

    H = K_X P_X^2 + sum_a K_a pi_a^2 + 1/2 y^T V y,   y = (X, p_1, ..., p_M)

with [X, P_X] = i hbar and [p_a, pi_a] = i (pi_a = -i d/dp_a).  Relative
electron coordinates decouple and are ignored.  Linear observables
O = a.y + b.pi are tracked as coefficient vectors, so Heisenberg equations
of motion reduce to exact small-matrix algebra.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigurationError, InvariantViolation, PreconditionError
from .hamiltonians.modes import ModeSet, mode_constant
from .hilbert import PhysicalConstants

__all__ = [
    "QuadraticForm",
    "assemble_quadratic",
    "NormalModeResult",
    "normal_modes",
    "potential_inertia",
    "PlasmaFrequency",
    "plasma_frequency",
    "LinearObservable",
    "FieldOperators",
    "field_operators",
    "MaxwellEomReport",
    "maxwell_eom_check",
]


@dataclass(frozen=True, eq=False)
class QuadraticForm:
    labels: tuple[str, ...]
    K: np.ndarray
    V: np.ndarray
    scales: np.ndarray
    constants: PhysicalConstants
    n_electrons: int = 1
    include_dip: bool = True

    def __post_init__(self):
        n = len(self.labels)
        if self.K.shape != (n,) or self.V.shape != (n, n) or self.scales.shape != (n,):
            raise ValueError("inconsistent quadratic-form dimensions")
        if np.any(self.K <= 0):
            raise ValueError("kinetic coefficients must be positive")
        if not np.array_equal(self.V, self.V.T):
            raise InvariantViolation("potential matrix is not symmetric")

    @property
    def size(self) -> int:
        return len(self.labels)

    @property
    def kinetic_matrix(self) -> np.ndarray:
        return np.diag(self.K)

    @property
    def mobility(self) -> np.ndarray:
        """Diagonal W with d^2 y/dt^2 = -W V y."""
        hbar = self.constants.hbar
        return 2.0 * self.K * self.scales**2 / hbar**2


def assemble_quadratic(modes: ModeSet, n_electrons: int = 1, include_dip: bool = True) -> QuadraticForm:
    if int(n_electrons) != n_electrons or n_electrons < 1:
        raise PreconditionError(f"n_electrons must be a positive integer, got {n_electrons!r}")
    c = modes.constants
    M = len(modes)
    lam = modes.couplings
    w = modes.omegas
    V = np.zeros((M + 1, M + 1))
    if include_dip:
        V[0, 0] = float(np.sum(lam**2 * n_electrons / (c.hbar * w)))
    V[0, 1:] = -lam * math.sqrt(n_electrons)
    V[1:, 0] = V[0, 1:]
    V[1:, 1:] = np.diag(c.hbar * w)
    K = np.concatenate([[1.0 / (2.0 * c.m)], 0.5 * c.hbar * w])
    scales = np.concatenate([[c.hbar], np.ones(M)])
    labels = ("X",) + tuple(f"p_{i + 1}" for i in range(M))
    return QuadraticForm(labels, K, V, scales, c, int(n_electrons), include_dip)


@dataclass(frozen=True, eq=False)
class NormalModeResult:
    """Normal-mode frequencies; unstable directions appear as negative ``nu_squared``."""

    nu_squared: np.ndarray
    modes: np.ndarray
    stable: bool

    @property
    def frequencies(self) -> np.ndarray:
        """sqrt(|nu^2|); check ``unstable`` for which ones are imaginary."""
        return np.sqrt(np.abs(self.nu_squared))

    @property
    def unstable(self) -> np.ndarray:
        return self.nu_squared < -1e-12


def normal_modes(qf: QuadraticForm) -> NormalModeResult:
    """Solve d^2y/dt^2 = -W V y through the symmetric matrix W^(1/2) V W^(1/2)."""
    root = np.sqrt(qf.mobility)
    sym = root[:, None] * qf.V * root[None, :]
    sym = 0.5 * (sym + sym.T)
    nu2, vec = np.linalg.eigh(sym)
    scale = max(1.0, float(np.max(np.abs(nu2))))
    nu2 = np.where(np.abs(nu2) < 1e-14 * scale, 0.0, nu2)
    modes = root[:, None] * vec
    return NormalModeResult(nu2, modes, bool(np.all(nu2 >= -1e-12)))


def potential_inertia(qf: QuadraticForm, tol: float = 1e-12) -> tuple[int, int, int]:
    """(negative, zero, positive) eigenvalue counts of V, relative threshold ``tol``."""
    ev = np.linalg.eigvalsh(qf.V)
    thr = tol * max(1.0, float(np.max(np.abs(ev))))
    return int(np.sum(ev < -thr)), int(np.sum(np.abs(ev) <= thr)), int(np.sum(ev > thr))


@dataclass(frozen=True)
class PlasmaFrequency:
    reduced_squared: np.ndarray
    density_squared: float | None

    @property
    def reduced(self) -> np.ndarray:
        return np.sqrt(self.reduced_squared)

    @property
    def total_squared(self) -> float:
        """Shift of omega^2 for every mode: the sum of the per-mode values."""
        return float(np.sum(self.reduced_squared))


def plasma_frequency(modes: ModeSet | None, n_electrons: int, constants: PhysicalConstants | None = None,
                     volume: float | None = None) -> PlasmaFrequency:
    """omega_p^2 = N lam^2 / (m hbar omega) per mode, and n e^2 / (m eps0) when a volume is known.

    When both are computable they must agree to 1e-12 relative for every
    mode whose coupling is consistent with the volume.
    """
    if n_electrons < 1:
        raise PreconditionError("n_electrons must be >= 1")
    if modes is None and volume is None:
        raise ConfigurationError("plasma frequency needs either couplings or a quantization volume")
    c = constants or (modes.constants if modes is not None else None)
    if c is None:
        from .hilbert import ATOMIC_UNITS
        c = ATOMIC_UNITS
    vol = volume if volume is not None else (modes.quantization_volume if modes is not None else None)
    density = None
    if vol is not None:
        density = (n_electrons / vol) * c.e**2 / (c.m * c.eps0)
    if modes is None:
        return PlasmaFrequency(np.array([density]), density)
    reduced = n_electrons * modes.couplings**2 / (c.m * c.hbar * modes.omegas)
    if density is not None:
        C = mode_constant(vol, c)
        for i, m in enumerate(modes):
            consistent = abs(abs(m.lam) - math.sqrt(m.omega) * c.e * C / c.c) <= 1e-12 * max(1.0, abs(m.lam))
            if consistent and abs(reduced[i] - density) > 1e-12 * max(density, 1e-300):
                raise InvariantViolation(f"mode {i}: plasma frequency forms disagree ({reduced[i]!r} vs {density!r})")
    return PlasmaFrequency(reduced, density)


@dataclass(frozen=True, eq=False)
class LinearObservable:
    """O = a . y + b . pi on a given quadratic form."""

    a: np.ndarray
    b: np.ndarray

    def __add__(self, other):
        return LinearObservable(self.a + other.a, self.b + other.b)

    def __sub__(self, other):
        return LinearObservable(self.a - other.a, self.b - other.b)

    def __mul__(self, s: float):
        return LinearObservable(s * self.a, s * self.b)

    __rmul__ = __mul__

    def norm(self) -> float:
        return float(np.linalg.norm(np.concatenate([self.a, self.b])))


def time_derivative(qf: QuadraticForm, obs: LinearObservable) -> LinearObservable:
    """(i/hbar)[H, O] for a linear observable."""
    hbar = qf.constants.hbar
    a_new = -(qf.V @ (qf.scales * obs.b)) / hbar
    b_new = (2.0 * qf.K * qf.scales / hbar) * obs.a
    return LinearObservable(a_new, b_new)


@dataclass(frozen=True, eq=False)
class FieldOperators:
    """Electric field per mode, displacement/eps0, polarization/eps0, vector potential per mode,
    and the total electron momentum."""

    E_modes: list
    D_over_eps0: LinearObservable
    P_over_eps0: LinearObservable
    A_modes: list
    momentum: LinearObservable

    @property
    def E(self) -> LinearObservable:
        out = self.E_modes[0]
        for e in self.E_modes[1:]:
            out = out + e
        return out


def field_operators(qf: QuadraticForm, modes: ModeSet) -> FieldOperators:
    """Field observables along the polarization axis as coefficient vectors.

    E_a = f_a (p_a - c_a R) with f_a = lam_a / e (the mode constant times
    sqrt(w_a)/c) and c_a = lam_a / (hbar w_a); D/eps0 = sum_a f_a p_a;
    P/eps0 = sum_a lam_a^2 R / (e hbar w_a); A_a = (f_a c / w_a) pi_a.
    A mode with zero coupling gets f_a = 1 so that its field is still visible.
    """
    c = qf.constants
    n = qf.size
    rootN = math.sqrt(qf.n_electrons)
    zero = np.zeros(n)
    E_modes, A_modes = [], []
    D = LinearObservable(zero.copy(), zero.copy())
    P = LinearObservable(zero.copy(), zero.copy())
    for i, m in enumerate(modes, start=1):
        lam = m.coupling
        f = lam / c.e if lam != 0.0 else float(m.epsilon_sign)
        ca = lam / (c.hbar * m.omega)
        a = zero.copy()
        a[i] = f
        a[0] = -f * ca * rootN
        E_modes.append(LinearObservable(a, zero.copy()))
        d = zero.copy()
        d[i] = f
        D = D + LinearObservable(d, zero.copy())
        pa = zero.copy()
        pa[0] = lam**2 * rootN / (c.e * c.hbar * m.omega)
        P = P + LinearObservable(pa, zero.copy())
        b = zero.copy()
        b[i] = f * c.c / m.omega
        A_modes.append(LinearObservable(zero.copy(), b))
    mom = zero.copy()
    mom[0] = rootN  # P_total = sqrt(N) P_X
    return FieldOperators(E_modes, D, P, A_modes, LinearObservable(zero.copy(), mom))


@dataclass
class MaxwellEomReport:
    """Residual norms of the field equations of motion on coefficient vectors.

    ``electric_field``: d^2E/dt^2 + sum_a w_a^2 E_a + Omega_p^2 E.
    ``displacement_source``: d^2E/dt^2 + sum_a w_a^2 E_a + Omega_p^2 D/eps0.
    ``vector_potential``: d^2A_a/dt^2 + w_a^2 A_a - (f_a c c_a / m) P_total, summed over modes.
    ``displacement_identity``: D/eps0 - E - P/eps0.
    """

    include_dip: bool
    omega_p_squared: float
    residuals: dict = field(default_factory=dict)
    lhs: dict = field(default_factory=dict)
    rhs: dict = field(default_factory=dict)
    extras: dict = field(default_factory=dict)

    def residual(self, name: str) -> float:
        return self.residuals[name]


def maxwell_eom_check(modes: ModeSet, n_electrons: int = 1, include_dip: bool = True) -> MaxwellEomReport:
    qf = assemble_quadratic(modes, n_electrons, include_dip)
    ops = field_operators(qf, modes)
    c = qf.constants
    wp2 = plasma_frequency(modes, n_electrons).total_squared

    E = ops.E
    E2 = time_derivative(qf, time_derivative(qf, E))
    bare = ops.E_modes[0] * modes[0].omega**2
    for e, m in zip(ops.E_modes[1:], modes.modes[1:]):
        bare = bare + e * m.omega**2
    lhs = E2 + bare
    r_field = lhs + E * wp2
    r_disp = lhs + ops.D_over_eps0 * wp2

    r_vec = 0.0
    for i, (A, m) in enumerate(zip(ops.A_modes, modes), start=1):
        A2 = time_derivative(qf, time_derivative(qf, A))
        lam = m.coupling
        f = lam / c.e if lam != 0.0 else float(m.epsilon_sign)
        source = ops.momentum * (f * c.c * (lam / (c.hbar * m.omega)) / c.m)
        r_vec += (A2 + A * m.omega**2 - source).norm() ** 2
    r_ident = ops.D_over_eps0 - E - ops.P_over_eps0

    report = MaxwellEomReport(include_dip, wp2)
    report.residuals = {
        "electric_field": r_field.norm(),
        "displacement_source": r_disp.norm(),
        "vector_potential": math.sqrt(r_vec),
        "displacement_identity": r_ident.norm(),
    }
    report.lhs = {"field_equation": lhs}
    report.rhs = {"electric_field": E * (-wp2), "displacement_source": ops.D_over_eps0 * (-wp2)}
    report.extras = {"polarization_norm": ops.P_over_eps0.norm()}
    return report
