"""Energy of movable compactly supported trial states, with and without self-energy.

The electronic trial orbital is the normalized bump

    F_a(r) = N f(|r - a kappa|),   f(s) = exp(-1 / (1 - s^2)) for s < 1, 0 otherwise,

and the photon part is a superposition of low oscillator eigenstates.  For N
electrons the orbitals sit at a_i = [a + spacing (i-1)] kappa with disjoint
supports, so the Slater determinant behaves like a product state for every
one- and two-body expectation used here.

All 3D integrals of spherically symmetric densities are reduced to radial
(and, for displaced potentials, polar-angle) quadratures.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Sequence

import numpy as np
from scipy import integrate

from .errors import PreconditionError, QuadratureError
from .hamiltonians.modes import ModeSet
from .hamiltonians.potentials import ExternalPotential
from .hilbert import ATOMIC_UNITS, FockSpec, PhysicalConstants, ladder_operators

__all__ = [
    "MollifierConfig",
    "SlaterMollifierConfig",
    "PhotonTrialState",
    "EnergyBreakdown",
    "ScanResult",
    "bump",
    "mollifier_norm_and_kinetic",
    "radial_second_moment",
    "dipole_moment",
    "displaced_potential",
    "coulomb_point_charge",
    "coulomb_quadrature",
    "default_kappa",
    "trial_energy",
    "unboundedness_scan",
]

QUAD_TOL = 1e-10


def bump(s):
    s = np.asarray(s, dtype=float)
    out = np.zeros_like(s)
    inside = np.abs(s) < 1.0
    out[inside] = np.exp(-1.0 / (1.0 - s[inside] ** 2))
    return out


def _bump_laplacian_ratio(s: float) -> float:
    """(f'' + 2 f'/s) / f for the bump, finite at s = 0."""
    u = 1.0 - s * s
    return 4.0 * s * s / u**4 - (2.0 + 6.0 * s * s) / u**3 - 4.0 / u**2


def _quad(fn, a, b, what: str, **kw):
    val, err = integrate.quad(fn, a, b, epsabs=1e-14, epsrel=1e-13, limit=200, **kw)
    if err > QUAD_TOL * max(1.0, abs(val)):
        raise QuadratureError(f"{what}: quadrature error estimate {err:.2e} above tolerance")
    return val


@lru_cache(maxsize=None)
def _norm_squared_inverse() -> float:
    return _quad(lambda s: 4.0 * math.pi * s * s * math.exp(-2.0 / (1.0 - s * s)), 0.0, 1.0, "normalization")


@dataclass(frozen=True)
class MollifierConfig:
    a: float
    kappa: tuple[float, float, float] = (1.0, 0.0, 0.0)
    radius: float = 1.0

    def __post_init__(self):
        k = tuple(float(v) for v in self.kappa)
        if len(k) != 3:
            raise PreconditionError("kappa must have three components")
        object.__setattr__(self, "kappa", k)
        if self.radius != 1.0:
            raise PreconditionError("only unit-radius mollifiers are supported")

    @property
    def center(self) -> np.ndarray:
        return self.a * np.array(self.kappa)

    def centers(self) -> np.ndarray:
        return self.center[None, :]

    @property
    def n_electrons(self) -> int:
        return 1

    def with_a(self, a: float) -> "MollifierConfig":
        return MollifierConfig(a, self.kappa, self.radius)


@dataclass(frozen=True)
class SlaterMollifierConfig:
    n_electrons: int
    a: float
    kappa: tuple[float, float, float] = (1.0, 0.0, 0.0)
    spacing: float = 3.0

    def __post_init__(self):
        k = tuple(float(v) for v in self.kappa)
        if len(k) != 3:
            raise PreconditionError("kappa must have three components")
        object.__setattr__(self, "kappa", k)
        if int(self.n_electrons) != self.n_electrons or self.n_electrons < 1:
            raise PreconditionError("n_electrons must be a positive integer")

    @property
    def disjoint(self) -> bool:
        return self.n_electrons == 1 or self.spacing * float(np.linalg.norm(self.kappa)) >= 2.0

    def centers(self) -> np.ndarray:
        k = np.array(self.kappa)
        return np.array([(self.a + self.spacing * i) * k for i in range(self.n_electrons)])

    def with_a(self, a: float) -> "SlaterMollifierConfig":
        return SlaterMollifierConfig(self.n_electrons, a, self.kappa, self.spacing)


@dataclass(frozen=True, eq=False)
class PhotonTrialState:
    """Superposition sum_n c_n |n> of oscillator eigenstates of one mode."""

    weights: tuple[float, ...] = (1.0, 1.0)

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=float)
        if w.ndim != 1 or w.size < 1 or not np.any(w):
            raise PreconditionError("photon weights must be a non-zero 1D sequence")
        object.__setattr__(self, "weights", tuple(w / np.linalg.norm(w)))

    def _ops(self):
        # one extra level so that p^2 is exact on the occupied states
        return ladder_operators(FockSpec(len(self.weights)))

    def _vec(self) -> np.ndarray:
        return np.concatenate([self.weights, [0.0]])

    @property
    def mean_p(self) -> float:
        v = self._vec()
        return float(v @ (self._ops().p @ v))

    @property
    def mean_p2(self) -> float:
        v = self._vec()
        p = self._ops().p
        return float(v @ (p @ (p @ v)))

    def energy(self, omega: float, constants: PhysicalConstants = ATOMIC_UNITS) -> float:
        v = self._vec()
        n = self._ops().number
        return float(constants.hbar * omega * (v @ (n @ v) + 0.5))


def mollifier_norm_and_kinetic(config: MollifierConfig | None = None,
                               constants: PhysicalConstants = ATOMIC_UNITS) -> tuple[float, float]:
    """Normalization constant and kinetic energy of one bump orbital.

    The kinetic energy does not depend on the centre, so it is always
    evaluated for the bump at the origin through -hbar^2/2m <f|f'' + 2f'/r>.
    """
    inv = _norm_squared_inverse()
    norm = 1.0 / math.sqrt(inv)

    def integrand(s):
        return 4.0 * math.pi * s * s * math.exp(-2.0 / (1.0 - s * s)) * _bump_laplacian_ratio(s)

    lap = _quad(integrand, 0.0, 1.0, "kinetic energy")
    T = -(constants.hbar**2 / (2.0 * constants.m)) * norm**2 * lap
    return norm, T


def radial_second_moment() -> float:
    """<|r - centre|^2> of the normalized bump density."""
    inv = _norm_squared_inverse()
    val = _quad(lambda s: 4.0 * math.pi * s**4 * math.exp(-2.0 / (1.0 - s * s)), 0.0, 1.0, "second moment")
    return val / inv


@dataclass(frozen=True)
class DipoleMoment:
    vector: np.ndarray
    centered_residual: float


def dipole_moment(config: MollifierConfig) -> DipoleMoment:
    """<F|r|F> = centre; the residual is the quadrature of the centred first moment."""
    inv = _norm_squared_inverse()

    def inner(s):
        # integral over mu of s*mu times the azimuthal factor 2 pi
        val, _ = integrate.quad(lambda mu: 2.0 * math.pi * s * mu, -1.0, 1.0)
        return s * s * math.exp(-2.0 / (1.0 - s * s)) * val

    resid = _quad(inner, 0.0, 1.0, "centred first moment") / inv
    return DipoleMoment(np.array(config.center, dtype=float), abs(resid))


def displaced_potential(v_ext: ExternalPotential, distance: float,
                        constants: PhysicalConstants = ATOMIC_UNITS) -> float:
    """<F|v(|r|)|F> for a bump centred at ``distance`` from the potential's centre."""
    if v_ext.kind == "zero":
        return 0.0
    inv = _norm_squared_inverse()
    d = float(distance)

    def shell(s):
        if s == 0.0:
            return 0.0

        def ang(mu):
            r = math.sqrt(max(d * d + s * s + 2.0 * d * s * mu, 0.0))
            return float(v_ext.radial(np.array([r]), constants)[0])

        val, _ = integrate.quad(ang, -1.0, 1.0, epsabs=1e-15, epsrel=1e-12)
        return 2.0 * math.pi * s * s * math.exp(-2.0 / (1.0 - s * s)) * val

    return _quad(shell, 0.0, 1.0, "displaced potential") / inv


def coulomb_point_charge(centers: np.ndarray, constants: PhysicalConstants = ATOMIC_UNITS) -> float:
    """sum_{i<j} e^2 / (4 pi eps0 |a_i - a_j|): exact for disjoint spherical charges."""
    w = 0.0
    for i in range(len(centers)):
        for j in range(i + 1, len(centers)):
            w += constants.coulomb / float(np.linalg.norm(centers[i] - centers[j]))
    return w


def _enclosed_potential(r: np.ndarray, constants: PhysicalConstants) -> np.ndarray:
    """Electrostatic potential energy (times e) of a unit bump charge at distance r."""
    inv = _norm_squared_inverse()
    out = np.empty_like(r)
    for i, ri in enumerate(r):
        lo = min(ri, 1.0)
        q_in = _quad(lambda s: 4.0 * math.pi * s * s * math.exp(-2.0 / (1.0 - s * s)), 0.0, lo, "enclosed charge") / inv if lo > 0 else 0.0
        outer = 0.0
        if ri < 1.0:
            outer = _quad(lambda s: 4.0 * math.pi * s * math.exp(-2.0 / (1.0 - s * s)), ri, 1.0, "outer shell") / inv
        out[i] = constants.coulomb * (q_in / ri + outer)
    return out


def coulomb_quadrature(centers: np.ndarray, n_radial: int = 48, n_angular: int = 48,
                       constants: PhysicalConstants = ATOMIC_UNITS) -> float:
    """Pair interaction by integrating one density against the potential of the other.

    The potential of bump i is built from its radially enclosed charge; the
    average over bump j uses Gauss-Legendre nodes in the radius and in the
    cosine of the angle to the line joining the centres.
    """
    inv = _norm_squared_inverse()
    xs, ws = np.polynomial.legendre.leggauss(n_radial)
    s = 0.5 * (xs + 1.0)
    ws_r = 0.5 * ws
    mu, wmu = np.polynomial.legendre.leggauss(n_angular)
    dens = 2.0 * math.pi * s**2 * bump(s) ** 2 / inv
    w = 0.0
    for i in range(len(centers)):
        for j in range(i + 1, len(centers)):
            D = float(np.linalg.norm(centers[i] - centers[j]))
            r = np.sqrt(D * D + s[:, None] ** 2 + 2.0 * D * s[:, None] * mu[None, :])
            phi = _enclosed_potential(r.ravel(), constants).reshape(r.shape)
            w += float(np.sum(ws_r[:, None] * wmu[None, :] * dens[:, None] * phi))
    return w


def default_kappa(modes: ModeSet) -> np.ndarray:
    """lam / |lam|^2 for one mode, the unit vector along sum_a lam_a otherwise."""
    lam = _coupling_vectors(modes)
    if len(modes) == 1:
        n2 = float(lam[0] @ lam[0])
        if n2 == 0.0:
            return np.array([1.0, 0.0, 0.0])
        return lam[0] / n2
    tot = lam.sum(axis=0)
    nrm = float(np.linalg.norm(tot))
    return tot / nrm if nrm > 0 else np.array([1.0, 0.0, 0.0])


def _coupling_vectors(modes: ModeSet) -> np.ndarray:
    # every mode is polarized along the x axis of the 3D trial geometry
    return np.array([[m.coupling, 0.0, 0.0] for m in modes])


@dataclass
class EnergyBreakdown:
    kinetic: float
    photon: float
    potential: float
    coulomb: float
    bilinear: float
    dip: float
    mean_p: tuple = ()
    coulomb_check: float | None = None

    @property
    def total(self) -> float:
        return self.kinetic + self.photon + self.potential + self.coulomb + self.bilinear + self.dip

    def as_dict(self) -> dict:
        return {
            "kinetic": self.kinetic,
            "photon": self.photon,
            "potential": self.potential,
            "coulomb": self.coulomb,
            "bilinear": self.bilinear,
            "dip": self.dip,
            "total": self.total,
        }


def _photon_states(photon, modes: ModeSet) -> list[PhotonTrialState]:
    if photon is None:
        return [PhotonTrialState() for _ in modes]
    if isinstance(photon, PhotonTrialState):
        return [photon for _ in modes]
    states = list(photon)
    if len(states) != len(modes):
        raise PreconditionError("need one photon trial state per mode")
    return states


def trial_energy(config: MollifierConfig | SlaterMollifierConfig, photon, modes: ModeSet,
                 v_ext: ExternalPotential, include_dip: bool = False, coulomb_check: bool = False,
                 constants: PhysicalConstants | None = None) -> EnergyBreakdown:
    """Expectation value of the length-gauge Hamiltonian in the product trial state.

    Parts: N T, sum of photon energies, sum_i <v_ext> at each centre, the
    Coulomb repulsion (point-charge form; ``coulomb_check`` adds the
    quadrature route for comparison), the bilinear term
    -sum_a <p_a> lam_a . sum_i a_i, and optionally the self-energy
    sum_a [(lam_a . sum_i a_i)^2 + N |lam_a|^2 <s^2>/3] / (2 hbar w_a).
    """
    c = constants or modes.constants
    if isinstance(config, SlaterMollifierConfig) and not config.disjoint:
        raise PreconditionError("mollifier supports overlap; need spacing * |kappa| >= 2")
    centers = config.centers()
    N = len(centers)
    states = _photon_states(photon, modes)
    lam = _coupling_vectors(modes)
    R = centers.sum(axis=0)

    _, T = mollifier_norm_and_kinetic(None, c)
    photon_e = sum(st.energy(m.omega, c) for st, m in zip(states, modes))
    pot = sum(displaced_potential(v_ext, float(np.linalg.norm(ctr)), c) for ctr in centers)
    W = coulomb_point_charge(centers, c) if N > 1 else 0.0
    W_check = coulomb_quadrature(centers, constants=c) if (coulomb_check and N > 1) else None
    mean_p = tuple(st.mean_p for st in states)
    bil = -sum(mp * float(l @ R) for mp, l in zip(mean_p, lam))
    dip = 0.0
    if include_dip:
        s2 = radial_second_moment()
        for l, m in zip(lam, modes):
            dip += (float(l @ R) ** 2 + N * float(l @ l) * s2 / 3.0) / (2.0 * c.hbar * m.omega)
    return EnergyBreakdown(N * T, photon_e, pot, W, bil, dip, mean_p, W_check)


def interaction_second_moment(config, photon, modes: ModeSet) -> float:
    """<V_int psi | V_int psi> for the trial state; finite for every bump configuration."""
    states = _photon_states(photon, modes)
    lam = _coupling_vectors(modes)
    centers = config.centers()
    N = len(centers)
    R = centers.sum(axis=0)
    s2 = radial_second_moment()
    total = 0.0
    for i, (la, sa) in enumerate(zip(lam, states)):
        for j, (lb, sb) in enumerate(zip(lam, states)):
            # <(la.R)(lb.R)> for disjoint bumps
            rr = float(la @ R) * float(lb @ R) + N * float(la @ lb) * s2 / 3.0
            pp = sa.mean_p2 if i == j else sa.mean_p * sb.mean_p
            total += rr * pp
    return total


@dataclass
class ScanResult:
    a: np.ndarray
    totals: np.ndarray
    breakdowns: list
    include_dip: bool
    slope: float
    expected_slope: float
    tail: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=bool))

    @property
    def slope_relative_error(self) -> float:
        if self.expected_slope == 0.0:
            return abs(self.slope)
        return abs(self.slope - self.expected_slope) / abs(self.expected_slope)

    @property
    def argmin(self) -> int:
        return int(np.argmin(self.totals))

    @property
    def minimum_interior(self) -> bool:
        return 0 < self.argmin < len(self.a) - 1 or (self.argmin == 0 and self.totals[-1] > self.totals[0])

    @property
    def tail_increasing(self) -> bool:
        t = self.totals[self.tail]
        return bool(np.all(np.diff(t) > 0))

    @property
    def tail_decreasing(self) -> bool:
        t = self.totals[self.tail]
        return bool(np.all(np.diff(t) < 0))


def unboundedness_scan(a_values: Sequence[float], config, photon, modes: ModeSet, v_ext: ExternalPotential,
                       include_dip: bool = False, tail_start: float | None = None,
                       potential_cutoff: float = 1e-14, jobs: int = 1) -> ScanResult:
    """Trial energy along the displacement parameter a.

    The tail used for the slope fit is a >= ``tail_start`` if given, otherwise
    the points where the external-potential contribution is below
    ``potential_cutoff`` in magnitude.  The expected slope is
    -<p> N sum_a lam_a . kappa (first mode's <p> times each coupling, i.e.
    sum_a <p_a> lam_a . kappa in general).
    """
    a = np.asarray(list(a_values), dtype=float)
    cfgs = [config.with_a(float(x)) for x in a]

    def one(cfg):
        return trial_energy(cfg, photon, modes, v_ext, include_dip)

    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            parts = list(pool.map(one, cfgs))
    else:
        parts = [one(c) for c in cfgs]
    totals = np.array([p.total for p in parts])
    if tail_start is not None:
        tail = a >= tail_start
    else:
        tail = np.array([abs(p.potential) <= potential_cutoff for p in parts])
    slope = float("nan")
    if tail.sum() >= 2:
        slope = float(np.polyfit(a[tail], totals[tail], 1)[0]) if not include_dip else float("nan")
    states = _photon_states(photon, modes)
    lam = _coupling_vectors(modes)
    kappa = np.array(config.kappa)
    N = config.n_electrons
    expected = -N * sum(st.mean_p * float(l @ kappa) for st, l in zip(states, lam))
    return ScanResult(a, totals, parts, include_dip, slope, expected, tail)
