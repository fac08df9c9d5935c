import math

import numpy as np
import pytest
import scipy.sparse as sp
import sympy
from sympy.physics.quantum import Dagger
from sympy.physics.quantum.boson import BosonOp
from sympy.physics.quantum.operatorordering import normal_ordered_form

from lwqed.errors import ConfigurationError, PreconditionError
from lwqed.hamiltonians import (
    ExternalPotential,
    Mode,
    ModeSet,
    build_length_gauge,
    build_velocity_gauge,
    dipole_field_energy_demo,
    dipole_self_energy,
    electronic_matrix,
    polaritonic_translation,
    translation_defect,
)
from lwqed.hamiltonians.modes import mode_constant
from lwqed.hilbert import CompositeBasis, FockSpec, GridSpec, position_operator, tensor_embed
from lwqed.spectra import EigenRequest, lowest_eigenpairs


# --- modes and potentials


def test_mode_rejects_nonpositive_frequency():
    with pytest.raises(ConfigurationError):
        Mode(0.0, 0.1)
    with pytest.raises(ConfigurationError):
        Mode(-1.0, 0.1)


def test_volume_consistency():
    ms = ModeSet.from_volume([1.0, 2.0], 50.0)
    C = mode_constant(50.0)
    assert ms[1].lam == pytest.approx(math.sqrt(2.0) * C / 137.035999, rel=1e-14)
    with pytest.raises(ConfigurationError):
        ModeSet((Mode(1.0, 0.3),), quantization_volume=50.0)


def test_epsilon_sign_flips_coupling():
    assert Mode(1.0, 0.2, -1).coupling == -0.2


def test_potentials_bounded_and_decaying():
    for v in (ExternalPotential.gaussian_well(1.0, 1.0), ExternalPotential.soft_coulomb(1.0, 1.0)):
        assert v.bounded
        assert abs(v(np.array([1e6]))[0]) < 1e-5
    assert not ExternalPotential.harmonic(1.0).bounded
    assert ExternalPotential.gaussian_well(1.0, 1.0).symmetric


def test_tabulated_potential_length_checked():
    v = ExternalPotential.tabulated([0.0, 1.0, 2.0])
    with pytest.raises((ConfigurationError, PreconditionError, ValueError)):
        v.on_grid(GridSpec(0, 1, 5))


# --- length gauge


def _basis(n=101, n_max=8, lo=-8.0, hi=8.0, order=4, bc="dirichlet", n_modes=1):
    return CompositeBasis(GridSpec(lo, hi, n, bc, order), tuple(FockSpec(n_max) for _ in range(n_modes)))


def test_decoupled_ground_energy():
    b = _basis()
    v = ExternalPotential.harmonic(1.0)
    ms = ModeSet((Mode(1.0, 0.0), Mode(2.5, 0.0)))
    b = _basis(n_modes=2, n_max=3)
    e = lowest_eigenpairs(EigenRequest(build_length_gauge(b, ms, v, True), k=1))[0][0]
    e_el = np.linalg.eigvalsh(electronic_matrix(b.grid, v).toarray())[0]
    assert e == pytest.approx(e_el + 0.5 + 1.25, abs=1e-10)


def _coupled_oscillator_ground(Omega, omega, lam):
    # x with mass m=1 and spring Omega^2 + lam^2/omega; q with "mass" 1/omega, spring omega
    V = np.array([[Omega**2 + lam**2 / omega, -lam], [-lam, omega]])
    root = np.diag(np.sqrt([1.0, omega]))
    nu2 = np.linalg.eigvalsh(root @ V @ root)
    return 0.5 * float(np.sum(np.sqrt(nu2)))


def test_harmonic_ground_energy_matches_normal_modes():
    lam = 0.3
    # order-4 grid error is h^4: 2e-7 at 241 points, 1.4e-8 at 481
    b = _basis(n=481, n_max=24)
    ms = ModeSet.single(1.3, lam)
    e = lowest_eigenpairs(EigenRequest(build_length_gauge(b, ms, ExternalPotential.harmonic(1.0), True), k=1))[0][0]
    assert e == pytest.approx(_coupled_oscillator_ground(1.0, 1.3, lam), abs=5e-8)


def test_dip_toggle_is_exact_matrix_difference():
    b = _basis(n=41, n_max=5, n_modes=2)
    ms = ModeSet((Mode(1.0, 0.2), Mode(1.7, -0.1)))
    v = ExternalPotential.gaussian_well(1.0, 1.0)
    diff = build_length_gauge(b, ms, v, True).matrix - build_length_gauge(b, ms, v, False).matrix
    x = b.grid.points
    expected = tensor_embed(sp.diags(sum((m.lam * x) ** 2 / (2 * m.omega) for m in ms), 0), 0, b)
    # (A + D) - A reproduces D up to rounding of the sum
    scale = abs(build_length_gauge(b, ms, v, True).matrix).max()
    assert abs(diff - expected).max() <= 4 * np.finfo(float).eps * scale
    assert abs(dipole_self_energy(b, ms).matrix - expected).max() == 0.0


def test_mode_count_mismatch_rejected():
    with pytest.raises(ConfigurationError):
        build_length_gauge(_basis(n_modes=2), ModeSet.single(1.0, 0.1), ExternalPotential.zero())


# --- velocity gauge


def test_velocity_gauge_zero_coupling_identical():
    b = _basis(n=41, n_max=4)
    ms = ModeSet.single(1.0, 0.0)
    v = ExternalPotential.harmonic(1.0)
    assert abs(build_velocity_gauge(b, ms, v).matrix - build_length_gauge(b, ms, v, True).matrix).max() < 1e-14


def test_velocity_gauge_matches_length_gauge_spectrum():
    b = _basis(n=161, n_max=12)
    ms = ModeSet.single(1.0, 0.05)
    v = ExternalPotential.harmonic(1.0)
    eL = lowest_eigenpairs(EigenRequest(build_length_gauge(b, ms, v, True), k=5))[0]
    eV = lowest_eigenpairs(EigenRequest(build_velocity_gauge(b, ms, v), k=5))[0]
    assert np.max(np.abs(eL - eV)) < 1e-6


def test_velocity_gauge_without_dip_loses_ground_state_in_growing_box():
    ms = ModeSet.single(1.0, 0.3)
    v = ExternalPotential.harmonic(0.05)
    energies = []
    for L in (10.0, 20.0, 40.0):
        b = CompositeBasis(GridSpec.box(L, 0.25, 2), (FockSpec(30),))
        energies.append(lowest_eigenpairs(EigenRequest(build_velocity_gauge(b, ms, v, subtract_dip=True), k=1))[0][0])
    assert energies[0] > energies[1] > energies[2]


# --- polaritonic translation


def _ring(n=60, n_max=6):
    return CompositeBasis(GridSpec(-6.0, 6.0, n, "periodic", 2), (FockSpec(n_max),))


def test_zero_shift_is_identity():
    b = _ring()
    T = polaritonic_translation(b, ModeSet.single(1.0, 0.3), 0.0)
    assert abs(T - sp.identity(b.dim)).max() < 1e-15


def test_zero_coupling_translation_commutes_exactly():
    b = _ring()
    ms = ModeSet.single(1.0, 0.0)
    H = build_length_gauge(b, ms, ExternalPotential.zero(), True).matrix
    T = polaritonic_translation(b, ms, 3 * b.grid.spacing)
    assert (H @ T - T @ H).count_nonzero() == 0


def test_translation_rejects_dirichlet_and_off_grid_shift():
    ms = ModeSet.single(1.0, 0.3)
    with pytest.raises(PreconditionError):
        polaritonic_translation(_basis(n=11, n_max=2), ms, 0.0)
    with pytest.raises(PreconditionError):
        polaritonic_translation(_ring(), ms, 0.5 * _ring().grid.spacing)


def test_translation_defect_shrinks_with_fock_cutoff():
    g = GridSpec(-10.0, 10.0, 200, "periodic", 2)
    ms = ModeSet.single(1.0, 0.3)
    bulk = []
    for n_max in (5, 10, 20):
        b = CompositeBasis(g, (FockSpec(n_max),))
        H = build_length_gauge(b, ms, ExternalPotential.zero(), True)
        T = polaritonic_translation(b, ms, 5 * g.spacing)
        bulk.append(translation_defect(H, T, k=4, seam_sites=6).bulk_norm)
    assert bulk[0] > bulk[1] > bulk[2]
    assert bulk[-1] < 1e-10


def test_translation_is_unitary_on_ring_when_uncoupled():
    b = _ring()
    T = polaritonic_translation(b, ModeSet.single(1.0, 0.0), 4 * b.grid.spacing)
    assert abs(T @ T.T - sp.identity(b.dim)).max() < 1e-15


def test_position_operator_diagonal():
    g = GridSpec(-1, 1, 5)
    assert np.array_equal(position_operator(g).diagonal(), g.points)


# --- field-energy demo


def _sympy_bracket():
    """Normal-ordered eps0 L^3/2 (E^2 + c^2 B^2) for uniform single-mode fields, in units of hbar w."""
    a = BosonOp("a")
    ad = Dagger(a)
    w, c, C, eps0, L3, hbar = sympy.symbols("omega c C epsilon_0 L3 hbar", positive=True)
    E = C * (sympy.I / c) * sympy.sqrt(w / 2) * (a - ad)
    B = C * (sympy.I / c) * (w / c) / sympy.sqrt(2 * w) * (a - ad)
    expr = sympy.expand(eps0 * L3 / 2 * (E * E + c**2 * B * B))
    expr = expr.subs(C, sympy.sqrt(hbar * c**2 / (eps0 * L3)))
    expr = sympy.expand(normal_ordered_form(sympy.expand(expr), independent=True))
    expr = sympy.simplify(expr / (hbar * w))
    terms = sympy.Add.make_args(sympy.expand(expr))
    coeff = {"number": 0, "const": 0, "aa": 0, "adad": 0}
    for t in terms:
        c_part, ops = t.as_coeff_mul()
        op = sympy.Mul(*ops)
        if op == ad * a:
            coeff["number"] += c_part
        elif op == a**2:
            coeff["aa"] += c_part
        elif op == ad**2:
            coeff["adad"] += c_part
        elif not op.has(a):
            coeff["const"] += t
    return {k: float(v) for k, v in coeff.items()}


def test_field_energy_matches_operator_algebra():
    oracle = _sympy_bracket()
    # (hbar w / 2)(a a^+ + a^+ a - a^2 - a^+^2) = hbar w (a^+ a + 1/2) - (hbar w/2)(a^2 + a^+^2)
    assert oracle == pytest.approx({"number": 1.0, "const": 0.5, "aa": -0.5, "adad": -0.5}, abs=1e-15)
    demo = dipole_field_energy_demo(Mode(1.7, 0.1), FockSpec(8), volume=3.0)
    hw = demo.hbar_omega
    n = np.arange(9)
    W = demo.wrong_Hp
    inner = slice(0, 8)  # the top level sees the truncation of a a^+
    assert np.allclose(np.diag(W)[inner], hw * (oracle["number"] * n + oracle["const"])[inner], atol=1e-12)
    assert np.allclose(np.diag(W, 2), hw * oracle["aa"] * np.sqrt(n[2:] * n[1:-1]), atol=1e-12)
    assert demo.bracket_prefactor == pytest.approx(0.5 * hw, rel=1e-12)
    assert demo.number_coefficient == pytest.approx(hw, rel=1e-12)
    assert demo.factor_discrepancy == pytest.approx(0.5, rel=1e-12)


def test_field_energy_has_only_squeezing_offdiagonals():
    demo = dipole_field_energy_demo(Mode(1.0, 0.1))
    assert demo.squeezing_only_offdiagonal
    rep = demo.report()
    assert rep["bracket_prefactor_reference"] == demo.hbar_omega
    assert not np.allclose(demo.wrong_Hp, demo.correct_Hp)
