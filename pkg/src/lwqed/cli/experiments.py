"""The named experiments behind ``lwqed run``.

Each runner takes a validated :class:`ExperimentConfig` and a worker count
and returns a :class:`ResultTable` whose verdict says whether the physical
claim the experiment demonstrates holds for the configured parameters.
"""

from __future__ import annotations

import math
import warnings
from typing import Callable

import numpy as np

from ..errors import ScfConvergenceError
from ..hamiltonians import (
    ExternalPotential,
    Mode,
    ModeSet,
    build_dicke,
    build_jaynes_cummings,
    build_length_gauge,
    build_rabi,
    dipole_field_energy_demo,
    excitation_number,
    polaritonic_translation,
    translation_defect,
    two_level_reduction,
)
from ..hilbert import CompositeBasis, FockSpec, GridSpec, PhysicalConstants
from ..quadratic import assemble_quadratic, maxwell_eom_check, normal_modes, plasma_frequency
from ..semiclassical import (
    ScfConfig,
    build_fixed_displacement,
    build_standard_semiclassical,
    harmonic_closed_forms,
    stark_scan,
)
from ..spectra import box_growth_scan, gauge_equivalence_scan, photon_like_excitation
from ..variational import (
    MollifierConfig,
    PhotonTrialState,
    SlaterMollifierConfig,
    coulomb_quadrature,
    default_kappa,
    unboundedness_scan,
)
from .config import EXPERIMENTS, ExperimentConfig
from .io import ResultTable

__all__ = ["RUNNERS", "DESCRIPTIONS", "run_experiment", "build_constants", "build_modes", "build_grid",
           "build_potential"]


def build_constants(cfg: ExperimentConfig) -> PhysicalConstants:
    return PhysicalConstants(**(cfg.get("constants") or {}))


def build_modes(cfg: ExperimentConfig) -> ModeSet:
    c = build_constants(cfg)
    modes = tuple(Mode(float(m["omega"]), float(m.get("lam", 0.0)), int(m.get("epsilon_sign", 1)))
                  for m in cfg.get("modes"))
    return ModeSet(modes, cfg.get("quantization_volume"), c)


def build_grid(cfg: ExperimentConfig) -> GridSpec:
    g = cfg.get("grid")
    return GridSpec(float(g["x_min"]), float(g["x_max"]), int(g["n_points"]), g.get("boundary", "dirichlet"),
                    int(g.get("stencil_order", 2)))


def build_potential(cfg: ExperimentConfig) -> ExternalPotential:
    p = dict(cfg.get("potential"))
    kind = p.pop("kind")
    if kind == "zero":
        return ExternalPotential.zero()
    if kind == "tabulated":
        return ExternalPotential.tabulated(p["values"])
    return getattr(ExternalPotential, kind)(**p)


def _fock(cfg: ExperimentConfig) -> FockSpec:
    return FockSpec(int(cfg.get("fock")["n_max"]))


def _rel(a: float, b: float) -> float:
    return abs(a - b) / abs(b) if b != 0 else abs(a)


# --------------------------------------------------------------------------- runners


def gauge_equivalence(cfg: ExperimentConfig, jobs: int) -> ResultTable:
    s = cfg.scan
    rep = gauge_equivalence_scan(build_grid(cfg), build_modes(cfg), build_potential(cfg), tuple(s["n_max"]),
                                 k=int(s["k"]), tol=float(s["tol"]), floor=float(s["floor"]), seed=cfg.seed,
                                 jobs=jobs)
    t = ResultTable(["n_max", "level", "E_length", "E_velocity", "abs_diff"])
    for n, eL, eV in zip(rep.n_max, rep.length, rep.velocity):
        for i, (a, b) in enumerate(zip(eL, eV)):
            t.add(int(n), i, float(a), float(b), float(abs(a - b)))
    t.verdict = rep.agree and rep.monotone
    t.footer = {"max_gap_per_n_max": rep.gaps, "agree": rep.agree, "monotone": rep.monotone}
    return t


def _variational(cfg: ExperimentConfig, jobs: int, slater: bool) -> ResultTable:
    s = cfg.scan
    modes = build_modes(cfg)
    v_ext = build_potential(cfg)
    include_dip = bool((cfg.get("flags") or {}).get("include_dip", False))
    kappa = tuple(s["kappa"]) if s["kappa"] is not None else tuple(default_kappa(modes))
    n_el = int(s["n_electrons"])
    if slater or n_el > 1:
        trial = SlaterMollifierConfig(n_el, 0.0, kappa, float(s["spacing"]))
    else:
        trial = MollifierConfig(0.0, kappa)
    photon = PhotonTrialState(np.asarray(s["photon_weights"], dtype=float))
    res = unboundedness_scan(s["a"], trial, photon, modes, v_ext, include_dip, s["tail_start"], jobs=jobs)

    cols = ["a", "kinetic", "photon", "potential", "coulomb", "bilinear", "dip", "total"]
    check_coulomb = slater and n_el > 1
    if check_coulomb:
        cols += ["coulomb_quadrature", "coulomb_relative_diff"]
    t = ResultTable(cols)
    worst = 0.0
    for a, b in zip(res.a, res.breakdowns):
        d = b.as_dict()
        row = [float(a), d["kinetic"], d["photon"], d["potential"], d["coulomb"], d["bilinear"], d["dip"], d["total"]]
        if check_coulomb:
            wq = coulomb_quadrature(trial.with_a(float(a)).centers(), constants=modes.constants)
            rd = _rel(wq, d["coulomb"])
            worst = max(worst, rd)
            row += [wq, rd]
        t.add(*row)

    footer = {"n_electrons": n_el, "kappa": list(kappa), "include_dip": include_dip,
              "mean_p": photon.mean_p, "argmin_a": float(res.a[res.argmin])}
    if include_dip:
        ok = bool(res.totals[-1] > res.totals[0] and res.minimum_interior)
        footer.update(coercive=ok, energy_first=float(res.totals[0]), energy_last=float(res.totals[-1]))
    else:
        footer.update(slope=res.slope, expected_slope=res.expected_slope,
                      slope_relative_error=res.slope_relative_error)
        if res.expected_slope == 0.0:
            ok = bool(abs(res.slope) <= float(s["slope_tol"]))
        else:
            ok = bool(res.slope_relative_error <= float(s["slope_tol"]))
    if check_coulomb:
        footer["coulomb_max_relative_diff"] = worst
        ok = ok and worst <= float(s["coulomb_tol"])
    t.verdict = ok
    t.footer = footer
    return t


def unboundedness(cfg, jobs):
    return _variational(cfg, jobs, slater=False)


def slater(cfg, jobs):
    return _variational(cfg, jobs, slater=True)


def depolarization(cfg: ExperimentConfig, jobs: int) -> ResultTable:
    s = cfg.scan
    modes = build_modes(cfg)
    m = modes[0]
    t = ResultTable(["method", "n_electrons", "omega", "lam", "omega_p", "omega_tilde", "shift_lhs", "shift_rhs",
                     "relative_error"])
    ok = True
    for N in s["n_electrons"]:
        wp2 = plasma_frequency(modes, int(N)).total_squared
        nm = normal_modes(assemble_quadratic(modes, int(N), True))
        wt = float(np.max(nm.frequencies))
        lhs = wt**2 - m.omega**2
        err = _rel(lhs, wp2)
        ok = ok and err <= float(s["nm_tol"]) and nm.stable
        t.add("normal-modes", int(N), m.omega, m.lam, math.sqrt(wp2), wt, lhs, wp2, err)
    footer = {}
    if s["ed"]:
        ex = photon_like_excitation(build_grid(cfg), modes, _fock(cfg).n_max, k=int(s["k"]), seed=cfg.seed)
        wp2 = plasma_frequency(modes, 1).total_squared
        hbar = modes.constants.hbar
        wt = ex.gap / hbar
        expected = math.sqrt(m.omega**2 + wp2)
        err = _rel(wt, expected)
        ok = ok and err <= float(s["ed_tol"])
        t.add("exact-diagonalization", 1, m.omega, m.lam, math.sqrt(wp2), wt, wt**2 - m.omega**2, wp2, err)
        footer = {"ed_state_index": ex.index, "ed_ground_energy": ex.ground_energy,
                  "ed_expected_gap": hbar * expected}
    t.verdict = ok
    t.footer = footer
    return t


def maxwell(cfg: ExperimentConfig, jobs: int) -> ResultTable:
    s = cfg.scan
    modes = build_modes(cfg)
    N = int(s["n_electrons"])
    tol = float(s["tol"])
    t = ResultTable(["include_dip", "equation", "residual", "omega_p_squared", "expected"])
    ok = True
    floors = {}
    for dip in (True, False):
        rep = maxwell_eom_check(modes, N, dip)
        pol = rep.extras["polarization_norm"]
        # with the self-energy the field obeys the E-form, without it only the D-form
        expect_zero = {"electric_field": dip, "displacement_source": not dip, "displacement_identity": True}
        for name, r in sorted(rep.residuals.items()):
            if name in expect_zero:
                if expect_zero[name]:
                    good = r <= tol
                    expected = "zero"
                else:
                    floor = 0.5 * rep.omega_p_squared * pol
                    floors[f"{name}_dip_{dip}"] = floor
                    good = r >= floor > 0
                    expected = "nonzero"
                ok = ok and good
            else:
                expected = "informational"
            t.add(dip, name, float(r), rep.omega_p_squared, expected)
    t.verdict = ok
    t.footer = {"nonzero_floors": floors}
    return t


def box_instability(cfg: ExperimentConfig, jobs: int) -> ResultTable:
    s = cfg.scan
    modes = build_modes(cfg)
    v_ext = build_potential(cfg)
    fock = _fock(cfg)
    h = float(s["spacing"])
    order = int((cfg.get("grid") or {}).get("stencil_order", 2))
    lengths = [float(x) for x in s["lengths"]]
    D = float(s["displacement"]) * modes.constants.eps0

    def grid(L):
        return GridSpec.box(L, h, order)

    cases: list[tuple[str, Callable, str]] = [
        ("length_gauge_no_dip", lambda L: build_length_gauge(CompositeBasis(grid(L), (fock,) * len(modes)),
                                                             modes, v_ext, False), "diverging"),
        ("length_gauge_with_dip", lambda L: build_length_gauge(CompositeBasis(grid(L), (fock,) * len(modes)),
                                                               modes, v_ext, True), "converged"),
        ("semiclassical_fixed_field", lambda L: build_standard_semiclassical(grid(L), v_ext, float(s["field"]),
                                                                             modes.constants), "diverging"),
        ("semiclassical_fixed_displacement", lambda L: build_fixed_displacement(grid(L), v_ext, modes, D),
         "converged"),
    ]
    t = ResultTable(["case", "box_length", "ground_energy", "decrement", "edge_distance", "centroid", "verdict",
                     "expected"])
    ok = True
    summary = {}
    for name, builder, expected in cases:
        rep = box_growth_scan(builder, lengths, tol=float(s["cauchy_tol"]), edge_margin=float(s["edge_margin"]),
                              seed=cfg.seed, jobs=jobs)
        good = rep.verdict == expected
        if expected == "diverging":
            good = good and rep.extras["edge_localized"]
        ok = ok and good
        summary[name] = {"verdict": rep.verdict, "expected": expected, "edge_localized": rep.extras["edge_localized"],
                         "changes": rep.changes}
        dec = [float("nan")] + list(rep.decrements)
        for L, E, d, ed, cen in zip(lengths, rep.ground_energies, dec, rep.extras["edge_distance"],
                                    rep.extras["centroid"]):
            t.add(name, L, float(E), d, ed, cen, rep.verdict, expected)
    t.verdict = ok
    t.footer = {"cases": summary}
    return t


def model_zoo(cfg: ExperimentConfig, jobs: int) -> ResultTable:
    s = cfg.scan
    tol = float(s["tol"])
    modes = build_modes(cfg)
    mode = modes[0]
    fock = _fock(cfg)
    c = modes.constants
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        red = two_level_reduction(build_grid(cfg), mode, build_potential(cfg), c)
    t = ResultTable(["check", "n_atoms", "value", "tolerance", "pass"])

    def add(name, n, value, tol_, good):
        t.add(name, n, float(value), tol_, bool(good))
        return bool(good)

    ok = True
    ok &= add("parity_defect", 1, red.parity_defect, 1e-8, red.parity_ok)
    e0 = np.linalg.eigvalsh(build_rabi(red, mode, fock, False, c).dense())
    e1 = np.linalg.eigvalsh(build_rabi(red, mode, fock, True, c).dense())
    ok &= add("rabi_offset_shift", 1, np.max(np.abs(e1 - e0 - red.G)), tol, np.max(np.abs(e1 - e0 - red.G)) <= tol)
    jc = build_jaynes_cummings(red, mode, fock, c)
    comm = jc.matrix @ excitation_number(1, fock) - excitation_number(1, fock) @ jc.matrix
    v = float(abs(comm).max()) if comm.nnz else 0.0
    ok &= add("jc_excitation_commutator", 1, v, 0.0, v == 0.0)
    for n in s["n_atoms"]:
        dk = build_dicke(red, mode, fock, int(n), c)
        nex = excitation_number(int(n), fock)
        cm = dk.matrix @ nex - nex @ dk.matrix
        v = float(abs(cm).max()) if cm.nnz else 0.0
        ok &= add("dicke_excitation_commutator", int(n), v, tol, v <= tol)
    d1 = build_dicke(red, mode, fock, 1, c).matrix - jc.matrix
    v = float(abs(d1).max()) if d1.nnz else 0.0
    ok &= add("dicke_one_atom_equals_jc", 1, v, 0.0, v == 0.0)
    t.verdict = ok
    t.footer = {"E_g": red.E_g, "E_e": red.E_e, "d_ge": red.d_ge, "Omega_R": red.Omega_R, "G": red.G,
                "warnings": [str(w.message) for w in caught]}
    return t


def stark(cfg: ExperimentConfig, jobs: int) -> ResultTable:
    s = cfg.scan
    modes = build_modes(cfg)
    v_ext = build_potential(cfg)
    grid = build_grid(cfg)
    scf = ScfConfig(float(s["mixing"]), float(s["tol"]), int(s["max_iter"]))
    res = stark_scan(grid, v_ext, modes, s["fields"], scf, modes.constants, jobs=jobs)
    if res.failures:
        # a partial polarizability fit is not a result; report it as non-convergence
        msgs = "; ".join(f"field {f!r}: {m}" for f, m in sorted(res.failures.items()))
        raise ScfConvergenceError(msgs)
    t = ResultTable(["field", "energy", "dipole", "converged"])
    for f, E, d, okf in zip(res.fields, res.energies, res.dipoles, res.converged):
        t.add(float(f), float(E), float(d), bool(okf))
    sos_err = res.relative_agreement
    ok = bool(np.all(res.converged)) and sos_err <= float(s["sos_tol"])
    footer = {"alpha": res.alpha, "alpha_sum_over_states": res.alpha_pt, "alpha_from_dipole": res.alpha_dipole,
              "sum_over_states_relative_error": sos_err, "E0_zero_field": res.E0_zero, "failures": res.failures}
    if v_ext.kind == "harmonic":
        closed = harmonic_closed_forms(float(v_ext.params["Omega"]), modes).polarizability
        err = _rel(res.alpha, closed)
        footer.update(alpha_closed_form=closed, closed_form_relative_error=err)
        ok = ok and err <= float(s["closed_form_tol"])
    t.verdict = ok
    t.footer = footer
    return t


def field_energy(cfg: ExperimentConfig, jobs: int) -> ResultTable:
    s = cfg.scan
    modes = build_modes(cfg)
    demo = dipole_field_energy_demo(modes[0], _fock(cfg), float(s["volume"]), modes.constants)
    t = ResultTable(["row", "col", "wrong_Hp", "correct_Hp", "delta_n"])
    W, C = demo.wrong_Hp, demo.correct_Hp
    rows, cols = np.nonzero((np.abs(W) > 0) | (np.abs(C) > 0))
    for i, j in zip(rows, cols):
        t.add(int(i), int(j), float(W[i, j].real), float(C[i, j].real), int(j - i))
    rep = demo.report()
    differs = not np.allclose(W, C, rtol=0.0, atol=1e-14 * demo.hbar_omega)
    t.verdict = bool(demo.squeezing_only_offdiagonal and differs)
    rep["vacuum_differs_from_half_hbar_omega"] = bool(abs(demo.vacuum_wrong - 0.5 * demo.hbar_omega)
                                                      > 1e-12 * demo.hbar_omega)
    t.footer = rep
    return t


def translation(cfg: ExperimentConfig, jobs: int) -> ResultTable:
    s = cfg.scan
    modes = build_modes(cfg)
    grid = build_grid(cfg)
    shift_sites = int(s["shift_sites"])
    shift = shift_sites * grid.spacing
    t = ResultTable(["n_max", "eigenspace_norm", "bulk_norm"])
    bulk = []
    for n in s["n_max"]:
        basis = CompositeBasis(grid, (FockSpec(int(n)),) * len(modes))
        H = build_length_gauge(basis, modes, ExternalPotential.zero(), True)
        T = polaritonic_translation(basis, modes, shift)
        d = translation_defect(H, T, k=int(s["k"]), seam_sites=shift_sites + 1, seed=cfg.seed)
        bulk.append(d.bulk_norm)
        t.add(int(n), d.eigenspace_norm, d.bulk_norm)
    # zero coupling: the translation is a pure grid shift and must commute exactly
    basis = CompositeBasis(grid, (FockSpec(int(s["n_max"][0])),) * len(modes))
    free = modes.scaled(0.0)
    H0 = build_length_gauge(basis, free, ExternalPotential.zero(), True)
    T0 = polaritonic_translation(basis, free, shift)
    c0 = H0.matrix @ T0 - T0 @ H0.matrix
    zero_comm = float(abs(c0).max()) if c0.nnz else 0.0
    decreasing = all(b <= a for a, b in zip(bulk, bulk[1:]))
    t.verdict = bool(zero_comm == 0.0 and decreasing and bulk[-1] <= float(s["bulk_tol"]))
    t.footer = {"zero_coupling_commutator": zero_comm, "bulk_decreasing": decreasing, "shift": shift}
    return t


RUNNERS: dict[str, Callable[[ExperimentConfig, int], ResultTable]] = {
    "gauge-equivalence": gauge_equivalence,
    "unboundedness-scan": unboundedness,
    "slater-scan": slater,
    "depolarization": depolarization,
    "maxwell-eom": maxwell,
    "box-instability": box_instability,
    "model-zoo": model_zoo,
    "stark": stark,
    "field-energy-demo": field_energy,
    "translation-check": translation,
}

DESCRIPTIONS = {
    "gauge-equivalence": "lowest eigenvalues of velocity and length gauge along Fock-cutoff doublings",
    "unboundedness-scan": "variational energy of a displaced bump trial state, with or without self-energy",
    "slater-scan": "N-electron bump scan with shell-theorem Coulomb cross-check",
    "depolarization": "shifted photon frequency from normal modes and from exact diagonalization",
    "maxwell-eom": "residuals of the field equations of motion with and without self-energy",
    "box-instability": "ground energy versus Dirichlet box length for four Hamiltonians",
    "model-zoo": "Rabi, Jaynes-Cummings and Dicke identities from a two-level reduction",
    "stark": "self-consistent Stark scan and polarizability",
    "field-energy-demo": "field energy of uniform dipole-approximation fields in Fock space",
    "translation-check": "commutator of the length-gauge Hamiltonian with the polaritonic translation",
}

assert set(RUNNERS) == set(EXPERIMENTS) == set(DESCRIPTIONS)


def run_experiment(cfg: ExperimentConfig, jobs: int = 1) -> ResultTable:
    """Run one experiment; metadata records the full config and package versions."""
    import scipy

    from .. import __version__

    table = RUNNERS[cfg.experiment](cfg, max(1, int(jobs)))
    table.metadata.update({
        "experiment": cfg.experiment,
        "seed": cfg.seed,
        "config": cfg.data,
        "scan": cfg.scan,
        "versions": {"lwqed": __version__, "numpy": np.__version__, "scipy": scipy.__version__},
    })
    return table
