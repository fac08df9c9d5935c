import numpy as np
import pytest
import scipy.sparse as sp
from hypothesis import given, settings
from hypothesis import strategies as st

from lwqed.errors import PreconditionError
from lwqed.hamiltonians import ExternalPotential, ModeSet, build_length_gauge, electronic_matrix
from lwqed.hilbert import CompositeBasis, FockSpec, GridSpec, HermitianOperator, ModelBasis, tensor_embed
from lwqed.spectra import (
    EigenRequest,
    box_growth_scan,
    gauge_equivalence_scan,
    ground_state,
    lowest_eigenpairs,
    photon_like_excitation,
    truncation_scan,
)


def _diag_op(values):
    b = ModelBasis(("x",), (len(values),))
    return HermitianOperator(sp.diags(values, 0, format="csr"), b)


@pytest.mark.parametrize("threshold", [4000, 1])
def test_diagonal_matrix(threshold):
    rng = np.random.default_rng(3)
    d = rng.permutation(np.arange(200.0))
    vals, vecs = lowest_eigenpairs(EigenRequest(_diag_op(d), k=4, dense_threshold=threshold))
    assert np.allclose(vals, [0.0, 1.0, 2.0, 3.0], atol=1e-9)
    assert vecs.shape == (200, 4)


def test_tensor_additivity_sparse_path():
    g = GridSpec(-6.0, 6.0, 300, "dirichlet", 2)
    b = CompositeBasis(g, (FockSpec(19),))
    he = electronic_matrix(g, ExternalPotential.gaussian_well(1.0, 1.0))
    hp = sp.diags(0.7 * (np.arange(20) + 0.5))
    H = HermitianOperator(tensor_embed(he, 0, b) + tensor_embed(hp, 1, b), b)
    assert b.dim > 4000
    vals, _ = lowest_eigenpairs(EigenRequest(H, k=5))
    e_el = np.linalg.eigvalsh(he.toarray())[:5]
    combos = np.sort(np.add.outer(e_el, 0.7 * (np.arange(5) + 0.5)).ravel())[:5]
    assert np.allclose(vals, combos, atol=1e-8)


def test_sparse_and_dense_paths_agree():
    g = GridSpec(-6.0, 6.0, 120, "dirichlet", 4)
    b = CompositeBasis(g, (FockSpec(10),))
    H = build_length_gauge(b, ModeSet.single(1.0, 0.3), ExternalPotential.harmonic(1.0), True)
    dense = lowest_eigenpairs(EigenRequest(H, k=4))[0]
    sparse = lowest_eigenpairs(EigenRequest(H, k=4, dense_threshold=1))[0]
    assert np.allclose(dense, sparse, atol=1e-9)


def test_deterministic_for_fixed_seed():
    g = GridSpec(-6.0, 6.0, 200, "dirichlet", 2)
    b = CompositeBasis(g, (FockSpec(25),))
    H = build_length_gauge(b, ModeSet.single(1.0, 0.2), ExternalPotential.harmonic(1.0), True)
    v1 = lowest_eigenpairs(EigenRequest(H, k=3, seed=7))
    v2 = lowest_eigenpairs(EigenRequest(H, k=3, seed=7))
    assert np.array_equal(v1[0], v2[0])
    assert np.array_equal(v1[1], v2[1])


def test_request_validation():
    op = _diag_op(np.arange(10.0))
    with pytest.raises(PreconditionError):
        EigenRequest(op, k=0)
    with pytest.raises(PreconditionError):
        EigenRequest(op, k=20)
    with pytest.raises(PreconditionError):
        EigenRequest(op, k=1, tol=0.0)


def test_ground_state_normalized():
    e, st_ = ground_state(_diag_op(np.array([3.0, -1.0, 2.0, 5.0])))
    assert e == -1.0
    assert abs(st_.norm - 1.0) < 1e-12


def test_truncation_scan_converges_immediately_without_coupling():
    g = GridSpec(-6.0, 6.0, 61, "dirichlet", 2)
    ms = ModeSet.single(1.0, 0.0)
    v = ExternalPotential.harmonic(1.0)
    rep = truncation_scan(lambda n: build_length_gauge(CompositeBasis(g, (FockSpec(n),)), ms, v, True),
                          [2, 4, 8], k=3)
    assert rep.verdict == "converged"
    assert rep.changes[0] < 1e-12


def test_box_growth_without_coupling_converges_at_well():
    ms = ModeSet.single(1.0, 0.0)
    well = ExternalPotential.gaussian_well(1.0, 1.0)
    rep = box_growth_scan(lambda L: build_length_gauge(CompositeBasis(GridSpec.box(L, 0.2), (FockSpec(2),)),
                                                       ms, well, True), [10, 20, 40, 80])
    assert rep.verdict == "converged"
    assert abs(rep.extras["centroid"][-1]) < 1e-8


def test_box_growth_without_dip_decreases():
    ms = ModeSet.single(1.0, 0.15)
    well = ExternalPotential.gaussian_well(1.0, 1.0)
    rep = box_growth_scan(lambda L: build_length_gauge(CompositeBasis(GridSpec.box(L, 0.1), (FockSpec(40),)),
                                                       ms, well, False), [10, 20, 40, 80])
    assert np.all(np.diff(rep.ground_energies) < 0)
    assert rep.verdict == "diverging"
    assert rep.extras["edge_localized"]


def test_gauge_equivalence_small():
    rep = gauge_equivalence_scan(GridSpec(-8.0, 8.0, 161, "dirichlet", 4), ModeSet.single(1.0, 0.05),
                                 ExternalPotential.harmonic(1.0), n_max_values=(2, 4, 8), k=3)
    assert rep.monotone
    assert rep.gaps[-1] < 1e-6


def test_photon_like_excitation_small_ring():
    ms = ModeSet.single(1.0, 0.3)
    ex = photon_like_excitation(GridSpec(-10.0, 10.0, 200, "periodic", 2), ms, 20, k=30)
    assert abs(ex.gap - np.sqrt(1.09)) / np.sqrt(1.09) < 5e-3


@given(st.lists(st.floats(-50.0, 50.0), min_size=6, max_size=40, unique=True), st.integers(1, 5))
@settings(max_examples=30, deadline=None)
def test_lowest_values_property(values, k):
    k = min(k, len(values) - 1)
    vals, vecs = lowest_eigenpairs(EigenRequest(_diag_op(np.array(values)), k=k))
    assert np.allclose(vals, np.sort(values)[:k], atol=1e-9)
    assert np.allclose(vecs.conj().T @ vecs, np.eye(k), atol=1e-10)
