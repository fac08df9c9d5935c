import math

import numpy as np
import pytest
import scipy.sparse as sp
from hypothesis import given, settings
from hypothesis import strategies as st

from lwqed.errors import InvariantViolation
from lwqed.hilbert import (
    ATOMIC_UNITS,
    CompositeBasis,
    FockSpec,
    GridSpec,
    HermitianOperator,
    PhysicalConstants,
    StateVector,
    grid_derivative,
    grid_laplacian,
    ladder_operators,
    position_operator,
    tensor_embed,
)


def test_atomic_units_preset():
    c = ATOMIC_UNITS
    assert (c.hbar, c.m, c.e) == (1.0, 1.0, 1.0)
    assert c.c == 137.035999
    assert c.eps0 == 1.0 / (4.0 * math.pi)
    assert c.coulomb == pytest.approx(1.0, rel=1e-15)


@pytest.mark.parametrize("name", ["hbar", "m", "e", "c", "eps0"])
def test_constants_must_be_positive(name):
    with pytest.raises(ValueError):
        PhysicalConstants(**{name: 0.0})


def test_grid_spacing_conventions():
    d = GridSpec(-1.0, 1.0, 5, "dirichlet")
    p = GridSpec(-1.0, 1.0, 4, "periodic")
    assert d.spacing == 0.5
    assert p.spacing == 0.5
    assert d.box_length == pytest.approx(3.0)
    assert d.walls == pytest.approx((-1.5, 1.5))
    assert np.allclose(p.points, [-1.0, -0.5, 0.0, 0.5])


def test_grid_box_helper_keeps_spacing():
    g = GridSpec.box(20.0, 0.1)
    assert g.box_length == pytest.approx(20.0)
    assert g.spacing == pytest.approx(0.1)


def test_fock_dimension():
    assert FockSpec(3).dim == 4


def test_vacuum_annihilation():
    lad = ladder_operators(FockSpec(1))
    vac = np.array([1.0, 0.0])
    assert np.all(lad.lower @ vac == 0.0)


def test_truncated_commutator():
    lad = ladder_operators(FockSpec(3))
    comm = (lad.lower @ lad.raise_ - lad.raise_ @ lad.lower).toarray()
    assert np.allclose(comm[:3, :3], np.eye(3), rtol=0, atol=1e-14)
    # corner defect at the cutoff
    assert comm[3, 3] == pytest.approx(-3.0, abs=1e-14)


def test_p_matrix_element():
    lad = ladder_operators(FockSpec(2))
    assert lad.p.toarray()[0, 1] == pytest.approx(1 / math.sqrt(2), abs=1e-16)


def test_laplacian_of_constant_periodic():
    g = GridSpec(0.0, 1.0, 16, "periodic", 4)
    assert np.allclose(grid_laplacian(g) @ np.ones(16), 0.0, atol=1e-10)


def test_plane_wave_dispersion():
    g = GridSpec(0.0, 2 * math.pi, 32, "periodic", 2)
    k = 3
    x = g.points
    psi = np.exp(1j * k * x)
    h = g.spacing
    expected = -(2 / h**2) * (math.cos(k * h) - 1)
    assert np.allclose(-(grid_laplacian(g) @ psi), expected * psi, atol=1e-9)


@pytest.mark.parametrize("order", [2, 4])
def test_particle_in_box_converges_at_stencil_order(order):
    L = 1.0
    exact = math.pi**2 / (2 * L**2)
    errs = []
    for n in (39, 79, 159):
        g = GridSpec(0.0, 1.0, n, "dirichlet", order)
        # walls one spacing outside the end points: shrink to an exact box of length L
        h = L / (n + 1)
        g = GridSpec(h, L - h, n, "dirichlet", order)
        e0 = np.linalg.eigvalsh((-0.5 * grid_laplacian(g)).toarray())[0]
        errs.append(abs(e0 - exact))
    rates = [math.log2(errs[i] / errs[i + 1]) for i in range(2)]
    assert min(rates) > order - 0.3


def test_derivative_antisymmetric():
    for bc in ("dirichlet", "periodic"):
        for order in (2, 4):
            D = grid_derivative(GridSpec(-1, 1, 20, bc, order))
            assert abs(D + D.T).max() == 0.0


def test_embed_identity():
    b = CompositeBasis(GridSpec(-1, 1, 5), (FockSpec(2), FockSpec(1)))
    for slot, n in enumerate(b.dims):
        E = tensor_embed(sp.identity(n), slot, b)
        assert abs(E - sp.identity(b.dim)).max() == 0.0


def test_embedded_factors_commute():
    g = GridSpec(-1, 1, 6)
    b = CompositeBasis(g, (FockSpec(3),))
    x = tensor_embed(position_operator(g), 0, b)
    p = tensor_embed(ladder_operators(FockSpec(3)).p, 1, b)
    assert (x @ p - p @ x).count_nonzero() == 0


def test_hermiticity_enforced():
    b = CompositeBasis(GridSpec(-1, 1, 3))
    with pytest.raises(InvariantViolation):
        HermitianOperator(sp.csr_matrix(np.array([[0.0, 1.0, 0.0], [2.0, 0.0, 0.0], [0.0, 0.0, 1.0]])), b)
    op = HermitianOperator.build(np.array([[0.0, 1.0, 0.0], [1.0 + 1e-15, 0.0, 0.0], [0.0, 0.0, 1.0]]), b, symmetrize=True)
    assert op.equals(HermitianOperator(op.matrix, b))


def test_state_normalization():
    b = CompositeBasis(GridSpec(-1, 1, 3), (FockSpec(1),))
    s = StateVector(b, np.arange(1.0, 7.0)).normalized()
    assert abs(s.norm - 1.0) < 1e-12
    assert s.tensor().shape == (3, 2)
    assert abs(s.marginal(0).sum() - 1.0) < 1e-12


@st.composite
def bases(draw):
    n = draw(st.integers(3, 7))
    focks = tuple(FockSpec(draw(st.integers(1, 4))) for _ in range(draw(st.integers(0, 2))))
    return CompositeBasis(GridSpec(0.0, 1.0, n), focks)


@given(bases(), st.data())
def test_index_round_trip(basis, data):
    i = data.draw(st.integers(0, basis.dim - 1))
    assert basis.flatten(basis.unflatten(i)) == i


@given(bases())
@settings(max_examples=30)
def test_index_map_bijective(basis):
    idx = np.arange(basis.dim)
    multi = basis.unflatten(idx)
    assert np.array_equal(basis.flatten(multi), idx)


@given(bases(), st.data())
@settings(max_examples=30)
def test_embed_trace_multiplicative(basis, data):
    slot = data.draw(st.integers(0, len(basis.dims) - 1))
    n = basis.dims[slot]
    rng = np.random.default_rng(data.draw(st.integers(0, 2**16)))
    A = rng.normal(size=(n, n))
    E = tensor_embed(A, slot, basis)
    others = basis.dim // n
    assert E.diagonal().sum() == pytest.approx(np.trace(A) * others, rel=1e-12, abs=1e-12)


@given(bases(), st.data())
@settings(max_examples=30)
def test_embed_preserves_hermiticity(basis, data):
    slot = data.draw(st.integers(0, len(basis.dims) - 1))
    n = basis.dims[slot]
    rng = np.random.default_rng(data.draw(st.integers(0, 2**16)))
    A = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    A = A + A.conj().T
    HermitianOperator(tensor_embed(A, slot, basis), basis)


@given(st.integers(1, 30))
def test_ccr_on_subspace(n_max):
    lad = ladder_operators(FockSpec(n_max))
    comm = (lad.lower @ lad.raise_ - lad.raise_ @ lad.lower).toarray()
    assert np.allclose(comm[:n_max, :n_max], np.eye(n_max), atol=1e-12, rtol=0)


@given(st.integers(1, 20))
def test_quadrature_relations(n_max):
    lad = ladder_operators(FockSpec(n_max))
    a, ad = lad.lower, lad.raise_
    assert abs(lad.p - (a + ad) / math.sqrt(2)).max() < 1e-15
    assert abs(lad.dp - (a - ad) / math.sqrt(2)).max() < 1e-15
    assert abs(lad.number - ad @ a).max() < 1e-12
