import numpy as np
import pytest

from localmodels.measure import (
    cube_set,
    icosahedron_set,
    level_set,
    povm_set_for_appendix_e,
    projective_from_bloch,
    shrunk_povm,
)
from localmodels.qops import maximally_mixed
from localmodels.shrink import (
    FacetEnumerationError,
    enumerate_facets,
    eta_by_bisection,
    eta_povm_extremal_search,
    eta_upper_estimate,
    hermitian_basis,
    inscribed_sphere_eta,
    povm_coordinates,
    relabelled_vertex_coordinates,
    two_outcome_facet_max,
)

ICO_ETA = np.sqrt((5 + 2 * np.sqrt(5)) / 15)


def test_inscribed_sphere_icosahedron_closed_form():
    eta = inscribed_sphere_eta(icosahedron_set().bloch_vertices).eta
    assert eta == pytest.approx(ICO_ETA, abs=1e-12)


def test_inscribed_sphere_cube_closed_form():
    eta = inscribed_sphere_eta(cube_set().bloch_vertices).eta
    assert eta == pytest.approx(1 / np.sqrt(3), abs=1e-12)


def test_inscribed_sphere_witness_is_supporting_plane():
    res = inscribed_sphere_eta(icosahedron_set().bloch_vertices)
    n = np.asarray(res.witness.normal)
    verts = icosahedron_set().bloch_vertices
    assert np.max(verts @ n) == pytest.approx(res.eta, abs=1e-9)


def test_eta_monotone_under_refinement():
    etas = [
        inscribed_sphere_eta(level_set(level).bloch_vertices).eta
        for level in (1, 2, 3, 4)
    ]
    assert all(b > a for a, b in zip(etas, etas[1:]))
    assert all(e < 1 for e in etas)


def test_hermitian_basis_orthonormal():
    basis = hermitian_basis(3)
    assert len(basis) == 9
    for i, a in enumerate(basis):
        for j, b in enumerate(basis):
            ip = np.trace(a.conj().T @ b).real
            assert ip == pytest.approx(1.0 if i == j else 0.0, abs=1e-12)


def test_relabelled_vertices_double_two_outcome_sets():
    mset = icosahedron_set()
    verts = relabelled_vertex_coordinates(mset)
    assert verts.shape[0] == 12  # 6 measurements x 2 relabellings


def test_facet_bisection_matches_sphere_for_projective():
    # facet route and inscribed-sphere route agree for the icosahedron
    res = eta_by_bisection(icosahedron_set(), continuous="projective-qubit",
                           precision=1e-3, estimate_samples=100, seed=0)
    assert res.eta == pytest.approx(ICO_ETA, abs=2e-3)
    assert res.method == "facet-sdp-bisection"


def test_facet_enumeration_dim_cap():
    with pytest.raises(FacetEnumerationError):
        enumerate_facets(povm_set_for_appendix_e(), dim_cap=9)


def test_two_outcome_spectral_shortcut():
    # at eta = 1 the value of facet (F1, F2) over POVMs is
    # Tr F2 + sum of positive eigenvalues of F1 - F2
    rng = np.random.default_rng(5)
    g1 = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
    g2 = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
    f1, f2 = (g1 + g1.conj().T) / 2, (g2 + g2.conj().T) / 2
    xi = maximally_mixed(2)
    val = two_outcome_facet_max(f1, f2, 1.0, xi)
    ev = np.linalg.eigvalsh(f1 - f2)
    expect = np.trace(f2).real + np.sum(ev[ev > 0])
    assert val == pytest.approx(expect, abs=1e-9)


def test_upper_estimate_bounds_true_eta():
    est = eta_upper_estimate(icosahedron_set(), maximally_mixed(2), 100,
                             continuous="projective-qubit", seed=0)
    assert est >= ICO_ETA - 1e-9


def test_shrunk_projective_inside_polytope_at_eta():
    # any shrunk projective measurement lies inside the simulable polytope
    from localmodels.shrink import _membership_value, _split_coordinates

    mset = icosahedron_set()
    basis = hermitian_basis(2)
    verts = relabelled_vertex_coordinates(mset, basis)
    xi = maximally_mixed(2)
    rng = np.random.default_rng(2)
    for _ in range(20):
        v = rng.normal(size=3)
        v /= np.linalg.norm(v)
        base, direction = _split_coordinates(projective_from_bloch(v), xi, basis)
        assert _membership_value(verts, base, direction) >= ICO_ETA - 1e-9


@pytest.mark.slow
def test_povm_extremal_search_appendix_value():
    res = eta_povm_extremal_search(povm_set_for_appendix_e(), starts=8, seed=0)
    assert res.eta == pytest.approx(0.673, abs=5e-3)
    assert res.method == "extremal-search"
