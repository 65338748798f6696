import numpy as np
import pytest

from localmodels.measure import (
    MeasurementSet,
    Povm,
    appendix_e_generators,
    bloch_vector,
    cube_set,
    icosahedron_set,
    level_set,
    povm_set_for_appendix_e,
    projective_from_bloch,
    refine_by_dual,
    shrunk_povm,
)
from localmodels.qops import maximally_mixed


def test_povm_validates_completeness():
    with pytest.raises(ValueError):
        Povm((np.eye(2) / 2, np.eye(2) / 3))
    with pytest.raises(ValueError):
        Povm((np.diag([1.5, 0.0]), np.diag([-0.5, 1.0])))


def test_projective_from_bloch_roundtrip():
    v = np.array([0.36, -0.48, 0.8])
    p = projective_from_bloch(v)
    from localmodels.qops import PAULIS

    extracted = np.array([np.trace(s @ p.elements[0]).real for s in PAULIS])
    assert np.allclose(extracted, v, atol=1e-12)
    assert np.array_equal(bloch_vector(v), v)
    assert np.allclose(p.elements[0] + p.elements[1], np.eye(2))


def test_icosahedron_has_six_antipodal_pairs():
    mset = icosahedron_set()
    assert mset.n_measurements == 6
    dirs = mset.directions()
    assert np.allclose(np.linalg.norm(dirs, axis=1), 1.0)
    # all pairwise angles equal up to sign for the icosahedron
    dots = np.abs(dirs @ dirs.T - np.eye(6))
    off = dots[~np.eye(6, dtype=bool)]
    assert np.allclose(off, off[0], atol=1e-12)


def test_cube_set():
    mset = cube_set()
    assert mset.n_measurements == 4
    assert len(mset.bloch_vertices) == 8


def test_rotation_preserves_geometry():
    a = icosahedron_set()
    b = icosahedron_set(euler=(0.3, 1.1, -0.4))
    ga = np.sort(np.abs(a.directions() @ a.directions().T).ravel())
    gb = np.sort(np.abs(b.directions() @ b.directions().T).ravel())
    assert np.allclose(ga, gb, atol=1e-12)


def test_refinement_vertex_counts():
    mset = icosahedron_set()
    counts = [len(mset.bloch_vertices)]
    for _ in range(3):
        mset = refine_by_dual(mset)
        counts.append(len(mset.bloch_vertices))
    assert counts == [12, 32, 92, 272]


def test_level_set_matches_iterated_refinement():
    assert level_set(1).n_measurements == 6
    assert level_set(2).n_measurements == 16
    assert level_set(3).n_measurements == 46
    with pytest.raises(ValueError):
        level_set(0)


def test_shrunk_povm_identity_at_eta_one():
    p = projective_from_bloch([0, 0, 1.0])
    xi = maximally_mixed(2)
    s = shrunk_povm(p, 1.0, xi)
    for a, b in zip(s.elements, p.elements):
        assert np.allclose(a, b)
    s = shrunk_povm(p, 0.5, xi)
    assert np.allclose(s.elements[0], 0.5 * p.elements[0] + 0.25 * np.eye(2))


def test_appendix_e_counts():
    gens = appendix_e_generators()
    assert gens.n_measurements == 6
    assert all(p.outcomes == 4 for p in gens.povms)
    full = povm_set_for_appendix_e()
    assert full.n_measurements == 76


def test_json_roundtrip():
    mset = level_set(2)
    again = MeasurementSet.from_json_dict(mset.to_json_dict())
    assert again.n_measurements == mset.n_measurements
    for p, q in zip(again.povms, mset.povms):
        for a, b in zip(p.elements, q.elements):
            assert np.allclose(a, b, atol=1e-15)
    assert np.allclose(again.bloch_vertices, mset.bloch_vertices, atol=1e-15)
