import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from localmodels.qops import (
    PAULIS,
    DensityOperator,
    DimensionMismatchError,
    HermitianOperator,
    hermitian_eigenvalues,
    is_hermitian,
    maximally_mixed,
    min_eigenvalue,
    partial_trace,
    partial_transpose,
    tensor,
)


def random_density(rng, d):
    g = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    m = g @ g.conj().T
    return m / np.trace(m).real


def test_tensor_matches_kron():
    a = np.array([[1, 2], [3, 4]])
    b = np.eye(3)
    assert np.allclose(tensor(a, b), np.kron(a, b))
    assert np.allclose(tensor(a, b, a), np.kron(np.kron(a, b), a))


def test_partial_trace_of_product_state():
    rng = np.random.default_rng(0)
    ra, rb = random_density(rng, 2), random_density(rng, 3)
    m = tensor(ra, rb)
    assert np.allclose(partial_trace(m, 2, 3, over="B"), ra)
    assert np.allclose(partial_trace(m, 2, 3, over="A"), rb)


@given(st.integers(0, 10_000))
@settings(max_examples=30, deadline=None)
def test_partial_trace_preserves_trace(seed):
    rng = np.random.default_rng(seed)
    m = random_density(rng, 6)
    for over in ("A", "B"):
        t = partial_trace(m, 2, 3, over=over)
        assert abs(np.trace(t) - np.trace(m)) < 1e-12


def test_partial_transpose_involution_and_ppt_detection():
    rng = np.random.default_rng(1)
    m = random_density(rng, 4)
    assert np.allclose(
        partial_transpose(partial_transpose(m, 2, 2, on="B"), 2, 2, on="B"), m
    )
    # singlet is NPT
    psi = np.array([0, 1, -1, 0]) / np.sqrt(2)
    singlet = np.outer(psi, psi)
    assert min_eigenvalue(partial_transpose(singlet, 2, 2, on="B")) < -0.4


def test_hermitian_eigenvalues_descending():
    ev = hermitian_eigenvalues(np.diag([1.0, 3.0, 2.0]))
    assert np.allclose(ev, [3.0, 2.0, 1.0])


def test_is_hermitian():
    assert is_hermitian(PAULIS[0])
    assert not is_hermitian(np.array([[0, 1], [0, 0]]))


def test_density_operator_validation():
    with pytest.raises(ValueError):
        DensityOperator(np.diag([1.5, -0.5]), 1, 2)
    with pytest.raises(ValueError):
        DensityOperator(np.eye(4) / 4, 2, 3)
    rho = DensityOperator(np.eye(4) / 4, 2, 2)
    assert np.allclose(rho.ptrace("A"), np.eye(2) / 2)


def test_hermitian_operator_rejects_non_hermitian():
    with pytest.raises(ValueError):
        HermitianOperator(np.array([[0, 1j], [1j, 0]]), 1, 2)


def test_dimension_mismatch_error():
    with pytest.raises(DimensionMismatchError):
        partial_trace(np.eye(5), 2, 2, over="A")


def test_maximally_mixed():
    mm = maximally_mixed(2, 3)
    assert np.allclose(mm.matrix, np.eye(6) / 6)
    assert maximally_mixed(4).dim == 4


def test_paulis_square_to_identity():
    for s in PAULIS:
        assert np.allclose(s @ s, np.eye(2))
