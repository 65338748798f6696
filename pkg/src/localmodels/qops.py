"""Complex linear algebra primitives for bipartite quantum operators.

Everything here works on plain ``numpy`` complex arrays; the wrapper types
only pin down the tensor split (``dim_a``, ``dim_b``) and validate the
physical invariants once, at construction time.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

TOL_HERM = 1e-9
TOL_PSD = 1e-8


class DimensionMismatchError(ValueError):
    pass


def _as_matrix(m) -> np.ndarray:
    m = np.asarray(m, dtype=complex)
    if m.ndim != 2:
        raise ValueError(f"expected a matrix, got shape {m.shape}")
    if not np.all(np.isfinite(m.view(float))):
        raise ValueError("matrix has non-finite entries")
    return m


def is_hermitian(m: np.ndarray, tol: float = TOL_HERM) -> bool:
    m = np.asarray(m)
    return m.shape[0] == m.shape[1] and np.max(np.abs(m - m.conj().T)) <= tol


def tensor(*ops) -> np.ndarray:
    """Kronecker product of two or more operators."""
    out = _as_matrix(ops[0])
    for op in ops[1:]:
        out = np.kron(out, _as_matrix(op))
    return out


def _check_bipartite(m: np.ndarray, dim_a: int, dim_b: int) -> None:
    if m.shape != (dim_a * dim_b, dim_a * dim_b):
        raise DimensionMismatchError(
            f"matrix shape {m.shape} does not match dims {dim_a}x{dim_b}"
        )


def partial_trace(m, dim_a: int, dim_b: int, over: str) -> np.ndarray:
    """Trace out subsystem ``'A'`` or ``'B'`` of a bipartite operator."""
    m = _as_matrix(m)
    _check_bipartite(m, dim_a, dim_b)
    t = m.reshape(dim_a, dim_b, dim_a, dim_b)
    if over == "A":
        return np.trace(t, axis1=0, axis2=2)
    if over == "B":
        return np.trace(t, axis1=1, axis2=3)
    raise ValueError(f"over must be 'A' or 'B', got {over!r}")


def partial_transpose(m, dim_a: int, dim_b: int, on: str) -> np.ndarray:
    """Transpose one tensor factor of a bipartite operator."""
    m = _as_matrix(m)
    _check_bipartite(m, dim_a, dim_b)
    t = m.reshape(dim_a, dim_b, dim_a, dim_b)
    if on == "A":
        t = t.transpose(2, 1, 0, 3)
    elif on == "B":
        t = t.transpose(0, 3, 2, 1)
    else:
        raise ValueError(f"on must be 'A' or 'B', got {on!r}")
    return t.reshape(m.shape)


def hermitian_eigenvalues(m, tol: float = TOL_HERM) -> np.ndarray:
    """Real spectrum of a Hermitian matrix, in descending order."""
    m = _as_matrix(m)
    if not is_hermitian(m, tol):
        raise ValueError("matrix is not Hermitian within tolerance")
    return np.linalg.eigvalsh(m)[::-1]


def min_eigenvalue(m) -> float:
    h = (_as_matrix(m) + _as_matrix(m).conj().T) / 2
    return float(np.linalg.eigvalsh(h)[0])


@dataclass(frozen=True)
class HermitianOperator:
    """Hermitian operator on a bipartite space; no positivity required."""

    matrix: np.ndarray
    dim_a: int
    dim_b: int

    def __post_init__(self):
        m = _as_matrix(self.matrix)
        _check_bipartite(m, self.dim_a, self.dim_b)
        if not is_hermitian(m):
            raise ValueError("operator is not Hermitian within tolerance")
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    def ptrace(self, over: str) -> np.ndarray:
        return partial_trace(self.matrix, self.dim_a, self.dim_b, over)


@dataclass(frozen=True)
class DensityOperator:
    """Positive unit-trace operator with an explicit A|B split."""

    matrix: np.ndarray
    dim_a: int
    dim_b: int
    _tol_psd: float = field(default=TOL_PSD, repr=False)

    def __post_init__(self):
        m = _as_matrix(self.matrix)
        _check_bipartite(m, self.dim_a, self.dim_b)
        if not is_hermitian(m):
            raise ValueError("state is not Hermitian within tolerance")
        if abs(np.trace(m).real - 1.0) > 1e-8:
            raise ValueError(f"state trace is {np.trace(m).real}, expected 1")
        if min_eigenvalue(m) < -self._tol_psd:
            raise ValueError("state has a negative eigenvalue beyond tolerance")
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    @property
    def dim(self) -> int:
        return self.dim_a * self.dim_b

    def ptrace(self, over: str) -> np.ndarray:
        return partial_trace(self.matrix, self.dim_a, self.dim_b, over)

    def ptranspose(self, on: str) -> np.ndarray:
        return partial_transpose(self.matrix, self.dim_a, self.dim_b, on)


def maximally_mixed(dim_a: int, dim_b: int = 1) -> DensityOperator:
    d = dim_a * dim_b
    return DensityOperator(np.eye(d) / d, dim_a, dim_b)


# Pauli matrices, used throughout the qubit-specific code paths.
SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)
PAULIS = (SIGMA_X, SIGMA_Y, SIGMA_Z)
