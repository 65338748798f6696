"""State families and analytic boundary criteria used in the applications."""

from __future__ import annotations

import numpy as np

from .qops import (
    DensityOperator,
    PAULIS,
    min_eigenvalue,
    partial_transpose,
    tensor,
)


def _ket(*amps) -> np.ndarray:
    v = np.asarray(amps, dtype=complex)
    return v / np.linalg.norm(v)


def singlet_ket() -> np.ndarray:
    return np.array([0, 1, -1, 0], dtype=complex) / np.sqrt(2)


def _projector(ket: np.ndarray) -> np.ndarray:
    return np.outer(ket, ket.conj())


def werner(alpha: float) -> DensityOperator:
    """Singlet mixed with white noise; entangled for alpha > 1/3."""
    if not 0 <= alpha <= 1:
        raise ValueError("alpha must lie in [0, 1]")
    m = alpha * _projector(singlet_ket()) + (1 - alpha) * np.eye(4) / 4
    return DensityOperator(m, 2, 2)


def rho_alpha_theta(alpha: float, theta: float) -> DensityOperator:
    """cos(theta)|00> + sin(theta)|11> mixed with white noise."""
    if not 0 <= alpha <= 1:
        raise ValueError("alpha must lie in [0, 1]")
    ket = np.zeros(4, dtype=complex)
    ket[0] = np.cos(theta)
    ket[3] = np.sin(theta)
    m = alpha * _projector(ket) + (1 - alpha) * np.eye(4) / 4
    return DensityOperator(m, 2, 2)


def qubit_qudit(alpha: float, d: int) -> DensityOperator:
    """Two-qubit singlet embedded in 2 x d, mixed with full-space noise.

    Bob's qubit occupies the first two levels of the qudit; the noise term
    is 1/2 (x) 1_d/d, which is entangled for alpha > 1/(1+d).
    """
    if not 0 <= alpha <= 1:
        raise ValueError("alpha must lie in [0, 1]")
    if d < 2:
        raise ValueError("qudit dimension must be >= 2")
    ket = np.zeros(2 * d, dtype=complex)
    ket[0 * d + 1] = 1 / np.sqrt(2)   # |0>|1>
    ket[1 * d + 0] = -1 / np.sqrt(2)  # |1>|0>
    m = alpha * _projector(ket) + (1 - alpha) * np.eye(2 * d) / (2 * d)
    return DensityOperator(m, 2, d)


def horodecki_bound_entangled(b: float) -> DensityOperator:
    """The 2 x 4 bound entangled family sigma_b (PPT yet entangled for 0<b<1)."""
    if not 0 <= b <= 1:
        raise ValueError("b must lie in [0, 1]")
    d = 4

    def ket2x4(i, j):
        v = np.zeros(2 * d, dtype=complex)
        v[i * d + j] = 1
        return v

    sigma_insep = np.zeros((8, 8), dtype=complex)
    for i in range(3):
        psi = (ket2x4(0, i) + ket2x4(1, i + 1)) / np.sqrt(2)
        sigma_insep += (2 / 7) * _projector(psi)
    sigma_insep += (1 / 7) * _projector(ket2x4(0, 3))
    phi = np.sqrt((1 + b) / 2) * ket2x4(1, 0) + np.sqrt((1 - b) / 2) * ket2x4(1, 3)
    m = (7 * b / (7 * b + 1)) * sigma_insep + (1 / (7 * b + 1)) * _projector(phi)
    return DensityOperator(m, 2, 4)


def non_full_rank_example() -> DensityOperator:
    """Rank-3 entangled two-qubit state on the state-space boundary."""
    theta = 1e-4 * np.pi
    p = (0.4, 0.05, 0.55)
    k1 = np.array([np.cos(theta), 0, 0, np.sin(theta)], dtype=complex)
    k2 = np.array([np.sin(theta), 0, 0, -np.cos(theta)], dtype=complex)
    k3 = np.array([0, 0, 1, 0], dtype=complex)
    m = sum(pk * _projector(k) for pk, k in zip(p, (k1, k2, k3)))
    return DensityOperator(m, 2, 2)


def horodecki_chsh_parameter(rho: DensityOperator) -> float:
    """M(rho): sum of the two largest eigenvalues of T^T T; CHSH iff > 1."""
    if (rho.dim_a, rho.dim_b) != (2, 2):
        raise ValueError("Horodecki criterion needs a two-qubit state")
    t = np.zeros((3, 3))
    for i in range(3):
        for j in range(3):
            t[i, j] = np.real(np.trace(rho.matrix @ tensor(PAULIS[i], PAULIS[j])))
    evs = np.sort(np.linalg.eigvalsh(t.T @ t))
    return float(evs[-1] + evs[-2])


FAMILIES = {
    "werner": {
        "constructor": lambda alpha: werner(alpha),
        "noise_parameter": "alpha",
        "parameters": ("alpha",),
        "description": "singlet mixed with white noise",
    },
    "alpha-theta": {
        "constructor": lambda alpha, theta: rho_alpha_theta(alpha, theta),
        "noise_parameter": "alpha",
        "parameters": ("alpha", "theta"),
        "description": "partially entangled pure state mixed with white noise",
    },
    "qubit-qudit": {
        "constructor": lambda alpha, d: qubit_qudit(alpha, int(d)),
        "noise_parameter": "alpha",
        "parameters": ("alpha", "d"),
        "description": "singlet embedded in 2 x d with full-space noise",
    },
    "bound-entangled": {
        "constructor": lambda b: horodecki_bound_entangled(b),
        "noise_parameter": "b",
        "parameters": ("b",),
        "description": "2 x 4 bound entangled family",
    },
    "non-full-rank": {
        "constructor": lambda: non_full_rank_example(),
        "noise_parameter": None,
        "parameters": (),
        "description": "rank-3 entangled two-qubit state",
    },
}


def make_state(family: str, **params) -> DensityOperator:
    if family not in FAMILIES:
        raise KeyError(f"unknown family {family!r}")
    return FAMILIES[family]["constructor"](**params)


def ppt_entanglement_threshold(
    family: str, tol: float = 1e-8, **fixed_params
) -> float:
    """Noise value where the partial transpose's minimum eigenvalue changes sign."""
    entry = FAMILIES[family]
    pname = entry["noise_parameter"]
    if pname is None:
        raise ValueError(f"family {family!r} has no noise parameter")

    def min_ev(val):
        rho = entry["constructor"](**{pname: val, **fixed_params})
        pt = partial_transpose(rho.matrix, rho.dim_a, rho.dim_b, on="B")
        return min_eigenvalue(pt)

    lo, hi = 0.0, 1.0
    if min_ev(lo) < -tol:
        raise ValueError("state is NPT already at zero noise parameter")
    if min_ev(hi) >= 0:
        return 1.0
    while hi - lo > tol:
        mid = (lo + hi) / 2
        if min_ev(mid) >= 0:
            lo = mid
        else:
            hi = mid
    return (lo + hi) / 2
