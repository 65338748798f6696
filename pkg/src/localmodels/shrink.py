"""Shrinking factors of continuous measurement sets w.r.t. finite sets.

The shrinking factor is the largest ``eta`` such that every measurement of
the continuous set, depolarized by ``eta`` towards its ``Tr[xi M] 1``
component, lies inside the convex hull of the finite set.  Three routes:

* projective qubit sets: the inscribed-sphere radius of the Bloch-vertex
  polyhedron (exact geometry);
* general finite POVM sets: facet enumeration of the vertex polytope in a
  Hermitian-basis parametrization, then bisection with one PSD program
  (or the two-outcome spectral shortcut) per facet;
* the 4-outcome qubit POVM continuous set at Appendix-E scale, where facet
  enumeration is out of reach: direct minimization of the membership value
  over extremal (rank-1) POVMs, which is exact in terms of search space
  because the membership value is quasiconcave over the POVM set.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np
from scipy.optimize import linprog, minimize
from scipy.spatial import ConvexHull

from .conic import ConicProblem, pairs_term
from .measure import MeasurementSet, Povm
from .qops import DensityOperator, hermitian_eigenvalues, maximally_mixed

DEFAULT_FACET_DIM_CAP = 9


class FacetEnumerationError(RuntimeError):
    """Facet enumeration is intractable for this parameter dimension."""


@dataclass(frozen=True)
class FacetDescription:
    """One facet ``sum_a Tr[F_a E_a] <= bound`` of a measurement polytope.

    ``matrices`` holds the per-outcome Hermitian forms F_a; for Bloch-space
    facets ``normal`` additionally carries the raw 3-vector.
    """

    matrices: tuple
    bound: float
    normal: np.ndarray | None = None

    def value(self, povm_elements) -> float:
        return float(
            sum(
                np.real(np.trace(f @ e))
                for f, e in zip(self.matrices, povm_elements)
            )
        )


@dataclass(frozen=True)
class ShrinkResult:
    eta: float
    method: str
    precision: float
    witness: FacetDescription | None = None

    def __post_init__(self):
        if not 0 < self.eta <= 1:
            raise ValueError("eta out of (0, 1]")
        if self.precision <= 0:
            raise ValueError("precision must be positive")

    def to_json_dict(self) -> dict:
        doc = {"eta": self.eta, "method": self.method, "precision": self.precision}
        if self.witness is not None:
            doc["witness"] = {
                "bound": self.witness.bound,
                "matrices": [
                    [np.real(f).tolist(), np.imag(f).tolist()]
                    for f in self.witness.matrices
                ],
            }
            if self.witness.normal is not None:
                doc["witness"]["normal"] = self.witness.normal.tolist()
        return doc


# -- projective qubit path (Bloch geometry) -------------------------------


def _bloch_facet_matrices(normal: np.ndarray) -> tuple:
    from .qops import PAULIS

    f = sum(normal[i] * PAULIS[i] for i in range(3)) / 2
    return (f, -f)


def inscribed_sphere_eta(vertices, precision: float = 1e-12) -> ShrinkResult:
    """Radius of the largest origin-centred sphere inside the vertex hull."""
    verts = np.asarray(vertices, dtype=float)
    if verts.ndim != 2 or verts.shape[1] != 3 or len(verts) < 4:
        raise ValueError("need >= 4 Bloch vertices")
    hull = ConvexHull(verts)
    normals = hull.equations[:, :3]
    offsets = hull.equations[:, 3]
    lengths = np.linalg.norm(normals, axis=1)
    dists = -offsets / lengths
    if np.min(dists) <= 0:
        raise ValueError("origin is not interior to the vertex hull")
    eta = float(np.min(dists))
    # lexicographically smallest unit normal among near-ties, for determinism
    near = np.nonzero(dists <= eta + 1e-12)[0]
    units = sorted(tuple(np.round(normals[i] / lengths[i], 12)) for i in near)
    n = np.array(units[0])
    witness = FacetDescription(
        matrices=_bloch_facet_matrices(n), bound=eta, normal=n
    )
    return ShrinkResult(eta, "inscribed-sphere", precision, witness)


# -- general parametrization and facet enumeration ------------------------


def hermitian_basis(d: int) -> list:
    """Orthonormal Hermitian basis (Frobenius inner product) of d x d."""
    basis = []
    for i in range(d):
        e = np.zeros((d, d), dtype=complex)
        e[i, i] = 1
        basis.append(e)
    for i in range(d):
        for j in range(i + 1, d):
            e = np.zeros((d, d), dtype=complex)
            e[i, j] = e[j, i] = 1 / np.sqrt(2)
            basis.append(e)
            e = np.zeros((d, d), dtype=complex)
            e[i, j] = -1j / np.sqrt(2)
            e[j, i] = 1j / np.sqrt(2)
            basis.append(e)
    return basis


def povm_coordinates(povm: Povm, basis=None) -> np.ndarray:
    """Real coordinates of the first n-1 elements in the Hermitian basis."""
    d = povm.dim
    basis = basis or hermitian_basis(d)
    coords = []
    for e in povm.elements[:-1]:
        coords.extend(np.real(np.trace(b.conj().T @ e)) for b in basis)
    return np.array(coords)


def coordinates_to_facet_matrices(f: np.ndarray, dim: int, outcomes: int) -> tuple:
    basis = hermitian_basis(dim)
    n = dim * dim
    mats = []
    for a in range(outcomes - 1):
        chunk = f[a * n: (a + 1) * n]
        mats.append(sum(c * b for c, b in zip(chunk, basis)))
    mats.append(np.zeros((dim, dim), dtype=complex))
    return tuple(mats)


def relabelled_vertex_coordinates(mset: MeasurementSet, basis=None) -> np.ndarray:
    """Vertex coordinates of the finite set closed under outcome relabelling.

    Outcome permutations are classically free, so the simulable polytope is
    spanned by all relabelled copies of the finite set's POVMs.
    """
    basis = basis or hermitian_basis(mset.dim)
    pts = []
    seen = set()
    for p in mset.povms:
        for perm in itertools.permutations(range(p.outcomes)):
            els = tuple(p.elements[i] for i in perm)
            c = povm_coordinates(Povm(els), basis)
            key = tuple(np.round(c, 9))
            if key not in seen:
                seen.add(key)
                pts.append(c)
    return np.array(pts)


def enumerate_facets(
    mset: MeasurementSet, dim_cap: int = DEFAULT_FACET_DIM_CAP
) -> list:
    """Facets of the polytope spanned by the finite set, as matrix forms."""
    d, n = mset.dim, mset.outcomes
    basis = hermitian_basis(d)
    pts = relabelled_vertex_coordinates(mset, basis)
    center = pts.mean(axis=0)
    centered = pts - center
    u, s, vt = np.linalg.svd(centered, full_matrices=False)
    rank = int(np.sum(s > 1e-9 * max(1.0, s[0])))
    if rank > dim_cap:
        raise FacetEnumerationError(
            f"polytope affine dimension {rank} exceeds cap {dim_cap}"
        )
    proj = vt[:rank]
    reduced = centered @ proj.T
    hull = ConvexHull(reduced, qhull_options="Qx" if rank > 4 else None)
    facets = []
    seen = set()
    for eq in hull.equations:
        nrm = eq[:rank] / np.linalg.norm(eq[:rank])
        boff = -eq[rank] / np.linalg.norm(eq[:rank])
        key = tuple(np.round(np.concatenate([nrm, [boff]]), 9))
        if key in seen:
            continue
        seen.add(key)
        f = proj.T @ nrm
        bound = boff + float(f @ center)
        facets.append(
            FacetDescription(
                matrices=coordinates_to_facet_matrices(f, d, n), bound=bound
            )
        )
    return facets


# -- per-facet maxima -----------------------------------------------------


def _shifted_facet_matrices(facet_mats, eta: float, xi: DensityOperator):
    """G_a with Tr[F_a N_a] = Tr[G_a M_a] for the shrunk POVM map."""
    return [
        eta * f + (1 - eta) * np.real(np.trace(f)) * xi.matrix
        for f in facet_mats
    ]


def facet_violation_max(
    facet: FacetDescription,
    eta: float,
    xi: DensityOperator,
    outcomes: int,
    dim: int,
    tol: float = 1e-9,
) -> float:
    """Max of ``sum_a Tr[F_a N_a]`` over all shrunk dim-d n-outcome POVMs."""
    if not 0 <= eta <= 1:
        raise ValueError("eta out of range")
    gs = _shifted_facet_matrices(facet.matrices, eta, xi)
    prob = ConicProblem()
    eye = np.eye(dim)
    for a in range(outcomes):
        prob.add_psd_block(f"M{a}", dim)
    prob.add_equality(
        [pairs_term(f"M{a}", [(eye, eye)]) for a in range(outcomes)], eye
    )
    prob.set_objective([(f"M{a}", gs[a]) for a in range(outcomes)])
    sol = prob.solve(tol=tol)
    if not sol.optimal:
        raise RuntimeError(f"facet program failed with status {sol.status}")
    return sol.objective


def two_outcome_facet_max(f1, f2, eta: float, xi: DensityOperator) -> float:
    """Spectral shortcut for two-outcome facets: no PSD program needed."""
    f1 = np.asarray(f1, dtype=complex)
    f2 = np.asarray(f2, dtype=complex)
    for f in (f1, f2):
        if np.max(np.abs(f - f.conj().T)) > 1e-9:
            raise ValueError("facet matrices must be Hermitian")
    fk = f1 - f2
    feta = eta * fk + (1 - eta) * np.real(np.trace(fk)) * xi.matrix
    evs = hermitian_eigenvalues(feta)
    return float(np.real(np.trace(f2)) + np.sum(evs[evs > 0]))


# -- membership LP and upper estimate -------------------------------------


def _membership_value(
    vertex_coords: np.ndarray, trace_part: np.ndarray, direction_part: np.ndarray
) -> float:
    """Largest p with ``trace_part + p * direction_part`` in the polytope."""
    nv, dim = vertex_coords.shape
    a_eq = np.zeros((dim + 1, nv + 1))
    a_eq[:dim, :nv] = vertex_coords.T
    a_eq[:dim, nv] = -direction_part
    a_eq[dim, :nv] = 1.0
    b_eq = np.concatenate([trace_part, [1.0]])
    c = np.zeros(nv + 1)
    c[nv] = -1.0
    res = linprog(
        c, A_eq=a_eq, b_eq=b_eq,
        bounds=[(0, None)] * nv + [(0, 1)], method="highs",
    )
    if not res.success:
        if res.status == 2:
            return 0.0
        raise RuntimeError(f"membership LP failed: {res.message}")
    return float(res.x[nv])


def _split_coordinates(povm: Povm, xi: DensityOperator, basis) -> tuple:
    """Coordinates of the shrunk POVM as trace-part + p * direction-part."""
    d = povm.dim
    eye = np.eye(d)
    base = Povm(
        tuple(
            np.real(np.trace(xi.matrix @ e)) * eye for e in povm.elements
        )
    )
    c_full = povm_coordinates(povm, basis)
    c_base = povm_coordinates(base, basis)
    return c_base, c_full - c_base


def random_qubit_povm(rng, outcomes: int) -> Povm | None:
    """Random extremal-style rank-1 qubit POVM, or None if rejected."""
    dirs = rng.normal(size=(outcomes, 3))
    dirs /= np.linalg.norm(dirs, axis=1, keepdims=True)
    a = np.vstack([dirs.T, np.ones(outcomes)])
    try:
        gam = np.linalg.lstsq(a, np.array([0, 0, 0, 2.0]), rcond=None)[0]
    except np.linalg.LinAlgError:
        return None
    resid = a @ gam - np.array([0, 0, 0, 2.0])
    if np.max(np.abs(resid)) > 1e-9 or np.any(gam < 1e-12):
        return None
    from .qops import PAULIS

    eye = np.eye(2)
    els = tuple(
        gam[k] * (eye + sum(dirs[k][i] * PAULIS[i] for i in range(3))) / 2
        for k in range(outcomes)
    )
    return Povm(els)


def random_projective_qubit(rng) -> Povm:
    v = rng.normal(size=3)
    v /= np.linalg.norm(v)
    from .measure import projective_from_bloch

    return projective_from_bloch(v)


def eta_upper_estimate(
    mset: MeasurementSet,
    xi: DensityOperator,
    samples: int,
    continuous: str = "projective-qubit",
    seed: int = 0,
) -> float:
    """Minimum membership value over sampled continuous-set members.

    Each sample's value is >= the true shrinking factor, so the minimum is
    a deterministic per-sample upper bound on eta.
    """
    if samples < 1:
        raise ValueError("need at least one sample")
    rng = np.random.default_rng(seed)
    basis = hermitian_basis(mset.dim)
    verts = relabelled_vertex_coordinates(mset, basis)
    best = np.inf
    drawn = 0
    while drawn < samples:
        if continuous == "projective-qubit":
            probe = random_projective_qubit(rng)
        elif continuous == "povm4":
            probe = random_qubit_povm(rng, 4)
            if probe is None:
                continue
        else:
            raise ValueError(f"unknown continuous set {continuous!r}")
        drawn += 1
        base, direction = _split_coordinates(probe, xi, basis)
        best = min(best, _membership_value(verts, base, direction))
    return float(best)


# -- bisection on facet feasibility ---------------------------------------


def _facets_feasible(
    facets, eta: float, xi: DensityOperator, outcomes: int, dim: int
) -> bool:
    for facet in facets:
        if outcomes == 2:
            val = two_outcome_facet_max(
                facet.matrices[0], facet.matrices[1], eta, xi
            )
        else:
            val = facet_violation_max(facet, eta, xi, outcomes, dim)
        if val > facet.bound + 1e-9:
            return False
    return True


def eta_by_bisection(
    mset: MeasurementSet,
    continuous: str,
    xi: DensityOperator | None = None,
    precision: float = 1e-4,
    dim_cap: int = DEFAULT_FACET_DIM_CAP,
    estimate_samples: int = 200,
    seed: int = 0,
) -> ShrinkResult:
    """Certified shrinking factor via facet enumeration plus bisection.

    The lower endpoint of the bracket is always verified feasible against
    every facet; the returned value is that endpoint.
    """
    if precision <= 0:
        raise ValueError("precision must be positive")
    if xi is None:
        xi = maximally_mixed(mset.dim)
    facets = enumerate_facets(mset, dim_cap=dim_cap)
    outcomes, dim = mset.outcomes, mset.dim
    hi = min(
        1.0,
        eta_upper_estimate(mset, xi, estimate_samples, continuous, seed=seed)
        + precision,
    )
    lo = 0.0
    if _facets_feasible(facets, hi, xi, outcomes, dim):
        lo = hi
    else:
        while hi - lo > precision:
            mid = (lo + hi) / 2
            if _facets_feasible(facets, mid, xi, outcomes, dim):
                lo = mid
            else:
                hi = mid
    if lo <= 0:
        raise RuntimeError("no positive eta is feasible for this set")
    if lo > 0 and not _facets_feasible(facets, lo, xi, outcomes, dim):
        raise RuntimeError("bisection lower endpoint failed certification")
    return ShrinkResult(float(lo), "facet-sdp-bisection", precision)


# -- extremal search for the 4-outcome POVM continuous set ----------------


def _rank_one_povm_from_angles(angles: np.ndarray):
    dirs = []
    for a in range(4):
        th, ph = angles[2 * a], angles[2 * a + 1]
        dirs.append(
            [np.sin(th) * np.cos(ph), np.sin(th) * np.sin(ph), np.cos(th)]
        )
    dirs = np.array(dirs)
    a = np.vstack([dirs.T, np.ones(4)])
    try:
        gam = np.linalg.solve(a, np.array([0, 0, 0, 2.0]))
    except np.linalg.LinAlgError:
        return None
    if np.any(gam < -1e-9):
        return None
    return np.clip(gam, 0, None), dirs


def eta_povm_extremal_search(
    mset: MeasurementSet,
    xi: DensityOperator | None = None,
    starts: int = 16,
    seed: int = 0,
    precision: float = 2e-3,
) -> ShrinkResult:
    """Shrinking factor of the 4-outcome qubit POVM set via extremal search.

    The membership value is quasiconcave over POVMs, so its minimum over
    the (compact) POVM set is attained at extremal, i.e. rank-1, POVMs;
    those are searched directly over outcome directions with the weights
    fixed by completeness.  Used where facet enumeration (12 affine
    dimensions for this set) is out of reach.
    """
    if mset.dim != 2 or mset.outcomes != 4:
        raise ValueError("extremal search implemented for 4-outcome qubit sets")
    if xi is None:
        xi = maximally_mixed(2)
    basis = hermitian_basis(2)
    verts = relabelled_vertex_coordinates(mset, basis)
    eye = np.eye(2)
    from .qops import PAULIS

    def value(angles):
        out = _rank_one_povm_from_angles(angles)
        if out is None:
            return 1.0
        gam, dirs = out
        els = tuple(
            gam[k] * (eye + sum(dirs[k][i] * PAULIS[i] for i in range(3))) / 2
            for k in range(4)
        )
        povm = Povm(els)
        base, direction = _split_coordinates(povm, xi, basis)
        return _membership_value(verts, base, direction)

    rng = np.random.default_rng(seed)
    best = 1.0
    done = 0
    while done < starts:
        angles = np.array(
            [
                [np.arccos(rng.uniform(-1, 1)), rng.uniform(0, 2 * np.pi)]
                for _ in range(4)
            ]
        ).ravel()
        if _rank_one_povm_from_angles(angles) is None:
            continue
        done += 1
        res = minimize(
            value,
            angles,
            method="Nelder-Mead",
            options={"maxiter": 500, "xatol": 1e-5, "fatol": 1e-8},
        )
        # non-positive values mean the membership LP degenerated (rank-one
        # directions collapsing together); a genuine POVM always sits at
        # positive depth, so such runs carry no information
        if res.fun > 1e-6:
            best = min(best, float(res.fun))
    return ShrinkResult(best, "extremal-search", precision)
