"""POVMs, Bloch-sphere projective measurements and polyhedral hierarchies.

Qubit projective measurement sets are represented by their Bloch vertices,
stored in antipodal pairs: measurement ``x`` owns the pair
``(+v_x, -v_x)`` and outcome 0 maps to ``+v_x``.  Refinement adds the
unit-normalized face centroids of the current vertex hull (the geometric
dual), which reproduces the 12 - 32 - 92 - 272 vertex sequence starting
from the icosahedron.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field

import numpy as np
from scipy.spatial import ConvexHull
from scipy.spatial.transform import Rotation

from .qops import PAULIS, TOL_HERM, TOL_PSD, DensityOperator, min_eigenvalue

GOLDEN = (1 + np.sqrt(5)) / 2


@dataclass(frozen=True)
class Povm:
    """Finite-outcome POVM: PSD elements summing to the identity."""

    elements: tuple

    def __post_init__(self):
        els = tuple(np.asarray(e, dtype=complex) for e in self.elements)
        if not els:
            raise ValueError("POVM needs at least one element")
        d = els[0].shape[0]
        total = np.zeros((d, d), dtype=complex)
        for e in els:
            if e.shape != (d, d):
                raise ValueError("POVM elements must share one dimension")
            if min_eigenvalue(e) < -TOL_PSD:
                raise ValueError("POVM element has a negative eigenvalue")
            total += e
            e.setflags(write=False)
        if np.max(np.abs(total - np.eye(d))) > 1e-8:
            raise ValueError("POVM elements do not sum to the identity")
        object.__setattr__(self, "elements", els)

    @property
    def dim(self) -> int:
        return self.elements[0].shape[0]

    @property
    def outcomes(self) -> int:
        return len(self.elements)


def bloch_vector(v) -> np.ndarray:
    v = np.asarray(v, dtype=float)
    if v.shape != (3,):
        raise ValueError("Bloch vector must have three components")
    if np.linalg.norm(v) > 1 + 1e-12:
        raise ValueError("Bloch vector norm exceeds 1")
    return v


def projective_from_bloch(v) -> Povm:
    """Two-outcome projective qubit measurement along +-v."""
    v = np.asarray(v, dtype=float)
    if abs(np.linalg.norm(v) - 1.0) > 1e-9:
        raise ValueError("projective direction must be a unit vector")
    op = sum(v[i] * PAULIS[i] for i in range(3))
    eye = np.eye(2)
    return Povm(((eye + op) / 2, (eye - op) / 2))


@dataclass(frozen=True)
class MeasurementSet:
    """A family of same-shape POVMs, optionally with Bloch-polyhedron data."""

    povms: tuple
    bloch_vertices: np.ndarray | None = None
    label: str = ""
    level: int | None = None

    def __post_init__(self):
        povms = tuple(self.povms)
        if not povms:
            raise ValueError("measurement set is empty")
        d, k = povms[0].dim, povms[0].outcomes
        for p in povms:
            if p.dim != d or p.outcomes != k:
                raise ValueError("POVMs must share dimension and outcome count")
        object.__setattr__(self, "povms", povms)
        if self.bloch_vertices is not None:
            verts = np.asarray(self.bloch_vertices, dtype=float)
            if len(verts) != 2 * len(povms):
                raise ValueError("expected two Bloch vertices per measurement")
            verts.setflags(write=False)
            object.__setattr__(self, "bloch_vertices", verts)

    @property
    def dim(self) -> int:
        return self.povms[0].dim

    @property
    def outcomes(self) -> int:
        return self.povms[0].outcomes

    @property
    def n_measurements(self) -> int:
        return len(self.povms)

    def directions(self) -> np.ndarray:
        """One representative (+outcome) Bloch vertex per measurement."""
        if self.bloch_vertices is None:
            raise ValueError("measurement set has no Bloch structure")
        return self.bloch_vertices[::2]

    def to_json_dict(self) -> dict:
        doc = {
            "label": self.label,
            "level": self.level,
            "dimension": self.dim,
            "outcomes": self.outcomes,
            "povms": [
                [[np.real(e).tolist(), np.imag(e).tolist()] for e in p.elements]
                for p in self.povms
            ],
        }
        if self.bloch_vertices is not None:
            doc["bloch_vertices"] = self.bloch_vertices.tolist()
        return doc

    def to_json(self) -> str:
        return json.dumps(self.to_json_dict())

    @staticmethod
    def from_json_dict(doc: dict) -> "MeasurementSet":
        povms = tuple(
            Povm(tuple(np.array(re) + 1j * np.array(im) for re, im in els))
            for els in doc["povms"]
        )
        verts = doc.get("bloch_vertices")
        return MeasurementSet(
            povms,
            bloch_vertices=None if verts is None else np.array(verts),
            label=doc.get("label", ""),
            level=doc.get("level"),
        )


def _set_from_pairs(pairs: np.ndarray, label: str, level: int | None) -> MeasurementSet:
    verts = []
    povms = []
    for v in pairs:
        verts.extend([v, -v])
        povms.append(projective_from_bloch(v))
    return MeasurementSet(tuple(povms), np.array(verts), label=label, level=level)


def _antipodal_reduce(vertices: np.ndarray) -> np.ndarray:
    """One representative per antipodal pair, input order preserved."""
    out, seen = [], set()
    for v in vertices:
        key = tuple(np.round(v, 9))
        if key in seen:
            continue
        seen.add(key)
        seen.add(tuple(np.round(-v, 9)))
        out.append(v)
    return np.array(out)


def _rotated(pairs: np.ndarray, euler) -> np.ndarray:
    if euler is None:
        return pairs
    rot = Rotation.from_euler("zyz", euler).as_matrix()
    return pairs @ rot.T


def icosahedron_set(euler=None) -> MeasurementSet:
    """The 12-vertex icosahedron: 6 projective qubit measurements."""
    verts = []
    for s1, s2 in itertools.product((1, -1), repeat=2):
        verts += [(0, s1, s2 * GOLDEN), (s1, s2 * GOLDEN, 0), (s2 * GOLDEN, 0, s1)]
    verts = np.array(verts, dtype=float)
    verts /= np.linalg.norm(verts, axis=1, keepdims=True)
    pairs = _rotated(_antipodal_reduce(verts), euler)
    return _set_from_pairs(pairs, "icosahedron", level=1)


def cube_set(euler=None) -> MeasurementSet:
    """The 8-vertex cube: 4 projective qubit measurements."""
    verts = np.array(list(itertools.product((1, -1), repeat=3)), dtype=float)
    verts /= np.sqrt(3)
    pairs = _rotated(_antipodal_reduce(verts), euler)
    return _set_from_pairs(pairs, "cube", level=1)


def refine_by_dual(mset: MeasurementSet) -> MeasurementSet:
    """Add the unit-normalized face centroids of the vertex hull."""
    if mset.bloch_vertices is None:
        raise ValueError("refinement needs Bloch vertices")
    verts = np.asarray(mset.bloch_vertices)
    hull = ConvexHull(verts)
    cents = verts[hull.simplices].mean(axis=1)
    norms = np.linalg.norm(cents, axis=1)
    if np.min(norms) < 1e-9:
        raise ValueError("degenerate hull: face centroid at the origin")
    cents /= norms[:, None]
    # originals first so the refined set contains the input; duplicate and
    # antipodal centroids collapse onto one representative
    ordered = _antipodal_reduce(np.vstack([verts, cents]))
    level = None if mset.level is None else mset.level + 1
    return _set_from_pairs(ordered, f"{mset.label}+dual", level=level)


def level_set(level: int, euler=None) -> MeasurementSet:
    """Icosahedron refined ``level - 1`` times (12, 32, 92, 272 vertices)."""
    if level < 1:
        raise ValueError("level must be >= 1")
    mset = icosahedron_set(euler=euler)
    for _ in range(level - 1):
        mset = refine_by_dual(mset)
    return mset


def shrunk_povm(m: Povm, eta: float, xi: DensityOperator) -> Povm:
    """Depolarize a POVM towards the trivial one: eta*M + (1-eta)*Tr[xi M]*1."""
    if not 0 < eta <= 1:
        raise ValueError("eta must lie in (0, 1]")
    d = m.dim
    eye = np.eye(d)
    els = tuple(
        eta * e + (1 - eta) * np.real(np.trace(xi.matrix @ e)) * eye
        for e in m.elements
    )
    return Povm(els)


def povm_set_for_appendix_e(euler=None) -> MeasurementSet:
    """4-outcome qubit POVM set: icosahedron projector relabellings + trivial.

    All ordered placements of (P+, P-) into two of four outcome slots, for
    each of the 6 icosahedron directions (72 POVMs), plus the 4 relabellings
    of the trivial measurement: 76 elements in total.
    """
    ico = icosahedron_set(euler=euler)
    zero = np.zeros((2, 2), dtype=complex)
    povms = []
    for povm in ico.povms:
        plus, minus = povm.elements
        for i, j in itertools.permutations(range(4), 2):
            els = [zero, zero, zero, zero]
            els[i], els[j] = plus, minus
            povms.append(Povm(tuple(els)))
    for i in range(4):
        els = [zero, zero, zero, zero]
        els[i] = np.eye(2, dtype=complex)
        povms.append(Povm(tuple(els)))
    return MeasurementSet(tuple(povms), label="appendixE-povm4", level=1)


def appendix_e_generators(euler=None) -> MeasurementSet:
    """The 6 non-relabelled 4-outcome generators used inside the protocols."""
    ico = icosahedron_set(euler=euler)
    zero = np.zeros((2, 2), dtype=complex)
    povms = [
        Povm((p.elements[0], p.elements[1], zero, zero)) for p in ico.povms
    ]
    return MeasurementSet(
        tuple(povms), bloch_vertices=ico.bloch_vertices,
        label="appendixE-generators", level=1,
    )
