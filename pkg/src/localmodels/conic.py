"""Declarative linear/PSD conic programs with audited solutions.

Problems are stated over named scalar variables and named Hermitian matrix
blocks (PSD-constrained or free), with matrix-valued linear equality
constraints and a linear objective to maximize.  The declarative form is
kept around after solving so residuals can be recomputed with plain
``numpy``, independently of whatever the solver reported.

Complex Hermitian PSD blocks are passed to the solver through the standard
real symmetric embedding ``[[U, -W], [W, U]]`` of ``X = U + iW``, which
preserves the spectrum (doubled multiplicities).

Backends: Clarabel (interior point, primary) and SCS (first-order,
fallback); LP-only problems can also go through scipy's HiGHS.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

DEFAULT_TOL = 1e-8


class SolverFailureError(RuntimeError):
    """The backend did not return a usable status."""


@dataclass(frozen=True)
class Term:
    """One linear contribution to a matrix equality.

    kind 'scalar':   data is a constant matrix C, contribution C * s.
    kind 'identity': data is a real coefficient c, contribution c * X.
    kind 'pairs':    data is a tuple of (A, B) pairs, contribution
                     sum_i A_i @ X @ B_i.
    """

    kind: str
    name: str
    data: object


def scalar_term(name: str, coeff_matrix) -> Term:
    return Term("scalar", name, np.asarray(coeff_matrix, dtype=complex))


def identity_term(name: str, coeff: float = 1.0) -> Term:
    return Term("identity", name, float(coeff))


def pairs_term(name: str, pairs) -> Term:
    pairs = tuple(
        (np.asarray(a, dtype=complex), np.asarray(b, dtype=complex))
        for a, b in pairs
    )
    return Term("pairs", name, pairs)


@dataclass
class _Block:
    dim: int
    psd: bool
    offset: int = 0


@dataclass
class _Scalar:
    lb: float | None
    ub: float | None
    offset: int = 0


@dataclass(frozen=True)
class ConicSolution:
    status: str
    objective: float
    values: dict
    max_eq_residual: float
    min_psd_slack: float

    @property
    def optimal(self) -> bool:
        return self.status == "optimal"


def _real_index(d: int):
    """Mapping tables for the d*d real parametrization of a Hermitian block.

    Layout: d diagonal entries, then for each i<j (row-major) the pair
    (Re X_ij, Im X_ij).
    """
    diag = {i: i for i in range(d)}
    off = {}
    pos = d
    for i in range(d):
        for j in range(i + 1, d):
            off[(i, j)] = pos
            pos += 2
    return diag, off


def hermitian_from_reals(vec: np.ndarray, d: int) -> np.ndarray:
    diag, off = _real_index(d)
    x = np.zeros((d, d), dtype=complex)
    for i in range(d):
        x[i, i] = vec[diag[i]]
    for (i, j), p in off.items():
        x[i, j] = vec[p] + 1j * vec[p + 1]
        x[j, i] = vec[p] - 1j * vec[p + 1]
    return x


def hermitian_to_reals(x: np.ndarray) -> np.ndarray:
    d = x.shape[0]
    diag, off = _real_index(d)
    vec = np.zeros(d * d)
    for i in range(d):
        vec[diag[i]] = x[i, i].real
    for (i, j), p in off.items():
        vec[p] = x[i, j].real
        vec[p + 1] = x[i, j].imag
    return vec


def _entry_rows(coeffs: np.ndarray, d: int):
    """Real row coefficients for one matrix entry of a constraint.

    ``coeffs`` is the complex (d, d) matrix with coefficient of X[k, l].
    Returns (real_row, imag_row) over the d*d real variables of the block.
    """
    diag, off = _real_index(d)
    re = np.zeros(d * d)
    im = np.zeros(d * d)
    for k in range(d):
        c = coeffs[k, k]
        re[diag[k]] += c.real
        im[diag[k]] += c.imag
    for (k, l), p in off.items():
        c1 = coeffs[k, l]
        c2 = coeffs[l, k]
        s, dlt = c1 + c2, c1 - c2
        re[p] += s.real
        re[p + 1] += -dlt.imag
        im[p] += s.imag
        im[p + 1] += dlt.real
    return re, im


class ConicProblem:
    """Maximize a linear objective under matrix equalities and PSD blocks."""

    def __init__(self):
        self.scalars: dict[str, _Scalar] = {}
        self.blocks: dict[str, _Block] = {}
        self.equalities: list[tuple[list[Term], np.ndarray]] = []
        self.objective: list[tuple[str, object]] = []

    # -- construction -----------------------------------------------------

    def add_scalar(self, name: str, lb: float | None = None, ub: float | None = None):
        if name in self.scalars or name in self.blocks:
            raise ValueError(f"duplicate variable {name!r}")
        self.scalars[name] = _Scalar(lb, ub)

    def add_psd_block(self, name: str, dim: int):
        self._add_block(name, dim, psd=True)

    def add_free_block(self, name: str, dim: int):
        self._add_block(name, dim, psd=False)

    def _add_block(self, name, dim, psd):
        if name in self.scalars or name in self.blocks:
            raise ValueError(f"duplicate variable {name!r}")
        self.blocks[name] = _Block(dim, psd)

    def add_equality(self, terms, rhs):
        rhs = np.atleast_2d(np.asarray(rhs, dtype=complex))
        for t in terms:
            if t.name not in self.scalars and t.name not in self.blocks:
                raise ValueError(f"unknown variable {t.name!r}")
        self.equalities.append((list(terms), rhs))

    def set_objective(self, entries):
        """entries: list of (name, coeff); scalar coeff for scalar variables,
        Hermitian matrix C for blocks meaning Re Tr[C X]."""
        for name, _ in entries:
            if name not in self.scalars and name not in self.blocks:
                raise ValueError(f"unknown variable {name!r}")
        self.objective = list(entries)

    # -- compilation ------------------------------------------------------

    def _assign_offsets(self) -> int:
        pos = 0
        for s in self.scalars.values():
            s.offset = pos
            pos += 1
        for b in self.blocks.values():
            b.offset = pos
            pos += b.dim * b.dim
        return pos

    def _term_matrix_shape(self, terms, rhs):
        return rhs.shape

    def _eval_term_entry_coeffs(self, term: Term, shape):
        """Complex tensor C[p, q, k, l]: coefficient of X[k, l] in entry (p, q)."""
        d = self.blocks[term.name].dim
        m = shape[0]
        if term.kind == "identity":
            c = np.zeros((m, shape[1], d, d), dtype=complex)
            for p in range(m):
                for q in range(shape[1]):
                    if p < d and q < d:
                        c[p, q, p, q] = term.data
            return c
        if term.kind == "pairs":
            c = np.zeros((m, shape[1], d, d), dtype=complex)
            for a, b in term.data:
                c += np.einsum("pk,lq->pqkl", a, b)
            return c
        raise ValueError(term.kind)

    def _equality_rows(self, nvars: int):
        """Sparse equality system rows: A x = b over the real variables."""
        data, rows, cols, bvals = [], [], [], []
        row0 = 0
        for terms, rhs in self.equalities:
            m, n = rhs.shape
            nrows = 2 * m * n
            # rhs rows: real then imag, entry-major
            for p in range(m):
                for q in range(n):
                    bvals.append(rhs[p, q].real)
                    bvals.append(rhs[p, q].imag)
            for t in terms:
                if t.kind == "scalar":
                    c = np.atleast_2d(t.data)
                    if c.shape != rhs.shape:
                        raise ValueError("scalar term coefficient shape mismatch")
                    off = self.scalars[t.name].offset
                    for p in range(m):
                        for q in range(n):
                            r = row0 + 2 * (p * n + q)
                            if c[p, q].real != 0:
                                rows.append(r); cols.append(off); data.append(c[p, q].real)
                            if c[p, q].imag != 0:
                                rows.append(r + 1); cols.append(off); data.append(c[p, q].imag)
                    continue
                blk = self.blocks[t.name]
                d = blk.dim
                if t.kind == "identity":
                    if rhs.shape != (d, d):
                        raise ValueError("identity term on non-matching equality shape")
                    c = float(t.data)
                    diag, offmap = _real_index(d)
                    for p in range(d):
                        for q in range(d):
                            r = row0 + 2 * (p * d + q)
                            if p == q:
                                rows.append(r); cols.append(blk.offset + diag[p]); data.append(c)
                            else:
                                i, j = (p, q) if p < q else (q, p)
                                pos = offmap[(i, j)]
                                rows.append(r); cols.append(blk.offset + pos); data.append(c)
                                sgn = 1.0 if p < q else -1.0
                                rows.append(r + 1); cols.append(blk.offset + pos + 1); data.append(sgn * c)
                    continue
                coeffs = self._eval_term_entry_coeffs(t, rhs.shape)
                for p in range(m):
                    for q in range(n):
                        re, im = _entry_rows(coeffs[p, q], d)
                        r = row0 + 2 * (p * n + q)
                        for vec, rr in ((re, r), (im, r + 1)):
                            nz = np.nonzero(vec)[0]
                            rows.extend((rr,) * len(nz))
                            cols.extend((blk.offset + int(i) for i in nz))
                            data.extend(vec[nz])
            row0 += nrows
        a = sp.coo_matrix(
            (data, (rows, cols)), shape=(row0, nvars)
        ).tocsc()
        return a, np.array(bvals)

    def _objective_vector(self, nvars: int) -> np.ndarray:
        c = np.zeros(nvars)
        for name, coeff in self.objective:
            if name in self.scalars:
                c[self.scalars[name].offset] += float(np.real(coeff))
            else:
                blk = self.blocks[name]
                cm = np.asarray(coeff, dtype=complex)
                # Re Tr[C X] as a linear functional of the real variables
                vec = hermitian_to_reals((cm + cm.conj().T) / 2)
                # Tr[C X] doubles off-diagonal real parts
                d = blk.dim
                diag, off = _real_index(d)
                for (i, j), p in off.items():
                    vec[p] *= 2
                    vec[p + 1] *= 2
                c[blk.offset: blk.offset + d * d] += vec
        return c

    def _psd_embedding_rows(self, nvars: int, order: str = "scs"):
        """Rows mapping real vars to svec of the real symmetric embedding.

        Returns (A_psd, b_psd, cone_dims) such that s = b - A x stacks the
        scaled triangular vectorizations of the 2d x 2d embeddings.  SCS
        packs the lower triangle column-major, Clarabel the upper triangle
        column-major; both scale off-diagonals by sqrt(2).
        """
        data, rows, cols = [], [], []
        cone_dims = []
        row0 = 0
        sq2 = np.sqrt(2.0)
        for b in self.blocks.values():
            if not b.psd:
                continue
            d = b.dim
            e = 2 * d
            diag, off = _real_index(d)

            def entry_coeffs(i, j):
                # embedding entry (i, j) as {real-var-offset: coeff}
                bi, ii = divmod(i, d)
                bj, jj = divmod(j, d)
                out = {}
                if bi == bj:  # U block
                    if ii == jj:
                        out[diag[ii]] = 1.0
                    else:
                        a_, b_ = (ii, jj) if ii < jj else (jj, ii)
                        out[off[(a_, b_)]] = 1.0
                else:  # +-W block: embedding (0,1) block is -W, (1,0) is W
                    sgn = -1.0 if (bi, bj) == (0, 1) else 1.0
                    if ii == jj:
                        pass  # W diagonal is zero
                    else:
                        a_, b_ = (ii, jj) if ii < jj else (jj, ii)
                        s2 = 1.0 if ii < jj else -1.0
                        out[off[(a_, b_)] + 1] = sgn * s2
                return out

            r = row0
            for j in range(e):  # column-major triangle, per backend convention
                irange = range(j, e) if order == "scs" else range(0, j + 1)
                for i in irange:
                    scale = 1.0 if i == j else sq2
                    for p, v in entry_coeffs(i, j).items():
                        rows.append(r)
                        cols.append(b.offset + p)
                        data.append(-scale * v)  # s = b - A x with b = 0
                    r += 1
            cone_dims.append(e)
            row0 = r
        a = sp.coo_matrix((data, (rows, cols)), shape=(row0, nvars)).tocsc()
        return a, np.zeros(row0), cone_dims

    def _bound_rows(self, nvars: int):
        data, rows, cols, bvals = [], [], [], []
        r = 0
        for s in self.scalars.values():
            if s.lb is not None:
                rows.append(r); cols.append(s.offset); data.append(-1.0)
                bvals.append(-s.lb); r += 1
            if s.ub is not None:
                rows.append(r); cols.append(s.offset); data.append(1.0)
                bvals.append(s.ub); r += 1
        a = sp.coo_matrix((data, (rows, cols)), shape=(r, nvars)).tocsc()
        return a, np.array(bvals)

    # -- solving ----------------------------------------------------------

    def solve(
        self,
        tol: float = DEFAULT_TOL,
        backend: str = "auto",
        max_iters: int = 200_000,
    ) -> ConicSolution:
        nvars = self._assign_offsets()
        a_eq, b_eq = self._equality_rows(nvars)
        a_ineq, b_ineq = self._bound_rows(nvars)
        c = -self._objective_vector(nvars)  # solvers minimize
        has_psd = any(b.psd for b in self.blocks.values())

        if backend == "auto":
            backend = "highs" if not has_psd else "clarabel"

        if backend == "highs":
            if has_psd:
                raise ValueError("LP backend cannot handle PSD blocks")
            x, status = self._solve_highs(c, a_eq, b_eq, a_ineq, b_ineq, nvars)
        elif backend == "clarabel":
            a_psd, b_psd, psd_dims = self._psd_embedding_rows(nvars, order="clarabel")
            try:
                x, status = self._solve_clarabel(
                    c, a_eq, b_eq, a_ineq, b_ineq, a_psd, b_psd, psd_dims, tol, max_iters
                )
            except SolverFailureError:
                a_psd, b_psd, psd_dims = self._psd_embedding_rows(nvars, order="scs")
                x, status = self._solve_scs(
                    c, a_eq, b_eq, a_ineq, b_ineq, a_psd, b_psd, psd_dims, tol, max_iters
                )
        elif backend == "scs":
            a_psd, b_psd, psd_dims = self._psd_embedding_rows(nvars, order="scs")
            x, status = self._solve_scs(
                c, a_eq, b_eq, a_ineq, b_ineq, a_psd, b_psd, psd_dims, tol, max_iters
            )
        else:
            raise ValueError(f"unknown backend {backend!r}")

        if x is None:
            return ConicSolution(status, float("nan"), {}, float("nan"), float("nan"))
        values = self.extract(x)
        max_res, min_slack = self.residuals(values)
        return ConicSolution(status, float(-c @ x), values, max_res, min_slack)

    def _solve_highs(self, c, a_eq, b_eq, a_ineq, b_ineq, nvars):
        from scipy.optimize import linprog

        bounds = [(None, None)] * nvars
        for s in self.scalars.values():
            bounds[s.offset] = (s.lb, s.ub)
        res = linprog(
            c, A_eq=a_eq, b_eq=b_eq, bounds=bounds, method="highs",
        )
        if res.status == 0:
            return res.x, "optimal"
        if res.status == 2:
            return None, "infeasible"
        if res.status == 3:
            return None, "unbounded"
        return None, "numerical-failure"

    def _solve_clarabel(
        self, c, a_eq, b_eq, a_ineq, b_ineq, a_psd, b_psd, psd_dims, tol, max_iters
    ):
        import clarabel

        a = sp.vstack([a_eq, a_ineq, a_psd], format="csc")
        b = np.concatenate([b_eq, b_ineq, b_psd])
        cones = []
        if a_eq.shape[0]:
            cones.append(clarabel.ZeroConeT(a_eq.shape[0]))
        if a_ineq.shape[0]:
            cones.append(clarabel.NonnegativeConeT(a_ineq.shape[0]))
        cones.extend(clarabel.PSDTriangleConeT(d) for d in psd_dims)
        settings = clarabel.DefaultSettings()
        settings.verbose = False
        settings.tol_feas = tol
        settings.tol_gap_abs = tol
        settings.tol_gap_rel = tol
        settings.max_iter = min(max_iters, 10_000)
        solver = clarabel.DefaultSolver(
            sp.csc_matrix((len(c), len(c))), c, a, b, cones, settings
        )
        sol = solver.solve()
        status = str(sol.status)
        if status in ("Solved", "AlmostSolved"):
            return np.array(sol.x), "optimal"
        if "PrimalInfeasible" in status:
            return None, "infeasible"
        if "DualInfeasible" in status:
            return None, "unbounded"
        raise SolverFailureError(f"clarabel status {status}")

    def _solve_scs(
        self, c, a_eq, b_eq, a_ineq, b_ineq, a_psd, b_psd, psd_dims, tol, max_iters
    ):
        import scs

        a = sp.vstack([a_eq, a_ineq, a_psd], format="csc")
        b = np.concatenate([b_eq, b_ineq, b_psd])
        cone = {"z": a_eq.shape[0], "l": a_ineq.shape[0], "s": psd_dims}
        data = {"A": a, "b": b, "c": c}
        solver = scs.SCS(
            data, cone, eps_abs=tol, eps_rel=tol, max_iters=max_iters, verbose=False
        )
        out = solver.solve()
        status = out["info"]["status"]
        if "solved" in status.lower():
            return out["x"], "optimal"
        if "infeasible" in status.lower():
            return None, "infeasible"
        if "unbounded" in status.lower():
            return None, "unbounded"
        return None, "numerical-failure"

    # -- auditing ---------------------------------------------------------

    def extract(self, x: np.ndarray) -> dict:
        values = {}
        for name, s in self.scalars.items():
            values[name] = float(x[s.offset])
        for name, b in self.blocks.items():
            values[name] = hermitian_from_reals(
                x[b.offset: b.offset + b.dim * b.dim], b.dim
            )
        return values

    def evaluate_equality(self, terms, rhs, values) -> np.ndarray:
        acc = -np.atleast_2d(np.asarray(rhs, dtype=complex)).copy()
        for t in terms:
            if t.kind == "scalar":
                acc += np.atleast_2d(t.data) * values[t.name]
            elif t.kind == "identity":
                acc += t.data * values[t.name]
            else:
                for a, b in t.data:
                    acc += a @ values[t.name] @ b
        return acc

    def residuals(self, values) -> tuple[float, float]:
        max_res = 0.0
        for terms, rhs in self.equalities:
            res = self.evaluate_equality(terms, rhs, values)
            max_res = max(max_res, float(np.max(np.abs(res))))
        min_slack = np.inf
        for name, b in self.blocks.items():
            if b.psd:
                ev = np.linalg.eigvalsh(
                    (values[name] + values[name].conj().T) / 2
                )[0]
                min_slack = min(min_slack, float(ev))
        for name, s in self.scalars.items():
            v = values[name]
            if s.lb is not None:
                min_slack = min(min_slack, v - s.lb)
            if s.ub is not None:
                min_slack = min(min_slack, s.ub - v)
        if min_slack is np.inf:
            min_slack = 0.0
        return max_res, min_slack

    def objective_value(self, values) -> float:
        total = 0.0
        for name, coeff in self.objective:
            if name in self.scalars:
                total += float(np.real(coeff)) * values[name]
            else:
                total += float(np.real(np.trace(np.asarray(coeff) @ values[name])))
        return total

    def dump_json(self) -> str:
        """Self-describing debug dump of the compiled problem."""
        nvars = self._assign_offsets()
        a_eq, b_eq = self._equality_rows(nvars)
        coo = a_eq.tocoo()
        doc = {
            "n_vars": nvars,
            "scalars": {
                n: {"offset": s.offset, "lb": s.lb, "ub": s.ub}
                for n, s in self.scalars.items()
            },
            "blocks": {
                n: {"offset": b.offset, "dim": b.dim, "psd": b.psd}
                for n, b in self.blocks.items()
            },
            "equality_triplets": [
                [int(r), int(c_), float(v)]
                for r, c_, v in zip(coo.row, coo.col, coo.data)
            ],
            "equality_rhs": b_eq.tolist(),
            "objective": self._objective_vector(nvars).tolist(),
        }
        return json.dumps(doc)
