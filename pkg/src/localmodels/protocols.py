"""Assemblages, the LHS/LHV search programs and the level-by-level driver.

The LHS program maximizes q such that an auxiliary Hermitian operator chi
reproduces the target's assemblage through deterministic strategies while
``eta chi + (1-eta) xi_A (x) chi_B = q rho + (1-q) 1/D`` maps chi back to a
noisy copy of the target (D the full bipartite dimension).  q* = 1 means
the target itself admits a local hidden state model for the continuous
set behind the shrinking factor eta; q* < 1 certifies the model for the
noisy state ``q* rho + (1-q*) 1/D``.

The LHV program is the two-sided linear analogue over joint deterministic
strategies with weights p_lambda and shrinking factors (eta, mu).

chi is Hermitian with unit trace but not constrained to be positive; the
constraints only require its correlations to be classically reproducible.
"""

from __future__ import annotations

import hashlib
import json
import time
from dataclasses import dataclass, field

import numpy as np

from .conic import (
    ConicProblem,
    ConicSolution,
    identity_term,
    pairs_term,
    scalar_term,
)
from .measure import MeasurementSet, level_set
from .qops import (
    DensityOperator,
    HermitianOperator,
    maximally_mixed,
    partial_trace,
    tensor,
)
from .shrink import inscribed_sphere_eta
from .strategies import StrategySet, strategies_for

CERTIFICATE_SCHEMA = "localmodels/certificate/v1"


class ProtocolInfeasibleError(RuntimeError):
    """The program is infeasible even at q = 0."""


# -- assemblages ----------------------------------------------------------


@dataclass(frozen=True)
class Assemblage:
    """Bob's unnormalized conditional states sigma[(x, a)]."""

    sigma: dict
    n_measurements: int
    n_outcomes: int
    dim: int

    def __post_init__(self):
        from .qops import min_eigenvalue

        reduced = None
        for x in range(self.n_measurements):
            total = np.zeros((self.dim, self.dim), dtype=complex)
            for a in range(self.n_outcomes):
                s = self.sigma[(x, a)]
                if min_eigenvalue(s) < -1e-8:
                    raise ValueError(f"sigma[{x},{a}] is not PSD")
                total += s
            if reduced is None:
                reduced = total
            elif np.max(np.abs(total - reduced)) > 1e-9:
                raise ValueError("assemblage violates no-signaling")


def assemblage(rho: DensityOperator, mset: MeasurementSet) -> Assemblage:
    if mset.dim != rho.dim_a:
        raise ValueError("measurement dimension does not match Alice's space")
    sigma = {}
    for x, povm in enumerate(mset.povms):
        for a, m in enumerate(povm.elements):
            op = tensor(m, np.eye(rho.dim_b)) @ rho.matrix
            sigma[(x, a)] = partial_trace(op, rho.dim_a, rho.dim_b, over="A")
    return Assemblage(sigma, mset.n_measurements, mset.outcomes, rho.dim_b)


# -- linear-map helper pairs (A @ chi @ B decompositions) -----------------


def _trace_a_pairs(m: np.ndarray, da: int, db: int):
    """Tr_A[(m (x) 1) chi] as a sum of A chi B products."""
    eye_b = np.eye(db)
    pairs = []
    for i in range(da):
        row = np.zeros((1, da))
        row[0, i] = 1
        col = row.T
        pairs.append((tensor(row @ m, eye_b), tensor(col, eye_b)))
    return pairs


def _xi_a_tensor_trace_a_pairs(xi: np.ndarray, da: int, db: int):
    """xi_A (x) Tr_A[chi] as a sum of A chi B products."""
    eye_b = np.eye(db)
    pairs = []
    for k in range(da):
        for kp in range(da):
            if xi[k, kp] == 0:
                continue
            for i in range(da):
                ek_ei = np.zeros((da, da))
                ek_ei[k, i] = 1
                ei_ekp = np.zeros((da, da))
                ei_ekp[i, kp] = 1
                pairs.append(
                    (xi[k, kp] * tensor(ek_ei, eye_b), tensor(ei_ekp, eye_b))
                )
    return pairs


def _trace_b_tensor_xi_b_pairs(xi: np.ndarray, da: int, db: int):
    """Tr_B[chi] (x) xi_B as a sum of A chi B products."""
    eye_a = np.eye(da)
    pairs = []
    for j in range(db):
        for jp in range(db):
            if xi[j, jp] == 0:
                continue
            for i in range(db):
                ej_ei = np.zeros((db, db))
                ej_ei[j, i] = 1
                ei_ejp = np.zeros((db, db))
                ei_ejp[i, jp] = 1
                pairs.append(
                    (xi[j, jp] * tensor(eye_a, ej_ei), tensor(eye_a, ei_ejp))
                )
    return pairs


def _trace_functional_pairs(k: np.ndarray):
    """Tr[k chi] as 1x1 products."""
    d = k.shape[0]
    pairs = []
    for i in range(d):
        row = np.zeros((1, d))
        row[0, i] = 1
        pairs.append((row @ k, row.T))
    return pairs


# -- certificates ---------------------------------------------------------


def _mat_json(m) -> list:
    m = np.asarray(m, dtype=complex)
    return [np.real(m).tolist(), np.imag(m).tolist()]


def _mat_from_json(doc) -> np.ndarray:
    return np.array(doc[0]) + 1j * np.array(doc[1])


@dataclass
class LocalModelCertificate:
    """Raw solver output, sufficient for solver-independent re-verification."""

    mode: str                      # "LHS" | "LHV"
    rho: np.ndarray
    dim_a: int
    dim_b: int
    measurement_set_a: MeasurementSet
    measurement_set_b: MeasurementSet | None
    eta: float
    mu: float | None
    xi_a: np.ndarray
    xi_b: np.ndarray | None
    q_star: float
    chi: np.ndarray
    hidden_states: list | None     # LHS: sigma_lambda matrices
    weights: list | None           # LHV: p_lambda
    strategies_a: StrategySet
    strategies_b: StrategySet | None
    solver_tol: float
    max_eq_residual: float
    min_psd_slack: float
    continuous_set: str = "projective-qubit"
    timestamp: float = field(default_factory=time.time)

    def __post_init__(self):
        if self.mode not in ("LHS", "LHV"):
            raise ValueError("mode must be LHS or LHV")
        if not -1e-9 <= self.q_star <= 1 + 1e-9:
            raise ValueError("q_star out of [0, 1]")

    def to_json_dict(self) -> dict:
        doc = {
            "schema": CERTIFICATE_SCHEMA,
            "mode": self.mode,
            "rho": _mat_json(self.rho),
            "dim_a": self.dim_a,
            "dim_b": self.dim_b,
            "measurement_set_a": self.measurement_set_a.to_json_dict(),
            "measurement_set_b": (
                None if self.measurement_set_b is None
                else self.measurement_set_b.to_json_dict()
            ),
            "eta": self.eta,
            "mu": self.mu,
            "xi_a": _mat_json(self.xi_a),
            "xi_b": None if self.xi_b is None else _mat_json(self.xi_b),
            "q_star": self.q_star,
            "chi": _mat_json(self.chi),
            "hidden_states": (
                None if self.hidden_states is None
                else [_mat_json(s) for s in self.hidden_states]
            ),
            "weights": self.weights,
            "strategies_a": self.strategies_a.to_json_dict(),
            "strategies_b": (
                None if self.strategies_b is None
                else self.strategies_b.to_json_dict()
            ),
            "solver_tol": self.solver_tol,
            "max_eq_residual": self.max_eq_residual,
            "min_psd_slack": self.min_psd_slack,
            "continuous_set": self.continuous_set,
        }
        doc["content_hash"] = hashlib.sha256(
            json.dumps(doc, sort_keys=True).encode()
        ).hexdigest()
        doc["timestamp"] = self.timestamp
        return doc

    def to_json(self) -> str:
        return json.dumps(self.to_json_dict())

    @staticmethod
    def from_json_dict(doc: dict) -> "LocalModelCertificate":
        if doc.get("schema") != CERTIFICATE_SCHEMA:
            raise ValueError(f"unknown certificate schema {doc.get('schema')!r}")
        return LocalModelCertificate(
            mode=doc["mode"],
            rho=_mat_from_json(doc["rho"]),
            dim_a=doc["dim_a"],
            dim_b=doc["dim_b"],
            measurement_set_a=MeasurementSet.from_json_dict(doc["measurement_set_a"]),
            measurement_set_b=(
                None if doc["measurement_set_b"] is None
                else MeasurementSet.from_json_dict(doc["measurement_set_b"])
            ),
            eta=doc["eta"],
            mu=doc["mu"],
            xi_a=_mat_from_json(doc["xi_a"]),
            xi_b=None if doc["xi_b"] is None else _mat_from_json(doc["xi_b"]),
            q_star=doc["q_star"],
            chi=_mat_from_json(doc["chi"]),
            hidden_states=(
                None if doc["hidden_states"] is None
                else [_mat_from_json(s) for s in doc["hidden_states"]]
            ),
            weights=doc["weights"],
            strategies_a=StrategySet.from_json_dict(doc["strategies_a"]),
            strategies_b=(
                None if doc["strategies_b"] is None
                else StrategySet.from_json_dict(doc["strategies_b"])
            ),
            solver_tol=doc["solver_tol"],
            max_eq_residual=doc["max_eq_residual"],
            min_psd_slack=doc["min_psd_slack"],
            continuous_set=doc.get("continuous_set", "projective-qubit"),
            timestamp=doc.get("timestamp", 0.0),
        )

    @staticmethod
    def from_json(text: str) -> "LocalModelCertificate":
        return LocalModelCertificate.from_json_dict(json.loads(text))


# -- LHS path -------------------------------------------------------------


def lhs_feasibility(
    asm: Assemblage, strategies: StrategySet, tol: float = 1e-8
):
    """Decide whether the assemblage splits over the given strategies.

    Returns (feasible, hidden_states or None).  With a complete strategy
    set, infeasibility certifies steerability for this finite measurement
    set; with a pruned set it is inconclusive.
    """
    if strategies.n_measurements != asm.n_measurements or (
        strategies.n_outcomes != asm.n_outcomes
    ):
        raise ValueError("strategy set does not match the assemblage")
    prob = ConicProblem()
    for lam in range(len(strategies)):
        prob.add_psd_block(f"s{lam}", asm.dim)
    for x in range(asm.n_measurements):
        for a in range(asm.n_outcomes):
            terms = [
                identity_term(f"s{lam}", 1.0)
                for lam, st in enumerate(strategies.strategies)
                if st.assignment[x] == a
            ]
            prob.add_equality(terms, asm.sigma[(x, a)])
    prob.set_objective([])
    sol = prob.solve(tol=tol)
    if sol.status == "infeasible":
        return False, None
    if not sol.optimal:
        raise RuntimeError(f"solver failure: {sol.status}")
    hidden = [sol.values[f"s{lam}"] for lam in range(len(strategies))]
    return True, hidden


def steering_threshold(
    rho0: DensityOperator,
    rho1: DensityOperator,
    mset: MeasurementSet,
    strategies: StrategySet,
    tol: float = 1e-8,
) -> float:
    """Largest t such that (1-t) rho0 + t rho1 stays unsteerable for the set.

    Solved as a single program: the assemblage is affine in t.
    """
    a0 = assemblage(rho0, mset)
    a1 = assemblage(rho1, mset)
    prob = ConicProblem()
    prob.add_scalar("t", lb=0.0, ub=1.0)
    for lam in range(len(strategies)):
        prob.add_psd_block(f"s{lam}", a0.dim)
    for x in range(a0.n_measurements):
        for a in range(a0.n_outcomes):
            terms = [
                identity_term(f"s{lam}", 1.0)
                for lam, st in enumerate(strategies.strategies)
                if st.assignment[x] == a
            ]
            terms.append(
                scalar_term("t", -(a1.sigma[(x, a)] - a0.sigma[(x, a)]))
            )
            prob.add_equality(terms, a0.sigma[(x, a)])
    prob.set_objective([("t", 1.0)])
    sol = prob.solve(tol=tol)
    if not sol.optimal:
        raise RuntimeError(f"solver failure: {sol.status}")
    return float(sol.objective)


def protocol1(
    rho: DensityOperator,
    mset: MeasurementSet,
    eta: float,
    xi: DensityOperator,
    strategies: StrategySet,
    tol: float = 1e-8,
    continuous_set: str = "projective-qubit",
) -> LocalModelCertificate:
    """LHS search: maximize q towards an LHS model for the continuous set."""
    if not 0 < eta <= 1:
        raise ValueError("eta must lie in (0, 1]")
    da, db = rho.dim_a, rho.dim_b
    dim = da * db
    if mset.dim != da:
        raise ValueError("measurement dimension does not match Alice's space")
    if strategies.n_measurements != mset.n_measurements or (
        strategies.n_outcomes != mset.outcomes
    ):
        raise ValueError("strategy set does not match the measurement set")

    prob = ConicProblem()
    prob.add_free_block("chi", dim)
    prob.add_scalar("q", lb=0.0, ub=1.0)
    for lam in range(len(strategies)):
        prob.add_psd_block(f"s{lam}", db)

    eye_b = np.eye(db)
    for x, povm in enumerate(mset.povms):
        for a, m in enumerate(povm.elements):
            terms = [pairs_term("chi", _trace_a_pairs(m, da, db))]
            terms += [
                identity_term(f"s{lam}", -1.0)
                for lam, st in enumerate(strategies.strategies)
                if st.assignment[x] == a
            ]
            prob.add_equality(terms, np.zeros((db, db)))

    noise = np.eye(dim) / dim
    prob.add_equality(
        [
            pairs_term("chi", [(eta * np.eye(dim), np.eye(dim))]),
            pairs_term("chi", [
                ((1 - eta) * a, b)
                for a, b in _xi_a_tensor_trace_a_pairs(xi.matrix, da, db)
            ]),
            scalar_term("q", -(rho.matrix - noise)),
        ],
        noise,
    )
    prob.add_equality(
        [pairs_term("chi", _trace_functional_pairs(np.eye(dim)))],
        np.ones((1, 1)),
    )
    prob.set_objective([("q", 1.0)])
    sol = prob.solve(tol=tol)
    if sol.status == "infeasible":
        raise ProtocolInfeasibleError("LHS program infeasible even at q = 0")
    if not sol.optimal:
        raise RuntimeError(f"solver failure: {sol.status}")

    return LocalModelCertificate(
        mode="LHS",
        rho=rho.matrix,
        dim_a=da,
        dim_b=db,
        measurement_set_a=mset,
        measurement_set_b=None,
        eta=eta,
        mu=None,
        xi_a=xi.matrix,
        xi_b=None,
        q_star=float(np.clip(sol.values["q"], 0.0, 1.0)),
        chi=sol.values["chi"],
        hidden_states=[sol.values[f"s{lam}"] for lam in range(len(strategies))],
        weights=None,
        strategies_a=strategies,
        strategies_b=None,
        solver_tol=tol,
        max_eq_residual=sol.max_eq_residual,
        min_psd_slack=sol.min_psd_slack,
        continuous_set=continuous_set,
    )


def lemma1_map(
    chi: DensityOperator, xi: DensityOperator, eta: float
) -> DensityOperator:
    """eta chi + (1-eta) xi_A (x) chi_B."""
    if not 0 < eta <= 1:
        raise ValueError("eta must lie in (0, 1]")
    if xi.dim != chi.dim_a:
        raise ValueError("xi must live on Alice's space")
    chi_b = chi.ptrace("A")
    m = eta * chi.matrix + (1 - eta) * tensor(xi.matrix, chi_b)
    return DensityOperator(m, chi.dim_a, chi.dim_b)


def lemma2_map(
    chi: DensityOperator,
    xi_a: DensityOperator,
    xi_b: DensityOperator,
    eta: float,
    mu: float,
) -> DensityOperator:
    """Four-term convex map of the LHV construction; mu = 1 collapses to lemma1."""
    if not (0 < eta <= 1 and 0 < mu <= 1):
        raise ValueError("eta and mu must lie in (0, 1]")
    rho_a = chi.ptrace("B")
    rho_b = chi.ptrace("A")
    m = (
        eta * mu * chi.matrix
        + eta * (1 - mu) * tensor(rho_a, xi_b.matrix)
        + mu * (1 - eta) * tensor(xi_a.matrix, rho_b)
        + (1 - eta) * (1 - mu) * tensor(xi_a.matrix, xi_b.matrix)
    )
    return DensityOperator(m, chi.dim_a, chi.dim_b)


# -- LHV path -------------------------------------------------------------


def protocol2(
    rho: DensityOperator,
    mset_a: MeasurementSet,
    mset_b: MeasurementSet,
    eta: float,
    mu: float,
    xi_a: DensityOperator,
    xi_b: DensityOperator,
    strategies_a: StrategySet,
    strategies_b: StrategySet,
    tol: float = 1e-8,
    continuous_set: str = "projective-qubit",
) -> LocalModelCertificate:
    """LHV search over product deterministic strategies (a pure LP)."""
    if not (0 < eta <= 1 and 0 < mu <= 1):
        raise ValueError("eta and mu must lie in (0, 1]")
    da, db = rho.dim_a, rho.dim_b
    dim = da * db
    if mset_a.dim != da or mset_b.dim != db:
        raise ValueError("measurement dimensions do not match the state")

    prob = ConicProblem()
    prob.add_free_block("chi", dim)
    prob.add_scalar("q", lb=0.0, ub=1.0)
    n_a, n_b = len(strategies_a), len(strategies_b)
    for lam in range(n_a * n_b):
        prob.add_scalar(f"p{lam}", lb=0.0)

    assign_a = strategies_a.assignments()
    assign_b = strategies_b.assignments()
    for x, povm_a in enumerate(mset_a.povms):
        sel_a = {a: np.nonzero(assign_a[:, x] == a)[0] for a in range(mset_a.outcomes)}
        for y, povm_b in enumerate(mset_b.povms):
            sel_b = {b: np.nonzero(assign_b[:, y] == b)[0] for b in range(mset_b.outcomes)}
            for a, ma in enumerate(povm_a.elements):
                for b, mb in enumerate(povm_b.elements):
                    terms = [
                        pairs_term("chi", _trace_functional_pairs(tensor(ma, mb)))
                    ]
                    terms += [
                        scalar_term(f"p{la * n_b + lb}", -np.ones((1, 1)))
                        for la in sel_a[a]
                        for lb in sel_b[b]
                    ]
                    prob.add_equality(terms, np.zeros((1, 1)))

    noise = np.eye(dim) / dim
    prob.add_equality(
        [
            pairs_term("chi", [(eta * mu * np.eye(dim), np.eye(dim))]),
            pairs_term("chi", [
                (eta * (1 - mu) * a, b)
                for a, b in _trace_b_tensor_xi_b_pairs(xi_b.matrix, da, db)
            ]),
            pairs_term("chi", [
                (mu * (1 - eta) * a, b)
                for a, b in _xi_a_tensor_trace_a_pairs(xi_a.matrix, da, db)
            ]),
            scalar_term("q", -(rho.matrix - noise)),
        ],
        noise - (1 - eta) * (1 - mu) * tensor(xi_a.matrix, xi_b.matrix),
    )
    prob.add_equality(
        [scalar_term(f"p{lam}", np.ones((1, 1))) for lam in range(n_a * n_b)],
        np.ones((1, 1)),
    )
    prob.add_equality(
        [pairs_term("chi", _trace_functional_pairs(np.eye(dim)))],
        np.ones((1, 1)),
    )
    prob.set_objective([("q", 1.0)])
    sol = prob.solve(tol=tol)
    if sol.status == "infeasible":
        raise ProtocolInfeasibleError("LHV program infeasible even at q = 0")
    if not sol.optimal:
        raise RuntimeError(f"solver failure: {sol.status}")

    weights = [float(max(sol.values[f"p{lam}"], 0.0)) for lam in range(n_a * n_b)]
    return LocalModelCertificate(
        mode="LHV",
        rho=rho.matrix,
        dim_a=da,
        dim_b=db,
        measurement_set_a=mset_a,
        measurement_set_b=mset_b,
        eta=eta,
        mu=mu,
        xi_a=xi_a.matrix,
        xi_b=xi_b.matrix,
        q_star=float(np.clip(sol.values["q"], 0.0, 1.0)),
        chi=sol.values["chi"],
        hidden_states=None,
        weights=weights,
        strategies_a=strategies_a,
        strategies_b=strategies_b,
        solver_tol=tol,
        max_eq_residual=sol.max_eq_residual,
        min_psd_slack=sol.min_psd_slack,
        continuous_set=continuous_set,
    )


# -- sequence driver and sweeps -------------------------------------------


@dataclass(frozen=True)
class LevelReport:
    level: int
    n_measurements: int
    eta: float
    mu: float | None
    q_star: float
    wall_time: float
    n_strategies: int
    pruned: bool
    certificate: LocalModelCertificate | None = None

    def row(self) -> dict:
        return {
            "level": self.level,
            "m": self.n_measurements,
            "eta": self.eta,
            "mu": self.mu,
            "q_star": self.q_star,
            "wall_time": self.wall_time,
            "n_strategies": self.n_strategies,
            "pruned": self.pruned,
        }


def run_sequence(
    rho: DensityOperator,
    mode: str = "lhs",
    max_level: int = 2,
    tol: float = 1e-8,
    strategy_cap: int = 2 ** 12,
    samples: int = 10 ** 6,
    seed: int = 0,
    euler=None,
    stop_tol: float = 1e-6,
) -> list:
    """Refine the icosahedron level by level, recording q* at each level."""
    if max_level < 1:
        raise ValueError("max_level must be >= 1")
    if mode not in ("lhs", "lhv"):
        raise ValueError("mode must be 'lhs' or 'lhv'")
    xi_a = maximally_mixed(rho.dim_a)
    xi_b = maximally_mixed(rho.dim_b)
    reports = []
    mset = None
    for level in range(1, max_level + 1):
        mset = level_set(level, euler=euler)
        t0 = time.time()
        eta = inscribed_sphere_eta(mset.bloch_vertices).eta
        m = mset.n_measurements
        strat = strategies_for(
            mset.directions(), m, 2, cap=strategy_cap, samples=samples, seed=seed
        )
        if mode == "lhs":
            cert = protocol1(rho, mset, eta, xi_a, strat, tol=tol)
            mu = None
        else:
            cert = protocol2(
                rho, mset, mset, eta, eta, xi_a, xi_b, strat, strat, tol=tol
            )
            mu = eta
        reports.append(
            LevelReport(
                level=level,
                n_measurements=m,
                eta=eta,
                mu=mu,
                q_star=cert.q_star,
                wall_time=time.time() - t0,
                n_strategies=len(strat),
                pruned=not strat.complete,
                certificate=cert,
            )
        )
        if cert.q_star >= 1 - stop_tol:
            break
    return reports


def sweep_family(
    family: str,
    grid,
    mode: str = "lhs",
    level: int = 1,
    tol: float = 1e-8,
    strategy_cap: int = 2 ** 12,
    samples: int = 10 ** 6,
    seed: int = 0,
) -> list:
    """Noise bounds for a white-noise state family over a parameter grid.

    For families of the form ``alpha rho_pure + (1-alpha) 1/D`` the protocol
    applied to the pure target directly yields the noise bound: the state
    map sends the pure state to exactly the family member at alpha = q*.
    Emits one row per grid point.
    """
    from . import catalog

    if family not in ("werner", "alpha-theta", "qubit-qudit"):
        raise KeyError(f"family {family!r} is not sweepable")
    grid = list(grid)
    if not grid:
        raise ValueError("empty sweep grid")
    rows = []
    for point in grid:
        if family == "werner":
            rho = catalog.werner(1.0)
            label = {"theta": np.pi / 4}
        elif family == "alpha-theta":
            rho = catalog.rho_alpha_theta(1.0, point)
            label = {"theta": point}
        else:
            rho = catalog.qubit_qudit(1.0, int(point))
            label = {"d": int(point)}
        t0 = time.time()
        mset = level_set(level)
        eta = inscribed_sphere_eta(mset.bloch_vertices).eta
        strat = strategies_for(
            mset.directions(), mset.n_measurements, 2,
            cap=strategy_cap, samples=samples, seed=seed,
        )
        xi_a = maximally_mixed(rho.dim_a)
        if mode == "lhs":
            cert = protocol1(rho, mset, eta, xi_a, strat, tol=tol)
            mu = None
        else:
            xi_b = maximally_mixed(rho.dim_b)
            cert = protocol2(
                rho, mset, mset, eta, eta, xi_a, xi_b, strat, strat, tol=tol
            )
            mu = eta
        rows.append(
            {
                "family": family,
                "mode": mode,
                "level": level,
                **label,
                "alpha_bound": cert.q_star,
                "q_star": cert.q_star,
                "eta": eta,
                "mu": mu,
                "runtime_s": time.time() - t0,
            }
        )
    return rows
