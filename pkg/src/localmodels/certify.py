"""Independent verification of local-model certificates.

Everything here is plain numpy arithmetic on the data stored in a
certificate: no optimization, no solver calls.  A certificate passes when

* every hidden state (or weight) is positive up to tolerance,
* the deterministic-strategy mixture reproduces the assemblage (LHS) or
  the joint distribution (LHV) produced by chi,
* the convex noise map applied to chi lands exactly on
  ``q* rho + (1 - q*) 1/D``,
* chi is Hermitian with unit trace and rho is a valid density operator.

Passing certifies the local model for the *finite* shrunk measurement
set; the shrinking-factor claim lifts it to the continuous set.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .qops import partial_trace, tensor
from .protocols import LocalModelCertificate

DEFAULT_ATOL = 1e-6


@dataclass(frozen=True)
class VerificationReport:
    passed: bool
    mode: str
    q_star: float
    max_residual: float
    min_hidden_eigenvalue: float
    checks: dict
    atol: float

    def failures(self) -> list:
        return [name for name, r in self.checks.items() if not r["passed"]]


def _check(checks: dict, name: str, residual: float, atol: float):
    checks[name] = {"residual": float(residual), "passed": bool(residual <= atol)}


def _state_checks(cert: LocalModelCertificate, checks: dict, atol: float):
    rho, chi = cert.rho, cert.chi
    dim = cert.dim_a * cert.dim_b
    for name, m in (("rho", rho), ("chi", chi)):
        _check(checks, f"{name}_hermitian", np.max(np.abs(m - m.conj().T)), atol)
        _check(checks, f"{name}_unit_trace", abs(np.trace(m).real - 1.0), atol)
    _check(
        checks,
        "rho_psd",
        max(0.0, -float(np.min(np.linalg.eigvalsh(0.5 * (rho + rho.conj().T))))),
        atol,
    )
    if rho.shape != (dim, dim) or chi.shape != (dim, dim):
        _check(checks, "dimensions", np.inf, atol)
    else:
        _check(checks, "dimensions", 0.0, atol)


def verify_lhs(
    cert: LocalModelCertificate, atol: float = DEFAULT_ATOL
) -> VerificationReport:
    """Re-check an LHS certificate from its raw data."""
    if cert.mode != "LHS":
        raise ValueError("certificate is not an LHS certificate")
    checks: dict = {}
    _state_checks(cert, checks, atol)
    da, db = cert.dim_a, cert.dim_b
    dim = da * db
    chi, rho = cert.chi, cert.rho

    hidden = [np.asarray(s) for s in cert.hidden_states]
    min_eig = min(
        float(np.min(np.linalg.eigvalsh(0.5 * (s + s.conj().T)))) for s in hidden
    )
    _check(checks, "hidden_states_psd", max(0.0, -min_eig), atol)

    assign = cert.strategies_a.assignments()
    res = 0.0
    for x, povm in enumerate(cert.measurement_set_a.povms):
        for a, m in enumerate(povm.elements):
            target = partial_trace(tensor(m, np.eye(db)) @ chi, da, db, over="A")
            model = sum(
                (hidden[lam] for lam in np.nonzero(assign[:, x] == a)[0]),
                np.zeros((db, db), dtype=complex),
            )
            res = max(res, float(np.max(np.abs(target - model))))
    _check(checks, "assemblage_reproduced", res, atol)

    chi_b = partial_trace(chi, da, db, over="A")
    mapped = cert.eta * chi + (1 - cert.eta) * tensor(cert.xi_a, chi_b)
    noisy = cert.q_star * rho + (1 - cert.q_star) * np.eye(dim) / dim
    _check(checks, "state_map", float(np.max(np.abs(mapped - noisy))), atol)

    passed = all(r["passed"] for r in checks.values())
    return VerificationReport(
        passed=passed,
        mode="LHS",
        q_star=cert.q_star,
        max_residual=max(r["residual"] for r in checks.values()),
        min_hidden_eigenvalue=min_eig,
        checks=checks,
        atol=atol,
    )


def verify_lhv(
    cert: LocalModelCertificate, atol: float = DEFAULT_ATOL
) -> VerificationReport:
    """Re-check an LHV certificate from its raw data."""
    if cert.mode != "LHV":
        raise ValueError("certificate is not an LHV certificate")
    checks: dict = {}
    _state_checks(cert, checks, atol)
    da, db = cert.dim_a, cert.dim_b
    dim = da * db
    chi, rho = cert.chi, cert.rho

    p = np.asarray(cert.weights, dtype=float)
    min_w = float(np.min(p))
    _check(checks, "weights_nonnegative", max(0.0, -min_w), atol)
    _check(checks, "weights_normalized", abs(float(np.sum(p)) - 1.0), atol)

    assign_a = cert.strategies_a.assignments()
    assign_b = cert.strategies_b.assignments()
    n_b = len(cert.strategies_b)
    res = 0.0
    weight = p.reshape(len(cert.strategies_a), n_b)
    for x, povm_a in enumerate(cert.measurement_set_a.povms):
        for y, povm_b in enumerate(cert.measurement_set_b.povms):
            for a, ma in enumerate(povm_a.elements):
                for b, mb in enumerate(povm_b.elements):
                    target = float(np.trace(tensor(ma, mb) @ chi).real)
                    model = float(
                        np.sum(weight[np.ix_(
                            np.nonzero(assign_a[:, x] == a)[0],
                            np.nonzero(assign_b[:, y] == b)[0],
                        )])
                    )
                    res = max(res, abs(target - model))
    _check(checks, "joint_distribution_reproduced", res, atol)

    chi_a = partial_trace(chi, da, db, over="B")
    chi_b = partial_trace(chi, da, db, over="A")
    eta, mu = cert.eta, cert.mu
    mapped = (
        eta * mu * chi
        + eta * (1 - mu) * tensor(chi_a, cert.xi_b)
        + mu * (1 - eta) * tensor(cert.xi_a, chi_b)
        + (1 - eta) * (1 - mu) * tensor(cert.xi_a, cert.xi_b)
    )
    noisy = cert.q_star * rho + (1 - cert.q_star) * np.eye(dim) / dim
    _check(checks, "state_map", float(np.max(np.abs(mapped - noisy))), atol)

    passed = all(r["passed"] for r in checks.values())
    return VerificationReport(
        passed=passed,
        mode="LHV",
        q_star=cert.q_star,
        max_residual=max(r["residual"] for r in checks.values()),
        min_hidden_eigenvalue=min_w,
        checks=checks,
        atol=atol,
    )


def verify(cert: LocalModelCertificate, atol: float = DEFAULT_ATOL) -> VerificationReport:
    """Dispatch on the certificate mode."""
    if cert.mode == "LHS":
        return verify_lhs(cert, atol=atol)
    return verify_lhv(cert, atol=atol)


def compose_claim(cert: LocalModelCertificate, report: VerificationReport) -> str:
    """Human-readable statement of what a verified certificate establishes."""
    dim = cert.dim_a * cert.dim_b
    state = (
        "the target state"
        if cert.q_star >= 1 - 1e-9
        else f"q* rho + (1 - q*) 1/{dim} with q* = {cert.q_star:.6f}"
    )
    kind = (
        "a local hidden state model (unsteerable from Alice's side)"
        if cert.mode == "LHS"
        else "a local hidden variable model (no Bell violation)"
    )
    scope = (
        f"for the continuous measurement set '{cert.continuous_set}' via "
        f"shrinking factor eta = {cert.eta:.6f}"
        + (f", mu = {cert.mu:.6f}" if cert.mu is not None else "")
    )
    status = "VERIFIED" if report.passed else "FAILED VERIFICATION"
    return (
        f"[{status}] {state} on C^{cert.dim_a} x C^{cert.dim_b} admits {kind} "
        f"{scope}; max check residual {report.max_residual:.3e} "
        f"(tolerance {report.atol:.1e})."
    )
