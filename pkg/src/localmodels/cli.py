"""Command-line front end: protocols, sweeps, shrinking factors, verification.

Exit codes: 0 success, 1 configuration error, 2 solver failure,
3 verification failure.  ``LMF_SOLVER_TOL`` overrides the default solver
tolerance of 1e-8.
"""

from __future__ import annotations

import csv
import json
import os
import sys

import click
import numpy as np

from . import catalog
from .certify import compose_claim, verify
from .measure import (
    MeasurementSet,
    cube_set,
    icosahedron_set,
    level_set,
    povm_set_for_appendix_e,
)
from .protocols import (
    LocalModelCertificate,
    ProtocolInfeasibleError,
    run_sequence,
    sweep_family,
)
from .qops import DensityOperator
from .shrink import (
    FacetEnumerationError,
    eta_by_bisection,
    eta_povm_extremal_search,
    inscribed_sphere_eta,
)

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_SOLVER = 2
EXIT_VERIFY = 3


def _solver_tol(override: float | None) -> float:
    if override is not None:
        return override
    env = os.environ.get("LMF_SOLVER_TOL")
    return float(env) if env else 1e-8


def _fmt(x) -> str:
    if isinstance(x, float):
        return f"{x:.12g}"
    return "" if x is None else str(x)


def _load_state(family, params, state_file) -> DensityOperator:
    if state_file is not None:
        doc = json.loads(open(state_file).read())
        m = np.array(doc["matrix"][0]) + 1j * np.array(doc["matrix"][1])
        return DensityOperator(m, doc["dim_a"], doc["dim_b"])
    if family is None:
        raise click.UsageError("give either --family or --state-file")
    return catalog.make_state(family, **params)


@click.group()
def main():
    """Local hidden state / hidden variable model construction and checking."""


@main.command()
@click.option("--family", type=click.Choice(sorted(catalog.FAMILIES)), default=None)
@click.option("--alpha", type=float, default=None)
@click.option("--theta", type=float, default=None)
@click.option("--b", "b_param", type=float, default=None)
@click.option("--dim-b", "d_param", type=int, default=None,
              help="Bob's dimension for the qubit-qudit family")
@click.option("--state-file", type=click.Path(exists=True), default=None,
              help="JSON density operator: {matrix: [re, im], dim_a, dim_b}")
@click.option("--mode", type=click.Choice(["lhs", "lhv"]), default="lhs")
@click.option("--level", type=int, default=1, help="polyhedron refinement level")
@click.option("--tol", type=float, default=None)
@click.option("--strategy-cap", type=int, default=2 ** 12)
@click.option("--samples", type=int, default=10 ** 6)
@click.option("--seed", type=int, default=0)
@click.option("--output", "-o", type=click.Path(), default="certificate.json")
def run(family, alpha, theta, b_param, d_param, state_file, mode, level, tol,
        strategy_cap, samples, seed, output):
    """Search for a local model and write a verified certificate."""
    tol = _solver_tol(tol)
    params = {}
    if alpha is not None:
        params["alpha"] = alpha
    if theta is not None:
        params["theta"] = theta
    if b_param is not None:
        params["b"] = b_param
    if d_param is not None:
        params["d"] = d_param
    try:
        rho = _load_state(family, params, state_file)
    except (KeyError, TypeError, ValueError, OSError, json.JSONDecodeError) as e:
        click.echo(f"configuration error: {e}", err=True)
        sys.exit(EXIT_CONFIG)
    if level < 1:
        click.echo("configuration error: level must be >= 1", err=True)
        sys.exit(EXIT_CONFIG)
    try:
        reports = run_sequence(
            rho, mode=mode, max_level=level, tol=tol,
            strategy_cap=strategy_cap, samples=samples, seed=seed,
        )
    except ProtocolInfeasibleError as e:
        click.echo(f"solver: {e}", err=True)
        sys.exit(EXIT_SOLVER)
    except RuntimeError as e:
        click.echo(f"solver failure: {e}", err=True)
        sys.exit(EXIT_SOLVER)
    best = max(reports, key=lambda r: r.q_star)
    cert = best.certificate
    report = verify(cert)
    with open(output, "w") as f:
        f.write(cert.to_json())
    claim = compose_claim(cert, report)
    click.echo(claim)
    for r in reports:
        click.echo(
            f"  level {r.level}: m={r.n_measurements} eta={_fmt(r.eta)} "
            f"q*={_fmt(r.q_star)} strategies={r.n_strategies}"
            f"{' (pruned)' if r.pruned else ''} [{r.wall_time:.2f}s]"
        )
    if not report.passed:
        click.echo(f"verification failed: {report.failures()}", err=True)
        sys.exit(EXIT_VERIFY)
    sys.exit(EXIT_OK)


@main.command()
@click.option("--family", type=click.Choice(["werner", "alpha-theta", "qubit-qudit"]),
              required=True)
@click.option("--grid", type=str, default="",
              help="comma-separated theta values (alpha-theta) or dimensions (qubit-qudit)")
@click.option("--mode", type=click.Choice(["lhs", "lhv"]), default="lhs")
@click.option("--level", type=int, default=1)
@click.option("--tol", type=float, default=None)
@click.option("--strategy-cap", type=int, default=2 ** 12)
@click.option("--samples", type=int, default=10 ** 6)
@click.option("--seed", type=int, default=0)
@click.option("--output", "-o", type=click.Path(), default="sweep.csv")
def sweep(family, grid, mode, level, tol, strategy_cap, samples, seed, output):
    """Noise-bound curve over a parameter grid, written as CSV."""
    tol = _solver_tol(tol)
    try:
        points = [float(t) for t in grid.split(",") if t.strip()]
        if family == "werner":
            points = points or [np.pi / 4]
        if not points:
            raise ValueError("empty sweep grid")
        rows = sweep_family(
            family, points, mode=mode, level=level, tol=tol,
            strategy_cap=strategy_cap, samples=samples, seed=seed,
        )
    except (KeyError, ValueError) as e:
        click.echo(f"configuration error: {e}", err=True)
        sys.exit(EXIT_CONFIG)
    except RuntimeError as e:
        click.echo(f"solver failure: {e}", err=True)
        sys.exit(EXIT_SOLVER)
    fieldnames = ["family", "mode", "level", "theta", "alpha_bound",
                  "q_star", "eta", "runtime_s"]
    with open(output, "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(fieldnames)
        for row in rows:
            theta = row.get("theta", row.get("d"))
            w.writerow([
                row["family"], row["mode"], str(row["level"]), _fmt(theta),
                _fmt(row["alpha_bound"]), _fmt(row["q_star"]),
                _fmt(row["eta"]), _fmt(row["runtime_s"]),
            ])
    click.echo(f"wrote {len(rows)} rows to {output}")
    sys.exit(EXIT_OK)


@main.command()
@click.option("--set", "set_name",
              type=click.Choice(["icosahedron", "cube", "level2", "level3",
                                 "level4", "appendixE"]),
              required=True)
@click.option("--continuous", type=click.Choice(["projective-qubit", "povm4"]),
              default="projective-qubit")
@click.option("--method", type=click.Choice(["auto", "sphere", "facet", "extremal"]),
              default="auto")
@click.option("--precision", type=float, default=1e-4)
@click.option("--seed", type=int, default=0)
@click.option("--output", "-o", type=click.Path(), default=None)
def shrink(set_name, continuous, method, precision, seed, output):
    """Shrinking factor of a finite measurement set."""
    sets = {
        "icosahedron": icosahedron_set,
        "cube": cube_set,
        "level2": lambda: level_set(2),
        "level3": lambda: level_set(3),
        "level4": lambda: level_set(4),
        "appendixE": povm_set_for_appendix_e,
    }
    mset: MeasurementSet = sets[set_name]()
    try:
        if method == "auto":
            if continuous == "povm4" or set_name == "appendixE":
                result = eta_povm_extremal_search(mset, seed=seed, precision=max(precision, 2e-3))
            else:
                result = inscribed_sphere_eta(mset.bloch_vertices)
        elif method == "sphere":
            result = inscribed_sphere_eta(mset.bloch_vertices)
        elif method == "extremal":
            result = eta_povm_extremal_search(mset, seed=seed, precision=max(precision, 2e-3))
        else:
            result = eta_by_bisection(mset, continuous=continuous,
                                      precision=precision, seed=seed)
    except FacetEnumerationError as e:
        click.echo(f"configuration error: {e}", err=True)
        sys.exit(EXIT_CONFIG)
    doc = result.to_json_dict()
    text = json.dumps(doc, indent=2)
    if output:
        with open(output, "w") as f:
            f.write(text)
    click.echo(text)
    sys.exit(EXIT_OK)


@main.command(name="verify")
@click.argument("certificate", type=click.Path())
@click.option("--tol", type=float, default=1e-6)
def verify_cmd(certificate, tol):
    """Re-verify a certificate file with plain arithmetic."""
    try:
        with open(certificate) as f:
            cert = LocalModelCertificate.from_json(f.read())
    except (OSError, ValueError, KeyError, json.JSONDecodeError) as e:
        click.echo(f"configuration error: {e}", err=True)
        sys.exit(EXIT_CONFIG)
    report = verify(cert, atol=tol)
    click.echo(compose_claim(cert, report))
    for name, r in report.checks.items():
        mark = "ok " if r["passed"] else "FAIL"
        click.echo(f"  [{mark}] {name}: residual {r['residual']:.3e}")
    sys.exit(EXIT_OK if report.passed else EXIT_VERIFY)


@main.command(name="catalog-list")
def catalog_list():
    """List the built-in state families and their parameters."""
    for name in sorted(catalog.FAMILIES):
        entry = catalog.FAMILIES[name]
        params = ", ".join(entry["parameters"]) or "none"
        click.echo(f"{name}: {entry['description']} (parameters: {params})")
    sys.exit(EXIT_OK)


if __name__ == "__main__":
    main()
