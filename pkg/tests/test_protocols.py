import numpy as np
import pytest

from localmodels.catalog import werner
from localmodels.measure import icosahedron_set, projective_from_bloch, shrunk_povm
from localmodels.protocols import (
    LocalModelCertificate,
    assemblage,
    lemma1_map,
    lemma2_map,
    lhs_feasibility,
    protocol1,
    protocol2,
    run_sequence,
    steering_threshold,
    sweep_family,
)
from localmodels.qops import DensityOperator, maximally_mixed, partial_trace, tensor
from localmodels.shrink import inscribed_sphere_eta
from localmodels.strategies import enumerate_all

ICO = icosahedron_set()
ICO_ETA = inscribed_sphere_eta(ICO.bloch_vertices).eta
STRAT6 = enumerate_all(6, 2)


def random_density(rng, da, db):
    d = da * db
    g = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    m = g @ g.conj().T
    return DensityOperator(m / np.trace(m).real, da, db)


def test_assemblage_no_signaling_and_normalization():
    rho = werner(0.8)
    asm = assemblage(rho, ICO)
    for x in range(6):
        total = sum(asm.sigma[(x, a)] for a in range(2))
        assert np.allclose(total, rho.ptrace("A"), atol=1e-12)
        for a in range(2):
            assert np.trace(asm.sigma[(x, a)]).real == pytest.approx(0.5, abs=1e-12)


def test_lemma1_identity_on_random_triples():
    # Tr_A[(shrunk M (x) 1) chi] == Tr_A[(M (x) 1) lemma1_map(chi)]
    rng = np.random.default_rng(0)
    for _ in range(100):
        chi = random_density(rng, 2, 2)
        g = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
        xi_m = g @ g.conj().T
        xi = DensityOperator(xi_m / np.trace(xi_m).real, 1, 2)
        eta = rng.uniform(0.1, 1.0)
        v = rng.normal(size=3)
        v /= np.linalg.norm(v)
        povm = projective_from_bloch(v)
        mapped = lemma1_map(chi, xi, eta)
        for m, ms in zip(povm.elements, shrunk_povm(povm, eta, xi).elements):
            lhs = partial_trace(tensor(ms, np.eye(2)) @ chi.matrix, 2, 2, over="A")
            rhs = partial_trace(tensor(m, np.eye(2)) @ mapped.matrix, 2, 2, over="A")
            assert np.max(np.abs(lhs - rhs)) < 1e-10


def test_lemma2_collapses_to_lemma1_at_mu_one():
    rng = np.random.default_rng(1)
    chi = random_density(rng, 2, 2)
    xi_a = maximally_mixed(2)
    xi_b = maximally_mixed(2)
    a = lemma2_map(chi, xi_a, xi_b, 0.7, 1.0)
    b = lemma1_map(chi, DensityOperator(xi_a.matrix, 1, 2), 0.7)
    assert np.array_equal(a.matrix, b.matrix)


def test_lhs_feasibility_unsteerable_and_steerable():
    feasible, hidden = lhs_feasibility(assemblage(werner(0.3), ICO), STRAT6)
    assert feasible
    assert len(hidden) == 64
    feasible, hidden = lhs_feasibility(assemblage(werner(0.8), ICO), STRAT6)
    assert not feasible and hidden is None


def test_steering_threshold_between_known_bounds():
    t = steering_threshold(werner(0.0), werner(1.0), ICO, STRAT6)
    # finite-set threshold for the icosahedron: above 1/2 (projective bound
    # for the continuous set) and below 1/sqrt(2) (CHSH)
    assert 0.5 < t < 1 / np.sqrt(2)


def test_protocol1_singlet_certificate_fields():
    cert = protocol1(werner(1.0), ICO, ICO_ETA, maximally_mixed(2), STRAT6)
    assert cert.mode == "LHS"
    assert 0.41 < cert.q_star < 0.45
    assert cert.max_eq_residual < 1e-8
    assert cert.min_psd_slack > -1e-7
    assert len(cert.hidden_states) == 64
    assert np.trace(cert.chi).real == pytest.approx(1.0, abs=1e-8)
    # chi need not be PSD, but its mapped image must match the noisy target
    noisy = cert.q_star * cert.rho + (1 - cert.q_star) * np.eye(4) / 4
    chi_b = partial_trace(cert.chi, 2, 2, over="A")
    mapped = ICO_ETA * cert.chi + (1 - ICO_ETA) * tensor(np.eye(2) / 2, chi_b)
    assert np.max(np.abs(mapped - noisy)) < 1e-7


def test_protocol1_q_star_monotone_in_eta():
    xi = maximally_mixed(2)
    qs = [
        protocol1(werner(1.0), ICO, eta, xi, STRAT6).q_star
        for eta in (0.5, 0.7, ICO_ETA)
    ]
    assert qs[0] < qs[1] < qs[2]


def test_protocol1_unsteerable_state_reaches_q_one():
    cert = protocol1(werner(0.3), ICO, ICO_ETA, maximally_mixed(2), STRAT6)
    assert cert.q_star == pytest.approx(1.0, abs=1e-6)


def test_protocol2_singlet():
    xi = maximally_mixed(2)
    cert = protocol2(werner(1.0), ICO, ICO, ICO_ETA, ICO_ETA, xi, xi,
                     STRAT6, STRAT6)
    assert cert.mode == "LHV"
    assert 0.4 < cert.q_star < 0.55
    assert len(cert.weights) == 64 * 64
    assert sum(cert.weights) == pytest.approx(1.0, abs=1e-6)
    assert min(cert.weights) >= 0
    # LHV with both shrinking factors is weaker than one-sided LHS
    lhs = protocol1(werner(1.0), ICO, ICO_ETA, xi, STRAT6)
    assert cert.q_star > lhs.q_star


def test_certificate_json_roundtrip_and_hash():
    cert = protocol1(werner(1.0), ICO, ICO_ETA, maximally_mixed(2), STRAT6)
    doc = cert.to_json_dict()
    again = LocalModelCertificate.from_json_dict(doc)
    assert again.q_star == cert.q_star
    assert np.allclose(again.chi, cert.chi)
    assert again.to_json_dict()["content_hash"] == doc["content_hash"]
    # hash ignores the timestamp
    moved = dict(doc)
    moved["timestamp"] = 12345.0
    assert LocalModelCertificate.from_json_dict(moved).to_json_dict()[
        "content_hash"
    ] == doc["content_hash"]
    with pytest.raises(ValueError):
        LocalModelCertificate.from_json_dict({**doc, "schema": "bogus"})


def test_run_sequence_level1_stops_when_q_one():
    reports = run_sequence(werner(0.3), mode="lhs", max_level=3)
    assert reports[-1].q_star == pytest.approx(1.0, abs=1e-6)
    assert len(reports) == 1  # early stop at q* = 1


def test_run_sequence_monotone_in_level():
    reports = run_sequence(werner(1.0), mode="lhs", max_level=2,
                           samples=100_000)
    assert len(reports) == 2
    assert reports[1].q_star > reports[0].q_star
    assert reports[1].pruned and not reports[0].pruned


def test_sweep_family_rows():
    rows = sweep_family("alpha-theta", [np.pi / 8, np.pi / 4], mode="lhs",
                        level=1)
    assert len(rows) == 2
    for row in rows:
        assert row["alpha_bound"] == row["q_star"]
        assert row["family"] == "alpha-theta"
    # theta = pi/4 is the singlet: reproduces the level-1 Werner bound
    assert rows[1]["alpha_bound"] == pytest.approx(0.43, abs=0.01)
    with pytest.raises(KeyError):
        sweep_family("bound-entangled", [0.5])
    with pytest.raises(ValueError):
        sweep_family("werner", [])


def test_protocol1_rejects_bad_arguments():
    with pytest.raises(ValueError):
        protocol1(werner(1.0), ICO, 0.0, maximally_mixed(2), STRAT6)
    with pytest.raises(ValueError):
        protocol1(werner(1.0), ICO, ICO_ETA, maximally_mixed(2),
                  enumerate_all(5, 2))
