"""Local hidden state and local hidden variable models via convex optimization.

Construct local models for entangled bipartite states by discretizing the
measurement sphere, shrinking the continuous measurement set into the
polytope of the finite set, and solving a semidefinite (LHS) or linear
(LHV) program; every produced model carries a certificate that re-verifies
with plain arithmetic.
"""

from .catalog import (
    FAMILIES,
    horodecki_bound_entangled,
    horodecki_chsh_parameter,
    make_state,
    non_full_rank_example,
    ppt_entanglement_threshold,
    qubit_qudit,
    rho_alpha_theta,
    werner,
)
from .certify import VerificationReport, compose_claim, verify, verify_lhs, verify_lhv
from .estimator import LocalModelSearch
from .measure import (
    MeasurementSet,
    Povm,
    cube_set,
    icosahedron_set,
    level_set,
    refine_by_dual,
    shrunk_povm,
)
from .protocols import (
    Assemblage,
    LevelReport,
    LocalModelCertificate,
    ProtocolInfeasibleError,
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
from .qops import DensityOperator, HermitianOperator, maximally_mixed
from .shrink import (
    ShrinkResult,
    eta_by_bisection,
    eta_povm_extremal_search,
    inscribed_sphere_eta,
)
from .strategies import (
    DeterministicStrategy,
    StrategySet,
    enumerate_all,
    prune_hemisphere,
    strategies_for,
)

__version__ = "1.0.0"

__all__ = [
    "Assemblage",
    "DensityOperator",
    "DeterministicStrategy",
    "FAMILIES",
    "HermitianOperator",
    "LevelReport",
    "LocalModelCertificate",
    "LocalModelSearch",
    "MeasurementSet",
    "Povm",
    "ProtocolInfeasibleError",
    "ShrinkResult",
    "StrategySet",
    "VerificationReport",
    "assemblage",
    "compose_claim",
    "cube_set",
    "enumerate_all",
    "eta_by_bisection",
    "eta_povm_extremal_search",
    "horodecki_bound_entangled",
    "horodecki_chsh_parameter",
    "icosahedron_set",
    "inscribed_sphere_eta",
    "lemma1_map",
    "lemma2_map",
    "level_set",
    "lhs_feasibility",
    "make_state",
    "maximally_mixed",
    "non_full_rank_example",
    "ppt_entanglement_threshold",
    "protocol1",
    "protocol2",
    "prune_hemisphere",
    "qubit_qudit",
    "refine_by_dual",
    "rho_alpha_theta",
    "run_sequence",
    "shrunk_povm",
    "steering_threshold",
    "strategies_for",
    "sweep_family",
    "verify",
    "verify_lhs",
    "verify_lhv",
    "werner",
]
