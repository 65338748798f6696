"""Estimator-style front end over the level driver.

``LocalModelSearch`` follows the scikit-learn parameter conventions
(constructor stores hyperparameters, ``fit`` computes, fitted attributes
end in an underscore) so it composes with ``get_params``/``set_params``
and ``clone``.  The "X" it fits is a single density operator rather than
a sample matrix, so it deliberately implements no ``predict``/``score``.
"""

from __future__ import annotations

from sklearn.base import BaseEstimator

from .protocols import run_sequence
from .qops import DensityOperator


class LocalModelSearch(BaseEstimator):
    """Search for a local model of a bipartite state, level by level.

    Parameters mirror :func:`localmodels.protocols.run_sequence`.
    After ``fit``: ``q_star_`` is the best noise-robustness found,
    ``certificate_`` the certificate attaining it, ``reports_`` the
    per-level history.
    """

    def __init__(
        self,
        mode: str = "lhs",
        max_level: int = 2,
        tol: float = 1e-8,
        strategy_cap: int = 2 ** 12,
        samples: int = 10 ** 6,
        seed: int = 0,
    ):
        self.mode = mode
        self.max_level = max_level
        self.tol = tol
        self.strategy_cap = strategy_cap
        self.samples = samples
        self.seed = seed

    def fit(self, rho: DensityOperator, y=None):
        reports = run_sequence(
            rho,
            mode=self.mode,
            max_level=self.max_level,
            tol=self.tol,
            strategy_cap=self.strategy_cap,
            samples=self.samples,
            seed=self.seed,
        )
        best = max(reports, key=lambda r: r.q_star)
        self.reports_ = reports
        self.q_star_ = best.q_star
        self.certificate_ = best.certificate
        return self
