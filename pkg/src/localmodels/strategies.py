"""Deterministic local response functions and hemisphere pruning.

A deterministic strategy assigns one outcome to each measurement; the full
set of ``k**m`` strategies spans the vertices of the local polytope.  For
two-outcome qubit projective sets, the hemisphere heuristic keeps only the
sign patterns ``sign(v_x . lam)`` induced by directions ``lam`` on the
sphere, which is the response function of Werner's model.  Any sampled
subset is sound: protocols run over a subset can only under-estimate q*.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

DEFAULT_CAP = 2 ** 20
DEFAULT_SAMPLES = 10 ** 6


class StrategyCapExceededError(ValueError):
    """Full enumeration would exceed the configured cap; prune instead."""


@dataclass(frozen=True)
class DeterministicStrategy:
    """Outcome assignment, one outcome index per measurement index."""

    assignment: tuple

    def value(self, x: int, a: int) -> int:
        if not 0 <= x < len(self.assignment):
            raise IndexError(f"measurement index {x} out of range")
        return 1 if self.assignment[x] == a else 0


@dataclass(frozen=True)
class StrategySet:
    strategies: tuple
    n_measurements: int
    n_outcomes: int
    complete: bool

    def __post_init__(self):
        seen = set()
        for s in self.strategies:
            if len(s.assignment) != self.n_measurements:
                raise ValueError("strategy length does not match measurement count")
            if any(not 0 <= a < self.n_outcomes for a in s.assignment):
                raise ValueError("outcome index out of range")
            if s.assignment in seen:
                raise ValueError("duplicate strategy")
            seen.add(s.assignment)
        if self.complete and len(self.strategies) != self.n_outcomes ** self.n_measurements:
            raise ValueError("complete flag set but enumeration is partial")

    def __len__(self) -> int:
        return len(self.strategies)

    def assignments(self) -> np.ndarray:
        return np.array([s.assignment for s in self.strategies], dtype=int)

    def to_json_dict(self) -> dict:
        return {
            "m": self.n_measurements,
            "k": self.n_outcomes,
            "complete": self.complete,
            "assignments": self.assignments().tolist(),
        }

    @staticmethod
    def from_json_dict(doc: dict) -> "StrategySet":
        return StrategySet(
            tuple(DeterministicStrategy(tuple(a)) for a in doc["assignments"]),
            doc["m"],
            doc["k"],
            doc["complete"],
        )


def enumerate_all(m: int, k: int, cap: int = DEFAULT_CAP) -> StrategySet:
    """All ``k**m`` deterministic strategies, lexicographic order."""
    if k ** m > cap:
        raise StrategyCapExceededError(
            f"{k}**{m} strategies exceed cap {cap}; use prune_hemisphere"
        )
    strategies = []
    for code in range(k ** m):
        assignment = []
        rest = code
        for _ in range(m):
            rest, a = divmod(rest, k)
            assignment.append(a)
        # most-significant measurement first for lexicographic order
        strategies.append(DeterministicStrategy(tuple(assignment[::-1])))
    strategies.sort(key=lambda s: s.assignment)
    return StrategySet(tuple(strategies), m, k, complete=True)


def prune_hemisphere(
    directions,
    samples: int = DEFAULT_SAMPLES,
    seed: int = 0,
    batch: int = 200_000,
) -> StrategySet:
    """Sign patterns of ``directions`` against uniformly sampled axes.

    ``directions`` holds one representative Bloch vector per two-outcome
    measurement; outcome 0 means the measurement direction lies in the
    hemisphere around the sampled axis.  Axes exactly orthogonal to a
    direction are resampled.
    """
    dirs = np.asarray(directions, dtype=float)
    if dirs.ndim != 2 or dirs.shape[1] != 3:
        raise ValueError("directions must be an (m, 3) array")
    if samples < 1:
        raise ValueError("need at least one sample")
    m = len(dirs)
    rng = np.random.default_rng(seed)
    patterns = set()
    remaining = samples
    while remaining > 0:
        n = min(batch, remaining)
        lam = rng.normal(size=(n, 3))
        lam /= np.linalg.norm(lam, axis=1, keepdims=True)
        dots = lam @ dirs.T
        ok = np.all(np.abs(dots) > 1e-12, axis=1)  # resample equator hits
        remaining -= int(np.sum(ok))
        for row in (dots[ok] < 0).astype(int):
            patterns.add(tuple(row))
    strategies = tuple(
        DeterministicStrategy(p) for p in sorted(patterns)
    )
    return StrategySet(strategies, m, 2, complete=False)


def strategies_for(
    directions,
    m: int,
    k: int = 2,
    cap: int = DEFAULT_CAP,
    samples: int = DEFAULT_SAMPLES,
    seed: int = 0,
):
    """Complete enumeration when it fits under the cap, else pruned."""
    if k ** m <= cap:
        return enumerate_all(m, k, cap=cap)
    if k != 2 or directions is None:
        raise StrategyCapExceededError(
            "no pruning heuristic available for this strategy space"
        )
    return prune_hemisphere(directions, samples=samples, seed=seed)
