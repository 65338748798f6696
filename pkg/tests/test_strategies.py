import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from localmodels.measure import icosahedron_set, level_set
from localmodels.strategies import (
    DeterministicStrategy,
    StrategyCapExceededError,
    StrategySet,
    enumerate_all,
    prune_hemisphere,
    strategies_for,
)


def test_enumerate_all_counts_and_order():
    s = enumerate_all(3, 2)
    assert len(s) == 8
    assert s.complete
    assert s.strategies[0].assignment == (0, 0, 0)
    assert s.strategies[-1].assignment == (1, 1, 1)
    assert len(enumerate_all(2, 3)) == 9


def test_enumerate_cap():
    with pytest.raises(StrategyCapExceededError):
        enumerate_all(30, 2, cap=2 ** 20)


def test_deterministic_strategy_value():
    s = DeterministicStrategy((1, 0))
    assert s.value(0, 1) == 1
    assert s.value(0, 0) == 0
    with pytest.raises(IndexError):
        s.value(5, 0)


def test_strategy_set_validation():
    with pytest.raises(ValueError):
        StrategySet(
            (DeterministicStrategy((0, 0)), DeterministicStrategy((0, 0))),
            2, 2, complete=False,
        )
    with pytest.raises(ValueError):
        StrategySet((DeterministicStrategy((0, 2)),), 2, 2, complete=False)
    with pytest.raises(ValueError):
        StrategySet((DeterministicStrategy((0, 0)),), 2, 2, complete=True)


def test_prune_hemisphere_subset_of_complete():
    dirs = icosahedron_set().directions()
    pruned = prune_hemisphere(dirs, samples=50_000, seed=3)
    full = {s.assignment for s in enumerate_all(6, 2).strategies}
    assert {s.assignment for s in pruned.strategies} <= full
    assert not pruned.complete
    # patterns come in complement pairs (lambda vs -lambda)
    pats = {s.assignment for s in pruned.strategies}
    assert all(tuple(1 - a for a in p) in pats for p in pats)


def test_prune_hemisphere_m8_subset():
    rng = np.random.default_rng(7)
    dirs = rng.normal(size=(8, 3))
    dirs /= np.linalg.norm(dirs, axis=1, keepdims=True)
    pruned = prune_hemisphere(dirs, samples=30_000, seed=0)
    full = {s.assignment for s in enumerate_all(8, 2).strategies}
    assert {s.assignment for s in pruned.strategies} <= full
    # pattern count bounded by m^2 - m + 2 great-circle cells
    assert len(pruned) <= 8 * 8 - 8 + 2


def test_prune_hemisphere_deterministic_in_seed():
    dirs = level_set(2).directions()
    a = prune_hemisphere(dirs, samples=20_000, seed=11)
    b = prune_hemisphere(dirs, samples=20_000, seed=11)
    assert a.assignments().tolist() == b.assignments().tolist()


def test_strategies_for_dispatch():
    dirs = icosahedron_set().directions()
    s = strategies_for(dirs, 6, 2, cap=2 ** 12)
    assert s.complete and len(s) == 64
    s2 = strategies_for(level_set(2).directions(), 16, 2, cap=2 ** 12,
                        samples=20_000)
    assert not s2.complete and len(s2) <= 16 * 16 - 16 + 2
    with pytest.raises(StrategyCapExceededError):
        strategies_for(None, 16, 3, cap=2 ** 12)


@given(st.integers(2, 5), st.integers(2, 3))
@settings(max_examples=10, deadline=None)
def test_enumeration_has_no_duplicates(m, k):
    s = enumerate_all(m, k)
    assert len({x.assignment for x in s.strategies}) == k ** m


def test_json_roundtrip():
    s = enumerate_all(3, 2)
    again = StrategySet.from_json_dict(s.to_json_dict())
    assert again.assignments().tolist() == s.assignments().tolist()
    assert again.complete
