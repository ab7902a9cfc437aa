from __future__ import annotations

import random

import pytest
from corpus import random_gain_graph

from gainlift.covering import (
    CoveringConfig,
    CoveringContractError,
    CoveringResult,
    amplified_cover,
    boundary,
    capture_check,
    check_contract,
    cover_vector,
    one_coordinate_cover,
    shortest_unbalanced_cycle,
)
from gainlift.gaingraph import GainGraph, SubgraphSelection, coordinate_projection


def odd_cycle(n: int) -> GainGraph:
    return GainGraph(n, [(i, (i + 1) % n) for i in range(n)], [1] + [0] * (n - 1), 1)


def test_config_validation():
    with pytest.raises(ValueError):
        CoveringConfig(-1)
    with pytest.raises(ValueError):
        CoveringConfig(1, strategy="magic")


def test_shortest_unbalanced_cycle():
    G = GainGraph(4, [(0, 1), (1, 2), (2, 3), (3, 0), (0, 2)], [1, 0, 0, 0, 0], 1)
    cyc = shortest_unbalanced_cycle(G, set(range(4)), set())
    assert sorted(cyc) == [0, 1, 4]
    assert shortest_unbalanced_cycle(G, set(range(4)), {0}) is None
    loop = GainGraph(2, [(0, 1), (1, 1)], [0, 1], 1)
    assert shortest_unbalanced_cycle(loop, {0, 1}, set()) == [1]


def test_balanced_graph_is_kept_whole():
    G = GainGraph(3, [(0, 1), (1, 2), (0, 2)], [1, 1, 0], 1)
    res = one_coordinate_cover(G, CoveringConfig(1))
    assert res.S == {0, 1, 2} and res.F == frozenset() and res.attempts == 0


def test_odd_cycle_cover():
    for seed in range(20):
        res = one_coordinate_cover(odd_cycle(5), CoveringConfig(1, seed=seed))
        check_contract(odd_cycle(5), res)
        assert res.F


def test_none_strategy():
    G = odd_cycle(3)
    res = cover_vector(G, CoveringConfig(1, strategy="none"))
    assert res.S == {0, 1, 2} and res.F == {0, 1, 2}


def test_contract_is_checked():
    G = odd_cycle(3)
    with pytest.raises(CoveringContractError):
        CoveringResult.build(G, {0, 1, 2}, set(), 0, "manual")
    with pytest.raises(CoveringContractError):
        CoveringResult.build(G, {0, 1}, {2}, 0, "manual")
    assert boundary(G, {0}) == {0, 2}


def test_seeded_determinism():
    rng = random.Random(1)
    for _ in range(30):
        G = random_gain_graph(rng)
        cfg = CoveringConfig(2, seed=17)
        assert cover_vector(G, cfg) == cover_vector(G, cfg)
        first = next(amplified_cover(G, cfg, 3))
        assert first == cover_vector(G, cfg)


def test_contract_on_random_graphs():
    rng = random.Random(2)
    for i in range(200):
        G = random_gain_graph(rng)
        for res in amplified_cover(G, CoveringConfig(2, seed=i), 2):
            check_contract(G, res)
            for c in range(G.r):
                check_contract(coordinate_projection(G, c), res)


def test_capture_check():
    G = GainGraph(3, [(0, 1), (1, 2), (0, 2)], [1, 0, 0], 1)
    H = SubgraphSelection(frozenset({0, 1, 2}), frozenset({1, 2}))
    res = CoveringResult.build(G, {0, 1, 2}, {0}, 1, "manual")
    assert capture_check(G, res, H, 1, 1)
    assert not capture_check(G, res, H, 0, 1)
    small = CoveringResult.build(G, {1, 2}, {0, 2}, 1, "manual")
    assert not capture_check(G, small, H, 3, 1)


def test_amplified_cover_needs_a_repetition():
    with pytest.raises(ValueError):
        list(amplified_cover(odd_cycle(3), CoveringConfig(1), 0))
