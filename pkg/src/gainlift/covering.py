"""Randomised balanced covering of gain graphs.

A covering returns ``(S, F)`` with every edge leaving ``S`` in ``F`` and
``(G - F)[S]`` balanced. Vector labels are covered one coordinate at a time
and combined by intersecting the vertex sets and uniting the edge sets.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from typing import Iterator

import numpy as np

from .gaingraph import GainGraph, SubgraphSelection, coordinate_projection, extract_potential, Potential

STRATEGIES = ("cycle-sampling", "none")


class CoveringContractError(AssertionError):
    pass


@dataclass(frozen=True)
class CoveringConfig:
    k: int
    strategy: str = "cycle-sampling"
    seed: int = 0
    max_iterations: int | None = None

    def __post_init__(self) -> None:
        if self.k < 0:
            raise ValueError("k must be nonnegative")
        if self.strategy not in STRATEGIES:
            raise ValueError(f"unknown covering strategy {self.strategy!r}")


@dataclass(frozen=True)
class CoveringResult:
    S: frozenset[int]
    F: frozenset[int]
    attempts: int
    strategy_name: str

    @classmethod
    def build(cls, G: GainGraph, S, F, attempts: int, strategy: str) -> CoveringResult:
        res = cls(frozenset(S), frozenset(F), attempts, strategy)
        check_contract(G, res)
        return res


def boundary(G: GainGraph, S: frozenset[int] | set[int]) -> set[int]:
    return {e for e, (u, v) in enumerate(G.edges) if (u in S) != (v in S)}


def surviving_selection(G: GainGraph, S, F) -> SubgraphSelection:
    return SubgraphSelection(
        frozenset(S),
        frozenset(e for e, (u, v) in enumerate(G.edges) if e not in F and u in S and v in S),
    )


def check_contract(G: GainGraph, res: CoveringResult) -> None:
    """Raise CoveringContractError unless ``delta(S) <= F`` and ``(G-F)[S]`` is balanced."""
    leak = boundary(G, res.S) - res.F
    if leak:
        raise CoveringContractError(f"boundary edges {sorted(leak)} missing from F")
    if not isinstance(extract_potential(G, surviving_selection(G, res.S, res.F)), Potential):
        raise CoveringContractError("(G - F)[S] is unbalanced")


def _stream(seed: int, repetition: int = 0) -> np.random.SeedSequence:
    return np.random.SeedSequence(seed, spawn_key=(repetition,))


def shortest_unbalanced_cycle(G: GainGraph, S: set[int], F: set[int]) -> list[int] | None:
    """Edge ids of a shortest cycle with label 1 in ``(G - F)[S]`` (scalar labels).

    Breadth-first search on the double cover: ``(v, p)`` with an edge of label
    ``b`` leading to ``(w, p ^ b)``. A shortest walk from ``(s, 0)`` to
    ``(s, 1)``, minimised over all ``s``, is a shortest odd cycle.
    """
    adj = G.adjacency()
    labels = G.labels
    best: list[int] | None = None
    for s in sorted(S):
        prev: dict[tuple[int, int], tuple[tuple[int, int], int]] = {}
        start = (s, 0)
        dist = {start: 0}
        queue = deque([start])
        found = False
        limit = len(best) if best is not None else None
        while queue and not found:
            node = queue.popleft()
            x, p = node
            if limit is not None and dist[node] + 1 >= limit:
                break
            for e, y in adj[x]:
                if e in F or y not in S:
                    continue
                nxt = (y, p ^ labels[e])
                if nxt in dist:
                    continue
                dist[nxt] = dist[node] + 1
                prev[nxt] = (node, e)
                if nxt == (s, 1):
                    found = True
                    break
                queue.append(nxt)
        if found:
            path = []
            node = (s, 1)
            while node != start:
                node, e = prev[node]
                path.append(e)
            if best is None or len(path) < len(best):
                best = path
            if len(best) == 1:
                break
    return best


def one_coordinate_cover(G: GainGraph, cfg: CoveringConfig, rng: np.random.Generator | None = None) -> CoveringResult:
    """Cover a graph with scalar labels by repeatedly breaking a shortest odd cycle.

    Each round picks a uniform edge of the cycle and, with probability 1/2,
    moves it into ``F``; otherwise one of its endpoints leaves ``S`` together
    with its surviving incident edges. Finally ``delta(S)`` joins ``F``.
    """
    if G.r != 1:
        raise ValueError("one_coordinate_cover needs r = 1")
    if rng is None:
        rng = np.random.default_rng(_stream(cfg.seed))
    n, m = G.vertex_count, G.edge_count
    if cfg.strategy == "none":
        return CoveringResult.build(G, range(n), range(m), 0, cfg.strategy)
    cap = cfg.max_iterations if cfg.max_iterations is not None else m + n
    S = set(range(n))
    F: set[int] = set()
    adj = G.adjacency()
    rounds = 0
    while True:
        sel = surviving_selection(G, S, F)
        if isinstance(extract_potential(G, sel), Potential):
            break
        if rounds >= cap:
            return CoveringResult.build(G, (), (), rounds, cfg.strategy)
        rounds += 1
        cycle = shortest_unbalanced_cycle(G, S, F)
        e = cycle[int(rng.integers(len(cycle)))]
        if rng.random() < 0.5:
            F.add(e)
        else:
            w = G.edges[e][int(rng.integers(2))]
            S.discard(w)
            F.update(f for f, _ in adj[w])
    F |= boundary(G, S)
    return CoveringResult.build(G, S, F, rounds, cfg.strategy)


def cover_vector(G: GainGraph, cfg: CoveringConfig, stream: np.random.SeedSequence | None = None) -> CoveringResult:
    """Cover each coordinate separately, then intersect the S's and unite the F's."""
    if stream is None:
        stream = _stream(cfg.seed)
    n = G.vertex_count
    S = set(range(n))
    F: set[int] = set()
    rounds = 0
    if cfg.strategy == "none":
        return CoveringResult.build(G, S, range(G.edge_count), 0, cfg.strategy)
    for i, child in enumerate(stream.spawn(G.r)):
        res = one_coordinate_cover(coordinate_projection(G, i), cfg, np.random.default_rng(child))
        S &= res.S
        F |= res.F
        rounds += res.attempts
    return CoveringResult.build(G, S, F, rounds, cfg.strategy)


def amplified_cover(G: GainGraph, cfg: CoveringConfig, repetitions: int) -> Iterator[CoveringResult]:
    """``repetitions`` independent coverings; repetition 0 equals ``cover_vector(G, cfg)``."""
    if repetitions < 1:
        raise ValueError("need at least one repetition")
    for j in range(repetitions):
        yield cover_vector(G, cfg, _stream(cfg.seed, j))


def capture_check(G: GainGraph, result: CoveringResult, H: SubgraphSelection, k: int, r: int) -> bool:
    """Did the covering keep all of ``V(H)`` while charging at most ``r*k`` edges touching it?"""
    vs = H.vertex_set
    if not vs <= result.S:
        return False
    touching = sum(1 for e in result.F if G.edges[e][0] in vs or G.edges[e][1] in vs)
    return touching <= r * k

