"""End-to-end deletion solver: lift, compress, cover, enumerate, verify."""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations
from typing import Iterable, Iterator, Mapping

from .covering import CoveringConfig, amplified_cover
from .gaingraph import compress_labels
from .lifting import Instance, direct_satisfiable, lift

MODES = ("covering", "exhaustive")


@dataclass(frozen=True)
class DeletionSet:
    constraint_ids: frozenset[int]
    cardinality: int
    total_weight: Fraction

    @classmethod
    def of(cls, ids: Iterable[int], weights: Mapping[int, Fraction] | None = None) -> DeletionSet:
        ids = frozenset(ids)
        w = sum((weights[i] for i in ids), Fraction(0)) if weights is not None else Fraction(len(ids))
        return cls(ids, len(ids), w)

    @property
    def sorted_ids(self) -> tuple[int, ...]:
        return tuple(sorted(self.constraint_ids))

    def weighted_key(self) -> tuple:
        return self.total_weight, self.cardinality, self.sorted_ids

    def cardinality_key(self) -> tuple:
        return self.cardinality, self.sorted_ids


@dataclass(frozen=True)
class SolverConfig:
    k: int
    repetitions: int = 200
    seed: int = 0
    strategy: str = "cycle-sampling"
    weighted: bool = False
    mode: str = "covering"
    lift_policy: str = "isolate"
    candidate_budget: int | None = 1_000_000

    def __post_init__(self) -> None:
        if self.k < 0:
            raise ValueError("k must be nonnegative")
        if self.repetitions < 1:
            raise ValueError("need at least one repetition")
        if self.mode not in MODES:
            raise ValueError(f"unknown mode {self.mode!r}")


@dataclass
class SolveStats:
    rho: int = 0
    R: int = 0
    mu: int = 0
    exact_regime: bool = False
    mandatory: tuple[int, ...] = ()
    F_sizes: list[int] = field(default_factory=list)
    candidate_families: list[tuple[int, ...]] = field(default_factory=list)
    candidates: int = 0
    verifications: int = 0
    enumeration_bound: float = 1.0
    truncated_attempts: int = 0
    attempts_run: int = 0
    wall_time: float = 0.0


@dataclass
class SolveReport:
    answer: bool
    best: DeletionSet | None
    stats: SolveStats

    @property
    def answer_text(self) -> str:
        return "YES" if self.answer else "NO"


def verify_deletion(inst: Instance, D: DeletionSet | Iterable[int]) -> bool:
    ids = D.constraint_ids if isinstance(D, DeletionSet) else frozenset(D)
    residual = inst.without(ids)
    return direct_satisfiable(residual)[0]


def enumerate_candidates(
    F: Iterable[int],
    constraint_of_edge: Mapping[int, int] | tuple[int, ...],
    k: int,
    weights: Mapping[int, Fraction] | None = None,
) -> Iterator[DeletionSet]:
    """Every set of at most ``k`` constraints behind ``F``; by size, then lexicographically."""
    if k < 0:
        raise ValueError("k must be nonnegative")
    pool = sorted({constraint_of_edge[e] for e in F})
    for size in range(min(k, len(pool)) + 1):
        for combo in combinations(pool, size):
            yield DeletionSet.of(combo, weights)


def enumeration_bound(rho: int, k: int) -> float:
    """``(e*rho)^k``, the count of candidate sets on a successful covering."""
    return (math.e * rho) ** k if k else 1.0


class _Search:
    """Best-so-far bookkeeping shared by both modes."""

    def __init__(self, inst: Instance, cfg: SolverConfig, forced: frozenset[int], stats: SolveStats):
        self.inst = inst
        self.cfg = cfg
        self.forced = forced
        self.stats = stats
        self.weights = {c.id: c.weight for c in inst.constraints}
        self.all_ids = frozenset(inst.ids)
        self.cache: dict[frozenset[int], bool] = {}
        self.best: DeletionSet | None = None

    def feasible(self, ids: frozenset[int]) -> bool:
        hit = self.cache.get(ids)
        if hit is None:
            self.stats.verifications += 1
            hit = self.cache[ids] = direct_satisfiable(self.inst, self.all_ids - ids)[0]
        return hit

    def better(self, D: DeletionSet) -> bool:
        if self.best is None:
            return True
        if self.cfg.weighted:
            return D.weighted_key() < self.best.weighted_key()
        return D.cardinality < self.best.cardinality

    def run(self, pool: Iterable[int], budget: int | None) -> bool:
        """Scan subsets of ``pool`` (plus the forced ids); False if the budget ran out."""
        pool = sorted(set(pool) - self.forced)
        room = self.cfg.k - len(self.forced)
        seen = 0
        for size in range(min(room, len(pool)) + 1):
            if not self.cfg.weighted and self.best is not None and size + len(self.forced) >= self.best.cardinality:
                return True
            for combo in combinations(pool, size):
                if budget is not None and seen >= budget:
                    return False
                seen += 1
                self.stats.candidates += 1
                D = DeletionSet.of(self.forced.union(combo), self.weights)
                if not self.better(D):
                    continue
                if self.feasible(D.constraint_ids):
                    self.best = D
                    if not self.cfg.weighted:
                        return True
        return True


def solve(inst: Instance, cfg: SolverConfig) -> SolveReport:
    t0 = time.perf_counter()
    stats = SolveStats()
    lg = lift(inst, cfg.lift_policy)
    forced = lg.mandatory_deletions
    stats.R = lg.ambient_dim
    stats.exact_regime = lg.exact_regime
    stats.mandatory = tuple(sorted(forced))
    G = lg.graph
    stats.mu = G.edge_count - G.vertex_count + component_count(G)
    search = _Search(inst, cfg, forced, stats)

    if len(forced) > cfg.k:
        stats.wall_time = time.perf_counter() - t0
        return SolveReport(False, None, stats)

    Gc, _ = compress_labels(G)
    stats.rho = Gc.r
    if cfg.mode == "exhaustive":
        search.run(inst.ids, None)
        stats.attempts_run = 1
    else:
        stats.enumeration_bound = enumeration_bound(stats.rho, cfg.k)
        room = cfg.k - len(forced)
        cover_cfg = CoveringConfig(room, cfg.strategy, cfg.seed)
        for res in amplified_cover(Gc, cover_cfg, cfg.repetitions):
            stats.attempts_run += 1
            pool = sorted(lg.constraints_for(res.F))
            stats.F_sizes.append(len(res.F))
            stats.candidate_families.append(tuple(pool))
            if not search.run(pool, cfg.candidate_budget):
                stats.truncated_attempts += 1
            if not cfg.weighted and search.best is not None and search.best.cardinality == len(forced):
                break
        if inst.m <= cfg.k and (search.best is None or cfg.weighted):
            # the budget covers every constraint, so the whole family is a legal pool
            if not search.run(inst.ids, cfg.candidate_budget):
                stats.truncated_attempts += 1
    stats.wall_time = time.perf_counter() - t0
    best = search.best
    if best is not None and not verify_deletion(inst, best):
        raise AssertionError("returned deletion set failed verification")
    return SolveReport(best is not None, best, stats)


def solve_decision(inst: Instance, cfg: SolverConfig) -> bool:
    return solve(inst, cfg).answer


def component_count(G) -> int:
    parent = list(range(G.vertex_count))

    def find(x: int) -> int:
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    count = G.vertex_count
    for u, v in G.edges:
        a, b = find(u), find(v)
        if a != b:
            parent[a] = b
            count -= 1
    return count
