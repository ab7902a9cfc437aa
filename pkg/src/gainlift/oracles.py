"""Brute-force ground truth for small inputs.

Nothing here is clever on purpose: optima come from plain subset
enumeration, balance from listing every simple cycle, potentials from
trying every value at every vertex. Each routine refuses inputs beyond an
:class:`OracleBudget`.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations
from typing import Iterator

import numpy as np

from .gaingraph import GainGraph, SubgraphSelection
from .lifting import Instance, Kind, direct_satisfiable, edge_offset, lift, lifted_feasible, normalize_lists
from .solver import DeletionSet


class OracleCapExceeded(ValueError):
    pass


@dataclass(frozen=True)
class OracleBudget:
    max_constraints: int = 12
    max_vertices: int = 8
    max_depth: int = 4
    max_k: int = 3
    max_potential_bits: int = 20

    def check_instance(self, inst: Instance, k: int | None = None) -> None:
        if inst.m > self.max_constraints:
            raise OracleCapExceeded(f"{inst.m} constraints > cap {self.max_constraints}")
        if inst.n > self.max_vertices:
            raise OracleCapExceeded(f"{inst.n} variables > cap {self.max_vertices}")
        if inst.d > self.max_depth:
            raise OracleCapExceeded(f"depth {inst.d} > cap {self.max_depth}")
        if k is not None and k > self.max_k:
            raise OracleCapExceeded(f"k = {k} > cap {self.max_k}")

    def check_selection(self, H: SubgraphSelection) -> None:
        if len(H.edge_set) > self.max_constraints:
            raise OracleCapExceeded(f"{len(H.edge_set)} edges > cap {self.max_constraints}")
        if len(H.vertex_set) > self.max_vertices + 1:
            raise OracleCapExceeded(f"{len(H.vertex_set)} vertices > cap {self.max_vertices + 1}")


DEFAULT_BUDGET = OracleBudget()


# ---------------------------------------------------------------- optimum


def brute_force_opt(
    inst: Instance,
    k_max: int,
    weighted: bool = False,
    budget: OracleBudget = DEFAULT_BUDGET,
) -> DeletionSet | None:
    """Optimal deletion set of size at most ``k_max``, or None.

    Unweighted: smallest cardinality, lexicographically first ids.
    Weighted: least weight, then cardinality, then ids.
    """
    budget.check_instance(inst, k_max)
    ids = sorted(inst.ids)
    everything = frozenset(ids)
    weights = {c.id: c.weight for c in inst.constraints}
    best: DeletionSet | None = None
    for size in range(min(k_max, len(ids)) + 1):
        for combo in combinations(ids, size):
            D = DeletionSet.of(combo, weights)
            if best is not None and D.weighted_key() >= best.weighted_key():
                continue
            if direct_satisfiable(inst, everything - D.constraint_ids)[0]:
                best = D
                if not weighted:
                    return best
    return best


# ---------------------------------------------------------------- cycles


def simple_cycles(G: GainGraph, H: SubgraphSelection | None = None) -> Iterator[tuple[tuple[int, ...], int]]:
    """Every simple cycle of ``H`` once, as ``(edge ids, label)``.

    A cycle is reported from its smallest vertex, in the direction whose
    first edge id is smaller than its last. Loops are cycles of length one.
    """
    if H is None:
        H = SubgraphSelection.whole(G)
    verts = H.vertex_set
    adj: dict[int, list[tuple[int, int]]] = {v: [] for v in verts}
    for e in sorted(H.edge_set):
        u, v = G.edges[e]
        if u == v:
            yield (e,), G.labels[e]
            continue
        adj[u].append((e, v))
        adj[v].append((e, u))
    labels = G.labels
    for s in sorted(verts):
        on_path = {s}
        path: list[int] = []

        def walk(x: int, acc: int) -> Iterator[tuple[tuple[int, ...], int]]:
            for e, y in adj[x]:
                if path and e == path[-1]:
                    continue
                if y == s:
                    if len(path) >= 1 and path[0] < e:
                        yield tuple(path) + (e,), acc ^ labels[e]
                    continue
                if y < s or y in on_path:
                    continue
                on_path.add(y)
                path.append(e)
                yield from walk(y, acc ^ labels[e])
                path.pop()
                on_path.discard(y)

        yield from walk(s, 0)


def brute_force_balanced(G: GainGraph, H: SubgraphSelection | None = None, budget: OracleBudget = DEFAULT_BUDGET) -> bool:
    if H is None:
        H = SubgraphSelection.whole(G)
    budget.check_selection(H)
    return all(label == 0 for _, label in simple_cycles(G, H))


# ---------------------------------------------------------------- potentials


def _component_count(G: GainGraph, H: SubgraphSelection) -> int:
    parent = {v: v for v in H.vertex_set}

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    count = len(parent)
    for e in H.edge_set:
        a, b = (find(w) for w in G.edges[e])
        if a != b:
            parent[a] = b
            count -= 1
    return count


def count_potentials(G: GainGraph, H: SubgraphSelection, budget: OracleBudget = DEFAULT_BUDGET) -> int:
    """Number of maps ``p: V(H) -> GF(2)^r`` with ``p(u) ^ p(v)`` equal to every edge label.

    Plain backtracking: each vertex tries all ``2^r`` values and is checked
    against the edges to vertices placed before it.
    """
    c = _component_count(G, H)
    if G.r * c > budget.max_potential_bits:
        raise OracleCapExceeded(f"r*c(H) = {G.r * c} > cap {budget.max_potential_bits}")
    order = sorted(H.vertex_set)
    pos = {v: i for i, v in enumerate(order)}
    back: list[list[tuple[int, int]]] = [[] for _ in order]
    for e in H.edge_set:
        u, v = G.edges[e]
        i, j = sorted((pos[u], pos[v]))
        back[j].append((i, G.labels[e]))
    values = [0] * len(order)
    space = 1 << G.r

    def place(i: int) -> int:
        if i == len(order):
            return 1
        total = 0
        for x in range(space):
            if all(values[j] ^ x == lab if j != i else lab == 0 for j, lab in back[i]):
                values[i] = x
                total += place(i + 1)
        return total

    count = place(0)
    if count == 0:
        raise ValueError("selection is unbalanced; it has no potential")
    return count


# ---------------------------------------------------------------- lift check


def regime_flags(inst: Instance) -> dict[str, bool]:
    norm = normalize_lists(inst)
    d = norm.d
    eq_zero = all(c.kind is Kind.EQ and edge_offset(norm, c) == 0 for c in norm.constraints)
    return {
        "small_depth": d <= 2,
        "one_free_bit": all(L.ell >= d - 1 for L in norm.lists),
        "eq_zero_offset": eq_zero,
        "eq_zero_offset_no_anchor": eq_zero and not any(c.kind is Kind.ANCHOR for c in norm.constraints),
    }


@dataclass
class LiftEquivalenceReport:
    subsets: int = 0
    # matrix[truth][lifted]
    matrix: list[list[int]] = field(default_factory=lambda: [[0, 0], [0, 0]])
    disagreements: list[tuple[int, ...]] = field(default_factory=list)
    flags: dict[str, bool] = field(default_factory=dict)
    exact_regime: bool = False
    policy: str = "carry-free"

    @property
    def agreements(self) -> int:
        return self.matrix[0][0] + self.matrix[1][1]

    @property
    def agreement_rate(self) -> float:
        return self.agreements / self.subsets if self.subsets else 1.0

    @property
    def false_feasible(self) -> int:
        return self.matrix[0][1]

    @property
    def false_infeasible(self) -> int:
        return self.matrix[1][0]


def lift_equivalence_suite(
    inst: Instance,
    exhaustive: bool = True,
    samples: int = 256,
    seed: int = 0,
    policy: str = "carry-free",
    budget: OracleBudget = DEFAULT_BUDGET,
) -> LiftEquivalenceReport:
    """Compare exact satisfiability with lifted balance over constraint subsets."""
    if exhaustive:
        budget.check_instance(inst)
    lg = lift(inst, policy)
    ids = sorted(inst.ids)
    report = LiftEquivalenceReport(flags=regime_flags(inst), exact_regime=lg.exact_regime, policy=policy)

    if exhaustive:
        masks: Iterator[int] = iter(range(1 << len(ids)))
    else:
        rng = np.random.default_rng(seed)
        masks = (int(rng.integers(1 << len(ids))) if ids else 0 for _ in range(samples))
    for mask in masks:
        keep = tuple(cid for i, cid in enumerate(ids) if mask >> i & 1)
        truth = direct_satisfiable(inst, keep)[0]
        lifted = lifted_feasible(lg, keep)
        report.subsets += 1
        report.matrix[truth][lifted] += 1
        if truth != lifted:
            report.disagreements.append(keep)
    return report

