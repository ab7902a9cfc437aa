"""Linear gain graphs with labels in GF(2)^r.

Edges are identified by their position in ``GainGraph.edges``. Labels are
packed ints (coordinate ``i`` is bit ``i``); orientation is irrelevant because
every label is its own negative.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from .gf2 import (
    BitMatrix,
    BitVector,
    XorBasis,
    column_basis_packed,
    left_inverse,
    rank,
)


class GainGraph:
    """Multigraph on vertices ``0..vertex_count-1`` with one label per edge.

    Parallel edges and self-loops are allowed.
    """

    __slots__ = ("vertex_count", "edges", "labels", "r", "_adj")

    def __init__(
        self,
        vertex_count: int,
        edges: Sequence[tuple[int, int]],
        labels: Sequence[int | BitVector],
        r: int,
    ) -> None:
        if len(edges) != len(labels):
            raise ValueError("one label per edge required")
        packed = []
        for lab in labels:
            if isinstance(lab, BitVector):
                if lab.len != r:
                    raise ValueError("label length differs from r")
                lab = lab.bits
            if lab < 0 or lab >> r:
                raise ValueError(f"label {lab:#x} does not fit in {r} bits")
            packed.append(lab)
        for u, v in edges:
            if not (0 <= u < vertex_count and 0 <= v < vertex_count):
                raise ValueError(f"edge ({u}, {v}) has an endpoint out of range")
        self.vertex_count = vertex_count
        self.edges = tuple((int(u), int(v)) for u, v in edges)
        self.labels = tuple(packed)
        self.r = r
        self._adj: list[list[tuple[int, int]]] | None = None

    @property
    def edge_count(self) -> int:
        return len(self.edges)

    def label(self, e: int) -> BitVector:
        return BitVector(self.r, self.labels[e])

    def adjacency(self) -> list[list[tuple[int, int]]]:
        """Per vertex, ``(edge_id, other_endpoint)`` in edge order. Loops appear once."""
        if self._adj is None:
            adj: list[list[tuple[int, int]]] = [[] for _ in range(self.vertex_count)]
            for e, (u, v) in enumerate(self.edges):
                adj[u].append((e, v))
                if u != v:
                    adj[v].append((e, u))
            self._adj = adj
        return self._adj

    def with_labels(self, labels: Sequence[int], r: int) -> GainGraph:
        return GainGraph(self.vertex_count, self.edges, labels, r)

    def __repr__(self) -> str:
        return f"GainGraph(n={self.vertex_count}, m={len(self.edges)}, r={self.r})"


@dataclass(frozen=True)
class SubgraphSelection:
    vertex_set: frozenset[int]
    edge_set: frozenset[int]

    @classmethod
    def whole(cls, G: GainGraph) -> SubgraphSelection:
        return cls(frozenset(range(G.vertex_count)), frozenset(range(G.edge_count)))

    @classmethod
    def from_edges(cls, G: GainGraph, edges: Iterable[int], vertices: Iterable[int] = ()) -> SubgraphSelection:
        es = frozenset(edges)
        vs = set(vertices)
        for e in es:
            vs.update(G.edges[e])
        return cls(frozenset(vs), es)

    @classmethod
    def induced(cls, G: GainGraph, vertices: Iterable[int]) -> SubgraphSelection:
        vs = frozenset(vertices)
        es = frozenset(e for e, (u, v) in enumerate(G.edges) if u in vs and v in vs)
        return cls(vs, es)

    def validate(self, G: GainGraph) -> None:
        for e in self.edge_set:
            u, v = G.edges[e]
            if u not in self.vertex_set or v not in self.vertex_set:
                raise ValueError(f"edge {e} leaves the selected vertex set")


@dataclass(frozen=True)
class SpanningForest:
    parent_edge: tuple[int | None, ...]
    parent: tuple[int | None, ...]
    root: tuple[int, ...]
    component_id: tuple[int, ...]
    order: tuple[int, ...]
    tree_edges: frozenset[int]

    @property
    def component_count(self) -> int:
        return len({self.component_id[v] for v in self.order})


@dataclass(frozen=True)
class FundamentalCycleMatrix:
    """Fundamental-cycle labels, one packed column per non-tree edge."""

    r: int
    columns: tuple[int, ...]
    nontree_edge_ids: tuple[int, ...]

    @property
    def matrix(self) -> BitMatrix:
        return BitMatrix.from_columns(self.r, self.columns)

    @property
    def mu(self) -> int:
        return len(self.columns)


@dataclass(frozen=True)
class Potential:
    values: dict[int, int]
    r: int

    def __getitem__(self, v: int) -> BitVector:
        return BitVector(self.r, self.values[v])


@dataclass(frozen=True)
class UnbalancedCycle:
    """Edge ids of a fundamental cycle whose label is nonzero."""

    edges: frozenset[int]
    label: int = field(default=0)


def _forest(G: GainGraph, vertices: Iterable[int] | None = None, edges: frozenset[int] | None = None) -> SpanningForest:
    n = G.vertex_count
    parent_edge: list[int | None] = [None] * n
    parent: list[int | None] = [None] * n
    root = list(range(n))
    comp = [-1] * n
    order: list[int] = []
    tree: set[int] = set()
    adj = G.adjacency()
    verts = range(n) if vertices is None else sorted(vertices)
    c = 0
    for s in verts:
        if comp[s] != -1:
            continue
        comp[s] = c
        order.append(s)
        queue = deque([s])
        while queue:
            x = queue.popleft()
            for e, y in adj[x]:
                if edges is not None and e not in edges:
                    continue
                if comp[y] == -1:
                    comp[y] = c
                    root[y] = s
                    parent[y] = x
                    parent_edge[y] = e
                    tree.add(e)
                    order.append(y)
                    queue.append(y)
        c += 1
    return SpanningForest(tuple(parent_edge), tuple(parent), tuple(root), tuple(comp), tuple(order), frozenset(tree))


def spanning_forest(G: GainGraph) -> SpanningForest:
    """BFS forest, lowest unvisited vertex first, edges scanned in input order."""
    return _forest(G)


def prefix_sums(G: GainGraph, T: SpanningForest) -> list[int]:
    sigma = [0] * G.vertex_count
    labels = G.labels
    for v in T.order:
        pe = T.parent_edge[v]
        if pe is not None:
            sigma[v] = sigma[T.parent[v]] ^ labels[pe]
    return sigma


def fundamental_cycle_labels(G: GainGraph, T: SpanningForest, edges: Iterable[int] | None = None) -> FundamentalCycleMatrix:
    sigma = prefix_sums(G, T)
    labels = G.labels
    cols: list[int] = []
    ids: list[int] = []
    pool = range(G.edge_count) if edges is None else sorted(edges)
    for e in pool:
        if e in T.tree_edges:
            continue
        u, v = G.edges[e]
        cols.append(labels[e] ^ sigma[u] ^ sigma[v])
        ids.append(e)
    return FundamentalCycleMatrix(G.r, tuple(cols), tuple(ids))


def cycle_label_rank(G: GainGraph) -> int:
    fcm = fundamental_cycle_labels(G, spanning_forest(G))
    basis = XorBasis()
    for c in fcm.columns:
        basis.add(c)
        if len(basis) == G.r:
            break
    return len(basis)


def extract_potential(G: GainGraph, H: SubgraphSelection) -> Potential | UnbalancedCycle:
    """Potential realising every label of ``H``, or a witness cycle if ``H`` is unbalanced."""
    T = _forest(G, H.vertex_set, H.edge_set)
    sigma = prefix_sums(G, T)
    for e in sorted(H.edge_set):
        if e in T.tree_edges:
            continue
        u, v = G.edges[e]
        lab = G.labels[e] ^ sigma[u] ^ sigma[v]
        if lab:
            return UnbalancedCycle(frozenset(_tree_cycle(T, e, u, v)), lab)
    return Potential({v: sigma[v] for v in H.vertex_set}, G.r)


def _tree_cycle(T: SpanningForest, e: int, u: int, v: int) -> set[int]:
    cycle = {e}
    up: dict[int, int | None] = {}
    x: int | None = u
    while x is not None:
        up[x] = T.parent_edge[x]
        x = T.parent[x]
    y: int | None = v
    while y not in up:
        cycle ^= {T.parent_edge[y]}
        y = T.parent[y]
    x = u
    while x != y:
        cycle ^= {T.parent_edge[x]}
        x = T.parent[x]
    return cycle


def is_balanced(G: GainGraph, H: SubgraphSelection | None = None) -> bool:
    if H is None:
        H = SubgraphSelection.whole(G)
    return isinstance(extract_potential(G, H), Potential)


def is_balanced_edges(G: GainGraph, edges: Iterable[int]) -> bool:
    return is_balanced(G, SubgraphSelection.from_edges(G, edges))


def cost(G: GainGraph, H: SubgraphSelection) -> int:
    """Edges to delete so that ``H`` is what survives around ``V(H)``."""
    vs = H.vertex_set
    total = 0
    for e, (u, v) in enumerate(G.edges):
        inside = (u in vs) + (v in vs)
        if inside == 1 or (inside == 2 and e not in H.edge_set):
            total += 1
    return total


def coordinate_projection(G: GainGraph, i: int) -> GainGraph:
    if not 0 <= i < G.r:
        raise IndexError(f"coordinate {i} out of range for r={G.r}")
    return G.with_labels([(lab >> i) & 1 for lab in G.labels], 1)


def apply_to_labels(G: GainGraph, P: BitMatrix) -> GainGraph:
    """Relabel every edge by ``P @ label``; distinct labels are mapped once."""
    if P.cols != G.r:
        raise ValueError("P does not act on the label space")
    cache: dict[int, int] = {}
    out = []
    for lab in G.labels:
        img = cache.get(lab)
        if img is None:
            img = cache[lab] = P.apply(lab)
        out.append(img)
    return G.with_labels(out, P.rows)


def compress_labels(G: GainGraph) -> tuple[GainGraph, BitMatrix]:
    """Relabel into GF(2)^rho, preserving the balance of every subgraph."""
    fcm = fundamental_cycle_labels(G, spanning_forest(G))
    _, picked = column_basis_packed(fcm.columns, G.r)
    Q = BitMatrix.from_columns(G.r, picked)
    P = left_inverse(Q)
    return apply_to_labels(G, P), P


def incidence_matrix(G: GainGraph) -> BitMatrix:
    """``|V| x |E|``; a self-loop column is zero over GF(2)."""
    rows = [0] * G.vertex_count
    for e, (u, v) in enumerate(G.edges):
        if u != v:
            rows[u] |= 1 << e
            rows[v] |= 1 << e
    return BitMatrix(G.vertex_count, G.edge_count, rows)


def label_matrix(G: GainGraph) -> BitMatrix:
    """``r x |E|`` with column ``e`` equal to the label of ``e``."""
    return BitMatrix.from_columns(G.r, G.labels)


def cycle_basis_matrix(G: GainGraph, T: SpanningForest | None = None) -> BitMatrix:
    """``|E| x mu``; column ``j`` is the edge indicator of the j-th fundamental cycle."""
    if T is None:
        T = spanning_forest(G)
    cols = []
    for e, (u, v) in enumerate(G.edges):
        if e in T.tree_edges:
            continue
        cols.append(sum(1 << f for f in _tree_cycle(T, e, u, v)))
    return BitMatrix.from_columns(G.edge_count, cols)


def stacked_rank_identity(G: GainGraph) -> tuple[int, int, int]:
    """``(rho, rank([B; Lambda]), rank(B))``; the first equals the difference of the others."""
    B = incidence_matrix(G)
    L = label_matrix(G)
    rho = cycle_label_rank(G)
    return rho, rank(B.vstack(L)), rank(B)
