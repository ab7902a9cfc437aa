"""Coset-list systems over Z/2^d and their lift to gain graphs over GF(2)^R.

A variable ``x_v`` ranges over the dyadic list ``a_v + 2^ell(v) Z/2^d``.
Binary constraints are ``x_u = x_v`` (eq), ``x_u = -x_v`` (neg) and
``x_u = 2 x_v`` (dbl); anchors are ``x_v = b``.

The lift uses absolute bit potentials: coordinate ``t - base`` of a vertex
stands for bit ``t`` of its value, where ``base`` is the lowest level of a
non-constant variable. Every surviving constraint becomes one edge:

* a constraint coupling two non-constant variables becomes an edge ``u-v``
  labelled with the bitwise difference of a canonical satisfying pair;
* a constraint that only restricts one endpoint (constants, pins, anchors)
  becomes an edge to the anchor vertex labelled with the pinned value;
* a constraint that is always true becomes a zero loop on the anchor vertex;
* a constraint with no satisfying pair is a mandatory deletion.
"""

from __future__ import annotations

import enum
from collections import Counter, deque
from dataclasses import dataclass, field, replace
from fractions import Fraction
from functools import cached_property
from typing import Iterable, Iterator

import numpy as np

from .gaingraph import GainGraph, is_balanced_edges
from .gf2 import BitVector


class Kind(str, enum.Enum):
    EQ = "eq"
    NEG = "neg"
    DBL = "dbl"
    ANCHOR = "anchor"


BINARY_KINDS = (Kind.EQ, Kind.NEG, Kind.DBL)

# (alpha, beta) in alpha*x_u + beta*x_v = 0
COEFFICIENTS = {Kind.EQ: (1, -1), Kind.NEG: (1, 1), Kind.DBL: (1, -2)}


@dataclass(frozen=True)
class DyadicList:
    a: int
    ell: int

    def normalized(self) -> DyadicList:
        return DyadicList(self.a % (1 << self.ell), self.ell)

    def contains(self, x: int) -> bool:
        return (x - self.a) % (1 << self.ell) == 0

    def size(self, d: int) -> int:
        return 1 << (d - self.ell)

    def values(self, d: int) -> range:
        step = 1 << self.ell
        return range(self.a % step, 1 << d, step)


@dataclass(frozen=True)
class Constraint:
    id: int
    kind: Kind
    u: int
    v: int | None = None
    b: int | None = None
    weight: Fraction = Fraction(1)

    def __post_init__(self) -> None:
        object.__setattr__(self, "kind", Kind(self.kind))
        object.__setattr__(self, "weight", Fraction(self.weight))
        if self.weight <= 0:
            raise ValueError(f"constraint {self.id}: weight must be positive")
        if self.kind is Kind.ANCHOR:
            if self.b is None or self.v is not None:
                raise ValueError(f"constraint {self.id}: an anchor needs b and no v")
        elif self.v is None:
            raise ValueError(f"constraint {self.id}: binary constraint needs v")

    @property
    def is_binary(self) -> bool:
        return self.kind is not Kind.ANCHOR

    def holds(self, xu: int, xv: int | None, d: int) -> bool:
        full = (1 << d) - 1
        if self.kind is Kind.EQ:
            return xu == xv
        if self.kind is Kind.NEG:
            return (xu + xv) & full == 0
        if self.kind is Kind.DBL:
            return xu == (2 * xv) & full
        return xu == self.b


@dataclass(frozen=True)
class Instance:
    d: int
    lists: tuple[DyadicList, ...]
    constraints: tuple[Constraint, ...]
    names: tuple[str, ...] | None = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "lists", tuple(self.lists))
        object.__setattr__(self, "constraints", tuple(self.constraints))
        if self.names is not None:
            object.__setattr__(self, "names", tuple(self.names))
            if len(self.names) != len(self.lists):
                raise ValueError("one name per variable required")
        if self.d < 1:
            raise ValueError("d must be at least 1")
        mod = 1 << self.d
        for i, L in enumerate(self.lists):
            if not (0 <= L.ell <= self.d and 0 <= L.a < mod):
                raise ValueError(f"variable {i}: list ({L.a}, {L.ell}) out of range")
        n = len(self.lists)
        seen = set()
        for c in self.constraints:
            if c.id in seen:
                raise ValueError(f"duplicate constraint id {c.id}")
            seen.add(c.id)
            if not 0 <= c.u < n or (c.v is not None and not 0 <= c.v < n):
                raise ValueError(f"constraint {c.id}: variable out of range")
            if c.b is not None and not 0 <= c.b < mod:
                raise ValueError(f"constraint {c.id}: residue {c.b} out of range")

    @property
    def n(self) -> int:
        return len(self.lists)

    @property
    def m(self) -> int:
        return len(self.constraints)

    @property
    def modulus(self) -> int:
        return 1 << self.d

    @cached_property
    def by_id(self) -> dict[int, Constraint]:
        return {c.id: c for c in self.constraints}

    @property
    def ids(self) -> list[int]:
        return [c.id for c in self.constraints]

    def constraint(self, cid: int) -> Constraint:
        return self.by_id[cid]

    def name(self, v: int) -> str:
        return self.names[v] if self.names else f"x{v}"

    def restrict(self, keep: Iterable[int]) -> Instance:
        keep = set(keep)
        return replace(self, constraints=tuple(c for c in self.constraints if c.id in keep))

    def without(self, drop: Iterable[int]) -> Instance:
        drop = set(drop)
        unknown = drop - self.by_id.keys()
        if unknown:
            raise KeyError(f"unknown constraint ids {sorted(unknown)}")
        return replace(self, constraints=tuple(c for c in self.constraints if c.id not in drop))

    def weight_of(self, ids: Iterable[int]) -> Fraction:
        return sum((self.by_id[i].weight for i in ids), Fraction(0))

    def kind_counts(self) -> Counter:
        return Counter(c.kind.value for c in self.constraints)


# ---------------------------------------------------------------- cosets

Coset = tuple[int, int]  # (representative reduced mod 2^level, level)


def _intersect(p: Coset | None, q: Coset | None) -> Coset | None:
    if p is None or q is None:
        return None
    if p[1] > q[1]:
        p, q = q, p
    if q[0] % (1 << p[1]) != p[0]:
        return None
    return q


def _negate(c: Coset) -> Coset:
    a, lev = c
    return (-a) % (1 << lev), lev


def _halve(c: Coset) -> Coset | None:
    """``{x : 2x in c}``."""
    a, lev = c
    if lev == 0:
        return 0, 0
    if a & 1:
        return None
    return (a >> 1) % (1 << (lev - 1)), lev - 1


def _image(kind: Kind, src: Coset, d: int) -> Coset:
    a, lev = src
    if kind is Kind.EQ:
        return src
    if kind is Kind.NEG:
        return _negate(src)
    lev2 = min(lev + 1, d)
    return (2 * a) % (1 << lev2), lev2


def _apply(kind: Kind, x: int, d: int) -> int:
    full = (1 << d) - 1
    if kind is Kind.EQ:
        return x
    if kind is Kind.NEG:
        return -x & full
    return (2 * x) & full


def _low_mask(t: int) -> int:
    return (1 << t) - 1


@dataclass(frozen=True)
class Shape:
    """How one constraint enters the lifted graph.

    ``form`` is one of ``mandatory``, ``trivial``, ``pin`` or ``couple``. For a
    pin, ``var`` is the restricted variable and ``coset`` its allowed values;
    for a couple, ``coset`` holds the allowed values of ``x_v`` and
    ``pair`` a canonical satisfying ``(x_u, x_v)``. ``stable`` marks the
    absolute bit positions on which the XOR of the two sides is constant
    over every satisfying pair.
    """

    form: str
    var: int | None = None
    coset: Coset | None = None
    pair: tuple[int, int] | None = None
    stable: int = 0


def _normalized_lists(inst: Instance) -> tuple[DyadicList, ...]:
    return tuple(L.normalized() for L in inst.lists)


def constraint_shape(inst: Instance, c: Constraint, lists: tuple[DyadicList, ...] | None = None) -> Shape:
    d = inst.d
    full_stable = _low_mask(d)
    if lists is None:
        lists = _normalized_lists(inst)
    Lu = lists[c.u]
    if c.kind is Kind.ANCHOR:
        if not Lu.contains(c.b):
            return Shape("mandatory")
        if Lu.ell == d:
            return Shape("trivial", stable=full_stable)
        return Shape("pin", c.u, (c.b, d), stable=full_stable)

    if c.u == c.v:
        if c.kind is Kind.EQ:
            allowed: Coset | None = (Lu.a, Lu.ell)
        elif c.kind is Kind.NEG:
            allowed = _intersect((Lu.a, Lu.ell), (0, d - 1))
        else:
            allowed = _intersect((Lu.a, Lu.ell), (0, d))
        if allowed is None:
            return Shape("mandatory")
        if allowed[1] == Lu.ell:
            return Shape("trivial", stable=full_stable)
        return Shape("pin", c.u, allowed, stable=_low_mask(allowed[1]))

    Lv = lists[c.v]
    cu, cv = (Lu.a, Lu.ell), (Lv.a, Lv.ell)
    if c.kind is Kind.EQ:
        src = _intersect(cv, cu)
    elif c.kind is Kind.NEG:
        src = _intersect(cv, _negate(cu))
    else:
        src = _intersect(cv, _halve(cu))
    if src is None:
        return Shape("mandatory")
    img = _image(c.kind, src, d)
    if img[1] == d:
        u_pinned = Lu.ell < d
        v_pinned = src[1] > Lv.ell
        if not u_pinned and not v_pinned:
            return Shape("trivial", stable=full_stable)
        if u_pinned and not v_pinned:
            return Shape("pin", c.u, img, stable=full_stable)
        if v_pinned and not u_pinned:
            return Shape("pin", c.v, src, stable=_low_mask(src[1]))
    r, lev = src
    pair = (_apply(c.kind, r, d), r)
    if c.kind is Kind.EQ or lev == d:
        stable = full_stable
    elif c.kind is Kind.NEG:
        stable = full_stable if r else _low_mask(lev + 1)
    else:
        stable = _low_mask(lev)
    return Shape("couple", pair=pair, coset=src, stable=stable & full_stable)


# ---------------------------------------------------------------- operations


def normalize_lists(inst: Instance) -> Instance:
    """Reduce every list representative below ``2^ell``."""
    return replace(inst, lists=_normalized_lists(inst))


def edge_offset(inst: Instance, c: Constraint) -> int:
    if not c.is_binary:
        raise ValueError("edge offsets are defined for binary constraints only")
    alpha, beta = COEFFICIENTS[c.kind]
    au = inst.lists[c.u].normalized().a
    av = inst.lists[c.v].normalized().a
    return (-alpha * au - beta * av) % inst.modulus


def active_depths(inst: Instance, c: Constraint) -> frozenset[int]:
    """Depths where both endpoints still have a free bit after aligning doubling."""
    if not c.is_binary:
        raise ValueError("active depths are defined for binary constraints only")
    s = 1 if c.kind is Kind.DBL else 0
    lo = max(inst.lists[c.u].ell, inst.lists[c.v].ell + s)
    return frozenset(range(lo, inst.d))


def label_base(inst: Instance) -> int:
    """Lowest level among non-constant variables (``d`` if all are constants)."""
    levels = [L.ell for L in inst.lists if L.ell < inst.d]
    return min(levels) if levels else inst.d


def ambient_dim(inst: Instance) -> int:
    return inst.d - label_base(inst)


def _label_of_shape(shape: Shape, base: int, R: int) -> int:
    mask = _low_mask(R)
    if shape.form == "pin":
        return (shape.coset[0] >> base) & mask
    if shape.form == "couple":
        xu, xv = shape.pair
        return ((xu ^ xv) >> base) & mask
    return 0


def defect_vector(inst: Instance, c: Constraint) -> BitVector:
    """Lifted label of ``c`` as a vector of length ``R``.

    Coordinate ``i`` corresponds to depth ``label_base(inst) + i``. For a
    constraint with no satisfying pair the per-depth parity of the offset on
    the active depths is returned instead.
    """
    base = label_base(inst)
    R = inst.d - base
    shape = constraint_shape(inst, c)
    if shape.form != "mandatory" or not c.is_binary:
        return BitVector(R, _label_of_shape(shape, base, R))
    ce = edge_offset(inst, c)
    bits = 0
    for t in active_depths(inst, c):
        if t >= base and (ce >> t) & 1:
            bits |= 1 << (t - base)
    return BitVector(R, bits)


def preprocess(inst: Instance) -> tuple[frozenset[int], Instance]:
    """Split off constraints with no satisfying pair; turn singleton pins into anchors.

    The returned instance is list-normalised. A binary constraint whose
    relation forces one endpoint to a single value while leaving the other
    unrestricted is replaced by the equivalent anchor with the same id and
    weight, so every constraint subset keeps its satisfiability.
    """
    mandatory, refined, _ = _preprocess(inst)
    return mandatory, refined


def _preprocess(inst: Instance) -> tuple[frozenset[int], Instance, dict[int, Shape]]:
    inst = normalize_lists(inst)
    mandatory = set()
    out = []
    shapes: dict[int, Shape] = {}
    for c in inst.constraints:
        shape = constraint_shape(inst, c, inst.lists)
        if shape.form == "mandatory":
            mandatory.add(c.id)
        elif c.is_binary and shape.form == "pin" and shape.coset[1] == inst.d:
            c = Constraint(c.id, Kind.ANCHOR, shape.var, b=shape.coset[0], weight=c.weight)
            shape = constraint_shape(inst, c, inst.lists)
        shapes[c.id] = shape
        out.append(c)
    return frozenset(mandatory), replace(inst, constraints=tuple(out)), shapes


def exact_regime(inst: Instance) -> bool:
    """True when lifted balance provably coincides with satisfiability.

    Two classes qualify: every variable has at most one free bit, or every
    constraint is an equality whose offset is zero.
    """
    inst = normalize_lists(inst)
    d = inst.d
    if all(L.ell >= d - 1 for L in inst.lists):
        return True
    return all(c.kind is Kind.EQ and edge_offset(inst, c) == 0 for c in inst.constraints)


POLICIES = ("carry-free", "sound", "isolate")


@dataclass(frozen=True)
class LiftedGraph:
    graph: GainGraph
    anchor_vertex: int
    edge_of_constraint: dict[int, int]
    constraint_of_edge: tuple[int, ...]
    mandatory_deletions: frozenset[int]
    active_depths: dict[int, frozenset[int]]
    ambient_dim: int
    base_depth: int
    exact_regime: bool
    instance: Instance
    policy: str = "carry-free"
    poisoned: int = 0
    shapes: dict[int, Shape] = field(default_factory=dict, repr=False)

    @property
    def R(self) -> int:
        return self.ambient_dim

    def edges_for(self, ids: Iterable[int]) -> list[int]:
        eoc = self.edge_of_constraint
        return [eoc[i] for i in ids if i in eoc]

    def constraints_for(self, edges: Iterable[int]) -> set[int]:
        coe = self.constraint_of_edge
        return {coe[e] for e in edges}


def lift(inst: Instance, policy: str = "carry-free") -> LiftedGraph:
    """Lift an instance to its gain graph.

    ``policy`` decides what happens on bit positions where a constraint's
    XOR is not constant over its satisfying pairs (carries under negation,
    the depth shift of doubling). ``carry-free`` keeps the label of the
    canonical pair there; ``sound`` zeroes such positions in every label,
    which guarantees that satisfiable subsets lift to balanced subgraphs;
    ``isolate`` keeps the canonical labels and gives every such edge one
    extra private coordinate, so ``graph.r`` may exceed ``ambient_dim``.
    """
    if policy not in POLICIES:
        raise ValueError(f"unknown lift policy {policy!r}")
    mandatory, refined, shapes = _preprocess(inst)
    d = refined.d
    base = label_base(refined)
    R = d - base
    star = refined.n
    lists = refined.lists
    edges: list[tuple[int, int]] = []
    labels: list[int] = []
    owners: list[int] = []
    depths: dict[int, frozenset[int]] = {}
    unstable = 0
    full = _low_mask(d)
    for c in refined.constraints:
        if c.id in mandatory:
            continue
        shape = shapes[c.id]
        if shape.form == "couple":
            edges.append((c.u, c.v))
        elif shape.form == "pin":
            edges.append((shape.var, star))
        else:
            edges.append((star, star))
        labels.append(_label_of_shape(shape, base, R))
        owners.append(c.id)
        unstable |= full & ~shape.stable
        if c.is_binary:
            depths[c.id] = active_depths(refined, c)
        else:
            depths[c.id] = frozenset(range(lists[c.u].ell, d))
    poisoned = (unstable >> base) & _low_mask(R)
    if policy == "sound" and poisoned:
        keep = ~poisoned
        labels = [lab & keep for lab in labels]
    width = R
    if policy == "isolate":
        # a private coordinate per carry-dependent edge: no cycle through it looks balanced
        for i, cid in enumerate(owners):
            if (full & ~shapes[cid].stable) >> base & _low_mask(R):
                labels[i] |= 1 << width
                width += 1
    graph = GainGraph(refined.n + 1, edges, labels, width)
    return LiftedGraph(
        graph=graph,
        anchor_vertex=star,
        edge_of_constraint={cid: e for e, cid in enumerate(owners)},
        constraint_of_edge=tuple(owners),
        mandatory_deletions=mandatory,
        active_depths=depths,
        ambient_dim=R,
        base_depth=base,
        exact_regime=exact_regime(refined),
        instance=refined,
        policy=policy,
        poisoned=poisoned,
        shapes=shapes,
    )


def lifted_feasible(lg: LiftedGraph, keep: Iterable[int]) -> bool:
    """Lift-side verdict for the subinstance on ``keep``."""
    keep = list(keep)
    if any(cid in lg.mandatory_deletions for cid in keep):
        return False
    return is_balanced_edges(lg.graph, lg.edges_for(keep))


# ---------------------------------------------------------------- exact check


def _halves(x: int, d: int) -> tuple[int, ...]:
    if x & 1:
        return ()
    h = x >> 1
    return h, h + (1 << (d - 1))


def direct_satisfiable(inst: Instance, keep: Iterable[int] | None = None) -> tuple[bool, dict[int, int] | None]:
    """Exact satisfiability of the constraints in ``keep`` (all by default).

    Each connected component is searched from a root with the smallest
    domain; tree edges propagate values (halving branches into at most two
    preimages) and every other constraint is checked as soon as both of its
    endpoints are assigned.
    """
    d = inst.d
    full = _low_mask(d)
    n = inst.n
    lists = _normalized_lists(inst)
    if keep is None:
        cons = inst.constraints
    else:
        keep = set(keep)
        cons = [c for c in inst.constraints if c.id in keep]

    fixed: list[int | None] = [None] * n
    adj: list[list[Constraint]] = [[] for _ in range(n)]
    loops: list[list[Kind]] = [[] for _ in range(n)]
    for c in cons:
        if c.kind is Kind.ANCHOR:
            if not lists[c.u].contains(c.b):
                return False, None
            if fixed[c.u] is not None and fixed[c.u] != c.b:
                return False, None
            fixed[c.u] = c.b
        elif c.u == c.v:
            if c.kind is not Kind.EQ:
                loops[c.u].append(c.kind)
        else:
            adj[c.u].append(c)
            adj[c.v].append(c)

    def loop_ok(w: int, x: int) -> bool:
        for kind in loops[w]:
            if kind is Kind.NEG and (2 * x) & full:
                return False
            if kind is Kind.DBL and x != (2 * x) & full:
                return False
        return True

    def domain(w: int) -> Iterable[int]:
        if fixed[w] is not None:
            return (fixed[w],)
        return lists[w].values(d)

    def dom_size(w: int) -> int:
        return 1 if fixed[w] is not None else lists[w].size(d)

    value: list[int | None] = [None] * n
    seen = [False] * n
    for s in range(n):
        if seen[s]:
            continue
        comp = [s]
        seen[s] = True
        queue = deque([s])
        while queue:
            x = queue.popleft()
            for c in adj[x]:
                y = c.v if c.u == x else c.u
                if not seen[y]:
                    seen[y] = True
                    comp.append(y)
                    queue.append(y)
        root = min(comp, key=lambda w: (dom_size(w), w))
        order = [root]
        pos = {root: 0}
        via: dict[int, Constraint] = {}
        queue = deque([root])
        while queue:
            x = queue.popleft()
            for c in adj[x]:
                y = c.v if c.u == x else c.u
                if y not in pos:
                    pos[y] = len(order)
                    order.append(y)
                    via[y] = c
                    queue.append(y)

        def candidates(i: int) -> Iterator[int]:
            w = order[i]
            if i == 0:
                raw: Iterable[int] = domain(w)
            else:
                c = via[w]
                if c.u == w:
                    raw = (_apply(c.kind, value[c.v], d),)
                elif c.kind is Kind.DBL:
                    raw = _halves(value[c.u], d)
                else:
                    raw = (_apply(c.kind, value[c.u], d),)
            Lw, fw = lists[w], fixed[w]
            for x in raw:
                if fw is not None and x != fw:
                    continue
                if not Lw.contains(x) or not loop_ok(w, x):
                    continue
                value[w] = x
                ok = True
                for c in adj[w]:
                    y = c.v if c.u == w else c.u
                    if pos[y] < i and not c.holds(value[c.u], value[c.v], d):
                        ok = False
                        break
                if ok:
                    yield x

        stack = [candidates(0)]
        while stack:
            i = len(stack) - 1
            x = next(stack[-1], None)
            if x is None:
                stack.pop()
                continue
            value[order[i]] = x
            if i + 1 == len(order):
                break
            stack.append(candidates(i + 1))
        if not stack:
            return False, None
    assignment = {v: value[v] for v in range(n)}
    return True, assignment


def check_assignment(inst: Instance, assignment: dict[int, int], keep: Iterable[int] | None = None) -> bool:
    ids = None if keep is None else set(keep)
    for v, L in enumerate(inst.lists):
        if not L.contains(assignment[v]):
            return False
    for c in inst.constraints:
        if ids is not None and c.id not in ids:
            continue
        xv = assignment[c.v] if c.v is not None else None
        if not c.holds(assignment[c.u], xv, inst.d):
            return False
    return True


# ---------------------------------------------------------------- fidelity


@dataclass
class FidelityReport:
    samples: int
    agreements: int = 0
    false_feasible: int = 0
    false_infeasible: int = 0
    disagreements: list[frozenset[int]] = field(default_factory=list)

    @property
    def agreement_rate(self) -> float:
        return self.agreements / self.samples if self.samples else 1.0

    def record(self, subset: frozenset[int], truth: bool, lifted: bool) -> None:
        if truth == lifted:
            self.agreements += 1
            return
        self.disagreements.append(subset)
        if lifted:
            self.false_feasible += 1
        else:
            self.false_infeasible += 1


def lift_fidelity_report(inst: Instance, samples: int, seed: int = 0, policy: str = "carry-free") -> FidelityReport:
    """Compare exact satisfiability with the lifted verdict on random subsets."""
    lg = lift(inst, policy)
    rng = np.random.default_rng(seed)
    ids = inst.ids
    report = FidelityReport(samples)
    for _ in range(samples):
        mask = rng.random(len(ids)) < 0.5
        subset = frozenset(cid for cid, keep in zip(ids, mask) if keep)
        truth, _ = direct_satisfiable(inst, subset)
        report.record(subset, truth, lifted_feasible(lg, subset))
    return report
