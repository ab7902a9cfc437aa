"""Text instance format, JSON result records and instance generators.

The format is line oriented::

    # comment
    mod2 3
    var x 5 2        # x in 5 + 4 Z/8, written as (a, ell)
    var y 0 0
    con neg x y      # constraint 0
    anchor y 6 2.5   # constraint 1, weight 2.5

Constraint ids are positions among the ``con``/``anchor`` lines.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any

import numpy as np

from .lifting import BINARY_KINDS, Constraint, DyadicList, Instance, Kind
from .solver import DeletionSet, SolveReport


class ParseError(ValueError):
    def __init__(self, lineno: int, message: str):
        super().__init__(f"line {lineno}: {message}")
        self.lineno = lineno
        self.message = message


def _int(tok: str, lineno: int, what: str) -> int:
    try:
        return int(tok)
    except ValueError:
        raise ParseError(lineno, f"{what} must be an integer, got {tok!r}") from None


def _weight(tok: str, lineno: int) -> Fraction:
    try:
        w = Fraction(tok)
    except (ValueError, ZeroDivisionError):
        raise ParseError(lineno, f"bad weight {tok!r}") from None
    if w <= 0:
        raise ParseError(lineno, f"weight must be positive, got {tok}")
    return w


def format_weight(w: Fraction) -> str:
    """Decimal when the weight has a finite decimal expansion, else ``p/q``."""
    w = Fraction(w)
    if w.denominator == 1:
        return str(w.numerator)
    q = w.denominator
    twos = fives = 0
    while q % 2 == 0:
        q //= 2
        twos += 1
    while q % 5 == 0:
        q //= 5
        fives += 1
    if q != 1:
        return f"{w.numerator}/{w.denominator}"
    places = max(twos, fives)
    scaled = w * 10**places
    digits = str(abs(scaled.numerator)).rjust(places + 1, "0")
    sign = "-" if w < 0 else ""
    return f"{sign}{digits[:-places]}.{digits[-places:]}"


def parse_instance(text: str) -> Instance:
    d: int | None = None
    names: list[str] = []
    index: dict[str, int] = {}
    lists: list[DyadicList] = []
    cons: list[Constraint] = []

    def var_ref(tok: str, lineno: int) -> int:
        if tok not in index:
            raise ParseError(lineno, f"unknown variable {tok!r}")
        return index[tok]

    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        head, *args = line.split()
        if d is None and head != "mod2":
            raise ParseError(lineno, "missing header 'mod2 d'")
        if head == "mod2":
            if d is not None:
                raise ParseError(lineno, "duplicate header")
            if len(args) != 1:
                raise ParseError(lineno, "expected 'mod2 d'")
            d = _int(args[0], lineno, "d")
            if d < 1:
                raise ParseError(lineno, "d must be at least 1")
        elif head == "var":
            if len(args) != 3:
                raise ParseError(lineno, "expected 'var name a ell'")
            name = args[0]
            if name in index:
                raise ParseError(lineno, f"duplicate variable {name!r}")
            a = _int(args[1], lineno, "a")
            ell = _int(args[2], lineno, "ell")
            if not 0 <= a < 1 << d:
                raise ParseError(lineno, f"residue {a} out of range for d = {d}")
            if not 0 <= ell <= d:
                raise ParseError(lineno, f"level {ell} out of range for d = {d}")
            index[name] = len(names)
            names.append(name)
            lists.append(DyadicList(a, ell))
        elif head == "con":
            if len(args) not in (3, 4):
                raise ParseError(lineno, "expected 'con eq|neg|dbl u v [weight]'")
            try:
                kind = Kind(args[0])
            except ValueError:
                kind = None
            if kind not in BINARY_KINDS:
                raise ParseError(lineno, f"unknown constraint kind {args[0]!r}")
            u, v = var_ref(args[1], lineno), var_ref(args[2], lineno)
            w = _weight(args[3], lineno) if len(args) == 4 else Fraction(1)
            cons.append(Constraint(len(cons), kind, u, v, weight=w))
        elif head == "anchor":
            if len(args) not in (2, 3):
                raise ParseError(lineno, "expected 'anchor v b [weight]'")
            u = var_ref(args[0], lineno)
            b = _int(args[1], lineno, "b")
            if not 0 <= b < 1 << d:
                raise ParseError(lineno, f"residue {b} out of range for d = {d}")
            w = _weight(args[2], lineno) if len(args) == 3 else Fraction(1)
            cons.append(Constraint(len(cons), Kind.ANCHOR, u, b=b, weight=w))
        else:
            raise ParseError(lineno, f"unknown directive {head!r}")
    if d is None:
        raise ParseError(0, "missing header 'mod2 d'")
    return Instance(d, lists, cons, names)


def write_instance(inst: Instance) -> str:
    out = [f"mod2 {inst.d}"]
    for v, L in enumerate(inst.lists):
        out.append(f"var {inst.name(v)} {L.a} {L.ell}")
    for c in inst.constraints:
        w = "" if c.weight == 1 else " " + format_weight(c.weight)
        if c.kind is Kind.ANCHOR:
            out.append(f"anchor {inst.name(c.u)} {c.b}{w}")
        else:
            out.append(f"con {c.kind.value} {inst.name(c.u)} {inst.name(c.v)}{w}")
    return "\n".join(out) + "\n"


def same_instance(a: Instance, b: Instance) -> bool:
    """Structural equality up to variable names."""
    return a.d == b.d and a.lists == b.lists and a.constraints == b.constraints


# ---------------------------------------------------------------- results


def result_record(report: SolveReport, seed: int | None = None, extra: dict[str, Any] | None = None) -> dict[str, Any]:
    st = report.stats
    best = report.best
    rec: dict[str, Any] = {
        "answer": report.answer_text,
        "deletions": list(best.sorted_ids) if best else [],
        "cardinality": best.cardinality if best else None,
        "weight": format_weight(best.total_weight) if best else None,
        "rho": st.rho,
        "R": st.R,
        "mu": st.mu,
        "exact_regime": st.exact_regime,
        "mandatory": list(st.mandatory),
        "F_sizes": list(st.F_sizes),
        "candidate_families": [list(f) for f in _distinct(st.candidate_families)],
        "candidates": st.candidates,
        "verifications": st.verifications,
        "enumeration_bound": st.enumeration_bound,
        "truncated_attempts": st.truncated_attempts,
        "attempts": st.attempts_run,
        "seed": seed,
        "timings": {"wall_time": st.wall_time},
    }
    if extra:
        rec.update(extra)
    return rec


def _distinct(families):
    seen = set()
    out = []
    for f in families:
        if f not in seen:
            seen.add(f)
            out.append(f)
    return out


def write_result(report: SolveReport, seed: int | None = None, extra: dict[str, Any] | None = None) -> str:
    return json.dumps(result_record(report, seed, extra), sort_keys=True) + "\n"


def strip_timings(text: str) -> dict[str, Any]:
    rec = json.loads(text)
    rec.pop("timings", None)
    return rec


# ---------------------------------------------------------------- generators


@dataclass(frozen=True)
class GenParams:
    n: int
    m: int
    d: int
    plant_k: int = 0
    list_density: float = 0.3
    kind_mix: dict[str, float] = field(default_factory=lambda: {"eq": 1.0, "neg": 1.0, "dbl": 1.0})
    anchors: int = 0
    seed: int = 0
    max_weight: int = 1

    def __post_init__(self) -> None:
        if self.n < 1 or self.d < 1 or self.m < 0:
            raise ValueError("need n >= 1, d >= 1, m >= 0")
        if not 0 <= self.plant_k <= self.m:
            raise ValueError("plant_k must lie in [0, m]")
        if self.anchors < 0 or self.anchors + self.plant_k > self.m:
            raise ValueError("anchors + plant_k exceeds m")
        if not 0.0 <= self.list_density <= 1.0:
            raise ValueError("list_density must lie in [0, 1]")
        if self.max_weight < 1:
            raise ValueError("max_weight must be at least 1")
        if not self.kind_mix or any(Kind(k) not in BINARY_KINDS or w < 0 for k, w in self.kind_mix.items()):
            raise ValueError("kind_mix takes nonnegative weights for eq, neg, dbl")
        if sum(self.kind_mix.values()) <= 0:
            raise ValueError("kind_mix has no positive weight")


def _kind_sampler(p: GenParams, rng: np.random.Generator):
    kinds = [Kind(k) for k in p.kind_mix]
    probs = np.array([p.kind_mix[k.value] for k in kinds], dtype=float)
    probs /= probs.sum()
    return lambda: kinds[int(rng.choice(len(kinds), p=probs))]


def _random_level(p: GenParams, rng: np.random.Generator) -> int:
    return int(rng.integers(1, p.d + 1)) if rng.random() < p.list_density else 0


def _weight_of(p: GenParams, rng: np.random.Generator) -> Fraction:
    return Fraction(int(rng.integers(1, p.max_weight + 1)))


def _orient_consistent(kind: Kind, a: int, b: int, x: list[int], d: int, rng) -> tuple[int, int] | None:
    """An orientation ``(u, v)`` of ``{a, b}`` on which ``kind`` holds under ``x``."""
    c = Constraint(0, kind, 0, 0)
    options = [(u, v) for u, v in ((a, b), (b, a)) if c.holds(x[u], x[v], d)]
    if not options:
        return None
    return options[int(rng.integers(len(options)))]


def generate_planted(p: GenParams) -> tuple[Instance, DeletionSet]:
    """Instance with a known feasible deletion set of size ``plant_k``.

    A ground truth is grown along a random tree (each tree edge fixes the
    child's value from its parent through the chosen relation), lists are
    drawn around it, extra constraints are kept only if the truth satisfies
    them, and the planted constraints are ones the truth violates.
    """
    rng = np.random.default_rng(p.seed)
    d, n = p.d, p.n
    mod = 1 << d
    full = mod - 1
    pick_kind = _kind_sampler(p, rng)

    core_binary = p.m - p.plant_k - p.anchors
    x = [0] * n
    order = [int(v) for v in rng.permutation(n)]
    x[order[0]] = int(rng.integers(mod))
    built: list[tuple[Kind, int, int]] = []
    for i in range(1, n):
        child, parent = order[i], order[int(rng.integers(i))]
        kind = pick_kind()
        if kind is Kind.EQ:
            x[child] = x[parent]
            u, v = child, parent
        elif kind is Kind.NEG:
            x[child] = -x[parent] & full
            u, v = child, parent
        elif x[parent] % 2 == 0 and rng.random() < 0.5:
            x[child] = (x[parent] >> 1) + int(rng.integers(2)) * (mod >> 1)
            u, v = parent, child
        else:
            x[child] = 2 * x[parent] & full
            u, v = child, parent
        if len(built) < core_binary:
            built.append((kind, u, v))

    lists = []
    for v in range(n):
        ell = _random_level(p, rng)
        lists.append(DyadicList(x[v] % (1 << ell), ell))

    def in_isolation(kind: Kind, u: int, v: int) -> bool:
        c = Constraint(0, kind, u, v)
        return any(c.holds(xu, xv, d) for xu in lists[u].values(d) for xv in lists[v].values(d))

    tries = 0
    while len(built) < core_binary:
        tries += 1
        if tries > 200 * (core_binary + 1):
            raise ValueError("could not place enough consistent constraints")
        kind = pick_kind()
        a, b = (int(t) for t in rng.integers(n, size=2))
        if a == b and n > 1:
            continue
        uv = _orient_consistent(kind, a, b, x, d, rng)
        if uv is not None:
            built.append((kind, *uv))

    rows: list[tuple[Kind, int, int | None, int | None, bool]] = [(k, u, v, None, False) for k, u, v in built]
    for _ in range(p.anchors):
        v = int(rng.integers(n))
        rows.append((Kind.ANCHOR, v, None, x[v], False))

    planted = 0
    tries = 0
    while planted < p.plant_k:
        tries += 1
        if tries > 500 * p.plant_k:
            raise ValueError("could not plant enough violated constraints")
        if tries > 250 * p.plant_k:
            # the truth may satisfy every binary relation (all zero, say); fall back to anchors
            v = int(rng.integers(n))
            L = lists[v]
            others = [b for b in L.values(d) if b != x[v]]
            if others:
                rows.append((Kind.ANCHOR, v, None, others[int(rng.integers(len(others)))], True))
                planted += 1
            continue
        kind = pick_kind()
        a, b = (int(t) for t in rng.integers(n, size=2))
        u, v = (a, b) if rng.random() < 0.5 else (b, a)
        c = Constraint(0, kind, u, v)
        if c.holds(x[u], x[v], d):
            continue
        if not in_isolation(kind, u, v) and tries < 125 * p.plant_k:
            continue
        rows.append((kind, u, v, None, True))
        planted += 1

    perm = [int(i) for i in rng.permutation(len(rows))]
    cons = []
    planted_ids = []
    for new_id, old in enumerate(perm):
        kind, u, v, b, is_plant = rows[old]
        cons.append(Constraint(new_id, kind, u, v, b, _weight_of(p, rng)))
        if is_plant:
            planted_ids.append(new_id)
    inst = Instance(d, lists, cons, [f"x{i}" for i in range(n)])
    return inst, DeletionSet.of(planted_ids, {c.id: c.weight for c in cons})


def generate_random(p: GenParams) -> Instance:
    """Unstructured instance: random lists and uniformly placed constraints.

    ``plant_k`` is ignored; ``anchors`` of the ``m`` constraints are anchors
    with a random target inside the anchored variable's list.
    """
    rng = np.random.default_rng(p.seed)
    d, n = p.d, p.n
    pick_kind = _kind_sampler(p, rng)
    lists = []
    for _ in range(n):
        ell = _random_level(p, rng)
        lists.append(DyadicList(int(rng.integers(1 << ell)), ell))
    cons = []
    for i in range(p.m - p.anchors):
        u, v = (int(t) for t in rng.integers(n, size=2))
        cons.append(Constraint(i, pick_kind(), u, v, weight=_weight_of(p, rng)))
    for i in range(p.m - p.anchors, p.m):
        u = int(rng.integers(n))
        L = lists[u]
        b = (L.a + (int(rng.integers(1 << (d - L.ell))) << L.ell)) % (1 << d)
        cons.append(Constraint(i, Kind.ANCHOR, u, b=b, weight=_weight_of(p, rng)))
    return Instance(d, lists, cons, [f"x{i}" for i in range(n)])
