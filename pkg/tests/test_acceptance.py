"""Acceptance checks. Each test prints one PASS/FAIL line with its measurements.

Run ``pytest tests/test_acceptance.py -v`` to see the lines inline, or
``python3 tests/test_acceptance.py`` for just the summary.
"""

from __future__ import annotations

import random
import sys
import time
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from corpus import edge_subsets, random_gain_graph, random_instance, selection  # noqa: E402

from gainlift.cli_io import GenParams, generate_planted, generate_random  # noqa: E402
from gainlift.covering import CoveringConfig, CoveringContractError, amplified_cover, boundary, capture_check  # noqa: E402
from gainlift.gaingraph import (  # noqa: E402
    SubgraphSelection,
    compress_labels,
    cycle_basis_matrix,
    fundamental_cycle_labels,
    is_balanced,
    label_matrix,
    spanning_forest,
    stacked_rank_identity,
)
from gainlift.gf2 import BitMatrix, column_basis, left_inverse, rank  # noqa: E402
from gainlift.lifting import lift  # noqa: E402
from gainlift.oracles import (  # noqa: E402
    OracleBudget,
    brute_force_balanced,
    brute_force_opt,
    count_potentials,
    lift_equivalence_suite,
)
from gainlift.solver import SolverConfig, solve, verify_deletion  # noqa: E402

_emit_hook = None


def emit(ok: bool, label: str, detail: str) -> None:
    line = f"[{'PASS' if ok else 'FAIL'}] {label}: {detail}"
    if _emit_hook is not None:
        _emit_hook(line)
    else:
        print(line)


@pytest.fixture(autouse=True)
def _show_lines(capsys):
    global _emit_hook

    def hook(line):
        with capsys.disabled():
            print("\n" + line)

    _emit_hook = hook
    yield
    _emit_hook = None


# ---------------------------------------------------------------- shared corpora


def graph_corpus():
    rng = random.Random(2024)
    return [random_gain_graph(rng, max_n=8, max_m=12, max_r=3) for _ in range(500)]


_GRAPHS = None


def graphs():
    global _GRAPHS
    if _GRAPHS is None:
        _GRAPHS = graph_corpus()
    return _GRAPHS


def planted_corpus():
    rng = random.Random(0)
    out = []
    for i in range(100):
        n = rng.randint(3, 10)
        m = rng.randint(n, 16)
        d = rng.randint(1, 2)
        plant_k = rng.randint(0, 2)
        anchors = rng.randint(0, 1)
        inst, planted = generate_planted(GenParams(n, m, d, plant_k, 0.3, anchors=anchors, seed=i))
        out.append((inst, planted, plant_k))
    return out


_PLANTED = None


def planted():
    global _PLANTED
    if _PLANTED is None:
        _PLANTED = planted_corpus()
    return _PLANTED


PLANTED_BUDGET = OracleBudget(max_constraints=16, max_vertices=10, max_depth=2, max_k=2)


# ---------------------------------------------------------------- 1-4: gain graphs


def test_criterion_1_balance_oracle_equivalence():
    t0 = time.perf_counter()
    checked = disagreements = 0
    for G in graphs():
        for edges in edge_subsets(G.edge_count, 10):
            H = selection(G, edges)
            checked += 1
            if is_balanced(G, H) != brute_force_balanced(G, H):
                disagreements += 1
    elapsed = time.perf_counter() - t0
    ok = disagreements == 0 and elapsed < 60
    emit(ok, "criterion 1 balance oracle equivalence",
         f"{checked} selections over 500 graphs, {disagreements} disagreements, {elapsed:.1f}s (limit 60s)")
    assert ok


def test_criterion_2_rank_identity():
    violations = 0
    for G in graphs():
        rho, stacked, inc = stacked_rank_identity(G)
        if rho != stacked - inc or rho != rank(label_matrix(G) @ cycle_basis_matrix(G)):
            violations += 1
    emit(violations == 0, "criterion 2 rank identity", f"500 graphs, {violations} violations")
    assert violations == 0


def test_criterion_3_compression_exactness():
    violations = selections = 0
    for G in graphs():
        Gc, _ = compress_labels(G)
        rho, _, _ = stacked_rank_identity(G)
        fcm = fundamental_cycle_labels(G, spanning_forest(G))
        _, Q = column_basis(fcm.matrix)
        if Gc.r != rho or left_inverse(Q) @ Q != BitMatrix.identity(Q.cols):
            violations += 1
        for edges in edge_subsets(G.edge_count, 10):
            H = selection(G, edges)
            selections += 1
            if is_balanced(G, H) != is_balanced(Gc, H):
                violations += 1
    emit(violations == 0, "criterion 3 compression exactness",
         f"500 graphs, {selections} selections, {violations} violations")
    assert violations == 0


def test_criterion_4_potential_space_dimension():
    rng = random.Random(44)
    done = violations = 0
    while done < 200:
        G = random_gain_graph(rng, max_n=8, max_m=10, max_r=3)
        edges = [e for e in range(G.edge_count) if rng.random() < 0.6]
        extra = [v for v in range(G.vertex_count) if rng.random() < 0.3]
        H = SubgraphSelection.from_edges(G, edges, extra)
        if not H.vertex_set or not is_balanced(G, H):
            continue
        c = spanning_forest_components(G, H)
        if G.r * c > 12:
            continue
        done += 1
        if count_potentials(G, H) != 2 ** (G.r * c):
            violations += 1
    emit(violations == 0, "criterion 4 potential-space dimension", f"200 balanced selections, {violations} violations")
    assert violations == 0


def spanning_forest_components(G, H) -> int:
    parent = {v: v for v in H.vertex_set}

    def find(x):
        while parent[x] != x:
            x = parent[x]
        return x

    for e in H.edge_set:
        a, b = (find(w) for w in G.edges[e])
        parent[a] = b
    return sum(1 for v in parent if find(v) == v)


# ---------------------------------------------------------------- 5: lift fidelity


def regime_instance(rng: random.Random, regime: str):
    n, m = rng.randint(1, 5), rng.randint(1, 8)
    if regime == "a":
        d = rng.randint(1, 2)
        return random_instance(rng, d, n, m, range(d + 1))
    d = rng.randint(1, 4)
    if regime == "b":
        return random_instance(rng, d, n, m, [d - 1, d])
    if regime == "c":
        return random_instance(rng, d, n, m, range(d + 1), kinds=("eq",), anchor_rate=0.0, shared_offset=True)
    return random_instance(rng, d, n, m, range(d + 1))


def sweep_regime(regime: str, seed: int):
    rng = random.Random(seed)
    bad_instances = bad_subsets = subsets = 0
    example = None
    for _ in range(100):
        inst = regime_instance(rng, regime)
        rep = lift_equivalence_suite(inst, exhaustive=True)
        subsets += rep.subsets
        if rep.disagreements:
            bad_instances += 1
            bad_subsets += len(rep.disagreements)
            if example is None:
                example = (inst, rep.disagreements[0])
    return bad_instances, bad_subsets, subsets, example


@pytest.mark.parametrize(
    "regime, title",
    [
        ("a", "d <= 2, all constraint kinds"),
        ("b", "one free bit per variable, d <= 4"),
        ("c", "Eq-only, zero offsets, d <= 4"),
    ],
)
def test_criterion_5_lift_cycle_exactness(regime, title):
    bad_instances, bad_subsets, subsets, example = sweep_regime(regime, 500 + ord(regime))
    ok = bad_subsets == 0
    detail = f"({title}) 100 instances, {subsets} subsets, {bad_subsets} disagreements in {bad_instances} instances"
    if example is not None:
        inst, keep = example
        detail += f"; first: d={inst.d} constraints {[(c.kind.value, c.u, c.v, c.b) for c in inst.constraints if c.id in keep]}"
    emit(ok, f"criterion 5({regime}) lift cycle-exactness", detail)
    assert ok


def test_criterion_5_fidelity_report_outside_regimes():
    bad_instances, bad_subsets, subsets, _ = sweep_regime("any", 77)
    rate = 1 - bad_subsets / subsets
    emit(True, "criterion 5 fidelity report (informational, d <= 4 unrestricted)",
         f"agreement {rate:.4f} over {subsets} subsets; {bad_instances}/100 instances with a disagreement")


# ---------------------------------------------------------------- 6: covering


def test_criterion_6_covering_contracts():
    rng = random.Random(66)
    violations = 0
    for i in range(1000):
        G = random_gain_graph(rng, max_n=8, max_m=12, max_r=3)
        try:
            res = next(amplified_cover(G, CoveringConfig(rng.randint(0, 3), seed=i), 1))
        except CoveringContractError:
            violations += 1
            continue
        inside = SubgraphSelection(res.S, frozenset(e for e in range(G.edge_count)
                                                    if e not in res.F and set(G.edges[e]) <= res.S))
        if not boundary(G, res.S) <= res.F or not brute_force_balanced(G, inside):
            violations += 1
    emit(violations == 0, "criterion 6 covering contracts", f"1000 (graph, seed) pairs, {violations} violations")
    assert violations == 0


# ---------------------------------------------------------------- 7-9: solver


def test_criterion_7_exhaustive_optimality():
    rng = random.Random(77)
    t0 = time.perf_counter()
    mismatches = 0
    for i in range(300):
        d = rng.randint(1, 3)
        weighted = i % 2 == 1
        inst = random_instance(rng, d, rng.randint(1, 6), rng.randint(1, 10), range(d + 1), weights=weighted)
        k = rng.randint(0, 3)
        rep = solve(inst, SolverConfig(k, mode="exhaustive", weighted=weighted))
        opt = brute_force_opt(inst, k, weighted)
        if (opt is None) != (not rep.answer):
            mismatches += 1
        elif opt is not None and (opt.cardinality != rep.best.cardinality or opt.total_weight != rep.best.total_weight):
            if not weighted and opt.cardinality == rep.best.cardinality:
                continue
            mismatches += 1
    elapsed = time.perf_counter() - t0
    ok = mismatches == 0 and elapsed < 300
    emit(ok, "criterion 7 exhaustive-mode optimality", f"300 instances, {mismatches} mismatches, {elapsed:.1f}s (limit 300s)")
    assert ok


def test_criterion_8_covering_optimality():
    matches = unsound = yes = 0
    for i, (inst, _, plant_k) in enumerate(planted()):
        opt = brute_force_opt(inst, plant_k, budget=PLANTED_BUDGET)
        rep = solve(inst, SolverConfig(plant_k, repetitions=200, seed=i))
        if rep.answer:
            yes += 1
            if not verify_deletion(inst, rep.best):
                unsound += 1
        got = rep.best.cardinality if rep.best else None
        matches += got == opt.cardinality
    ok = matches >= 95 and unsound == 0
    emit(ok, "criterion 8 covering-mode optimality",
         f"{matches}/100 match the oracle cardinality (need 95); {yes - unsound}/{yes} YES answers verify")
    assert ok


def capture_rates(policy: str):
    """Per-instance capture rate of the solver's cover stream for the optimal keep-set."""
    rates, worst_ratio, unbalanced = [], 0.0, 0
    for i, (inst, _, plant_k) in enumerate(planted()):
        opt = brute_force_opt(inst, plant_k, budget=PLANTED_BUDGET)
        cfg = SolverConfig(plant_k, repetitions=200, seed=i)
        lg = lift(inst, policy)
        Gc, _ = compress_labels(lg.graph)
        k = max(opt.cardinality - len(lg.mandatory_deletions), 0)
        gone = set(lg.edges_for(opt.constraint_ids))
        H = SubgraphSelection.from_edges(Gc, [e for e in range(Gc.edge_count) if e not in gone])
        unbalanced += not is_balanced(Gc, H)
        hits = 0
        for res in amplified_cover(Gc, CoveringConfig(k, cfg.strategy, cfg.seed), cfg.repetitions):
            hits += capture_check(Gc, res, H, k, Gc.r)
            touching = sum(1 for e in res.F if set(Gc.edges[e]) & H.vertex_set)
            if k > 0 and Gc.r > 0:
                worst_ratio = max(worst_ratio, touching / (Gc.r * k))
        rates.append(hits / cfg.repetitions)
    return rates, worst_ratio, unbalanced


def test_criterion_9_capture_rate():
    # the capture guarantee presumes the optimal keep-set is balanced in the lifted graph;
    # only the sound lift promises that, so the assertion is made there
    rates, worst_ratio, unbalanced = capture_rates("sound")
    positive = sum(r > 0 for r in rates)
    ok = positive >= 80
    iso_rates, _, iso_unbalanced = capture_rates("isolate")
    emit(ok, "criterion 9 capture rate",
         f"sound lift: {positive}/100 instances with a positive per-attempt rate (need 80), "
         f"mean rate {sum(rates) / len(rates):.3f}, max |F touching H| / (r*k) = {worst_ratio:.2f}; "
         f"solver-default isolate lift (informational): {sum(r > 0 for r in iso_rates)}/100, "
         f"keep-set unbalanced after lifting in {iso_unbalanced}/100")
    assert ok


# ---------------------------------------------------------------- 10: performance


def test_criterion_10_performance():
    rng = random.Random(10)
    M = BitMatrix(1024, 1024, [rng.getrandbits(1024) for _ in range(1024)])
    t0 = time.perf_counter()
    rank(M)
    t_rank = time.perf_counter() - t0
    inst = generate_random(GenParams(n=20000, m=100_000, d=16, list_density=0.3, anchors=5000, seed=10))
    t0 = time.perf_counter()
    lg = lift(inst)
    compress_labels(lg.graph)
    t_lift = time.perf_counter() - t0
    ok = t_rank < 1.0 and t_lift < 5.0
    emit(ok, "criterion 10 performance floor",
         f"rank 1024x1024 {t_rank:.3f}s (limit 1s); lift+compress m=100000 d=16 {t_lift:.2f}s (limit 5s)")
    assert ok


if __name__ == "__main__":
    raise SystemExit(pytest.main([__file__, "-q", "-p", "no:cacheprovider"]))
