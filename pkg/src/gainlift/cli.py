"""Command line entry point: ``gainlift <command> ...``.

Exit codes: 0 for YES or success, 1 for NO, 2 for usage and parse errors.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from .cli_io import GenParams, ParseError, format_weight, generate_planted, generate_random, parse_instance, write_instance, write_result
from .covering import STRATEGIES
from .gaingraph import cycle_label_rank
from .lifting import POLICIES, lift
from .oracles import OracleBudget, OracleCapExceeded, brute_force_opt, regime_flags
from .solver import MODES, SolverConfig, component_count, solve, verify_deletion

SEED_ENV = "GAINLIFT_SEED"

EXIT_YES, EXIT_NO, EXIT_USAGE = 0, 1, 2


def default_seed() -> int:
    raw = os.environ.get(SEED_ENV)
    if raw is None:
        return 0
    try:
        return int(raw)
    except ValueError:
        raise SystemExit(f"{SEED_ENV} must be an integer, got {raw!r}") from None


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _load(path: str):
    text = sys.stdin.read() if path == "-" else Path(path).read_text(encoding="utf-8")
    return parse_instance(text)


def _mix(text: str) -> dict[str, float]:
    out = {}
    for part in text.split(","):
        k, _, w = part.partition("=")
        out[k.strip()] = float(w) if w else 1.0
    return out


def cmd_solve(args) -> int:
    inst = _load(args.instance)
    cfg = SolverConfig(
        k=args.budget,
        repetitions=args.reps,
        seed=args.seed,
        strategy=args.strategy,
        weighted=args.weighted,
        mode=args.mode,
        lift_policy=args.policy,
    )
    report = solve(inst, cfg)
    if args.json:
        sys.stdout.write(write_result(report, args.seed, {"mode": args.mode, "budget": args.budget}))
    else:
        print(report.answer_text)
        if report.best is not None:
            ids = " ".join(map(str, report.best.sorted_ids)) or "(none)"
            print(f"deletions: {ids}")
            print(f"cardinality: {report.best.cardinality}  weight: {format_weight(report.best.total_weight)}")
        st = report.stats
        print(f"rho={st.rho} R={st.R} attempts={st.attempts_run} candidates={st.candidates} verifications={st.verifications}")
    return EXIT_YES if report.answer else EXIT_NO


def cmd_lift(args) -> int:
    inst = _load(args.instance)
    lg = lift(inst, args.policy)
    G = lg.graph
    rho = cycle_label_rank(G)
    stats = {
        "rho": rho,
        "R": lg.ambient_dim,
        "mu": G.edge_count - G.vertex_count + component_count(G),
        "exact_regime": lg.exact_regime,
        "mandatory": sorted(lg.mandatory_deletions),
        "vertices": G.vertex_count,
        "edges": G.edge_count,
    }
    if args.json:
        print(json.dumps(stats, sort_keys=True))
    elif args.stats:
        for key in ("rho", "R", "mu", "exact_regime", "mandatory"):
            print(f"{key}: {stats[key]}")
    else:
        print(f"lifted graph: {G.vertex_count} vertices, {G.edge_count} edges, R = {lg.ambient_dim}")
        for e, (u, v) in enumerate(G.edges):
            print(f"  edge {e} (constraint {lg.constraint_of_edge[e]}): {u}-{v} label {G.labels[e]:0{max(G.r, 1)}b}")
    return EXIT_YES


def _read_deletions(path: str) -> list[int]:
    text = Path(path).read_text(encoding="utf-8")
    stripped = text.strip()
    if stripped.startswith("{"):
        return [int(i) for i in json.loads(stripped)["deletions"]]
    return [int(tok) for tok in stripped.replace(",", " ").split()]


def cmd_verify(args) -> int:
    inst = _load(args.instance)
    try:
        ids = _read_deletions(args.deletions)
        ok = verify_deletion(inst, ids)
    except (ValueError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    print("feasible" if ok else "infeasible")
    return EXIT_YES if ok else EXIT_NO


def cmd_gen(args) -> int:
    try:
        p = GenParams(
            n=args.n,
            m=args.m,
            d=args.d,
            plant_k=args.plant_k,
            list_density=args.density,
            kind_mix=_mix(args.mix),
            anchors=args.anchors,
            seed=args.seed,
            max_weight=args.max_weight,
        )
        if args.random:
            text = write_instance(generate_random(p))
        else:
            inst, planted = generate_planted(p)
            text = f"# planted: {' '.join(map(str, planted.sorted_ids))}\n" + write_instance(inst)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    if args.output:
        Path(args.output).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    return EXIT_YES


def cmd_oracle(args) -> int:
    inst = _load(args.instance)
    try:
        best = brute_force_opt(inst, args.budget, args.weighted, OracleBudget(max_k=max(args.budget, 3)))
    except OracleCapExceeded as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    if args.json:
        rec = {
            "answer": "YES" if best else "NO",
            "deletions": list(best.sorted_ids) if best else [],
            "cardinality": best.cardinality if best else None,
            "weight": format_weight(best.total_weight) if best else None,
        }
        print(json.dumps(rec, sort_keys=True))
    elif best is None:
        print("NO")
    else:
        print("YES")
        print(f"deletions: {' '.join(map(str, best.sorted_ids)) or '(none)'}")
    return EXIT_YES if best else EXIT_NO


def cmd_stats(args) -> int:
    inst = _load(args.instance)
    info = {
        "variables": inst.n,
        "constraints": inst.m,
        "d": inst.d,
        "kinds": dict(sorted(inst.kind_counts().items())),
        "levels": sorted(L.ell for L in inst.lists),
        "regimes": regime_flags(inst),
    }
    if args.json:
        print(json.dumps(info, sort_keys=True))
    else:
        for key, val in info.items():
            print(f"{key}: {val}")
    return EXIT_YES


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="gainlift", description="Constraint deletion for coset-list equations modulo 2^d.")
    sub = ap.add_subparsers(dest="command", required=True, parser_class=_Parser)
    seed = default_seed()

    s = sub.add_parser("solve", help="find a small deletion set")
    s.add_argument("instance")
    s.add_argument("--budget", "-k", type=int, required=True)
    s.add_argument("--reps", type=int, default=200)
    s.add_argument("--seed", type=int, default=seed)
    s.add_argument("--strategy", choices=STRATEGIES, default="cycle-sampling")
    s.add_argument("--weighted", action="store_true")
    s.add_argument("--mode", choices=MODES, default="covering")
    s.add_argument("--policy", choices=POLICIES, default="isolate")
    s.add_argument("--json", action="store_true")
    s.set_defaults(func=cmd_solve)

    s = sub.add_parser("lift", help="show the lifted gain graph")
    s.add_argument("instance")
    s.add_argument("--stats", action="store_true")
    s.add_argument("--policy", choices=POLICIES, default="carry-free")
    s.add_argument("--json", action="store_true")
    s.set_defaults(func=cmd_lift)

    s = sub.add_parser("verify", help="check a deletion set")
    s.add_argument("instance")
    s.add_argument("--deletions", required=True, help="file of ids, or a solve --json record")
    s.set_defaults(func=cmd_verify)

    s = sub.add_parser("gen", help="generate an instance")
    s.add_argument("--n", type=int, default=8)
    s.add_argument("--m", type=int, default=12)
    s.add_argument("--d", type=int, default=2)
    s.add_argument("--plant-k", type=int, default=1)
    s.add_argument("--density", type=float, default=0.3)
    s.add_argument("--mix", default="eq=1,neg=1,dbl=1")
    s.add_argument("--anchors", type=int, default=0)
    s.add_argument("--max-weight", type=int, default=1)
    s.add_argument("--seed", type=int, default=seed)
    s.add_argument("--random", action="store_true", help="unstructured instead of planted")
    s.add_argument("--output", "-o")
    s.set_defaults(func=cmd_gen)

    s = sub.add_parser("oracle", help="brute-force optimum for small instances")
    s.add_argument("instance")
    s.add_argument("--budget", "-k", type=int, required=True)
    s.add_argument("--weighted", action="store_true")
    s.add_argument("--json", action="store_true")
    s.set_defaults(func=cmd_oracle)

    s = sub.add_parser("stats", help="summarise an instance")
    s.add_argument("instance")
    s.add_argument("--json", action="store_true")
    s.set_defaults(func=cmd_stats)
    return ap


def main(argv: list[str] | None = None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    try:
        return args.func(args)
    except ParseError as exc:
        print(f"parse error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
