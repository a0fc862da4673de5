"""Command-line interface: generate games, solve them, run benchmark sweeps."""

from __future__ import annotations

import argparse
import csv
import json
import sys
import time
from pathlib import Path

from .bench import (
    ExperimentConfig,
    ResultRow,
    emit,
    run_experiment,
    run_method,
    summarize,
    _summary_csv,
)
from .errors import ConfigurationError, ResourceLimitError
from .factorgraph import assignment_to_policy, build_factor_graph
from .games import evaluate_policy, load_game, save_game
from .generators import GffConfig, RandomGameConfig, generate_gff, generate_random_cgbg
from .maxplus import MaxPlusParams, max_plus
from .ndp import compute_order, ndp_solve


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="cgbg", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen-random", help="generate random connected games")
    p.add_argument("--agents", type=int, required=True)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--actions", type=int, required=True)
    p.add_argument("--types", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--count", type=int, default=1)
    p.add_argument("--out", required=True)

    p = sub.add_parser("gen-gff", help="generate firefighting games")
    p.add_argument("--agents", type=int, required=True)
    p.add_argument("--na", type=int, required=True, help="actions (houses) per agent")
    p.add_argument("--no", type=int, required=True, help="observed houses per agent")
    p.add_argument("--k", type=int, required=True, help="max agents per house")
    p.add_argument("--density", type=float, default=1.2)
    p.add_argument("--firelevels", type=int, default=3)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--count", type=int, default=1)
    p.add_argument("--out", required=True)

    p = sub.add_parser("solve", help="solve one game file")
    p.add_argument("--game", required=True)
    p.add_argument(
        "--method",
        required=True,
        help="BruteForce, NDP, MP, AM, CE-normal or CE-fast (NDP/MP use --fg)",
    )
    p.add_argument("--fg", choices=["ai", "ti", "ati"], default="ati")
    p.add_argument("--order", choices=["sequential", "min-degree", "min-fill"],
                   default="min-degree", help="elimination heuristic for NDP")
    p.add_argument("--restarts", type=int, default=10)
    p.add_argument("--max-iter", type=int, default=25)
    p.add_argument("--damping", type=float, default=0.2)
    p.add_argument(
        "--schedule",
        choices=["sequential-random", "sequential-fixed", "parallel"],
        default="sequential-random",
    )
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--cell-cap", type=int, default=10**7)

    p = sub.add_parser("bench", help="run an experiment config")
    p.add_argument("--config", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--no-timing", action="store_true", help="zero timing columns")

    p = sub.add_parser("stats", help="summarize a results directory")
    p.add_argument("--in", dest="in_dir", required=True)

    args = parser.parse_args(argv)
    try:
        return _dispatch(args)
    except ConfigurationError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 2
    except ResourceLimitError as exc:
        print(f"resource limit: {exc}", file=sys.stderr)
        return 3


def _dispatch(args) -> int:
    if args.command == "gen-random":
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        for g in range(args.count):
            seed = args.seed + g
            game = generate_random_cgbg(
                RandomGameConfig(args.agents, args.k, args.actions, args.types, seed)
            )
            save_game(game, out / f"random_{seed}.json")
        return 0
    if args.command == "gen-gff":
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        for g in range(args.count):
            seed = args.seed + g
            game, layout = generate_gff(
                GffConfig(
                    num_agents=args.agents,
                    actions_per_agent=args.na,
                    observed_houses=args.no,
                    max_agents_per_house=args.k,
                    house_density=args.density,
                    fire_levels=args.firelevels,
                    seed=seed,
                )
            )
            save_game(game, out / f"gff_{seed}.json")
            layout.save(out / f"gff_{seed}_layout.json")
        return 0
    if args.command == "solve":
        return _solve(args)
    if args.command == "bench":
        cfg = ExperimentConfig.from_json(args.config)
        if args.no_timing:
            cfg.no_timing = True
        rows = run_experiment(cfg)
        emit(rows, summarize(rows) if rows else None, args.out)
        print(f"wrote {len(rows)} rows to {args.out}/results.csv")
        return 0
    if args.command == "stats":
        rows = _read_results(Path(args.in_dir) / "results.csv")
        summary = summarize(rows)
        text = _summary_csv(summary)
        (Path(args.in_dir) / "summary.csv").write_text(text)
        print(text, end="")
        return 0
    raise AssertionError(f"unhandled command {args.command}")


def _solve(args) -> int:
    game = load_game(args.game)
    method = args.method
    if method in ("NDP", "MP"):
        method = f"{method}-{args.fg.upper()}"
    start = time.perf_counter()
    if method.startswith("NDP-"):
        fg = build_factor_graph(game, args.fg, cell_cap=args.cell_cap)
        res = ndp_solve(fg, compute_order(fg, args.order), cell_cap=args.cell_cap)
        policy = assignment_to_policy(fg, res.assignment)
        record = {
            "method": method,
            "value": evaluate_policy(game, policy),
            "policy": [list(r) for r in policy.assignments],
            "induced_width": res.induced_width,
            "order_heuristic": res.heuristic,
        }
    elif method.startswith("MP-"):
        fg = build_factor_graph(game, args.fg, cell_cap=args.cell_cap)

        def ev(assignment):
            return evaluate_policy(game, assignment_to_policy(fg, assignment))

        params = MaxPlusParams(
            restarts=args.restarts,
            max_iterations=args.max_iter,
            damping=args.damping,
            schedule=args.schedule,
            seed=args.seed,
        )
        res = max_plus(fg, params, evaluate=ev)
        policy = assignment_to_policy(fg, res.assignment)
        record = {
            "method": method,
            "value": res.exact_value,
            "policy": [list(r) for r in policy.assignments],
            "converged": res.converged,
            "iterations": sum(res.iterations_used),
            "messages": res.messages_sent,
        }
    else:
        result = run_method(method, game, args.seed, args.cell_cap, deadline=None)
        record = {
            "method": method,
            "value": result.value,
            "policy": [list(r) for r in result.policy.assignments],
        }
        if result.iterations is not None:
            record["iterations"] = result.iterations
    record["runtime_ms"] = (time.perf_counter() - start) * 1e3
    print(json.dumps(record))
    return 0


def _read_results(path: Path) -> list[ResultRow]:
    rows = []
    with open(path, newline="") as handle:
        for record in csv.DictReader(handle):
            rows.append(
                ResultRow(
                    game_id=int(record["game_id"]),
                    seed=int(record["seed"]),
                    n=int(record["n"]),
                    k=int(record["k"]),
                    num_actions=int(record["num_actions"]),
                    num_types=int(record["num_types"]),
                    method=record["method"],
                    fg_variant=record["fg_variant"],
                    value=float(record["value"]) if record["value"] else None,
                    normalized_value=(
                        float(record["normalized_value"]) if record["normalized_value"] else None
                    ),
                    value_delta=(
                        float(record["value_delta"]) if record["value_delta"] else None
                    ),
                    runtime_ms=float(record["runtime_ms"]),
                    converged=(
                        None if record["converged"] == "" else record["converged"] == "true"
                    ),
                    iterations=int(record["iterations"]) if record["iterations"] else None,
                    induced_width=(
                        int(record["induced_width"]) if record["induced_width"] else None
                    ),
                    status=record["status"],
                )
            )
    if not rows:
        raise ConfigurationError(f"no result rows found in {path}")
    return rows


if __name__ == "__main__":
    sys.exit(main())
