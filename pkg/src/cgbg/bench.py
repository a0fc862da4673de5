"""Seeded experiment runner: generate game batches, race solvers, emit CSV.

Every method sees the same game for a given (grid point, game index): the
game seed is master_seed + game_index, and each solver derives its own
generator from that same seed.  Rows for methods that hit the time limit or
a table-cell cap carry a status and no value.  Values are compared against a
reference method (default MP-ATI) both as a ratio (when safe) and as a
difference.
"""

from __future__ import annotations

import csv
import io
import json
import time
from dataclasses import dataclass, field
from itertools import product
from math import sqrt
from pathlib import Path

from .baselines import CE_FAST, CE_NORMAL, CeParams, alternating_maximization, cross_entropy
from .errors import ConfigurationError, DeadlineExceeded, ResourceLimitError
from .factorgraph import assignment_to_policy, build_factor_graph
from .games import CGBG, SolveResult, evaluate_policy, load_game, solve_brute_force
from .generators import GffConfig, RandomGameConfig, generate_gff, generate_random_cgbg
from .maxplus import MaxPlusParams, max_plus
from .ndp import compute_order, ndp_solve

METHODS = (
    "BruteForce",
    "NDP-AI",
    "NDP-TI",
    "NDP-ATI",
    "MP-AI",
    "MP-TI",
    "MP-ATI",
    "AM",
    "CE-normal",
    "CE-fast",
)

RESULT_COLUMNS = (
    "game_id",
    "seed",
    "n",
    "k",
    "num_actions",
    "num_types",
    "method",
    "fg_variant",
    "value",
    "normalized_value",
    "value_delta",
    "runtime_ms",
    "converged",
    "iterations",
    "induced_width",
    "status",
)

RANDOM_AXES = ("agents", "k", "actions", "types")
GFF_AXES = ("agents", "na", "no", "k", "density", "firelevels")


@dataclass
class ExperimentConfig:
    generator: str  # "random" | "gff" | path to a game file or directory
    grid: dict = field(default_factory=dict)  # axis name -> list of values
    games_per_point: int = 1000
    methods: tuple[str, ...] = ("MP-ATI",)
    time_limit_s: float = 5.0
    cell_cap: int = 10**7
    master_seed: int = 0
    reference_method: str = "MP-ATI"
    no_timing: bool = False

    def __post_init__(self):
        self.methods = tuple(self.methods)
        if not self.methods:
            raise ConfigurationError("methods list must be nonempty")
        for m in self.methods:
            if m not in METHODS:
                raise ConfigurationError(f"unknown method {m!r}")
        if self.games_per_point < 1:
            raise ConfigurationError("games_per_point must be at least 1")
        if self.generator in ("random", "gff"):
            axes = RANDOM_AXES if self.generator == "random" else GFF_AXES
            unknown = set(self.grid) - set(axes)
            if unknown:
                raise ConfigurationError(f"unknown grid axes {sorted(unknown)}")
            missing = [a for a in axes if a not in self.grid and a != "density"]
            if missing:
                raise ConfigurationError(f"grid must list axes {missing}")
        elif not Path(self.generator).exists():
            raise ConfigurationError(
                f"generator must be 'random', 'gff', or an existing path,"
                f" got {self.generator!r}"
            )

    @classmethod
    def from_json(cls, path) -> "ExperimentConfig":
        data = json.loads(Path(path).read_text())
        try:
            return cls(**data)
        except TypeError as exc:
            raise ConfigurationError(str(exc)) from exc


@dataclass
class ResultRow:
    game_id: int
    seed: int
    n: int
    k: int
    num_actions: int
    num_types: int
    method: str
    fg_variant: str
    value: float | None
    normalized_value: float | None
    value_delta: float | None
    runtime_ms: float
    converged: bool | None
    iterations: int | None
    induced_width: int | None
    status: str

    def csv_values(self) -> list[str]:
        def fmt(x):
            if x is None:
                return ""
            if isinstance(x, bool):
                return "true" if x else "false"
            if isinstance(x, float):
                return repr(x)
            return str(x)

        return [fmt(getattr(self, c)) for c in RESULT_COLUMNS]


@dataclass
class StatsSummary:
    groups: list[dict]  # one entry per (grid point, method)


def _variant_of(method: str) -> str:
    if "-" in method and method.split("-", 1)[0] in ("NDP", "MP"):
        return method.split("-", 1)[1].lower()
    return ""


def run_method(
    method: str,
    game: CGBG,
    seed: int,
    cell_cap: int,
    deadline: float | None,
) -> SolveResult:
    """Dispatch one solver on one game and normalize its result record."""
    if method == "BruteForce":
        return solve_brute_force(game, enumeration_cap=cell_cap, deadline=deadline)
    if method.startswith("NDP-"):
        fg = build_factor_graph(game, _variant_of(method), cell_cap=cell_cap)
        order = compute_order(fg, "min-degree")
        res = ndp_solve(fg, order, cell_cap=cell_cap, deadline=deadline)
        policy = assignment_to_policy(fg, res.assignment)
        return SolveResult(
            policy=policy,
            value=evaluate_policy(game, policy),
            method=method,
            induced_width=res.induced_width,
            extra={"peak_cells": res.peak_new_factor_cells, "heuristic": res.heuristic},
        )
    if method.startswith("MP-"):
        fg = build_factor_graph(game, _variant_of(method), cell_cap=cell_cap)

        def ev(assignment):
            return evaluate_policy(game, assignment_to_policy(fg, assignment))

        res = max_plus(fg, MaxPlusParams(seed=seed), evaluate=ev, deadline=deadline)
        return SolveResult(
            policy=assignment_to_policy(fg, res.assignment),
            value=res.exact_value,
            method=method,
            iterations=sum(res.iterations_used),
            converged=res.converged,
            extra={"messages": res.messages_sent},
        )
    if method == "AM":
        return alternating_maximization(game, restarts=10, seed=seed, deadline=deadline)
    if method in ("CE-normal", "CE-fast"):
        base = CE_NORMAL if method == "CE-normal" else CE_FAST
        params = CeParams(**{**base.__dict__, "seed": seed})
        return cross_entropy(game, params, deadline=deadline)
    raise ConfigurationError(f"unknown method {method!r}")


def _grid_points(cfg: ExperimentConfig) -> list[dict]:
    if cfg.generator not in ("random", "gff"):
        return [{}]
    axes = RANDOM_AXES if cfg.generator == "random" else GFF_AXES
    names = [a for a in axes if a in cfg.grid]
    points = []
    for combo in product(*[cfg.grid[a] for a in names]):
        points.append(dict(zip(names, combo)))
    return points


def _games_for_point(cfg: ExperimentConfig, point: dict):
    """Yield (game_id, seed, game, shape) tuples for one grid point."""
    if cfg.generator == "random":
        for g in range(cfg.games_per_point):
            seed = cfg.master_seed + g
            game = generate_random_cgbg(
                RandomGameConfig(
                    num_agents=point["agents"],
                    scope_size=point["k"],
                    actions_per_agent=point["actions"],
                    types_per_agent=point["types"],
                    seed=seed,
                )
            )
            shape = (point["agents"], point["k"], point["actions"], point["types"])
            yield g, seed, game, shape
    elif cfg.generator == "gff":
        for g in range(cfg.games_per_point):
            seed = cfg.master_seed + g
            game, _ = generate_gff(
                GffConfig(
                    num_agents=point["agents"],
                    actions_per_agent=point["na"],
                    observed_houses=point["no"],
                    max_agents_per_house=point["k"],
                    house_density=point.get("density", 1.2),
                    fire_levels=point["firelevels"],
                    seed=seed,
                )
            )
            shape = (point["agents"], point["k"], point["na"], 2 ** point["no"])
            yield g, seed, game, shape
    else:
        path = Path(cfg.generator)
        files = sorted(path.glob("*.json")) if path.is_dir() else [path]
        for g, file in enumerate(files):
            game = load_game(file)
            shape = (
                game.num_agents,
                max(len(c.scope) for c in game.components),
                max(game.action_counts),
                max(game.type_counts),
            )
            yield g, cfg.master_seed + g, game, shape


def run_experiment(cfg: ExperimentConfig) -> list[ResultRow]:
    rows: list[ResultRow] = []
    for point in _grid_points(cfg):
        for game_id, seed, game, shape in _games_for_point(cfg, point):
            n, k, num_actions, num_types = shape
            per_game: dict[str, ResultRow] = {}
            for method in cfg.methods:
                start = time.perf_counter()
                deadline = (
                    time.monotonic() + cfg.time_limit_s if cfg.time_limit_s > 0 else None
                )
                value = None
                status = "ok"
                converged = None
                iterations = None
                induced_width = None
                try:
                    res = run_method(method, game, seed, cfg.cell_cap, deadline)
                    value = res.value
                    converged = res.converged
                    iterations = res.iterations
                    induced_width = res.induced_width
                except DeadlineExceeded:
                    status = "timeout"
                except ResourceLimitError:
                    status = "cap-exceeded"
                runtime_ms = 0.0 if cfg.no_timing else (time.perf_counter() - start) * 1e3
                per_game[method] = ResultRow(
                    game_id=game_id,
                    seed=seed,
                    n=n,
                    k=k,
                    num_actions=num_actions,
                    num_types=num_types,
                    method=method,
                    fg_variant=_variant_of(method),
                    value=value,
                    normalized_value=None,
                    value_delta=None,
                    runtime_ms=runtime_ms,
                    converged=converged,
                    iterations=iterations,
                    induced_width=induced_width,
                    status=status,
                )
            reference = per_game.get(cfg.reference_method)
            if reference is not None and reference.status == "ok":
                for row in per_game.values():
                    if row.status == "ok":
                        row.value_delta = row.value - reference.value
                        if reference.value > 0 and row.value >= 0:
                            row.normalized_value = row.value / reference.value
            rows.extend(per_game[m] for m in cfg.methods)
    return rows


def summarize(rows: list[ResultRow]) -> StatsSummary:
    """Group rows by (shape, method); mean and sigma/sqrt(N) over successes.

    A group with any failed row is flagged incomplete, mirroring how points
    beyond the resource limits are dropped from comparisons.
    """
    if not rows:
        raise ValueError("no rows to summarize")
    groups: dict[tuple, list[ResultRow]] = {}
    for row in rows:
        key = (row.n, row.k, row.num_actions, row.num_types, row.method)
        groups.setdefault(key, []).append(row)
    out = []
    for key in sorted(groups, key=lambda k: tuple(str(x) for x in k)):
        bucket = groups[key]
        ok = [r for r in bucket if r.status == "ok"]
        values = [r.value for r in ok]
        entry = {
            "n": key[0],
            "k": key[1],
            "num_actions": key[2],
            "num_types": key[3],
            "method": key[4],
            "games": len(bucket),
            "successes": len(ok),
            "success_rate": len(ok) / len(bucket),
            "incomplete": len(ok) != len(bucket),
            "mean_value": _mean(values),
            "sem_value": _sem(values),
            "mean_normalized_value": _mean(
                [r.normalized_value for r in ok if r.normalized_value is not None]
            ),
            "mean_value_delta": _mean(
                [r.value_delta for r in ok if r.value_delta is not None]
            ),
            "sem_value_delta": _sem(
                [r.value_delta for r in ok if r.value_delta is not None]
            ),
            "mean_runtime_ms": _mean([r.runtime_ms for r in ok]),
        }
        out.append(entry)
    return StatsSummary(groups=out)


def _mean(xs):
    return sum(xs) / len(xs) if xs else None


def _sem(xs):
    """Standard error of the mean with the sample (n-1) standard deviation."""
    if not xs:
        return None
    if len(xs) == 1:
        return 0.0
    m = sum(xs) / len(xs)
    var = sum((x - m) ** 2 for x in xs) / (len(xs) - 1)
    return sqrt(var) / sqrt(len(xs))


SUMMARY_COLUMNS = (
    "n",
    "k",
    "num_actions",
    "num_types",
    "method",
    "games",
    "successes",
    "success_rate",
    "incomplete",
    "mean_value",
    "sem_value",
    "mean_normalized_value",
    "mean_value_delta",
    "sem_value_delta",
    "mean_runtime_ms",
)


def _csv_text(header, rows_of_values) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for values in rows_of_values:
        writer.writerow(values)
    return buf.getvalue()


def _summary_csv(summary: StatsSummary) -> str:
    def fmt(x):
        if x is None:
            return ""
        if isinstance(x, bool):
            return "true" if x else "false"
        if isinstance(x, float):
            return repr(x)
        return str(x)

    return _csv_text(
        SUMMARY_COLUMNS,
        ([fmt(g[c]) for c in SUMMARY_COLUMNS] for g in summary.groups),
    )


def emit(rows: list[ResultRow], summary: StatsSummary | None, out_dir) -> None:
    """Write results.csv, summary.csv, and per-axis plotdata files."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    (out / "results.csv").write_text(
        _csv_text(RESULT_COLUMNS, (r.csv_values() for r in rows))
    )
    if summary is None and rows:
        summary = summarize(rows)
    if summary is not None:
        (out / "summary.csv").write_text(_summary_csv(summary))
        plotdata = out / "plotdata"
        plotdata.mkdir(exist_ok=True)
        for axis, column in (
            ("agents", "n"),
            ("k", "k"),
            ("actions", "num_actions"),
            ("types", "num_types"),
        ):
            lines = [
                [
                    str(g[column]),
                    g["method"],
                    repr(g["mean_value"]) if g["mean_value"] is not None else "",
                    repr(g["sem_value"]) if g["sem_value"] is not None else "",
                    repr(g["mean_value_delta"]) if g["mean_value_delta"] is not None else "",
                    repr(g["mean_runtime_ms"]) if g["mean_runtime_ms"] is not None else "",
                    repr(g["success_rate"]),
                ]
                for g in summary.groups
            ]
            (plotdata / f"{axis}.csv").write_text(
                _csv_text(
                    (axis, "method", "mean_value", "sem_value", "mean_value_delta",
                     "mean_runtime_ms", "success_rate"),
                    lines,
                )
            )
