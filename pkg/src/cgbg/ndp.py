"""Exact factor-graph maximization by variable elimination.

Variables are removed one at a time: all factors touching the variable are
summed into a joined table, the variable's axis is max-reduced into a new
factor over the remaining neighbors, and the per-step argmax is kept for the
backward pass that reads off an optimal assignment.  The induced width of an
order is the largest degree of any factor created this way.
"""

from __future__ import annotations

import time
from dataclasses import dataclass
from math import prod

import numpy as np

from .errors import DeadlineExceeded, ResourceLimitError
from .factorgraph import FactorGraph

HEURISTICS = ("given", "sequential", "min-degree", "min-fill")

DEFAULT_CELL_CAP = 10**8


@dataclass(frozen=True)
class EliminationOrder:
    order: tuple[int, ...]
    heuristic: str = "given"

    def __post_init__(self):
        object.__setattr__(self, "order", tuple(int(v) for v in self.order))
        if sorted(self.order) != list(range(len(self.order))):
            raise ValueError("order must be a permutation of all variable indices")


@dataclass
class NdpResult:
    assignment: tuple[int, ...]
    value: float
    induced_width: int
    peak_new_factor_cells: int
    heuristic: str


def _adjacency(fg: FactorGraph) -> list[set[int]]:
    neighbors: list[set[int]] = [set() for _ in fg.variables]
    for factor in fg.factors:
        for v in factor.variables:
            neighbors[v].update(factor.variables)
    for v, nb in enumerate(neighbors):
        nb.discard(v)
    return neighbors


def compute_order(fg: FactorGraph, heuristic: str = "min-degree") -> EliminationOrder:
    """Build an elimination order; ties always go to the lowest variable index.

    sequential  -- variable index order
    min-degree  -- fewest distinct neighbors in the dynamically updated graph
    min-fill    -- fewest new neighbor pairs introduced by the elimination
    """
    num_vars = len(fg.variables)
    if heuristic == "sequential":
        return EliminationOrder(tuple(range(num_vars)), "sequential")
    if heuristic not in ("min-degree", "min-fill"):
        raise ValueError(f"unknown heuristic {heuristic!r}")
    neighbors = _adjacency(fg)
    remaining = set(range(num_vars))
    order = []
    while remaining:
        if heuristic == "min-degree":
            pick = min(remaining, key=lambda v: (len(neighbors[v]), v))
        else:
            def fill_cost(v: int) -> int:
                nb = sorted(neighbors[v])
                return sum(
                    1
                    for i, a in enumerate(nb)
                    for b in nb[i + 1 :]
                    if b not in neighbors[a]
                )

            pick = min(remaining, key=lambda v: (fill_cost(v), v))
        order.append(pick)
        remaining.discard(pick)
        nb = neighbors[pick]
        for a in nb:
            neighbors[a].update(nb)
            neighbors[a].discard(a)
            neighbors[a].discard(pick)
        for a in range(num_vars):
            neighbors[a].discard(pick)
        neighbors[pick] = set()
    return EliminationOrder(tuple(order), heuristic)


def predicted_width_lower_bound(fg: FactorGraph) -> int:
    """Maximum factor degree; every order's induced width is at least this
    minus one."""
    return max(len(f.variables) for f in fg.factors)


def ndp_solve(
    fg: FactorGraph,
    order: EliminationOrder | None = None,
    cell_cap: int = DEFAULT_CELL_CAP,
    deadline: float | None = None,
) -> NdpResult:
    """Maximize the sum of factor tables exactly.

    Ties in the backward pass go to the lowest value index at each step.
    Raises ResourceLimitError before materializing any new factor larger
    than ``cell_cap`` cells.
    """
    if order is None:
        order = compute_order(fg, "min-degree")
    if len(order.order) != len(fg.variables):
        raise ValueError("order length must equal the variable count")
    domains = fg.domains()
    # Active factors as (sorted variable tuple, table with axes in that order).
    active: dict[int, tuple[tuple[int, ...], np.ndarray]] = {}
    var_factors: list[set[int]] = [set() for _ in fg.variables]
    for fid, factor in enumerate(fg.factors):
        vs = factor.variables
        perm = sorted(range(len(vs)), key=lambda j: vs[j])
        svars = tuple(vs[j] for j in perm)
        active[fid] = (svars, np.transpose(factor.table, perm))
        for v in svars:
            var_factors[v].add(fid)
    next_id = len(fg.factors)
    offset = 0.0
    induced_width = 0
    peak_cells = 0
    trace = []  # (variable, remaining scope, argmax table)
    for step, v in enumerate(order.order):
        if deadline is not None and time.monotonic() > deadline:
            raise DeadlineExceeded("per-solve time limit exceeded")
        fids = sorted(var_factors[v])
        union: set[int] = set()
        for fid in fids:
            union.update(active[fid][0])
        union.discard(v)
        remaining = tuple(sorted(union))
        cells = prod(int(domains[u]) for u in remaining) if remaining else 1
        if cells > cell_cap:
            raise ResourceLimitError(
                f"eliminating variable {v} at step {step} would create a factor of"
                f" degree {len(remaining)} with {cells} cells (cap {cell_cap})"
            )
        scope = tuple(sorted(union | {v}))
        joined = np.zeros(tuple(int(domains[u]) for u in scope))
        for fid in fids:
            fvars, table = active[fid]
            index = tuple(slice(None) if u in fvars else np.newaxis for u in scope)
            joined += table[index]
            del active[fid]
            for u in fvars:
                var_factors[u].discard(fid)
        axis = scope.index(v)
        new_table = joined.max(axis=axis)
        argmax_table = joined.argmax(axis=axis)
        induced_width = max(induced_width, len(remaining))
        peak_cells = max(peak_cells, int(new_table.size))
        trace.append((v, remaining, argmax_table))
        if remaining:
            active[next_id] = (remaining, new_table)
            for u in remaining:
                var_factors[u].add(next_id)
            next_id += 1
        else:
            offset += float(new_table)
    assignment = [0] * len(fg.variables)
    for v, remaining, argmax_table in reversed(trace):
        key = tuple(assignment[u] for u in remaining)
        assignment[v] = int(argmax_table[key])
    return NdpResult(
        assignment=tuple(assignment),
        value=offset,
        induced_width=induced_width,
        peak_new_factor_cells=peak_cells,
        heuristic=order.heuristic,
    )
