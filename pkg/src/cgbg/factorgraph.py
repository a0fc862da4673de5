"""Factor-graph formulations of a game and their structural statistics.

Three encodings of the same maximization problem are supported:

* ``ai``  -- one variable per agent whose domain enumerates that agent's
  individual policies; one factor per payoff component holding expected
  payoffs for every combination of scoped individual policies.
* ``ti``  -- one variable per (agent, type) with the agent's actions as
  domain; one factor per joint type holding that type's contribution to the
  value for every joint action.
* ``ati`` -- one variable per (agent, type); one factor per (component,
  local joint type) holding probability-weighted local payoffs.

For every encoding, the sum of factor tables at a complete assignment equals
the value of the decoded joint policy, so the maximum-sum assignment is the
optimal policy.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import prod

import numpy as np

from .errors import ResourceLimitError
from .games import CGBG, JointPolicy, _component_policy_table
from .indexing import digit_table, local_unindex, strides

DEFAULT_CELL_CAP = 10**7

VARIANTS = ("ai", "ti", "ati")


@dataclass
class Variable:
    name: str
    domain: int
    tag: tuple


@dataclass
class Factor:
    name: str
    variables: tuple[int, ...]
    table: np.ndarray
    tag: tuple

    def __post_init__(self):
        self.variables = tuple(int(v) for v in self.variables)
        self.table = np.asarray(self.table, dtype=np.float64)


class FactorGraph:
    """Bipartite graph of finite-domain variables and real-valued factors."""

    def __init__(self, variables, factors, variant=None, action_counts=None, type_counts=None):
        self.variables: list[Variable] = list(variables)
        self.factors: list[Factor] = list(factors)
        self.variant = variant
        self.action_counts = tuple(action_counts) if action_counts is not None else None
        self.type_counts = tuple(type_counts) if type_counts is not None else None
        self._eval_arrays = None
        self._validate()

    def _validate(self):
        num_vars = len(self.variables)
        touched = np.zeros(num_vars, dtype=bool)
        for factor in self.factors:
            if not factor.variables:
                raise ValueError(f"factor {factor.name} has no incident variables")
            if len(set(factor.variables)) != len(factor.variables):
                raise ValueError(f"factor {factor.name} repeats a variable")
            if any(not 0 <= v < num_vars for v in factor.variables):
                raise ValueError(f"factor {factor.name} references an unknown variable")
            shape = tuple(self.variables[v].domain for v in factor.variables)
            if factor.table.shape == (prod(shape),):
                factor.table = factor.table.reshape(shape)
            if factor.table.shape != shape:
                raise ValueError(
                    f"factor {factor.name} table shape {factor.table.shape} != {shape}"
                )
            touched[list(factor.variables)] = True
        if not np.all(touched):
            orphan = int(np.flatnonzero(~touched)[0])
            raise ValueError(f"variable {self.variables[orphan].name} appears in no factor")

    def domains(self) -> np.ndarray:
        return np.array([v.domain for v in self.variables], dtype=np.int64)

    def _evaluation_arrays(self):
        if self._eval_arrays is None:
            fvars, fstrides, fptr = [], [], [0]
            flat, tabptr = [], [0]
            for factor in self.factors:
                st = strides(tuple(self.variables[v].domain for v in factor.variables))
                fvars.extend(factor.variables)
                fstrides.extend(st)
                fptr.append(len(fvars))
                flat.append(factor.table.reshape(-1))
                tabptr.append(tabptr[-1] + factor.table.size)
            self._eval_arrays = (
                np.array(fvars, dtype=np.int64),
                np.array(fstrides, dtype=np.int64),
                np.array(fptr, dtype=np.int64),
                np.concatenate(flat) if flat else np.zeros(0),
                np.array(tabptr[:-1], dtype=np.int64),
            )
        return self._eval_arrays

    def evaluate(self, assignment) -> float:
        """Sum of all factor tables at a complete assignment."""
        assignment = np.asarray(assignment, dtype=np.int64)
        if assignment.shape != (len(self.variables),):
            raise ValueError("assignment length must equal the variable count")
        fvars, fstrides, fptr, flat, tabptr = self._evaluation_arrays()
        cells = np.add.reduceat(fstrides * assignment[fvars], fptr[:-1])
        return float(flat[tabptr + cells].sum())

    def dump_edges(self) -> str:
        """Debug edge list: one ``factor<TAB>variable`` line per edge."""
        lines = []
        for factor in self.factors:
            for v in factor.variables:
                lines.append(f"{factor.name}\t{self.variables[v].name}")
        return "\n".join(lines) + "\n"


@dataclass(frozen=True)
class FgStats:
    num_factors: int
    num_variables: int
    max_factor_degree: int
    max_variable_degree: int
    max_variable_domain: int
    total_edges: int

    def csv_line(self) -> str:
        return ",".join(
            str(x)
            for x in (
                self.num_factors,
                self.num_variables,
                self.max_factor_degree,
                self.max_variable_degree,
                self.max_variable_domain,
                self.total_edges,
            )
        )


def fg_stats(fg: FactorGraph) -> FgStats:
    degrees = np.zeros(len(fg.variables), dtype=np.int64)
    for factor in fg.factors:
        degrees[list(factor.variables)] += 1
    return FgStats(
        num_factors=len(fg.factors),
        num_variables=len(fg.variables),
        max_factor_degree=max(len(f.variables) for f in fg.factors),
        max_variable_degree=int(degrees.max()),
        max_variable_domain=max(v.domain for v in fg.variables),
        total_edges=int(sum(len(f.variables) for f in fg.factors)),
    )


def _type_variable_index(type_counts, agent, type_id) -> int:
    return sum(type_counts[:agent]) + type_id


def build_factor_graph(game: CGBG, variant: str, cell_cap: int = DEFAULT_CELL_CAP) -> FactorGraph:
    """Encode a game as a factor graph in one of the three formulations."""
    variant = variant.lower()
    if variant == "ai":
        return _build_ai(game, cell_cap)
    if variant == "ti":
        return _build_ti(game, cell_cap)
    if variant == "ati":
        return _build_ati(game, cell_cap)
    raise ValueError(f"unknown variant {variant!r}, expected one of {VARIANTS}")


def _build_ai(game: CGBG, cell_cap: int) -> FactorGraph:
    counts = game.policy_counts()
    for i, c in enumerate(counts):
        if c > cell_cap:
            raise ResourceLimitError(
                f"agent {i} has {c} individual policies"
                f" ({game.action_counts[i]}^{game.type_counts[i]}), cap {cell_cap}"
            )
    total = 0
    for e, comp in enumerate(game.components):
        cells = prod(counts[i] for i in comp.scope)
        total += cells
        if cells > cell_cap:
            raise ResourceLimitError(
                f"component {e} policy table needs {cells} cells, cap {cell_cap}"
            )
    if total > cell_cap:
        raise ResourceLimitError(f"AI graph needs {total} table cells, cap {cell_cap}")
    variables = [
        Variable(name=f"policy{i}", domain=counts[i], tag=("agent", i))
        for i in range(game.num_agents)
    ]
    factors = [
        Factor(
            name=f"u{e}",
            variables=comp.scope,
            table=_component_policy_table(game, comp),
            tag=("component", e),
        )
        for e, comp in enumerate(game.components)
    ]
    return FactorGraph(
        variables,
        factors,
        variant="ai",
        action_counts=game.action_counts,
        type_counts=game.type_counts,
    )


def _type_variables(game: CGBG) -> list[Variable]:
    return [
        Variable(name=f"a{i}t{t}", domain=game.action_counts[i], tag=("type", i, t))
        for i in range(game.num_agents)
        for t in range(game.type_counts[i])
    ]


def _build_ti(game: CGBG, cell_cap: int) -> FactorGraph:
    num_joint_types = prod(game.type_counts)
    num_joint_actions = prod(game.action_counts)
    if num_joint_types > cell_cap:
        raise ResourceLimitError(
            f"TI graph needs {num_joint_types} joint-type factors, cap {cell_cap}"
        )
    if num_joint_actions > cell_cap:
        raise ResourceLimitError(
            f"TI factor tables need {num_joint_actions} cells each, cap {cell_cap}"
        )
    if num_joint_types * num_joint_actions > cell_cap:
        raise ResourceLimitError(
            f"TI graph needs {num_joint_types * num_joint_actions} table cells,"
            f" cap {cell_cap}"
        )
    variables = _type_variables(game)
    n = game.num_agents
    # Each component's contribution is spread uniformly over the joint types
    # extending its local joint type, so the factor tables sum to the exact
    # policy value even when local distributions are drawn independently.
    comp_info = []
    for comp in game.components:
        ext = prod(game.type_counts[i] for i in range(n) if i not in comp.scope)
        tstrides = strides(game.local_type_counts(comp.scope))
        shape = tuple(
            game.action_counts[i] if i in comp.scope else 1 for i in range(n)
        )
        comp_info.append((comp, 1.0 / ext, tstrides, shape))
    factors = []
    for jt in range(num_joint_types):
        jt_digits = local_unindex(game.type_counts, jt)
        incident = tuple(
            _type_variable_index(game.type_counts, i, jt_digits[i]) for i in range(n)
        )
        table = np.zeros(game.action_counts)
        for comp, weight, tstrides, shape in comp_info:
            t_local = sum(jt_digits[i] * s for i, s in zip(comp.scope, tstrides))
            w = weight * comp.type_probs[t_local]
            if w != 0.0:
                table += w * comp.payoffs[t_local].reshape(shape)
        factors.append(
            Factor(name=f"c{jt}", variables=incident, table=table, tag=("joint_type", jt))
        )
    return FactorGraph(
        variables,
        factors,
        variant="ti",
        action_counts=game.action_counts,
        type_counts=game.type_counts,
    )


def _build_ati(game: CGBG, cell_cap: int) -> FactorGraph:
    total = sum(comp.type_probs.size * comp.payoffs.shape[1] for comp in game.components)
    if total > cell_cap:
        raise ResourceLimitError(f"ATI graph needs {total} table cells, cap {cell_cap}")
    variables = _type_variables(game)
    factors = []
    for e, comp in enumerate(game.components):
        local_types = digit_table(game.local_type_counts(comp.scope))
        local_actions = game.local_action_counts(comp.scope)
        for t in range(local_types.shape[0]):
            incident = tuple(
                _type_variable_index(game.type_counts, agent, int(local_types[t, j]))
                for j, agent in enumerate(comp.scope)
            )
            table = comp.type_probs[t] * comp.payoffs[t].reshape(local_actions)
            factors.append(
                Factor(
                    name=f"u{e}c{t}",
                    variables=incident,
                    table=table,
                    tag=("contribution", e, t),
                )
            )
    return FactorGraph(
        variables,
        factors,
        variant="ati",
        action_counts=game.action_counts,
        type_counts=game.type_counts,
    )


def assignment_to_policy(fg: FactorGraph, assignment) -> JointPolicy:
    """Decode a complete variable assignment into a joint policy."""
    if fg.variant not in VARIANTS or fg.action_counts is None or fg.type_counts is None:
        raise ValueError("factor graph does not carry game provenance")
    assignment = list(assignment)
    if len(assignment) != len(fg.variables):
        raise ValueError("assignment length must equal the variable count")
    for value, var in zip(assignment, fg.variables):
        if not 0 <= value < var.domain:
            raise ValueError(f"value {value} out of range for variable {var.name}")
    if fg.variant == "ai":
        rows = []
        for i, value in enumerate(assignment):
            rows.append(
                local_unindex((fg.action_counts[i],) * fg.type_counts[i], int(value))
            )
        return JointPolicy(tuple(rows))
    rows = []
    pos = 0
    for i, t_count in enumerate(fg.type_counts):
        rows.append(tuple(int(v) for v in assignment[pos : pos + t_count]))
        pos += t_count
    return JointPolicy(tuple(rows))


def policy_to_assignment(fg: FactorGraph, policy: JointPolicy) -> np.ndarray:
    """Inverse of :func:`assignment_to_policy`."""
    if fg.variant == "ai":
        out = []
        for i, row in enumerate(policy.assignments):
            idx = 0
            for a in row:
                idx = idx * fg.action_counts[i] + a
            out.append(idx)
        return np.array(out, dtype=np.int64)
    return np.array(policy.flat(), dtype=np.int64)
