"""Core model: games with private types, local payoff structure, and exact solving.

A game couples per-agent action/type spaces with a set of local payoff
components, each scoped to a subset of agents and carrying its own
distribution over the scoped agents' joint types.  The value of a joint
policy is the sum over components of the expected local payoff.
"""

from __future__ import annotations

import json
import time
from dataclasses import dataclass, field
from math import prod
from pathlib import Path
from typing import Sequence

import numpy as np

from .errors import DeadlineExceeded, ResourceLimitError
from .indexing import digit_table, local_unindex, strides

PROB_TOL = 1e-9
VALUE_TOL = 1e-9

# Chunk size (in table cells) above which brute force scans the joint policy
# space in slices instead of materializing one array.
_BRUTE_CHUNK_CELLS = 1 << 22


@dataclass
class Component:
    """One local payoff function together with its local type distribution.

    scope        ascending agent indices participating in this component
    type_probs   flat array over the scoped agents' joint types, row-major
    payoffs      (num local joint types, num local joint actions) array
    """

    scope: tuple[int, ...]
    type_probs: np.ndarray
    payoffs: np.ndarray

    def __post_init__(self):
        self.scope = tuple(int(i) for i in self.scope)
        self.type_probs = np.asarray(self.type_probs, dtype=np.float64)
        self.payoffs = np.asarray(self.payoffs, dtype=np.float64)


@dataclass
class CGBG:
    """A collaborative game with graphical payoff structure and private types."""

    num_agents: int
    action_counts: tuple[int, ...]
    type_counts: tuple[int, ...]
    components: tuple[Component, ...]

    def __post_init__(self):
        self.action_counts = tuple(int(a) for a in self.action_counts)
        self.type_counts = tuple(int(t) for t in self.type_counts)
        self.components = tuple(self.components)
        self._validate()

    def _validate(self):
        n = self.num_agents
        if n <= 0:
            raise ValueError("num_agents must be positive")
        if len(self.action_counts) != n or len(self.type_counts) != n:
            raise ValueError("action_counts/type_counts must have one entry per agent")
        if any(a <= 0 for a in self.action_counts) or any(t <= 0 for t in self.type_counts):
            raise ValueError("action and type counts must be positive")
        if not self.components:
            raise ValueError("a game needs at least one component")
        covered = set()
        for comp in self.components:
            scope = comp.scope
            if not scope:
                raise ValueError("component scope must be nonempty")
            if any(not 0 <= i < n for i in scope):
                raise ValueError(f"scope {scope} contains an invalid agent index")
            if any(a >= b for a, b in zip(scope, scope[1:])):
                raise ValueError(f"scope {scope} must be strictly ascending")
            covered.update(scope)
            num_types = prod(self.type_counts[i] for i in scope)
            num_actions = prod(self.action_counts[i] for i in scope)
            if comp.type_probs.shape != (num_types,):
                raise ValueError(
                    f"type_probs for scope {scope} must have {num_types} entries,"
                    f" got {comp.type_probs.shape}"
                )
            if comp.payoffs.shape == (num_types * num_actions,):
                comp.payoffs = comp.payoffs.reshape(num_types, num_actions)
            if comp.payoffs.shape != (num_types, num_actions):
                raise ValueError(
                    f"payoffs for scope {scope} must be {num_types}x{num_actions},"
                    f" got {comp.payoffs.shape}"
                )
            if np.any(comp.type_probs < -PROB_TOL):
                raise ValueError(f"negative type probability in scope {scope}")
            total = float(comp.type_probs.sum())
            if abs(total - 1.0) > PROB_TOL:
                raise ValueError(f"type_probs for scope {scope} sum to {total}, not 1")
        if covered != set(range(n)):
            missing = sorted(set(range(n)) - covered)
            raise ValueError(f"agents {missing} appear in no component scope")

    # -- convenience accessors used throughout the solvers --

    def local_type_counts(self, scope: Sequence[int]) -> tuple[int, ...]:
        return tuple(self.type_counts[i] for i in scope)

    def local_action_counts(self, scope: Sequence[int]) -> tuple[int, ...]:
        return tuple(self.action_counts[i] for i in scope)

    def num_joint_policies(self) -> int:
        return prod(a ** t for a, t in zip(self.action_counts, self.type_counts))

    def policy_counts(self) -> tuple[int, ...]:
        """Number of deterministic individual policies per agent."""
        return tuple(a ** t for a, t in zip(self.action_counts, self.type_counts))


@dataclass(frozen=True)
class JointPolicy:
    """Deterministic joint policy: one action index per (agent, type)."""

    assignments: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        object.__setattr__(
            self,
            "assignments",
            tuple(tuple(int(a) for a in row) for row in self.assignments),
        )

    def flat(self) -> tuple[int, ...]:
        """Agent-major, type-minor flattening of the action choices."""
        return tuple(a for row in self.assignments for a in row)


@dataclass
class StateModel:
    """Hidden-state description from which a single-component game is derived.

    prior             Pr(state), shape (S,)
    type_given_state  Pr(joint type | state), shape (S, num joint types)
    state_payoffs     payoff(state, joint action), shape (S, num joint actions)
    """

    num_states: int
    prior: np.ndarray
    type_given_state: np.ndarray
    state_payoffs: np.ndarray

    def __post_init__(self):
        self.prior = np.asarray(self.prior, dtype=np.float64)
        self.type_given_state = np.asarray(self.type_given_state, dtype=np.float64)
        self.state_payoffs = np.asarray(self.state_payoffs, dtype=np.float64)
        if self.prior.shape != (self.num_states,):
            raise ValueError("prior length must equal num_states")
        if abs(float(self.prior.sum()) - 1.0) > PROB_TOL:
            raise ValueError("state prior must sum to 1")
        if self.type_given_state.shape[0] != self.num_states:
            raise ValueError("type_given_state must have one row per state")
        rowsums = self.type_given_state.sum(axis=1)
        if np.max(np.abs(rowsums - 1.0)) > PROB_TOL:
            raise ValueError("each type_given_state row must sum to 1")
        if self.state_payoffs.shape[0] != self.num_states:
            raise ValueError("state_payoffs must have one row per state")


@dataclass
class SolveResult:
    """A solver's answer plus its diagnostics."""

    policy: JointPolicy
    value: float
    method: str = ""
    runtime_ms: float = 0.0
    iterations: int | None = None
    converged: bool | None = None
    induced_width: int | None = None
    extra: dict = field(default_factory=dict)


def check_policy(game: CGBG, policy: JointPolicy) -> None:
    """Raise ValueError unless the policy's shape and entries match the game."""
    if len(policy.assignments) != game.num_agents:
        raise ValueError(
            f"policy has {len(policy.assignments)} agents, game has {game.num_agents}"
        )
    for i, row in enumerate(policy.assignments):
        if len(row) != game.type_counts[i]:
            raise ValueError(
                f"agent {i} policy covers {len(row)} types, expected {game.type_counts[i]}"
            )
        if any(not 0 <= a < game.action_counts[i] for a in row):
            raise ValueError(f"agent {i} policy selects an out-of-range action")


def evaluate_policy(game: CGBG, policy: JointPolicy) -> float:
    """Expected team payoff of a joint policy.

    Sums, over components and over the scoped agents' joint types, the type
    probability times the payoff of the locally induced joint action.
    """
    check_policy(game, policy)
    total = 0.0
    for comp in game.components:
        total += _component_value(game, comp, policy)
    return total


def _component_value(game: CGBG, comp: Component, policy: JointPolicy) -> float:
    digits = digit_table(game.local_type_counts(comp.scope))
    astrides = strides(game.local_action_counts(comp.scope))
    aidx = np.zeros(digits.shape[0], dtype=np.int64)
    for j, agent in enumerate(comp.scope):
        row = np.asarray(policy.assignments[agent], dtype=np.int64)
        aidx += row[digits[:, j]] * astrides[j]
    picked = comp.payoffs[np.arange(digits.shape[0]), aidx]
    return float(np.dot(comp.type_probs, picked))


def evaluate_policies_batch(game: CGBG, actions: np.ndarray) -> np.ndarray:
    """Values of many joint policies at once.

    ``actions`` has shape (N, sum of type counts): column order is agent-major,
    type-minor, matching ``JointPolicy.flat()``.
    """
    offsets = np.concatenate([[0], np.cumsum(game.type_counts)])
    values = np.zeros(actions.shape[0], dtype=np.float64)
    for comp in game.components:
        digits = digit_table(game.local_type_counts(comp.scope))
        astrides = strides(game.local_action_counts(comp.scope))
        slot = np.zeros_like(digits)
        for j, agent in enumerate(comp.scope):
            slot[:, j] = offsets[agent] + digits[:, j]
        local_actions = actions[:, slot]  # (N, T_e, k)
        aidx = local_actions @ np.asarray(astrides, dtype=np.int64)
        picked = comp.payoffs[np.arange(digits.shape[0])[None, :], aidx]
        values += picked @ comp.type_probs
    return values


def response_values(game: CGBG, policy: JointPolicy, agent: int) -> np.ndarray:
    """Per-(type, action) expected gain for one agent, others held fixed.

    Entry [t, a] is the contribution to the joint value obtained when the
    agent plays action a whenever its type is t.  The joint value decomposes
    additively over the agent's types, so exact best responses are row-wise
    argmaxes of this table.
    """
    check_policy(game, policy)
    table = np.zeros((game.type_counts[agent], game.action_counts[agent]))
    for comp in game.components:
        if agent not in comp.scope:
            continue
        pos = comp.scope.index(agent)
        digits = digit_table(game.local_type_counts(comp.scope))
        astrides = strides(game.local_action_counts(comp.scope))
        base = np.zeros(digits.shape[0], dtype=np.int64)
        for j, other in enumerate(comp.scope):
            if j == pos:
                continue
            row = np.asarray(policy.assignments[other], dtype=np.int64)
            base += row[digits[:, j]] * astrides[j]
        rows = np.arange(digits.shape[0])
        for a in range(game.action_counts[agent]):
            picked = comp.payoffs[rows, base + a * astrides[pos]]
            np.add.at(table[:, a], digits[:, pos], comp.type_probs * picked)
    return table


def is_nash_equilibrium(game: CGBG, policy: JointPolicy, tol: float = VALUE_TOL) -> bool:
    """True iff no single agent can improve the value by more than ``tol``.

    Checked type by type: the value is linear in each (agent, type) action
    choice, so single-type deviations cover all individual policy deviations.
    """
    for agent in range(game.num_agents):
        table = response_values(game, policy, agent)
        current = table[np.arange(table.shape[0]), list(policy.assignments[agent])]
        if np.any(table.max(axis=1) > current + tol):
            return False
    return True


def _component_policy_table(game: CGBG, comp: Component) -> np.ndarray:
    """Expected local payoff for every combination of scoped individual policies.

    Axis j ranges over agent scope[j]'s individual policies (row-major decode
    of per-type actions).  Accumulated in ascending local-joint-type order.
    """
    scope = comp.scope
    shape = tuple(game.policy_counts()[i] for i in scope)
    astrides = strides(game.local_action_counts(scope))
    tdigits = digit_table(game.local_type_counts(scope))
    # Per scoped agent: action chosen by each individual policy for each type.
    act_of = [
        digit_table(tuple([game.action_counts[i]] * game.type_counts[i]))
        for i in scope
    ]
    table = np.zeros(shape)
    k = len(scope)
    for t in range(tdigits.shape[0]):
        aidx = np.zeros((1,) * k, dtype=np.int64)
        for j in range(k):
            col = act_of[j][:, tdigits[t, j]] * astrides[j]
            aidx = aidx + col.reshape((1,) * j + (-1,) + (1,) * (k - j - 1))
        table += comp.type_probs[t] * comp.payoffs[t][aidx]
    return table


def solve_brute_force(
    game: CGBG,
    enumeration_cap: int = 10**8,
    deadline: float | None = None,
) -> SolveResult:
    """Exact optimum by enumerating every deterministic joint policy.

    Among maximizers, returns the lexicographically smallest policy (agents
    in index order, types in index order, actions compared numerically).
    """
    counts = game.policy_counts()
    total = prod(counts)
    if total > enumeration_cap:
        raise ResourceLimitError(
            f"{total} joint policies exceed the enumeration cap {enumeration_cap}"
        )
    tables = [(comp.scope, _component_policy_table(game, comp)) for comp in game.components]

    best_value = -np.inf
    best_index = -1
    chunk = max(1, min(counts[0], _BRUTE_CHUNK_CELLS // max(1, total // counts[0])))
    tail = total // counts[0]
    for lo in range(0, counts[0], chunk):
        _poll_deadline(deadline)
        hi = min(counts[0], lo + chunk)
        block = np.zeros((hi - lo,) + counts[1:])
        for scope, table in tables:
            block += _broadcast_into(table, scope, counts, lo, hi)
        flat = block.reshape(-1)
        idx = int(np.argmax(flat))
        if flat[idx] > best_value:
            best_value = float(flat[idx])
            best_index = lo * tail + idx
    policy = _policy_from_flat_index(game, best_index)
    return SolveResult(policy=policy, value=best_value, method="BruteForce")


def _broadcast_into(
    table: np.ndarray,
    scope: tuple[int, ...],
    counts: tuple[int, ...],
    lo: int,
    hi: int,
) -> np.ndarray:
    """View of a component policy table broadcast over all n agent axes,
    with agent 0's axis restricted to [lo, hi)."""
    n = len(counts)
    if scope[0] == 0:
        table = table[lo:hi]
    shape = []
    pos = 0
    for i in range(n):
        if i in scope:
            shape.append(table.shape[pos])
            pos += 1
        else:
            shape.append(1)
    return table.reshape(shape)


def _policy_from_flat_index(game: CGBG, index: int) -> JointPolicy:
    per_agent = local_unindex(game.policy_counts(), index)
    rows = []
    for i, p in enumerate(per_agent):
        rows.append(local_unindex((game.action_counts[i],) * game.type_counts[i], p))
    return JointPolicy(tuple(rows))


def _poll_deadline(deadline: float | None) -> None:
    if deadline is not None and time.monotonic() > deadline:
        raise DeadlineExceeded("per-solve time limit exceeded")


def bg_from_state_model(
    model: StateModel,
    type_counts: Sequence[int],
    action_counts: Sequence[int],
) -> CGBG:
    """Single-component game obtained by marginalizing out the hidden state.

    Pr(joint type) = sum_s Pr(type|s) Pr(s); the payoff of a joint type is the
    posterior expectation of the state payoff.  Joint types with zero
    probability get an all-zero payoff row.
    """
    type_counts = tuple(int(t) for t in type_counts)
    action_counts = tuple(int(a) for a in action_counts)
    num_types = prod(type_counts)
    num_actions = prod(action_counts)
    if model.type_given_state.shape[1] != num_types:
        raise ValueError(
            f"type_given_state has {model.type_given_state.shape[1]} joint types,"
            f" expected {num_types}"
        )
    if model.state_payoffs.shape[1] != num_actions:
        raise ValueError(
            f"state_payoffs has {model.state_payoffs.shape[1]} joint actions,"
            f" expected {num_actions}"
        )
    type_probs = model.prior @ model.type_given_state
    weights = model.prior[:, None] * model.type_given_state  # Pr(s, theta)
    payoffs = np.zeros((num_types, num_actions))
    for t in range(num_types):
        if type_probs[t] <= 0.0:
            continue
        posterior = weights[:, t] / type_probs[t]
        payoffs[t] = posterior @ model.state_payoffs
    n = len(type_counts)
    comp = Component(scope=tuple(range(n)), type_probs=type_probs, payoffs=payoffs)
    return CGBG(
        num_agents=n,
        action_counts=action_counts,
        type_counts=type_counts,
        components=(comp,),
    )


# Two-agent firefighting fixture.  Two houses may have caught fire next to a
# house known to be burning; each agent noisily observes one of them (flames
# observed = type 0) and can fight fire at one of its two nearest houses.
_FF_PRIOR = (0.7, 0.10, 0.15, 0.05)  # neither / house 1 / house 3 / both on fire
_FF_TYPE_GIVEN_STATE = (
    (0.01, 0.09, 0.09, 0.81),
    (0.09, 0.81, 0.01, 0.09),
    (0.09, 0.01, 0.81, 0.09),
    (0.81, 0.09, 0.09, 0.01),
)
# Joint actions (agent 1 house, agent 2 house): (1,2), (1,3), (2,2), (2,3).
_FF_STATE_PAYOFFS = (
    (2.0, 0.0, 3.0, 2.0),
    (4.0, 2.0, 3.0, 2.0),
    (2.0, 2.0, 3.0, 4.0),
    (4.0, 4.0, 3.0, 4.0),
)


def build_two_agent_firefight() -> CGBG:
    """The canonical 2-agent, 2-type, 2-action firefighting game."""
    model = StateModel(
        num_states=4,
        prior=_FF_PRIOR,
        type_given_state=_FF_TYPE_GIVEN_STATE,
        state_payoffs=_FF_STATE_PAYOFFS,
    )
    return bg_from_state_model(model, type_counts=(2, 2), action_counts=(2, 2))


# -- game file format --


def game_to_dict(game: CGBG) -> dict:
    return {
        "num_agents": game.num_agents,
        "action_counts": list(game.action_counts),
        "type_counts": list(game.type_counts),
        "components": [
            {
                "scope": list(comp.scope),
                "type_probs": comp.type_probs.tolist(),
                "payoffs": comp.payoffs.reshape(-1).tolist(),
            }
            for comp in game.components
        ],
    }


def game_from_dict(data: dict) -> CGBG:
    components = tuple(
        Component(
            scope=tuple(entry["scope"]),
            type_probs=np.asarray(entry["type_probs"], dtype=np.float64),
            payoffs=np.asarray(entry["payoffs"], dtype=np.float64),
        )
        for entry in data["components"]
    )
    return CGBG(
        num_agents=int(data["num_agents"]),
        action_counts=tuple(data["action_counts"]),
        type_counts=tuple(data["type_counts"]),
        components=components,
    )


def save_game(game: CGBG, path: str | Path) -> None:
    Path(path).write_text(json.dumps(game_to_dict(game)) + "\n")


def load_game(path: str | Path) -> CGBG:
    return game_from_dict(json.loads(Path(path).read_text()))
