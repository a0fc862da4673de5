"""Approximate solvers that work on the game directly, without a factor graph.

Alternating maximization hill-climbs per-agent exact best responses until a
sweep stops improving; the fixed point is a Nash equilibrium.  Cross-entropy
search keeps a categorical distribution per (agent, type), samples policy
batches, and shifts mass toward the elite samples.
"""

from __future__ import annotations

import time
from dataclasses import dataclass

import numpy as np

from .errors import DeadlineExceeded
from .games import (
    CGBG,
    JointPolicy,
    SolveResult,
    evaluate_policies_batch,
    evaluate_policy,
    response_values,
)

_AM_MAX_SWEEPS = 10_000


@dataclass(frozen=True)
class CeParams:
    """Cross-entropy search settings.

    ``evaluations_per_policy`` switches scoring: 0 evaluates sampled policies
    exactly; a positive count estimates values by that many joint-type
    simulations per policy (the returned result is always re-evaluated
    exactly).
    """

    iterations: int = 50
    samples_per_iteration: int = 100
    elite_count: int = 5
    restarts: int = 10
    learning_rate: float = 0.2
    evaluations_per_policy: int = 0
    seed: int = 0

    def __post_init__(self):
        if self.elite_count > self.samples_per_iteration:
            raise ValueError("elite_count cannot exceed samples_per_iteration")
        if not 0.0 < self.learning_rate <= 1.0:
            raise ValueError("learning_rate must lie in (0, 1]")


CE_NORMAL = CeParams(iterations=50, samples_per_iteration=100, elite_count=5)
CE_FAST = CeParams(iterations=15, samples_per_iteration=40, elite_count=2)


@dataclass
class PolicyDistribution:
    """Per (agent, type), a categorical distribution over that agent's actions."""

    categoricals: list[np.ndarray]  # flat: agent-major, type-minor

    @classmethod
    def uniform(cls, game: CGBG) -> "PolicyDistribution":
        rows = []
        for i in range(game.num_agents):
            for _ in range(game.type_counts[i]):
                rows.append(np.full(game.action_counts[i], 1.0 / game.action_counts[i]))
        return cls(rows)


def _random_policy(game: CGBG, rng: np.random.Generator) -> JointPolicy:
    return JointPolicy(
        tuple(
            tuple(int(rng.integers(0, game.action_counts[i])) for _ in range(game.type_counts[i]))
            for i in range(game.num_agents)
        )
    )


def alternating_maximization(
    game: CGBG,
    restarts: int = 10,
    seed: int = 0,
    deadline: float | None = None,
) -> SolveResult:
    """Coordinate ascent over exact per-agent best responses.

    Each restart starts from a uniformly random joint policy, sweeps agents
    in index order replacing every type's action with an exact best response
    (ties: lowest action index), and stops once a full sweep improves the
    value by at most 1e-9.  The best restart wins; value ties prefer the
    lexicographically smaller policy.
    """
    rng = np.random.default_rng(seed)
    best: SolveResult | None = None
    total_sweeps = 0
    for _ in range(restarts):
        assignments = [list(row) for row in _random_policy(game, rng).assignments]
        value = evaluate_policy(game, JointPolicy(tuple(tuple(r) for r in assignments)))
        for _ in range(_AM_MAX_SWEEPS):
            if deadline is not None and time.monotonic() > deadline:
                raise DeadlineExceeded("per-solve time limit exceeded")
            total_sweeps += 1
            for agent in range(game.num_agents):
                policy = JointPolicy(tuple(tuple(r) for r in assignments))
                table = response_values(game, policy, agent)
                assignments[agent] = [int(a) for a in table.argmax(axis=1)]
            new_value = evaluate_policy(game, JointPolicy(tuple(tuple(r) for r in assignments)))
            improvement = new_value - value
            value = new_value
            if improvement <= 1e-9:
                break
        policy = JointPolicy(tuple(tuple(r) for r in assignments))
        if (
            best is None
            or value > best.value
            or (value == best.value and policy.flat() < best.policy.flat())
        ):
            best = SolveResult(policy=policy, value=value, method="AM")
    best.iterations = total_sweeps
    best.converged = True
    return best


def _sample_batch(dist: PolicyDistribution, count: int, rng: np.random.Generator) -> np.ndarray:
    """Inverse-CDF sampling; one uniform per (sample, slot), slot-major order."""
    actions = np.empty((count, len(dist.categoricals)), dtype=np.int64)
    uniforms = rng.random((count, len(dist.categoricals)))
    for slot, probs in enumerate(dist.categoricals):
        cdf = np.cumsum(probs)
        cdf[-1] = 1.0
        actions[:, slot] = np.searchsorted(cdf, uniforms[:, slot], side="right")
    return actions


def _simulate_values(
    game: CGBG, actions: np.ndarray, sims: int, rng: np.random.Generator
) -> np.ndarray:
    """Monte-Carlo value estimates: draw local joint types per component and
    average the induced payoffs over ``sims`` draws."""
    offsets = np.concatenate([[0], np.cumsum(game.type_counts)])
    values = np.zeros(actions.shape[0])
    from .indexing import digit_table, strides

    for comp in game.components:
        digits = digit_table(game.local_type_counts(comp.scope))
        astrides = strides(game.local_action_counts(comp.scope))
        draws = rng.choice(digits.shape[0], size=(actions.shape[0], sims), p=comp.type_probs)
        slot = offsets[np.asarray(comp.scope)][None, None, :] + digits[draws]
        local = np.take_along_axis(
            actions[:, None, :].repeat(sims, axis=1), slot, axis=2
        )
        aidx = local @ np.asarray(astrides, dtype=np.int64)
        values += comp.payoffs[draws, aidx].mean(axis=1)
    return values


def cross_entropy(
    game: CGBG,
    params: CeParams = CE_NORMAL,
    deadline: float | None = None,
) -> SolveResult:
    """Cross-entropy policy search; deterministic given the seed."""
    rng = np.random.default_rng(params.seed)
    best_actions: np.ndarray | None = None
    best_score = -np.inf
    evaluations = 0
    for _ in range(params.restarts):
        dist = PolicyDistribution.uniform(game)
        for _ in range(params.iterations):
            if deadline is not None and time.monotonic() > deadline:
                raise DeadlineExceeded("per-solve time limit exceeded")
            actions = _sample_batch(dist, params.samples_per_iteration, rng)
            if params.evaluations_per_policy > 0:
                scores = _simulate_values(game, actions, params.evaluations_per_policy, rng)
            else:
                scores = evaluate_policies_batch(game, actions)
            evaluations += actions.shape[0]
            # value-descending, lexicographically smallest policy on ties
            keys = tuple(actions[:, j] for j in range(actions.shape[1] - 1, -1, -1))
            order = np.lexsort(keys + (-scores,))
            elite = actions[order[: params.elite_count]]
            for slot, probs in enumerate(dist.categoricals):
                freq = np.bincount(elite[:, slot], minlength=probs.shape[0]) / elite.shape[0]
                dist.categoricals[slot] = (1 - params.learning_rate) * probs + (
                    params.learning_rate * freq
                )
            top = order[0]
            if scores[top] > best_score or (
                scores[top] == best_score
                and best_actions is not None
                and tuple(actions[top]) < tuple(best_actions)
            ):
                best_score = float(scores[top])
                best_actions = actions[top].copy()
    policy = _actions_to_policy(game, best_actions)
    return SolveResult(
        policy=policy,
        value=evaluate_policy(game, policy),
        method="CE",
        iterations=params.restarts * params.iterations,
        extra={"policy_evaluations": evaluations},
    )


def _actions_to_policy(game: CGBG, flat: np.ndarray) -> JointPolicy:
    rows = []
    pos = 0
    for i in range(game.num_agents):
        rows.append(tuple(int(a) for a in flat[pos : pos + game.type_counts[i]]))
        pos += game.type_counts[i]
    return JointPolicy(tuple(rows))
