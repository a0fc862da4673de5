"""Seeded game generators for the two benchmark families.

* Random games: connected interaction hypergraphs with fixed-size scopes,
  uniform-normalized local type distributions, and standard-normal payoffs.
* 2-D firefighting: spatially placed agents pick houses to fight fire at,
  observe their nearest action houses noisily, and share sub-additive
  house rewards.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from itertools import combinations, product
from math import ceil, prod
from pathlib import Path

import numpy as np

from .errors import ConfigurationError
from .games import CGBG, Component
from .indexing import digit_table, strides


@dataclass(frozen=True)
class RandomGameConfig:
    num_agents: int
    scope_size: int
    actions_per_agent: int
    types_per_agent: int
    seed: int = 0


@dataclass(frozen=True)
class GffConfig:
    num_agents: int
    actions_per_agent: int
    observed_houses: int
    max_agents_per_house: int
    house_density: float = 1.2
    fire_levels: int = 3
    seed: int = 0


class NormalStream:
    """Standard-normal deviates derived from a generator's uniform stream.

    Uses the paired trigonometric (Box-Muller) transform so the exact draw
    sequence is reproducible from the uniform stream alone:
    z1 = sqrt(-2 ln u1) cos(2 pi u2), z2 = sqrt(-2 ln u1) sin(2 pi u2).
    """

    def __init__(self, rng: np.random.Generator):
        self.rng = rng
        self._spare: float | None = None

    def draw(self, count: int) -> np.ndarray:
        out = np.empty(count)
        i = 0
        if self._spare is not None and count > 0:
            out[0] = self._spare
            self._spare = None
            i = 1
        while i < count:
            u1 = max(self.rng.random(), 1e-300)
            u2 = self.rng.random()
            radius = math.sqrt(-2.0 * math.log(u1))
            out[i] = radius * math.cos(2.0 * math.pi * u2)
            i += 1
            z2 = radius * math.sin(2.0 * math.pi * u2)
            if i < count:
                out[i] = z2
                i += 1
            else:
                self._spare = z2
        return out


def is_connected(scopes, num_agents: int) -> bool:
    """True iff the hypergraph with the given hyperedges links all agents."""
    parent = list(range(num_agents))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for scope in scopes:
        scope = list(scope)
        for a, b in zip(scope, scope[1:]):
            ra, rb = find(a), find(b)
            if ra != rb:
                parent[rb] = ra
    return len({find(i) for i in range(num_agents)}) == 1


def _next_scope(rng: np.random.Generator, counts: list[int], k: int, seen) -> tuple[int, ...]:
    """Pick a fresh k-agent scope, preferring agents in the fewest edges.

    Complete lowest-count levels are always included; the remainder is drawn
    uniformly from the next level.  Candidates duplicating an existing scope
    are rejected; when every candidate under the strict rule is a duplicate,
    the fill pool widens one count level at a time (and, as a last resort,
    drops the mandatory prefix), which guarantees termination.
    """
    levels = sorted(set(counts))
    mandatory: list[int] = []
    pool: list[int] = []
    rest: list[list[int]] = []
    for level in levels:
        agents = [i for i, c in enumerate(counts) if c == level]
        if not pool and len(mandatory) + len(agents) <= k:
            mandatory.extend(agents)
        elif not pool:
            pool = agents
        else:
            rest.append(agents)
    need = k - len(mandatory)
    if need > 0 and len(pool) >= need:
        for _ in range(50):
            picks = rng.choice(len(pool), size=need, replace=False)
            scope = tuple(sorted(mandatory + [pool[j] for j in picks]))
            if scope not in seen:
                return scope
    while True:
        cands = [
            tuple(sorted(mandatory + list(combo)))
            for combo in combinations(sorted(pool), need)
        ]
        cands = [c for c in cands if c not in seen]
        if cands:
            return cands[int(rng.integers(len(cands)))]
        if rest:
            pool = pool + rest.pop(0)
        elif mandatory:
            pool = sorted(mandatory + pool)
            mandatory = []
            need = k
        else:
            raise RuntimeError("all possible scopes exist but the graph is not connected")


def generate_random_cgbg(cfg: RandomGameConfig) -> CGBG:
    """Connected random game; fully deterministic given the config seed.

    Edges with duplicate scopes are redrawn.  Edges are added until the
    interaction hypergraph is connected and covers every agent.
    """
    n, k = cfg.num_agents, cfg.scope_size
    if not 1 <= k <= n:
        raise ConfigurationError(f"scope size {k} must be in [1, {n}]")
    if k == 1 and n > 1:
        raise ConfigurationError("singleton scopes can never connect multiple agents")
    rng = np.random.default_rng(cfg.seed)
    counts = [0] * n
    scopes: list[tuple[int, ...]] = []
    seen: set[tuple[int, ...]] = set()
    while not (all(c > 0 for c in counts) and is_connected(scopes, n)):
        scope = _next_scope(rng, counts, k, seen)
        seen.add(scope)
        scopes.append(scope)
        for i in scope:
            counts[i] += 1
    normals = NormalStream(rng)
    components = []
    num_local_types = cfg.types_per_agent**k
    num_local_actions = cfg.actions_per_agent**k
    for scope in scopes:
        probs = rng.random(num_local_types)
        probs /= probs.sum()
        payoffs = normals.draw(num_local_types * num_local_actions).reshape(
            num_local_types, num_local_actions
        )
        components.append(Component(scope=scope, type_probs=probs, payoffs=payoffs))
    return CGBG(
        num_agents=n,
        action_counts=(cfg.actions_per_agent,) * n,
        type_counts=(cfg.types_per_agent,) * n,
        components=tuple(components),
    )


# -- 2-D firefighting --


@dataclass
class GffLayout:
    """Geometry sidecar: where everything is and who holds what."""

    houses: np.ndarray  # (H, 2) coordinates
    agents: np.ndarray  # (n, 2) coordinates
    action_houses: list[tuple[int, ...]]  # per agent, nearest-first
    observed_houses: list[tuple[int, ...]]  # per agent, nearest-first
    component_scopes: list[tuple[int, ...]]
    merged_houses: dict[int, int]  # house -> house whose component absorbed it

    def to_dict(self) -> dict:
        return {
            "houses": self.houses.tolist(),
            "agents": self.agents.tolist(),
            "action_houses": [list(h) for h in self.action_houses],
            "observed_houses": [list(h) for h in self.observed_houses],
            "component_scopes": [list(s) for s in self.component_scopes],
            "merged_houses": {str(k): v for k, v in self.merged_houses.items()},
        }

    def save(self, path) -> None:
        Path(path).write_text(json.dumps(self.to_dict()) + "\n")


def flame_probability(level: int) -> float:
    """Chance of observing flames at a house with the given fire level."""
    if level <= 0:
        return 0.2
    if level == 1:
        return 0.5
    return 0.8


def house_reward(level: float, agents_present: int) -> float:
    """Reward of one house: -level * 0.7 ** agents_present."""
    return -level * 0.7**agents_present


def _nearest(order_from: np.ndarray, candidates) -> list[int]:
    """Candidate house ids sorted by distance (ties: lower id first)."""
    ids = np.array(sorted(candidates), dtype=np.int64)
    dists = order_from[ids]
    return [int(ids[j]) for j in np.lexsort((ids, dists))]


def generate_gff(cfg: GffConfig) -> tuple[CGBG, GffLayout]:
    """Build a firefighting game instance plus its layout metadata."""
    n = cfg.num_agents
    if cfg.observed_houses > cfg.actions_per_agent:
        raise ConfigurationError(
            "agents cannot observe houses outside their own action set"
        )
    if cfg.fire_levels < 2:
        raise ConfigurationError("need at least two fire levels")
    if cfg.observed_houses < 1 or cfg.actions_per_agent < 1 or n < 1:
        raise ConfigurationError("agent, action and observation counts must be positive")
    num_houses = ceil(cfg.house_density * cfg.actions_per_agent * n)
    if num_houses * cfg.max_agents_per_house < n * cfg.actions_per_agent:
        raise ConfigurationError(
            f"{num_houses} houses with capacity {cfg.max_agents_per_house} cannot"
            f" supply {n} agents with {cfg.actions_per_agent} actions each"
        )
    rng = np.random.default_rng(cfg.seed)
    houses = rng.random((num_houses, 2))
    agents = rng.random((n, 2))

    holders: list[list[int]] = [[] for _ in range(num_houses)]
    action_houses: list[tuple[int, ...]] = []
    observed: list[tuple[int, ...]] = []
    for i in range(n):
        dists = np.linalg.norm(houses - agents[i], axis=1)
        available = [h for h in range(num_houses) if len(holders[h]) < cfg.max_agents_per_house]
        ranked = _nearest(dists, available)
        if len(ranked) < cfg.actions_per_agent:
            raise ConfigurationError(
                f"agent {i} found only {len(ranked)} available houses,"
                f" needs {cfg.actions_per_agent}"
            )
        mine = ranked[: cfg.actions_per_agent]
        for h in mine:
            holders[h].append(i)
        action_houses.append(tuple(mine))
        observed.append(tuple(_nearest(dists, mine)[: cfg.observed_houses]))

    raw = {}  # house -> (scope, type_probs, payoffs)
    for h in range(num_houses):
        if not holders[h]:
            continue
        scope = tuple(sorted(holders[h]))
        probs, level_marginal = _scope_type_distribution(cfg, scope, observed, house=h)
        payoffs = _house_payoffs(cfg, h, scope, action_houses, probs, level_marginal)
        raw[h] = (scope, probs, payoffs)

    comps, merged = _merge_subset_scopes(raw)
    layout = GffLayout(
        houses=houses,
        agents=agents,
        action_houses=action_houses,
        observed_houses=observed,
        component_scopes=[c.scope for c in comps],
        merged_houses=merged,
    )
    game = CGBG(
        num_agents=n,
        action_counts=(cfg.actions_per_agent,) * n,
        type_counts=(2**cfg.observed_houses,) * n,
        components=tuple(comps),
    )
    return game, layout


def _scope_type_distribution(cfg, scope, observed, house):
    """Joint type distribution of the scoped agents plus the per-level
    breakdown for one house.

    Enumerates fire levels of exactly the houses observed by the scoped
    agents; observations are independent given levels.  Returns
    (type_probs, level_marginal) with level_marginal[x, t] = Pr(level=x, t).
    An unobserved target house is independent of all types, so its marginal
    is uniform.
    """
    slots = [(i, h) for i in scope for h in observed[i]]
    relevant = sorted({h for _, h in slots})
    num_types = prod(2 ** len(observed[i]) for i in scope)
    type_probs = np.zeros(num_types)
    level_marginal = np.zeros((cfg.fire_levels, num_types))
    weight = (1.0 / cfg.fire_levels) ** len(relevant)
    house_pos = {h: j for j, h in enumerate(relevant)}
    for levels in product(range(cfg.fire_levels), repeat=len(relevant)):
        joint = np.ones(1)
        for _, h in slots:
            p_flames = flame_probability(levels[house_pos[h]])
            joint = np.multiply.outer(joint, np.array([1.0 - p_flames, p_flames]))
            joint = joint.reshape(-1)
        type_probs += weight * joint
        if house in house_pos:
            level_marginal[levels[house_pos[house]]] += weight * joint
    if house not in house_pos:
        level_marginal[:] = type_probs[None, :] / cfg.fire_levels
    return type_probs, level_marginal


def _house_payoffs(cfg, house, scope, action_houses, type_probs, level_marginal):
    """Local payoff table: posterior expected reward per (types, actions)."""
    num_types = type_probs.shape[0]
    num_actions = cfg.actions_per_agent ** len(scope)
    adigits = digit_table((cfg.actions_per_agent,) * len(scope))
    payoffs = np.zeros((num_types, num_actions))
    levels = np.arange(cfg.fire_levels, dtype=np.float64)
    for a in range(num_actions):
        present = sum(
            1 for j, agent in enumerate(scope) if action_houses[agent][adigits[a, j]] == house
        )
        rewards = np.array([house_reward(x, present) for x in levels])
        with np.errstate(invalid="ignore", divide="ignore"):
            expected = (rewards @ level_marginal) / type_probs
        payoffs[:, a] = np.where(type_probs > 0.0, expected, 0.0)
    return payoffs


def _merge_subset_scopes(raw: dict):
    """Fold components whose scope is contained in another component's scope.

    Equal scopes are combined first; then, processing scopes from smallest
    to largest, each one is folded into its smallest strict superset (ties:
    lexicographically first).  Payoff tables are lifted by projecting the
    superset's types and actions onto the subset's agents; the underlying
    hidden-state model makes the local distributions marginal-consistent, so
    values are preserved.
    """
    by_scope: dict[tuple[int, ...], list] = {}
    merged: dict[int, int] = {}
    anchor: dict[tuple[int, ...], int] = {}
    for h in sorted(raw):
        scope, probs, payoffs = raw[h]
        if scope in by_scope:
            by_scope[scope][1] = by_scope[scope][1] + payoffs
            merged[h] = anchor[scope]
        else:
            by_scope[scope] = [probs, payoffs.copy()]
            anchor[scope] = h
    order = sorted(by_scope, key=lambda s: (len(s), s))
    for scope in order:
        supersets = [
            t for t in by_scope if t != scope and set(scope) < set(t)
        ]
        if not supersets or scope not in by_scope:
            continue
        target = min(supersets, key=lambda t: (len(t), t))
        probs, payoffs = by_scope.pop(scope)
        t_probs, t_payoffs = by_scope[target]
        t_payoffs += _lift_table(scope, target, payoffs)
        merged[anchor[scope]] = anchor[target]
        for h, dest in list(merged.items()):
            if dest == anchor[scope]:
                merged[h] = anchor[target]
    comps = [
        Component(scope=s, type_probs=by_scope[s][0], payoffs=by_scope[s][1])
        for s in sorted(by_scope)
    ]
    return comps, merged


def _lift_table(sub: tuple[int, ...], sup: tuple[int, ...], payoffs: np.ndarray) -> np.ndarray:
    """Re-index a (types, actions) table from a sub-scope to a super-scope.

    Works for any per-agent domain sizes as long as each agent's sizes agree
    between the two scopes, which holds here (uniform type/action counts).
    """
    num_types_sub, num_actions_sub = payoffs.shape
    sub_k, sup_k = len(sub), len(sup)
    t_size = round(num_types_sub ** (1 / sub_k)) if sub_k else 1
    a_size = round(num_actions_sub ** (1 / sub_k)) if sub_k else 1
    pos = [sup.index(i) for i in sub]
    t_dig = digit_table((t_size,) * sup_k)
    a_dig = digit_table((a_size,) * sup_k)
    t_str = strides((t_size,) * sub_k)
    a_str = strides((a_size,) * sub_k)
    t_idx = sum(t_dig[:, p] * s for p, s in zip(pos, t_str))
    a_idx = sum(a_dig[:, p] * s for p, s in zip(pos, a_str))
    return payoffs[np.ix_(t_idx, a_idx)]
