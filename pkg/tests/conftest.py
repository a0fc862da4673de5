import numpy as np
import pytest

from cgbg.games import CGBG, Component


def single_agent_game(payoffs=(5.0, -1.0)):
    comp = Component(scope=(0,), type_probs=np.array([1.0]), payoffs=np.array([payoffs]))
    return CGBG(num_agents=1, action_counts=(len(payoffs),), type_counts=(1,), components=(comp,))


def chain_game(scopes, type_counts, action_counts, seed=0):
    """Game with the given scopes and seeded uniform type probs / normal payoffs."""
    rng = np.random.default_rng(seed)
    n = len(type_counts)
    comps = []
    for scope in scopes:
        num_t = int(np.prod([type_counts[i] for i in scope]))
        num_a = int(np.prod([action_counts[i] for i in scope]))
        probs = rng.random(num_t)
        probs /= probs.sum()
        comps.append(
            Component(
                scope=tuple(scope),
                type_probs=probs,
                payoffs=rng.normal(size=(num_t, num_a)),
            )
        )
    return CGBG(
        num_agents=n,
        action_counts=tuple(action_counts),
        type_counts=tuple(type_counts),
        components=tuple(comps),
    )


def fig_pair_game(num_types=2, num_actions=2, seed=0):
    """Three agents, two components with scopes (0,1) and (1,2)."""
    return chain_game(
        [(0, 1), (1, 2)],
        [num_types] * 3,
        [num_actions] * 3,
        seed=seed,
    )


@pytest.fixture
def firefight():
    from cgbg.games import build_two_agent_firefight

    return build_two_agent_firefight()
