import json
from itertools import product

import numpy as np
import pytest

from cgbg.errors import ConfigurationError
from cgbg.games import JointPolicy, evaluate_policy, game_to_dict
from cgbg.generators import (
    GffConfig,
    RandomGameConfig,
    flame_probability,
    generate_gff,
    generate_random_cgbg,
    house_reward,
    is_connected,
)
from cgbg.indexing import local_index


def test_two_agent_pair_is_single_component():
    game = generate_random_cgbg(
        RandomGameConfig(num_agents=2, scope_size=2, actions_per_agent=2, types_per_agent=2, seed=0)
    )
    assert len(game.components) == 1
    assert game.components[0].scope == (0, 1)


def test_connectivity_and_balance_over_seeds():
    for seed in range(1000):
        cfg = RandomGameConfig(
            num_agents=5, scope_size=2, actions_per_agent=2, types_per_agent=2, seed=seed
        )
        game = generate_random_cgbg(cfg)
        scopes = [c.scope for c in game.components]
        assert is_connected(scopes, 5)
        assert len(set(scopes)) == len(scopes)
        counts = [0] * 5
        for scope in scopes[:-1]:
            for i in scope:
                counts[i] += 1
        assert max(counts) - min(counts) <= 1


def test_type_probs_normalized():
    for seed in range(50):
        game = generate_random_cgbg(
            RandomGameConfig(num_agents=4, scope_size=3, actions_per_agent=2, types_per_agent=2, seed=seed)
        )
        for comp in game.components:
            assert comp.type_probs.sum() == pytest.approx(1.0, abs=1e-9)
            assert np.all(comp.type_probs >= 0)


def test_payoff_moments():
    entries = []
    seed = 0
    while sum(e.size for e in entries) < 10**5:
        game = generate_random_cgbg(
            RandomGameConfig(num_agents=5, scope_size=2, actions_per_agent=3, types_per_agent=3, seed=seed)
        )
        entries.extend(c.payoffs for c in game.components)
        seed += 1
    flat = np.concatenate([e.reshape(-1) for e in entries])
    assert abs(flat.mean()) < 0.02
    assert abs(flat.std() - 1.0) < 0.02


def test_generator_deterministic():
    cfg = RandomGameConfig(num_agents=6, scope_size=3, actions_per_agent=2, types_per_agent=2, seed=99)
    a = json.dumps(game_to_dict(generate_random_cgbg(cfg)))
    b = json.dumps(game_to_dict(generate_random_cgbg(cfg)))
    assert a == b


def test_generator_rejects_uselss_scope_size():
    with pytest.raises(ConfigurationError):
        generate_random_cgbg(
            RandomGameConfig(num_agents=3, scope_size=1, actions_per_agent=2, types_per_agent=2, seed=0)
        )


def test_is_connected_cases():
    assert is_connected([(0, 1), (1, 2)], 3)
    assert not is_connected([(0, 1)], 3)
    assert is_connected([], 1)


# -- firefighting --


def test_observation_probabilities():
    assert flame_probability(0) == 0.2
    assert flame_probability(1) == 0.5
    assert flame_probability(3) == 0.8


def test_reward_formula():
    assert house_reward(2, 1) == pytest.approx(-1.4)
    assert house_reward(3, 0) == -3.0
    assert house_reward(0, 5) == 0.0


def test_house_count_formula():
    _, layout = generate_gff(
        GffConfig(
            num_agents=3,
            actions_per_agent=2,
            observed_houses=1,
            max_agents_per_house=2,
            house_density=1.2,
            fire_levels=2,
            seed=0,
        )
    )
    assert layout.houses.shape[0] == 8


def test_micro_instance_posterior():
    game, layout = generate_gff(
        GffConfig(
            num_agents=1,
            actions_per_agent=1,
            observed_houses=1,
            max_agents_per_house=1,
            house_density=0.5,
            fire_levels=2,
            seed=3,
        )
    )
    assert layout.houses.shape[0] == 1
    comp = game.components[0]
    # type 1 = flames observed
    assert comp.type_probs[1] == pytest.approx(0.35, abs=1e-12)
    assert comp.payoffs[1, 0] == pytest.approx(-0.5, abs=1e-12)
    assert comp.payoffs[0, 0] == pytest.approx(-0.5 * 0.5 / 0.65 * 0.7, abs=1e-12)


def _gff_oracle_value(cfg, layout, policy):
    """Expected reward over assigned houses by full enumeration of the
    hidden fire levels and all observation profiles."""
    num_houses = layout.houses.shape[0]
    assigned = sorted({h for hs in layout.action_houses for h in hs})
    total = 0.0
    obs_spaces = [
        list(product((0, 1), repeat=len(layout.observed_houses[i])))
        for i in range(cfg.num_agents)
    ]
    for levels in product(range(cfg.fire_levels), repeat=num_houses):
        p_levels = (1.0 / cfg.fire_levels) ** num_houses
        for profile in product(*obs_spaces):
            p_obs = 1.0
            for i in range(cfg.num_agents):
                for bit, h in zip(profile[i], layout.observed_houses[i]):
                    pf = flame_probability(levels[h])
                    p_obs *= pf if bit else 1.0 - pf
            chosen = []
            for i in range(cfg.num_agents):
                t = local_index((2,) * len(profile[i]), profile[i])
                chosen.append(layout.action_houses[i][policy.assignments[i][t]])
            reward = sum(
                house_reward(levels[h], chosen.count(h)) for h in assigned
            )
            total += p_levels * p_obs * reward
    return total


@pytest.mark.parametrize("seed", [0, 1, 2])
def test_gff_matches_full_model_oracle(seed):
    cfg = GffConfig(
        num_agents=2,
        actions_per_agent=2,
        observed_houses=1,
        max_agents_per_house=2,
        house_density=0.6,
        fire_levels=2,
        seed=seed,
    )
    game, layout = generate_gff(cfg)
    rng = np.random.default_rng(seed)
    for _ in range(5):
        policy = JointPolicy(
            tuple(
                tuple(int(rng.integers(0, cfg.actions_per_agent)) for _ in range(2))
                for _ in range(2)
            )
        )
        assert evaluate_policy(game, policy) == pytest.approx(
            _gff_oracle_value(cfg, layout, policy), abs=1e-9
        )


def test_gff_scope_marginals_two_ways():
    cfg = GffConfig(
        num_agents=2,
        actions_per_agent=2,
        observed_houses=1,
        max_agents_per_house=2,
        house_density=0.6,
        fire_levels=3,
        seed=7,
    )
    game, layout = generate_gff(cfg)
    num_houses = layout.houses.shape[0]
    for comp in game.components:
        want = np.zeros_like(comp.type_probs)
        type_sizes = tuple(2 ** len(layout.observed_houses[i]) for i in comp.scope)
        for levels in product(range(cfg.fire_levels), repeat=num_houses):
            p_levels = (1.0 / cfg.fire_levels) ** num_houses
            obs_spaces = [
                list(product((0, 1), repeat=len(layout.observed_houses[i])))
                for i in comp.scope
            ]
            for profile in product(*obs_spaces):
                p = p_levels
                for i, bits in zip(comp.scope, profile):
                    for bit, h in zip(bits, layout.observed_houses[i]):
                        pf = flame_probability(levels[h])
                        p *= pf if bit else 1.0 - pf
                t = local_index(
                    type_sizes,
                    tuple(
                        local_index((2,) * len(bits), bits) for bits in profile
                    ),
                )
                want[t] += p
        assert np.allclose(comp.type_probs, want, atol=1e-9)


def test_gff_structural_invariants():
    for seed in range(20):
        cfg = GffConfig(
            num_agents=4,
            actions_per_agent=2,
            observed_houses=2,
            max_agents_per_house=2,
            house_density=1.2,
            fire_levels=3,
            seed=seed,
        )
        game, layout = generate_gff(cfg)
        holders = {}
        for i, hs in enumerate(layout.action_houses):
            assert len(hs) == cfg.actions_per_agent
            for h in hs:
                holders.setdefault(h, []).append(i)
        assert all(len(v) <= cfg.max_agents_per_house for v in holders.values())
        for comp in game.components:
            assert comp.type_probs.sum() == pytest.approx(1.0, abs=1e-9)
            assert np.all(comp.payoffs <= 1e-12)
        covered = set()
        for comp in game.components:
            covered.update(comp.scope)
        assert covered == set(range(cfg.num_agents))


def test_gff_reward_monotone_in_agents_present():
    for level in (1, 2, 3):
        rewards = [house_reward(level, m) for m in range(4)]
        assert all(a < b for a, b in zip(rewards, rewards[1:]))


def test_gff_deterministic():
    cfg = GffConfig(
        num_agents=3,
        actions_per_agent=2,
        observed_houses=1,
        max_agents_per_house=2,
        house_density=1.2,
        fire_levels=3,
        seed=11,
    )
    a_game, a_layout = generate_gff(cfg)
    b_game, b_layout = generate_gff(cfg)
    assert json.dumps(game_to_dict(a_game)) == json.dumps(game_to_dict(b_game))
    assert json.dumps(a_layout.to_dict()) == json.dumps(b_layout.to_dict())


def test_gff_infeasible_capacity():
    with pytest.raises(ConfigurationError):
        generate_gff(
            GffConfig(
                num_agents=4,
                actions_per_agent=3,
                observed_houses=1,
                max_agents_per_house=1,
                house_density=0.3,
                fire_levels=2,
                seed=0,
            )
        )


def test_gff_rejects_observing_outside_action_set():
    with pytest.raises(ConfigurationError):
        generate_gff(
            GffConfig(
                num_agents=2,
                actions_per_agent=1,
                observed_houses=2,
                max_agents_per_house=2,
                fire_levels=2,
                seed=0,
            )
        )
