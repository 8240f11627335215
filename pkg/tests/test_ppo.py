import math

import numpy as np
import pytest
from pydantic import ValidationError

from inlab.ppo import (
    Adam,
    Mlp,
    PolicyParams,
    PpoConfig,
    RolloutBuffer,
    check_compatible,
    clip_by_global_norm,
    compute_gae,
    entropy,
    gae,
    init_policy,
    load_checkpoint,
    log_prob,
    normalize_advantages,
    policy_forward,
    ppo_loss_and_grads,
    ppo_update,
    sample_action,
    save_checkpoint,
    value,
)
from inlab.shared.errors import CheckpointFormatError, ConfigurationError, RolloutError


def _tiny_policy(seed=0, obs_dim=3, act_dim=2):
    return init_policy(obs_dim, act_dim, np.random.default_rng(seed), actor_hidden=(5,), critic_hidden=(4,))


def _filled_buffer(params, capacity=24, num_envs=3, seed=0):
    rng = np.random.default_rng(seed)
    buffer = RolloutBuffer(capacity, num_envs, params.obs_dim, params.act_dim)
    while buffer.active.any():
        envs = np.flatnonzero(buffer.active)
        obs = rng.normal(size=(envs.size, params.obs_dim))
        actions, log_probs = sample_action(params, obs, rng)
        buffer.add(
            obs,
            actions,
            log_probs,
            rng.normal(size=envs.size),
            value(params, obs),
            rng.random(envs.size) < 0.1,
            envs=envs,
        )
    buffer.finish(np.zeros(num_envs))
    return buffer


def test_zero_network_gives_zero_mean():
    params = PolicyParams(Mlp([3, 4, 2]), Mlp([3, 4, 1]), np.zeros(2))
    mean, log_std = policy_forward(params, np.ones(3))
    np.testing.assert_array_equal(mean, [0.0, 0.0])
    np.testing.assert_array_equal(log_std, [0.0, 0.0])


def test_forward_matches_matrix_arithmetic():
    params = _tiny_policy(1)
    params.actor.weights[-1] *= 300.0
    obs = np.random.default_rng(2).normal(size=3)
    w0, w1 = params.actor.weights
    b0, b1 = params.actor.biases
    expected = np.tanh(obs @ w0 + b0) @ w1 + b1
    mean, _ = policy_forward(params, obs)
    np.testing.assert_allclose(mean, np.clip(expected, -1.0, 1.0), atol=1e-12)
    assert policy_forward(params, obs)[0].tolist() == mean.tolist()


def test_policy_rejects_wrong_observation_size():
    with pytest.raises(ConfigurationError):
        policy_forward(_tiny_policy(), np.zeros(4))


def test_sample_with_vanishing_std_is_the_mean():
    params = _tiny_policy()
    params.log_std[:] = -50.0
    obs = np.ones(3)
    action, _ = sample_action(params, obs, np.random.default_rng(0))
    np.testing.assert_allclose(action, params.actor(obs)[0], atol=1e-15)


def test_sampling_is_reproducible():
    params = _tiny_policy()
    obs = np.ones(3)
    first = sample_action(params, obs, np.random.default_rng(7))
    second = sample_action(params, obs, np.random.default_rng(7))
    np.testing.assert_array_equal(first[0], second[0])
    assert first[1] == second[1]


def test_sample_spread_matches_std():
    params = _tiny_policy()
    obs = np.zeros((100_000, 3))
    actions, log_probs = sample_action(params, obs, np.random.default_rng(3))
    spread = (actions - params.actor(obs)).std(axis=0)
    np.testing.assert_allclose(spread, np.exp(params.log_std), rtol=0.02)
    assert log_probs.shape == (100_000,)


def test_log_prob_matches_normal_density():
    mean, log_std, action = np.array([0.1, -0.2]), np.array([-1.0, 0.5]), np.array([0.3, 0.4])
    std = np.exp(log_std)
    expected = np.sum(-0.5 * ((action - mean) / std) ** 2 - np.log(std * math.sqrt(2.0 * math.pi)))
    assert log_prob(mean, log_std, action) == pytest.approx(expected, abs=1e-12)


def test_entropy_closed_form():
    log_std = np.array([-1.2, 0.0, 0.7])
    assert entropy(log_std) == pytest.approx(np.sum(log_std + 0.5 * math.log(2.0 * math.pi * math.e)), abs=1e-12)


def test_gae_terminal_episode():
    adv, ret = gae([1.0, 1.0], [0.0, 0.0], [False, True], 0.0, gamma=1.0, lam=1.0)
    np.testing.assert_allclose(adv, [2.0, 1.0])
    np.testing.assert_allclose(ret, [2.0, 1.0])


def test_gae_zero_rewards():
    adv, _ = gae(np.zeros(5), np.zeros(5), np.zeros(5, dtype=bool), 0.0, gamma=0.99, lam=0.95)
    np.testing.assert_array_equal(adv, 0.0)


def test_gae_lambda_zero_gives_td_residuals():
    rng = np.random.default_rng(4)
    rewards, values = rng.normal(size=6), rng.normal(size=6)
    dones = np.array([False, False, True, False, False, False])
    last = 0.7
    adv, _ = gae(rewards, values, dones, last, gamma=0.9, lam=0.0)
    next_values = np.append(values[1:], last)
    expected = rewards + 0.9 * next_values * (1.0 - dones) - values
    np.testing.assert_allclose(adv, expected, atol=1e-12)


def test_gae_bootstraps_truncated_episodes():
    adv, _ = gae([1.0], [0.0], [True], 5.0, gamma=0.5, lam=1.0, bootstrap=[2.0])
    np.testing.assert_allclose(adv, [2.0])


def test_gae_empty_rollout():
    with pytest.raises(RolloutError):
        gae([], [], [], 0.0, gamma=0.99, lam=0.95)


def test_advantage_normalization():
    adv = normalize_advantages(np.random.default_rng(5).normal(3.0, 4.0, size=513))
    assert abs(adv.mean()) < 1e-10
    assert abs(adv.std() - 1.0) < 1e-10


def test_buffer_quotas_cover_capacity():
    buffer = RolloutBuffer(20480, 12, 4, 2)
    assert buffer.quotas.sum() == 20480
    assert buffer.quotas.max() - buffer.quotas.min() <= 1


def test_compute_gae_respects_copies():
    buffer = RolloutBuffer(4, 2, 1, 1)
    for _ in range(2):
        buffer.add(np.zeros((2, 1)), np.zeros((2, 1)), [0.0, 0.0], [1.0, 0.0], [0.0, 0.0], [False, False])
    buffer.finish([0.0, 10.0])
    adv, ret = compute_gae(buffer, gamma=1.0, lam=1.0, normalize=False)
    # copy 0: rewards [1, 1]; copy 1: zero rewards then a bootstrap of 10
    np.testing.assert_allclose(adv, [2.0, 1.0, 10.0, 10.0])
    np.testing.assert_allclose(ret, adv)


def test_buffer_rejects_overflow_and_empty_use():
    buffer = RolloutBuffer(2, 1, 1, 1)
    with pytest.raises(RolloutError):
        compute_gae(buffer, 0.99, 0.95)
    for _ in range(2):
        buffer.add(np.zeros((1, 1)), np.zeros((1, 1)), [0.0], [0.0], [0.0], [False])
    assert buffer.full
    with pytest.raises(RolloutError):
        buffer.add(np.zeros((1, 1)), np.zeros((1, 1)), [0.0], [0.0], [0.0], [False], envs=[0])


def _minibatch(params, seed=0, size=16, ratio_noise=0.05):
    rng = np.random.default_rng(seed)
    obs = rng.normal(size=(size, params.obs_dim))
    actions = rng.normal(size=(size, params.act_dim))
    current = log_prob(params.actor(obs), params.log_std, actions)
    old = current + rng.uniform(-ratio_noise, ratio_noise, size)
    return obs, actions, old, rng.normal(size=size), rng.normal(size=size)


def test_loss_gradients_match_finite_differences():
    params = _tiny_policy(8)
    config = PpoConfig(batch_size=16, buffer_size=16)
    batch = _minibatch(params)
    _, _, grads = ppo_loss_and_grads(params, *batch, config)
    h = 1e-6
    for array, grad in zip(params.parameters(), grads):
        numeric = np.zeros_like(array)
        for index in np.ndindex(array.shape):
            saved = array[index]
            array[index] = saved + h
            plus = ppo_loss_and_grads(params, *batch, config)[0]
            array[index] = saved - h
            minus = ppo_loss_and_grads(params, *batch, config)[0]
            array[index] = saved
            numeric[index] = (plus - minus) / (2.0 * h)
        np.testing.assert_allclose(grad, numeric, rtol=1e-5, atol=1e-8)


def test_unit_ratio_surrogate_is_mean_advantage():
    params = _tiny_policy(9)
    obs, actions, _, advantages, returns = _minibatch(params, ratio_noise=0.0)
    old = log_prob(params.actor(obs), params.log_std, actions)
    _, stats, _ = ppo_loss_and_grads(params, obs, actions, old, advantages, returns, PpoConfig(batch_size=16, buffer_size=16))
    assert stats["policy_loss"] == pytest.approx(-advantages.mean(), abs=1e-12)
    assert stats["clip_fraction"] == 0.0


def test_huge_clip_range_equals_unclipped_surrogate():
    params = _tiny_policy(10)
    obs, actions, old, advantages, returns = _minibatch(params, ratio_noise=1.0)
    config = PpoConfig(batch_size=16, buffer_size=16, clip_epsilon=1e9)
    _, stats, _ = ppo_loss_and_grads(params, obs, actions, old, advantages, returns, config)
    ratio = np.exp(log_prob(params.actor(obs), params.log_std, actions) - old)
    assert stats["policy_loss"] == pytest.approx(-np.mean(ratio * advantages), abs=1e-12)


def test_zero_advantages_leave_only_entropy_on_the_actor():
    params = _tiny_policy(11)
    obs, actions, old, _, returns = _minibatch(params)
    config = PpoConfig(batch_size=16, buffer_size=16)
    _, _, grads = ppo_loss_and_grads(params, obs, actions, old, np.zeros(16), returns, config)
    actor_count = len(params.actor.parameters())
    for grad in grads[:actor_count]:
        np.testing.assert_array_equal(grad, 0.0)
    np.testing.assert_allclose(grads[-1], -config.entropy_coeff)


def test_ppo_config_validation():
    with pytest.raises(ValidationError):
        PpoConfig(batch_size=3, buffer_size=10)
    with pytest.raises(ValidationError):
        PpoConfig(gamma=0.0)


def test_ppo_update_changes_params_and_reports_stats():
    params = _tiny_policy(12)
    buffer = _filled_buffer(params)
    config = PpoConfig(batch_size=8, buffer_size=24, learning_rate=1e-2)
    updated, stats = ppo_update(params, buffer, config, Adam(config.learning_rate), np.random.default_rng(0))
    assert updated is not params
    assert not stats.aborted
    assert stats.minibatches == 9
    assert 0.0 <= stats.clip_fraction <= 1.0
    assert any(not np.array_equal(a, b) for a, b in zip(updated.parameters(), params.parameters()))


def test_ppo_update_is_deterministic():
    config = PpoConfig(batch_size=8, buffer_size=24)
    results = []
    for _ in range(2):
        params = _tiny_policy(13)
        buffer = _filled_buffer(params, seed=1)
        updated, _ = ppo_update(params, buffer, config, Adam(config.learning_rate), np.random.default_rng(5))
        results.append(updated.parameters())
    for a, b in zip(*results):
        np.testing.assert_array_equal(a, b)


def test_ppo_update_needs_a_full_buffer():
    params = _tiny_policy()
    config = PpoConfig(batch_size=8, buffer_size=24)
    buffer = RolloutBuffer(24, 3, 3, 2)
    with pytest.raises(RolloutError):
        ppo_update(params, buffer, config, Adam(), np.random.default_rng(0))
    buffer.add(np.zeros((3, 3)), np.zeros((3, 2)), np.zeros(3), np.zeros(3), np.zeros(3), np.zeros(3, dtype=bool))
    with pytest.raises(RolloutError):
        ppo_update(params, buffer, config, Adam(), np.random.default_rng(0))
    _, stats = ppo_update(params, buffer, config, Adam(), np.random.default_rng(0), allow_partial=True)
    assert stats.minibatches == 3


def test_non_finite_loss_aborts_update():
    params = _tiny_policy(14)
    buffer = _filled_buffer(params)
    buffer.rewards[0, 0] = np.nan
    config = PpoConfig(batch_size=8, buffer_size=24)
    updated, stats = ppo_update(params, buffer, config, Adam(), np.random.default_rng(0))
    assert stats.aborted
    assert updated is params


def test_gradient_clipping():
    grads = [np.array([3.0, 4.0]), np.array([0.0])]
    clipped, norm = clip_by_global_norm(grads, 1.0)
    assert norm == pytest.approx(5.0)
    np.testing.assert_allclose(clipped[0], [0.6, 0.8])
    unchanged, _ = clip_by_global_norm(grads, 10.0)
    np.testing.assert_array_equal(unchanged[0], grads[0])


def test_checkpoint_round_trip(tmp_path):
    params = init_policy(26, 8, np.random.default_rng(0), actor_hidden=(16, 16), critic_hidden=(8,))
    path = tmp_path / "policy.ckpt"
    save_checkpoint(params, path, "full_RO")
    loaded, variant = load_checkpoint(path)
    assert variant == "full_RO"
    for a, b in zip(loaded.parameters(), params.parameters()):
        np.testing.assert_array_equal(a, b)
    obs = np.random.default_rng(1).normal(size=(5, 26))
    np.testing.assert_array_equal(policy_forward(loaded, obs)[0], policy_forward(params, obs)[0])


def test_truncated_checkpoint(tmp_path):
    path = tmp_path / "policy.ckpt"
    save_checkpoint(_tiny_policy(), path)
    data = path.read_bytes()
    path.write_bytes(data[:-3])
    with pytest.raises(CheckpointFormatError):
        load_checkpoint(path)
    path.write_bytes(data + b"\x00")
    with pytest.raises(CheckpointFormatError):
        load_checkpoint(path)
    path.write_bytes(b"NOTAPOLICY" + data[8:])
    with pytest.raises(CheckpointFormatError):
        load_checkpoint(path)


def test_checkpoint_compatibility():
    params = _tiny_policy()
    check_compatible(params, 3, 2)
    with pytest.raises(ConfigurationError):
        check_compatible(params, 26, 2)
