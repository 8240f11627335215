import numpy as np
import pytest
from pydantic import ValidationError

from inlab.actionpipe import (
    ActionPipeline,
    FeedbackConfig,
    PipelineState,
    bounding_violation,
    compose,
    filter_step,
    reset,
    to_command_angle,
)
from inlab.gaitgen import JointRange
from inlab.shared.errors import ConfigurationError


def _state(*values):
    return PipelineState(a_fb_last=np.array(values, dtype=float))


@pytest.mark.parametrize(
    "last, a_nn, expected",
    [(0.3, 0.3, 0.3), (0.5, -0.5, 0.4), (0.0, 3.0, 0.1)],
)
def test_filter_step(last, a_nn, expected):
    a_fb, state = filter_step(_state(last), np.array([a_nn]))
    assert a_fb[0] == pytest.approx(expected)
    assert state.a_fb_last[0] == pytest.approx(expected)


def test_compose_inl_zero_feedback_ratio_passes_feedforward():
    a_ff = np.array([0.3, -0.7, 0.1])
    a_t = compose(a_ff, np.array([1.0, -1.0, 0.5]), FeedbackConfig(mode="INL", k_b=0.0))
    np.testing.assert_array_equal(a_t, a_ff)


def test_compose_inl_and_iml():
    a_ff, a_fb = np.array([0.3]), np.array([0.4])
    assert compose(a_ff, a_fb, FeedbackConfig(mode="INL", k_b=0.5))[0] == pytest.approx(0.5)
    assert compose(a_ff, a_fb, FeedbackConfig(mode="IML", k_b=0.5))[0] == pytest.approx(0.4)


def test_per_joint_feedback_ratio():
    cfg = FeedbackConfig(mode="INL", k_b=[0.0, 1.0])
    a_t = compose(np.array([0.2, 0.2]), np.array([0.5, 0.5]), cfg)
    np.testing.assert_allclose(a_t, [0.2, 0.7])
    with pytest.raises(ConfigurationError):
        cfg.kb_vector(3)


def test_feedback_ratio_range():
    with pytest.raises(ValidationError):
        FeedbackConfig(k_b=2.5)
    with pytest.raises(ValidationError):
        FeedbackConfig(k_b=[0.5, -0.1])


@pytest.mark.parametrize(
    "a, lo, hi, expected",
    [(0.0, -30.0, 30.0, 0.0), (1.6, -30.0, 30.0, 30.0), (-0.5, -170.0, 10.0, -125.0)],
)
def test_to_command_angle(a, lo, hi, expected):
    assert to_command_angle(a, lo, hi) == pytest.approx(expected)


def test_reset_zeroes_memory():
    cleared = reset(_state(0.4, -0.9))
    np.testing.assert_array_equal(cleared.a_fb_last, [0.0, 0.0])
    a_fb, _ = filter_step(cleared, np.zeros(2))
    np.testing.assert_array_equal(a_fb, [0.0, 0.0])
    a_t = compose(np.array([0.25, -0.5]), a_fb, FeedbackConfig(k_b=0.5))
    np.testing.assert_array_equal(a_t, [0.25, -0.5])


def _pipeline(mode="INL", k_b=0.5):
    ranges = [JointRange(theta_min=-90.0, theta_max=210.0), JointRange(theta_min=-94.5, theta_max=7.5)]
    return ActionPipeline(ranges, FeedbackConfig(mode=mode, k_b=k_b))


def test_inl_output_stays_within_feedback_bound():
    rng = np.random.default_rng(0)
    pipeline = _pipeline(k_b=0.3)
    for _ in range(1000):
        a_ff = rng.uniform(-1.0, 1.0, size=2)
        _, a_t, _ = pipeline(rng.normal(scale=5.0, size=2), a_ff)
        assert np.all(np.abs(a_t - a_ff) <= 0.3 + 1e-12)
        assert bounding_violation(a_t, a_ff, pipeline.k_b) <= 1e-12


def test_iml_output_is_filtered_feedback():
    rng = np.random.default_rng(1)
    pipeline = _pipeline(mode="IML")
    for _ in range(50):
        _, a_t, a_fb = pipeline(rng.normal(size=2), rng.uniform(-1.0, 1.0, size=2))
        np.testing.assert_array_equal(a_t, a_fb)


def test_pipeline_is_deterministic():
    rng = np.random.default_rng(2)
    inputs = [(rng.normal(size=2), rng.uniform(-1.0, 1.0, size=2)) for _ in range(20)]
    first, second = _pipeline(), _pipeline()
    for a_nn, a_ff in inputs:
        for out_a, out_b in zip(first(a_nn, a_ff), second(a_nn, a_ff)):
            np.testing.assert_array_equal(out_a, out_b)


def test_pipeline_reset_restarts_filter():
    pipeline = _pipeline()
    pipeline(np.ones(2), np.zeros(2))
    pipeline.reset()
    _, a_t, a_fb = pipeline(np.zeros(2), np.array([0.1, 0.2]))
    np.testing.assert_array_equal(a_fb, [0.0, 0.0])
    np.testing.assert_array_equal(a_t, [0.1, 0.2])


def test_command_angles_respect_joint_ranges():
    pipeline = _pipeline(k_b=2.0)
    theta, _, _ = pipeline(np.full(2, 10.0), np.ones(2))
    np.testing.assert_allclose(theta, [210.0, 7.5])


def test_filter_matches_oracle_on_random_cases():
    rng = np.random.default_rng(21)
    for _ in range(200):
        last = rng.uniform(-1.0, 1.0, 4)
        a_nn = rng.uniform(-3.0, 3.0, 4)
        a_fb, _ = filter_step(PipelineState(a_fb_last=last), a_nn)
        expected = last + 0.1 * (np.minimum(np.maximum(a_nn, -1.0), 1.0) - last)
        np.testing.assert_allclose(a_fb, expected, rtol=0.0, atol=1e-12)


def test_compose_matches_oracle_on_random_cases():
    rng = np.random.default_rng(22)
    for _ in range(200):
        a_ff, a_fb = rng.uniform(-1.0, 1.0, 6), rng.uniform(-1.0, 1.0, 6)
        k_b = rng.uniform(0.0, 2.0, 6)
        inl = compose(a_ff, a_fb, FeedbackConfig(mode="INL", k_b=k_b.tolist()))
        np.testing.assert_allclose(inl, [f + k * b for f, k, b in zip(a_ff, k_b, a_fb)], rtol=0.0, atol=1e-12)
        iml = compose(a_ff, a_fb, FeedbackConfig(mode="IML"))
        np.testing.assert_array_equal(iml, a_fb)


def test_command_angle_matches_oracle_on_random_cases():
    rng = np.random.default_rng(23)
    for _ in range(200):
        lo = rng.uniform(-180.0, 0.0)
        hi = lo + rng.uniform(1.0, 300.0)
        a_t = rng.uniform(-2.0, 2.0)
        sat = min(max(a_t, -1.0), 1.0)
        expected = 0.5 * (lo + hi) + sat * 0.5 * (hi - lo)
        assert to_command_angle(a_t, lo, hi) == pytest.approx(expected, rel=0.0, abs=1e-12)


@pytest.mark.parametrize("start, target", [(0.0, 0.7), (-1.0, 1.0), (0.8, -0.3), (0.2, 5.0)])
def test_filter_converges_geometrically_to_a_held_input(start, target):
    state = _state(start)
    goal = min(max(target, -1.0), 1.0)
    for k in range(1, 80):
        a_fb, state = filter_step(state, np.array([target]))
        assert abs(a_fb[0] - goal) <= 0.9 ** k * abs(start - goal) + 1e-12
