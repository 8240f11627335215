import math

import numpy as np
import pytest
from scipy.integrate import solve_ivp

from inlab.gaitgen import build_gait, constant_gait, reference_angles
from inlab.planarsim import (
    ContactParams,
    DisturbanceConfig,
    ModelOverrides,
    PlanarSimulator,
    SimConfig,
    StateRecorder,
    Termination,
    build_biped,
    build_pendulum,
    build_quadruped,
    contact_force,
    pd_torque,
)
from inlab.shared.errors import SimulationBlowupError


def _airborne(simulator, rng, height=2.0, joint_speed=0.3):
    """Quadruped in the air at a perturbed posture with random velocities."""
    model = simulator.model
    posture = np.radians(reference_angles(build_gait("quadruped", "trot"), 0.0))
    state = simulator.state_from_pose((0.0, height), 0.0, posture + rng.uniform(-0.1, 0.1, model.joint_count))
    state.v[:2] = rng.uniform(-1.0, 1.0, 2)
    state.v[2] = rng.uniform(-0.3, 0.3)
    state.v[3:] = rng.uniform(-joint_speed, joint_speed, model.joint_count)
    return state


def test_robot_joint_tables():
    quadruped, biped = build_quadruped(), build_biped()
    assert quadruped.joint_count == 8 and biped.joint_count == 6
    hip = quadruped.joints[0].range
    assert (hip.theta_min, hip.theta_max) == (-90.0, 210.0)
    knee = biped.joints[1].range
    assert (knee.theta_min, knee.theta_max) == (-170.0, 10.0)
    np.testing.assert_allclose(quadruped.tau_max, 33.5)


def test_model_overrides():
    model = build_quadruped(ModelOverrides(trunk_mass=10.0, kp=50.0))
    assert model.links[0].mass == 10.0
    np.testing.assert_allclose(model.kp, 50.0)


@pytest.mark.parametrize(
    "cmd, theta, theta_dot, expected",
    [(0.3, 0.3, 0.0, 0.0), (0.1, 0.0, 0.0, 18.0), (10.0, 0.0, 0.0, 33.5), (-10.0, 0.0, 0.0, -33.5)],
)
def test_pd_torque(cmd, theta, theta_dot, expected):
    assert pd_torque(cmd, theta, theta_dot, 180.0, 8.0, 33.5) == pytest.approx(expected)


def test_contact_force_examples():
    params = ContactParams()
    np.testing.assert_array_equal(contact_force([0.0, 0.0], [0.0, 0.0], params), [0.0, 0.0])
    np.testing.assert_array_equal(contact_force([0.0, 0.01], [0.0, -1.0], params), [0.0, 0.0])
    np.testing.assert_allclose(contact_force([0.0, -0.001], [0.0, 0.0], params), [0.0, 50.0])
    # separating faster than the spring pushes
    np.testing.assert_array_equal(contact_force([0.0, -0.001], [0.0, 1.0], params), [0.0, 0.0])


def test_contact_force_is_unilateral_and_inside_friction_cone():
    params = ContactParams()
    rng = np.random.default_rng(4)
    for _ in range(1000):
        force = contact_force([0.0, rng.uniform(-0.01, 0.01)], rng.normal(scale=0.5, size=2), params)
        assert force[1] >= 0.0
        assert abs(force[0]) <= params.friction * force[1] + 1e-9


def test_zero_gravity_equilibrium():
    simulator = PlanarSimulator(build_quadruped(), SimConfig(gravity=0.0, contacts_enabled=False))
    gait = build_gait("quadruped", "trot")
    start = simulator.state_from_pose((0.0, 1.0), 0.0, np.radians(reference_angles(gait, 0.0)))
    state = start
    for _ in range(20):
        state = simulator.step(state, None)
    np.testing.assert_allclose(state.q, start.q, atol=1e-12)
    np.testing.assert_allclose(state.v, 0.0, atol=1e-12)


def test_airborne_momentum():
    simulator = PlanarSimulator(build_quadruped(), SimConfig(contacts_enabled=False))
    mass = simulator.model.total_mass
    g, dt = simulator.config.gravity, simulator.config.control_dt
    rng = np.random.default_rng(5)
    for _ in range(100):
        state = _airborne(simulator, rng)
        before = simulator.linear_momentum(state)
        after = simulator.linear_momentum(simulator.step(state, None))
        assert after[0] == pytest.approx(before[0], abs=1e-9)
        assert after[1] == pytest.approx(before[1] - mass * g * dt, abs=1e-9)


@pytest.mark.parametrize("seed", [6, 7, 8])
def test_energy_is_conserved_without_contacts(seed):
    simulator = PlanarSimulator(build_quadruped(), SimConfig(contacts_enabled=False, substeps=100))
    assert simulator.config.substep_dt == pytest.approx(1e-4)
    state = _airborne(simulator, np.random.default_rng(seed), joint_speed=0.1)
    start = simulator.mechanical_energy(state)
    for _ in range(100):
        state = simulator.step(state, None)
    assert state.time == pytest.approx(1.0)
    assert abs(simulator.mechanical_energy(state) - start) < 1e-3 * abs(start)


def _limit_excess_deg(model, state):
    theta = state.joint_angles
    return float(np.degrees(np.max(np.abs(theta - np.clip(theta, model.theta_min, model.theta_max)))))


@pytest.mark.parametrize("build", [build_quadruped, build_biped])
def test_joint_limits_hold_under_random_torques(build):
    simulator = PlanarSimulator(build(), SimConfig(gravity=0.0, contacts_enabled=False))
    model = simulator.model
    rng = np.random.default_rng(11)
    midpoint = 0.5 * (model.theta_min + model.theta_max)
    state = simulator.state_from_pose((0.0, 1.0), 0.0, midpoint)
    worst = 0.0
    for _ in range(200):
        torque = rng.uniform(-0.5 * model.tau_max, 0.5 * model.tau_max)
        state = simulator.step(state, None, extra_torque=torque)
        worst = max(worst, _limit_excess_deg(model, state))
    assert worst < 2.0


def test_joint_limits_hold_for_random_commands_on_the_ground():
    simulator = PlanarSimulator(build_biped())
    model = simulator.model
    rng = np.random.default_rng(12)
    state = simulator.reset_robot(build_gait("biped", "walk"))
    low, high = np.degrees(model.theta_min), np.degrees(model.theta_max)
    for _ in range(150):
        state = simulator.step(state, rng.uniform(low, high))
        assert _limit_excess_deg(model, state) < 2.0


def test_joint_stop_removes_outward_velocity():
    simulator = PlanarSimulator(build_pendulum(1.0, 0.3), SimConfig(gravity=0.0, contacts_enabled=False))
    model = simulator.model
    state = simulator.state_from_pose((0.0, 1.0), 0.0, [model.theta_max[0] - 0.01])
    state.v[3] = 20.0
    state = simulator.step(state, None)
    assert state.joint_angles[0] <= model.theta_max[0] + math.radians(simulator.config.limit_margin_deg) + 1e-12
    assert state.v[3] <= 0.0


def test_single_pendulum_matches_ode_solution():
    mass, length, theta0 = 1.0, 0.3, 0.3
    simulator = PlanarSimulator(build_pendulum(mass, length), SimConfig(substeps=500, contacts_enabled=False))
    state = simulator.state_from_pose((0.0, 1.0), 0.0, [theta0])
    times, angles = [], []
    for _ in range(100):
        state = simulator.step(state, None)
        times.append(state.time)
        angles.append(state.joint_angles[0])

    g = simulator.config.gravity
    inertia = mass * length ** 2 / 3.0

    def pendulum(_, y):
        return [y[1], -mass * g * 0.5 * length * math.sin(y[0]) / inertia]

    reference = solve_ivp(pendulum, (0.0, times[-1]), [theta0, 0.0], method="DOP853", t_eval=times, rtol=1e-11, atol=1e-12)
    np.testing.assert_allclose(angles, reference.y[0], atol=1e-4)


def test_fixed_base_stays_pinned():
    simulator = PlanarSimulator(build_quadruped(ModelOverrides(fixed_base=True)))
    state = simulator.reset_robot(build_gait("quadruped", "trot"))
    base = state.q[:3].copy()
    for _ in range(10):
        state = simulator.step(state, np.zeros(8))
    np.testing.assert_array_equal(state.q[:3], base)


def test_quadruped_stands_on_its_posture():
    simulator = PlanarSimulator(build_quadruped())
    gait = build_gait("quadruped", "trot")
    state = simulator.reset_robot(gait)
    command = reference_angles(gait, 0.0)
    for _ in range(50):
        state = simulator.step(state, command)
    assert simulator.check_termination(state) == Termination.CONTINUE
    assert abs(math.degrees(state.pitch)) < 5.0
    assert simulator.base_pose(state)[1] > 0.1
    assert np.all(simulator.foot_positions(state)[:, 1] > -0.01)
    assert state.contacts.any()


def test_reset_robot():
    simulator = PlanarSimulator(build_biped())
    gait = build_gait("biped", "walk")
    state = simulator.reset_robot(gait)
    assert state.pitch == 0.0
    np.testing.assert_allclose(np.degrees(state.joint_angles), reference_angles(gait, 0.0))
    np.testing.assert_array_equal(state.v, 0.0)
    assert simulator.foot_positions(state)[:, 1].min() == pytest.approx(0.0, abs=1e-12)


def test_reset_with_symmetric_posture_places_feet_symmetrically():
    simulator = PlanarSimulator(build_quadruped())
    ranges = simulator.model.joint_ranges
    state = simulator.reset_robot(constant_gait("quadruped", [r.midpoint for r in ranges]))
    feet = simulator.foot_positions(state)
    np.testing.assert_allclose(feet[0], feet[1])
    np.testing.assert_allclose(feet[2], feet[3])
    # front and hind feet sit one hip spacing apart at the same height
    assert feet[0, 0] - feet[2, 0] == pytest.approx(simulator.model.links[0].length)
    assert feet[0, 1] == pytest.approx(feet[2, 1], abs=1e-12)


@pytest.mark.parametrize(
    "pitch_deg, step, expected",
    [(0.0, 5, Termination.CONTINUE), (10.1, 5, Termination.FELL), (-10.1, 5, Termination.FELL), (2.0, 1000, Termination.TIMEOUT)],
)
def test_check_termination(pitch_deg, step, expected):
    simulator = PlanarSimulator(build_quadruped())
    state = simulator.state_from_pose((0.0, 0.3), math.radians(pitch_deg), np.zeros(8))
    state.step = step
    assert simulator.check_termination(state) == expected


def test_disabled_push_leaves_state_untouched():
    simulator = PlanarSimulator(build_quadruped())
    state = simulator.reset_robot(build_gait("quadruped", "trot"))
    assert simulator.apply_push(state, np.random.default_rng(0)) is state


def _pushed_run(disturbance, seed, steps=30):
    simulator = PlanarSimulator(build_quadruped(), disturbance=disturbance)
    gait = build_gait("quadruped", "trot")
    rng = np.random.default_rng(seed)
    state = simulator.reset_robot(gait)
    forces = []
    for _ in range(steps):
        state = simulator.apply_push(state, rng)
        forces.append(state.push_force)
        state = simulator.step(state, reference_angles(gait, state.time))
    return state, forces


def test_zero_magnitude_push_changes_nothing():
    quiet, _ = _pushed_run(DisturbanceConfig(), 0)
    zero, _ = _pushed_run(DisturbanceConfig(enabled=True, magnitude=(0.0, 0.0), interval=(0.05, 0.05)), 0)
    np.testing.assert_array_equal(quiet.q, zero.q)
    np.testing.assert_array_equal(quiet.v, zero.v)


def test_push_schedule_is_reproducible():
    cfg = DisturbanceConfig(enabled=True, magnitude=(5.0, 20.0), interval=(0.05, 0.1), duration=0.03)
    first_state, first = _pushed_run(cfg, 11)
    second_state, second = _pushed_run(cfg, 11)
    assert first == second
    assert any(f != 0.0 for f in first)
    np.testing.assert_array_equal(first_state.q, second_state.q)


def test_blowup_is_reported():
    simulator = PlanarSimulator(build_quadruped())
    state = simulator.reset_robot(build_gait("quadruped", "trot"))
    state.v[:] = np.nan
    with pytest.raises(SimulationBlowupError):
        simulator.step(state, None)


def test_state_recorder_writes_csv(tmp_path):
    simulator = PlanarSimulator(build_quadruped())
    gait = build_gait("quadruped", "trot")
    recorder = StateRecorder(simulator)
    state = simulator.reset_robot(gait)
    for _ in range(3):
        state = simulator.step(state, reference_angles(gait, state.time))
        recorder.record(state)
    path = tmp_path / "trace.csv"
    recorder.to_csv(path)
    lines = path.read_text().splitlines()
    assert lines[0].startswith("time,base_x,base_z,pitch_deg,FL_hip_deg")
    assert len(lines) == 4
