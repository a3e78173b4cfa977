"""Simulator tests against closed-form mechanics oracles."""

import numpy as np
import pytest

from pressfit import sim
from pressfit.types import Pose, mirror_y


def free_space_config(**overrides):
    """A world whose obstacles are far away from the origin."""
    far = sim.Rect([100.0, 100.0], [0.01, 0.01])
    defaults = dict(
        container=far,
        placed_cartons=(),
        carton_half=np.array([0.025, 0.02]),
        grasp_offset=np.zeros(2),
        sensor_noise_std=0.0,
        sensor_noise_std_torque=0.0,
    )
    defaults.update(overrides)
    return sim.WorldConfig(**defaults)


def critically_damped_response(t, x0, omega):
    """Analytic step response of xdd = -omega^2 x - 2 omega xd from rest."""
    return x0 * (1.0 + omega * t) * np.exp(-omega * t)


def test_free_space_matches_analytic_step_response():
    """A constant attractor offset in free space follows the critically
    damped second-order response; the discretization error at t = 5/omega
    must stay within an absolute 1e-3 m."""
    config = free_space_config()
    ks, x0 = 600.0, 0.05
    omega = np.sqrt(ks / config.ee_mass[0])
    state = sim.initial_state(Pose(np.array([x0, 0.0, 0.0])), stiffness=np.full(3, ks))
    state.attractor = Pose(np.zeros(3))
    rng = np.random.default_rng(0)
    horizon = 5.0 / omega
    while state.time < horizon:
        state = sim.step(state, config, rng)
    expected = critically_damped_response(state.time, x0, omega)
    assert abs(state.ee_pose.position[0] - expected) < 1e-3


def test_static_contact_force_balance():
    """Held in penetration at rest, the contact force equals
    stiffness * penetration exactly (no damping term at zero velocity)."""
    wall = sim.Rect([0.1, 0.0], [0.05, 0.05])
    config = free_space_config(container=sim.Rect([-1.0, 0.0], [0.01, 0.01]),
                               placed_cartons=(wall,))
    pen = 0.001
    carton = sim.Rect([0.05 - 0.025 + pen, 0.0], config.carton_half)
    f, contacts = sim.contact_forces(carton, np.zeros(2), config)
    assert len(contacts) == 1
    assert f[0] == pytest.approx(-config.carton_stiffness * pen)
    assert f[1] == 0.0


def test_contacts_never_pull():
    """A fast separating velocity cannot produce an attractive force."""
    wall = sim.Rect([0.1, 0.0], [0.05, 0.05])
    config = free_space_config(container=sim.Rect([-1.0, 0.0], [0.01, 0.01]),
                               placed_cartons=(wall,))
    carton = sim.Rect([0.05 - 0.025 + 1e-4, 0.0], config.carton_half)
    f, contacts = sim.contact_forces(carton, np.array([-1.0, 0.0]), config)
    assert np.all(f == 0.0)
    assert contacts == []


def test_energy_decays_in_free_space():
    """Without contacts the impedance law dissipates: kinetic plus spring
    energy is monotonically non-increasing."""
    config = free_space_config()
    ks = np.full(3, 600.0)
    state = sim.initial_state(Pose(np.array([0.03, -0.02, 0.0])), stiffness=ks)
    state.attractor = Pose(np.zeros(3))
    rng = np.random.default_rng(1)
    prev = np.inf
    for _ in range(500):
        state = sim.step(state, config, rng)
        dx = state.attractor.position - state.ee_pose.position
        energy = 0.5 * config.ee_mass @ state.ee_velocity**2 + 0.5 * ks @ dx**2
        assert energy <= prev + 1e-12
        prev = energy


def test_step_is_deterministic_per_seed():
    config, start, _goal = sim.spawn_scenario("training")
    def roll(seed):
        state = sim.initial_state(start)
        state.attractor = Pose(start.position + np.array([0.005, 0.0, 0.0]))
        rng = np.random.default_rng(seed)
        for _ in range(100):
            state = sim.step(state, config, rng)
        return state
    a, b, c = roll(5), roll(5), roll(6)
    assert np.array_equal(a.ee_pose.position, b.ee_pose.position)
    assert a.wrench == b.wrench
    assert not np.array_equal(a.wrench.as_array(), c.wrench.as_array())


def test_instability_guard_triggers():
    config = free_space_config()
    state = sim.initial_state(Pose(np.zeros(3)), stiffness=np.full(3, 600.0))
    state.ee_velocity = np.array([4.99, 0.0, 0.0])
    state.attractor = Pose(np.array([10.0, 0.0, 0.0]))
    rng = np.random.default_rng(0)
    with pytest.raises(sim.SimInstabilityError):
        for _ in range(50):
            state = sim.step(state, config, rng)


def test_z_axis_is_frozen():
    config, start, _ = sim.spawn_scenario("training")
    state = sim.initial_state(start)
    state.attractor = Pose(start.position + np.array([0.0, 0.0, 0.05]))
    rng = np.random.default_rng(2)
    for _ in range(200):
        state = sim.step(state, config, rng)
    assert state.ee_pose.position[2] == start.position[2]


def test_wall_rects_leave_front_open():
    config, _, _ = sim.spawn_scenario("training")
    back, left, right = config.wall_rects()
    c = config.container
    assert back.center[0] > c.center[0] + c.half[0]
    assert left.center[1] < c.center[1] - c.half[1]
    assert right.center[1] > c.center[1] + c.half[1]
    front_x = c.center[0] - c.half[0]
    for wall in (back, left, right):
        # nothing blocks approach along the low-x opening at the slot center
        assert not (
            abs(wall.center[1] - c.center[1]) <= wall.half[1]
            and wall.center[0] - wall.half[0] <= front_x
        )


def test_slot_admits_carton_with_clearance():
    """The gap between the placed flank cartons fits the grasped carton with
    the configured clearance on each side."""
    config, _, goal = sim.spawn_scenario("training")
    flanks = sorted(config.placed_cartons, key=lambda r: r.center[1])
    lower, upper = flanks[0], flanks[-1]
    gap_lo = lower.center[1] + lower.half[1]
    gap_hi = upper.center[1] - upper.half[1]
    width = gap_hi - gap_lo
    assert width == pytest.approx(2 * config.carton_half[1] + 2 * sim.SLOT_CLEARANCE)
    assert gap_lo < goal.position[1] < gap_hi


def test_mirrored_world_mirrors_trajectory_and_wrench():
    """Reflecting the world across the x-z plane reflects the whole rollout:
    positions negate in y and wrenches transform through mirror_y."""
    config, start, _ = sim.spawn_scenario("grasp_1")
    quiet = sim.WorldConfig.from_dict(
        {**config.to_dict(), "sensor_noise_std": 0.0, "sensor_noise_std_torque": 0.0}
    )
    mirrored = quiet.mirrored_y()

    def roll(cfg, start_pose, dy_sign):
        state = sim.initial_state(start_pose)
        target = start_pose.position + np.array([0.06, dy_sign * 0.002, 0.0])
        state.attractor = Pose(target)
        rng = np.random.default_rng(0)
        out = []
        for _ in range(400):
            state = sim.step(state, cfg, rng)
            out.append((state.ee_pose.position.copy(), state.wrench))
        return out

    mirror_start = Pose(start.position * np.array([1.0, -1.0, 1.0]))
    a = roll(quiet, start, 1.0)
    b = roll(mirrored, mirror_start, -1.0)
    for (pa, wa), (pb, wb) in zip(a, b):
        assert np.allclose(pa * np.array([1.0, -1.0, 1.0]), pb, atol=1e-12)
        assert np.allclose(mirror_y(wa).as_array(), wb.as_array(), atol=1e-12)


def test_world_config_json_round_trip():
    config, _, _ = sim.spawn_scenario("grasp_2")
    back = sim.WorldConfig.from_dict(config.to_dict())
    assert back.to_dict() == config.to_dict()


def test_config_validation():
    with pytest.raises(ValueError):
        free_space_config(dt=0.02)
    with pytest.raises(ValueError):
        free_space_config(carton_stiffness=6000.0, wall_stiffness=6000.0)


def test_unknown_preset_raises():
    with pytest.raises(sim.UnknownPresetError):
        sim.spawn_scenario("nonsense")


def test_presets_are_deterministic():
    for name in sim.PRESET_NAMES:
        c1, s1, g1 = sim.spawn_scenario(name)
        c2, s2, g2 = sim.spawn_scenario(name)
        assert c1.to_dict() == c2.to_dict()
        assert s1 == s2 and g1 == g2
