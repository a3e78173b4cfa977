"""Deterministic planar press-fit world.

Top-down x-y view: a container with three walls (front open, press axis +x),
previously placed cartons forming a tight slot, and a grasped carton rigidly
attached to an impedance-controlled end effector. Contacts are penalty
springs between axis-aligned rectangles; the wrench sensor reports the
negated net contact force on the carton plus Gaussian sensor noise.

z and orientation are frozen; out-of-plane wrench channels carry only noise.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace

import numpy as np

from .types import Pose, Wrench


class SimInstabilityError(Exception):
    """Velocity exceeded the configured cap; dt/stiffness misconfiguration."""


class UnknownPresetError(KeyError):
    pass


@dataclass(frozen=True)
class Rect:
    """Axis-aligned rectangle: center and half-extents, meters."""

    center: np.ndarray
    half: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "center", np.asarray(self.center, dtype=float).reshape(2))
        object.__setattr__(self, "half", np.asarray(self.half, dtype=float).reshape(2))

    def mirrored_y(self) -> "Rect":
        return Rect(self.center * np.array([1.0, -1.0]), self.half)

    def to_dict(self) -> dict:
        return {"center": self.center.tolist(), "half": self.half.tolist()}

    @staticmethod
    def from_dict(d: dict) -> "Rect":
        return Rect(np.array(d["center"]), np.array(d["half"]))


@dataclass(frozen=True)
class WorldConfig:
    container: Rect  # interior of the container
    placed_cartons: tuple  # Rects of already-placed cartons
    carton_half: np.ndarray  # half-extents of the grasped carton
    grasp_offset: np.ndarray  # end-effector -> carton center, meters
    wall_stiffness: float = 6000.0  # N/m
    carton_stiffness: float = 2000.0  # N/m, soft-body cartons
    contact_damping: float = 30.0  # N*s/m
    ee_mass: np.ndarray = field(default_factory=lambda: np.ones(3))  # diagonal, kg
    dt: float = 0.002  # s
    sensor_noise_std: float = 0.05  # N, per force channel
    sensor_noise_std_torque: float = 0.002  # N*m, per torque channel
    velocity_cap: float = 5.0  # m/s, instability guard
    wall_thickness: float = 0.04

    def __post_init__(self):
        object.__setattr__(self, "placed_cartons", tuple(self.placed_cartons))
        object.__setattr__(self, "carton_half", np.asarray(self.carton_half, dtype=float).reshape(2))
        object.__setattr__(self, "grasp_offset", np.asarray(self.grasp_offset, dtype=float).reshape(2))
        object.__setattr__(self, "ee_mass", np.asarray(self.ee_mass, dtype=float).reshape(3))
        if not 0 < self.dt <= 0.01:
            raise ValueError("dt must be in (0, 0.01]")
        if self.carton_stiffness >= self.wall_stiffness:
            raise ValueError("carton_stiffness must be below wall_stiffness")

    def wall_rects(self) -> tuple:
        """Back wall and two side walls; the front (low x) stays open."""
        c, h = self.container.center, self.container.half
        t = self.wall_thickness / 2.0
        back = Rect([c[0] + h[0] + t, c[1]], [t, h[1] + 2 * t])
        left = Rect([c[0], c[1] - h[1] - t], [h[0], t])  # negative-y side
        right = Rect([c[0], c[1] + h[1] + t], [h[0], t])
        return (back, left, right)

    def obstacles(self) -> tuple:
        """(rect, stiffness) pairs the grasped carton can collide with."""
        walls = tuple((r, self.wall_stiffness) for r in self.wall_rects())
        cartons = tuple((r, self.carton_stiffness) for r in self.placed_cartons)
        return walls + cartons

    def mirrored_y(self) -> "WorldConfig":
        """World reflected across the x-z plane (left/right swap)."""
        return replace(
            self,
            container=self.container.mirrored_y(),
            placed_cartons=tuple(r.mirrored_y() for r in self.placed_cartons),
            grasp_offset=self.grasp_offset * np.array([1.0, -1.0]),
        )

    def to_dict(self) -> dict:
        return {
            "container": self.container.to_dict(),
            "placed_cartons": [r.to_dict() for r in self.placed_cartons],
            "carton_half": self.carton_half.tolist(),
            "grasp_offset": self.grasp_offset.tolist(),
            "wall_stiffness": self.wall_stiffness,
            "carton_stiffness": self.carton_stiffness,
            "contact_damping": self.contact_damping,
            "ee_mass": self.ee_mass.tolist(),
            "dt": self.dt,
            "sensor_noise_std": self.sensor_noise_std,
            "sensor_noise_std_torque": self.sensor_noise_std_torque,
            "velocity_cap": self.velocity_cap,
            "wall_thickness": self.wall_thickness,
        }

    @staticmethod
    def from_dict(d: dict) -> "WorldConfig":
        return WorldConfig(
            container=Rect.from_dict(d["container"]),
            placed_cartons=tuple(Rect.from_dict(r) for r in d["placed_cartons"]),
            carton_half=np.array(d["carton_half"]),
            grasp_offset=np.array(d["grasp_offset"]),
            wall_stiffness=d["wall_stiffness"],
            carton_stiffness=d["carton_stiffness"],
            contact_damping=d["contact_damping"],
            ee_mass=np.array(d["ee_mass"]),
            dt=d["dt"],
            sensor_noise_std=d["sensor_noise_std"],
            sensor_noise_std_torque=d["sensor_noise_std_torque"],
            velocity_cap=d["velocity_cap"],
            wall_thickness=d["wall_thickness"],
        )

    @staticmethod
    def from_file(path) -> "WorldConfig":
        with open(path) as f:
            return WorldConfig.from_dict(json.load(f))


@dataclass
class SimState:
    ee_pose: Pose
    ee_velocity: np.ndarray
    attractor: Pose
    stiffness: np.ndarray
    wrench: Wrench
    time: float = 0.0

    def carton_center(self, config: WorldConfig) -> np.ndarray:
        return self.ee_pose.position[:2] + config.grasp_offset


@dataclass(frozen=True)
class Contact:
    point: np.ndarray  # 2-vector, world frame
    force: np.ndarray  # 2-vector, force on the grasped carton
    obstacle_index: int


def contact_forces(
    carton: Rect, carton_velocity, config: WorldConfig
) -> tuple[np.ndarray, list]:
    """Sum of penalty contact forces on the grasped carton.

    For each overlapping obstacle the force is
    stiffness * penetration - damping * v_n along the minimum-penetration
    axis, clamped at zero so contacts never pull. Returns the planar net
    force and the per-contact breakdown.
    """
    v = np.asarray(carton_velocity, dtype=float).reshape(2)
    total = np.zeros(2)
    contacts = []
    for i, (rect, stiffness) in enumerate(config.obstacles()):
        d = carton.center - rect.center
        overlap = carton.half + rect.half - np.abs(d)
        if overlap[0] <= 0.0 or overlap[1] <= 0.0:
            continue
        axis = 0 if overlap[0] < overlap[1] else 1
        normal = np.zeros(2)
        normal[axis] = 1.0 if d[axis] >= 0 else -1.0
        pen = overlap[axis]
        v_n = v @ normal  # obstacle static; positive = separating
        mag = stiffness * pen - config.contact_damping * v_n
        if mag <= 0.0:
            continue
        force = mag * normal
        # center of the overlap region
        lo = np.maximum(carton.center - carton.half, rect.center - rect.half)
        hi = np.minimum(carton.center + carton.half, rect.center + rect.half)
        point = 0.5 * (lo + hi)
        total += force
        contacts.append(Contact(point=point, force=force, obstacle_index=i))
    return total, contacts


def step(state: SimState, config: WorldConfig, rng: np.random.Generator) -> SimState:
    """One semi-implicit Euler step of the impedance law.

    mass * xdd = K_s * (attractor - x) - D * xd + f_ext, with per-axis
    critical damping D_i = 2 sqrt(K_s_i * mass_i). z is frozen. The carton
    follows the end effector rigidly through the grasp offset.
    """
    pos = state.ee_pose.position
    vel = state.ee_velocity
    ks = state.stiffness
    mass = config.ee_mass

    carton = Rect(pos[:2] + config.grasp_offset, config.carton_half)
    f2, contacts = contact_forces(carton, vel[:2], config)
    f_ext = np.array([f2[0], f2[1], 0.0])

    dx = state.attractor.position - pos
    damping = 2.0 * np.sqrt(ks * mass)
    acc = (ks * dx - damping * vel + f_ext) / mass

    new_vel = vel + config.dt * acc
    new_vel[2] = 0.0  # planar
    if np.linalg.norm(new_vel) > config.velocity_cap:
        raise SimInstabilityError(
            f"velocity {np.linalg.norm(new_vel):.2f} m/s exceeds cap; "
            "check dt against stiffness"
        )
    new_pos = pos + config.dt * new_vel

    torque_z = 0.0
    for c in contacts:
        r = c.point - pos[:2]
        torque_z += r[0] * c.force[1] - r[1] * c.force[0]
    noise_f = rng.normal(0.0, config.sensor_noise_std, 3)
    noise_t = rng.normal(0.0, config.sensor_noise_std_torque, 3)
    wrench = Wrench(-f_ext + noise_f, np.array([0.0, 0.0, -torque_z]) + noise_t)

    return SimState(
        ee_pose=Pose(new_pos, state.ee_pose.orientation),
        ee_velocity=new_vel,
        attractor=state.attractor,
        stiffness=ks,
        wrench=wrench,
        time=state.time + config.dt,
    )


def initial_state(start: Pose, stiffness=None) -> SimState:
    ks = np.full(3, 600.0) if stiffness is None else np.asarray(stiffness, float)
    return SimState(
        ee_pose=start,
        ee_velocity=np.zeros(3),
        attractor=start,
        stiffness=ks,
        wrench=Wrench.zero(),
        time=0.0,
    )


# --- scenario presets ------------------------------------------------------
#
# Geometry scaled from the reference setup: training goal at (0.80, -0.05)
# with the press axis along +x, start 0.06 m behind the goal. Container and
# carton dimensions are desk-scale choices (not authoritative). Vertical
# start offsets are mapped onto the lateral axis because the world is planar.

TRAINING_GOAL = np.array([0.80, -0.05, 0.43])
TRAINING_START = np.array([0.74, -0.05, 0.43])
PLANE_Z = 0.43

CARTON_HALF = np.array([0.025, 0.02])
SLOT_CLEARANCE = 0.002  # per side

_CONTAINER = Rect(center=[0.785, -0.05], half=[0.04, 0.12])
_BACK_X = 0.825  # interior face of the back wall
# slot half-width plus a flank half-extent gives the flank center offset
_FLANK_OFFSET = (CARTON_HALF[1] + SLOT_CLEARANCE) + CARTON_HALF[1]

_PLACED = (
    Rect(center=[0.80, -0.05 + _FLANK_OFFSET], half=CARTON_HALF),
    Rect(center=[0.80, -0.05 - _FLANK_OFFSET], half=CARTON_HALF),
)

# (start offset, estimated-goal offset, grasp offset) per preset
_PRESETS = {
    "training": (np.zeros(3), np.zeros(3), np.zeros(2)),
    # start variations: lateral/axial offsets of the starting pose
    "start_variation_1": (np.zeros(3), np.zeros(3), np.zeros(2)),
    "start_variation_2": (np.array([0.0, 0.09, 0.0]), np.zeros(3), np.zeros(2)),
    "start_variation_3": (np.array([0.0, 0.06, 0.0]), np.zeros(3), np.zeros(2)),
    "start_variation_4": (np.array([0.0, -0.09, 0.0]), np.zeros(3), np.zeros(2)),
    "start_variation_5": (np.array([-0.15, -0.09, 0.0]), np.zeros(3), np.zeros(2)),
    # goal variations: error in the estimated goal pose handed to the policy
    "goal_1": (np.zeros(3), np.zeros(3), np.zeros(2)),
    "goal_2": (np.zeros(3), np.array([-0.003, 0.0, 0.0]), np.zeros(2)),
    "goal_3": (np.zeros(3), np.array([0.0, 0.001, 0.0]), np.zeros(2)),
    "goal_4": (np.zeros(3), np.array([0.0, 0.004, 0.0]), np.zeros(2)),
    "goal_5": (np.zeros(3), np.array([0.0, -0.004, 0.0]), np.zeros(2)),
    # grasp variations: carton held off-center relative to the demonstration
    "grasp_1": (np.zeros(3), np.zeros(3), np.array([0.0, 0.0035])),
    "grasp_2": (np.zeros(3), np.zeros(3), np.array([0.0, -0.0035])),
    "grasp_3": (np.zeros(3), np.zeros(3), np.array([0.0, 0.004])),
    "grasp_4": (np.zeros(3), np.zeros(3), np.zeros(2)),
    "grasp_5": (np.zeros(3), np.zeros(3), np.array([0.0, -0.004])),
}

PRESET_NAMES = tuple(_PRESETS)


def spawn_scenario(preset: str, **overrides) -> tuple[WorldConfig, Pose, Pose]:
    """Deterministic world plus start/goal poses for a named preset.

    Returns (config, start, goal) where `goal` is the estimated goal pose the
    runtime monitors against (goal presets deliberately carry a small
    estimation error relative to the true slot center).
    """
    if preset not in _PRESETS:
        raise UnknownPresetError(preset)
    start_off, goal_off, grasp = _PRESETS[preset]
    config = WorldConfig(
        container=_CONTAINER,
        placed_cartons=_PLACED,
        carton_half=CARTON_HALF,
        grasp_offset=grasp,
        **overrides,
    )
    start = Pose(TRAINING_START + start_off)
    goal = Pose(TRAINING_GOAL + goal_off)
    return config, start, goal
