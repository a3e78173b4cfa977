"""Execution loop with press monitoring, collision detection and recovery.

Two modes share one loop:

* ``ilosa``  -- the baseline learner/controller: query, stabilize, modulate,
  send. Success is a plain distance check; the collision branch never runs.
* ``accifr`` -- adds press monitoring (distance AND press-force thresholds),
  attractor-stagnation collision detection, contact-side classification from
  the recent wrench stream, and corrective recovery feedback that is absorbed
  by the policy exactly like human feedback.
"""

from __future__ import annotations

import enum
import json
from dataclasses import dataclass, field

import numpy as np

from . import sim as simulation
from .classifier import SAMPLE_RATE, WrenchWindow
from .policy import Policy
from .types import (
    CollisionEvent,
    ContactSide,
    Feedback,
    FeedbackSource,
    Pose,
    RunRecord,
    pose_distance,
)


class Mode(enum.Enum):
    ILOSA = "ilosa"
    ACCIFR = "accifr"


class TickEvent(enum.Enum):
    NORMAL = "normal"
    COLLISION_DETECTED = "collision_detected"
    RECOVERING = "recovering"
    SUCCESS = "success"


@dataclass(frozen=True)
class MonitorConfig:
    d_th: float = 0.005  # m, goal distance threshold
    f_th: float = 2.0  # N, press-force threshold along +x
    stuck_epsilon: float = 1e-6  # m, attractor stagnation tolerance
    stuck_patience: int = 5  # consecutive control ticks
    recovery_left: tuple = (0.3, 0.2, 0.0)  # feedback offsets, left collision
    recovery_right: tuple = (0.3, -0.2, 0.0)
    max_ticks: int = 900
    control_period: int = 10  # sim steps per control tick
    window_seconds: float = 0.1  # wrench history handed to the classifier

    def __post_init__(self):
        if self.stuck_patience < 2:
            raise ValueError("stuck_patience must be >= 2")
        for name in ("d_th", "f_th", "stuck_epsilon", "max_ticks", "control_period"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")

    def to_dict(self) -> dict:
        return {k: list(v) if isinstance(v, tuple) else v
                for k, v in ((f, getattr(self, f)) for f in self.__dataclass_fields__)}

    @staticmethod
    def from_dict(d: dict) -> "MonitorConfig":
        d = dict(d)
        for k in ("recovery_left", "recovery_right"):
            if k in d:
                d[k] = tuple(d[k])
        return MonitorConfig(**d)


@dataclass
class TickTrace:
    time: float
    ee_pose: Pose
    attractor_distance: np.ndarray
    stiffness: np.ndarray
    sigma: float
    wrench: object
    event: TickEvent


def monitor(goal: Pose, state: simulation.SimState, cfg: MonitorConfig) -> bool:
    """Press-fit success: within the distance threshold of the goal while the
    sensed force along the press axis meets the force threshold."""
    if pose_distance(state.ee_pose, goal) >= cfg.d_th:
        return False
    return float(state.wrench.force[0]) >= cfg.f_th


def detect_collision(prev_attractor, curr_attractor, at_goal: bool, cfg: MonitorConfig) -> bool:
    """Single-tick stagnation predicate: the predicted attractor pose did not
    change and the goal is not reached.

    Comparing predicted attractor poses (position plus attractor distance)
    rather than attractor distances alone: a blocked end effector freezes the
    predicted pose, while normal motion keeps it moving even where the learned
    attractor-distance field is locally flat."""
    if at_goal or prev_attractor is None:
        return False
    diff = np.asarray(curr_attractor) - np.asarray(prev_attractor)
    return float(np.linalg.norm(diff)) < cfg.stuck_epsilon


class StagnationDetector:
    """Counts consecutive stagnant ticks; fires after `stuck_patience` of them."""

    def __init__(self, cfg: MonitorConfig):
        self.cfg = cfg
        self.prev = None
        self.count = 0

    def update(self, dx, at_goal: bool) -> bool:
        stagnant = detect_collision(self.prev, dx, at_goal, self.cfg)
        self.prev = np.array(dx, dtype=float)
        self.count = self.count + 1 if stagnant else 0
        return self.count >= self.cfg.stuck_patience

    def reset(self) -> None:
        self.prev = None
        self.count = 0


def recover(side: ContactSide, cfg: MonitorConfig) -> Feedback:
    """Corrective feedback steering away from the collision side and toward
    the goal (positive press axis)."""
    offsets = cfg.recovery_left if side is ContactSide.LEFT else cfg.recovery_right
    return Feedback(offsets=np.array(offsets), source=FeedbackSource.RECOVERY)


@dataclass
class EpisodeResult:
    record: RunRecord
    traces: list
    policy: Policy  # final policy (with any absorbed corrections)


def _local_query_point(x, goal: Pose, policy: Policy):
    """Policy inputs live in the frame of the goal the policy was trained
    toward; an episode goal offset translates the query accordingly."""
    if policy.frame_goal is None:
        return x
    return x - (goal.position - policy.frame_goal)


def run_episode(
    policy: Policy,
    config: simulation.WorldConfig,
    start: Pose,
    goal: Pose,
    cfg: MonitorConfig = MonitorConfig(),
    mode: Mode = Mode.ACCIFR,
    classify=None,
    teacher=None,
    seed: int = 0,
    on_tick=None,
) -> EpisodeResult:
    """Run one closed-loop trial to success or max_ticks.

    `classify` maps a WrenchWindow to (ContactSide, confidence); required in
    accifr mode. `teacher` is an optional callable
    (tick, state, policy) -> Feedback | None for interactive corrections.
    The passed-in policy is never mutated; corrections act on a copy.
    """
    mode = Mode(mode)
    if mode is Mode.ACCIFR and classify is None:
        raise ValueError("accifr mode needs a classifier")
    pol = policy.copy()
    rng = np.random.default_rng(seed)
    state = simulation.initial_state(start)
    detector = StagnationDetector(cfg)

    trajectory, wrench_log, collisions, traces = [], [], [], []
    wrench_samples = []
    next_sample = 0.0
    pending: Feedback | None = None
    success = False
    ticks = 0

    for tick in range(cfg.max_ticks):
        ticks = tick + 1
        x = state.ee_pose.position
        xq = _local_query_point(x, goal, pol)
        event = TickEvent.NORMAL

        if pending is not None:
            pol = pol.absorb_feedback(xq, pending)
            if pending.source is FeedbackSource.RECOVERY:
                event = TickEvent.RECOVERING
            pending = None

        dx, ks, sigma = pol.query(xq)
        at_goal = pose_distance(state.ee_pose, goal) < cfg.d_th

        collided = mode is Mode.ACCIFR and detector.update(x + dx, at_goal)
        if collided:
            window = _recent_window(wrench_samples, cfg.window_seconds)
            side, _conf = classify(window)
            collisions.append(CollisionEvent(time=state.time, side=side, recovered=False))
            pending = recover(side, cfg)
            event = TickEvent.COLLISION_DETECTED
            detector.reset()
        else:
            f_stable = pol.stabilization_force(xq)
            cmd = pol.modulate(dx, ks, f_stable, sigma)
            state.attractor = Pose(x + cmd.attractor_distance)
            state.stiffness = cmd.stiffness

        if teacher is not None and pending is None:
            fb = teacher(tick, state, pol)
            if fb is not None:
                pending = fb

        for _ in range(cfg.control_period):
            state = simulation.step(state, config, rng)
            if state.time >= next_sample:
                wrench_samples.append(state.wrench)
                next_sample += 1.0 / SAMPLE_RATE

        if mode is Mode.ACCIFR:
            success = monitor(goal, state, cfg)
        else:
            success = pose_distance(state.ee_pose, goal) < cfg.d_th
        if success:
            event = TickEvent.SUCCESS
            for c in collisions:
                c.recovered = True

        trajectory.append((state.time, state.ee_pose))
        wrench_log.append((state.time, state.wrench))
        trace = TickTrace(
            time=state.time,
            ee_pose=state.ee_pose,
            attractor_distance=np.array(dx),
            stiffness=np.array(ks),
            sigma=sigma,
            wrench=state.wrench,
            event=event,
        )
        traces.append(trace)
        if on_tick is not None:
            on_tick(trace)
        if success:
            break

    record = RunRecord(
        trajectory=trajectory,
        wrench_log=wrench_log,
        collisions=collisions,
        success=success,
        ticks=ticks,
    )
    return EpisodeResult(record=record, traces=traces, policy=pol)


def _recent_window(samples, seconds: float) -> WrenchWindow:
    n = max(1, int(round(seconds * SAMPLE_RATE)))
    recent = samples[-n:] if samples else []
    if not recent:
        raise ValueError("no wrench samples recorded yet")
    return WrenchWindow.from_wrenches(recent)


def collision_wrench_stream(
    policy: Policy,
    config: simulation.WorldConfig,
    start: Pose,
    goal: Pose,
    seed: int = 0,
    duration: float = 10.0,
    cfg: MonitorConfig = MonitorConfig(),
):
    """Roll out without recovery until the attractor stagnates, then hold the
    command and record the post-collision wrench stream at the sensor rate.

    Returns the list of Wrench samples, or None if no collision happened.
    """
    pol = policy.copy()
    rng = np.random.default_rng(seed)
    state = simulation.initial_state(start)
    detector = StagnationDetector(cfg)

    collided = False
    for _tick in range(cfg.max_ticks):
        x = state.ee_pose.position
        xq = _local_query_point(x, goal, pol)
        dx, ks, sigma = pol.query(xq)
        at_goal = pose_distance(state.ee_pose, goal) < cfg.d_th
        if detector.update(x + dx, at_goal):
            collided = True
            break
        f_stable = pol.stabilization_force(xq)
        cmd = pol.modulate(dx, ks, f_stable, sigma)
        state.attractor = Pose(x + cmd.attractor_distance)
        state.stiffness = cmd.stiffness
        for _ in range(cfg.control_period):
            state = simulation.step(state, config, rng)
    if not collided:
        return None

    samples = []
    next_sample = state.time
    end = state.time + duration
    while state.time < end:
        state = simulation.step(state, config, rng)
        if state.time >= next_sample:
            samples.append(state.wrench)
            next_sample += 1.0 / SAMPLE_RATE
    return samples


@dataclass
class EpisodeSpec:
    """Single-episode configuration, loadable from one JSON file."""

    mode: str
    preset: str
    seed: int = 0
    monitor: MonitorConfig = field(default_factory=MonitorConfig)

    def to_dict(self) -> dict:
        return {
            "mode": self.mode,
            "preset": self.preset,
            "seed": self.seed,
            "monitor": self.monitor.to_dict(),
        }

    @staticmethod
    def from_dict(d: dict) -> "EpisodeSpec":
        return EpisodeSpec(
            mode=d["mode"],
            preset=d["preset"],
            seed=d.get("seed", 0),
            monitor=MonitorConfig.from_dict(d.get("monitor", {})),
        )

    @staticmethod
    def from_file(path) -> "EpisodeSpec":
        with open(path) as f:
            return EpisodeSpec.from_dict(json.load(f))
