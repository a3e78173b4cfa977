"""Shared domain types: poses, wrenches, demonstrations, feedback and trial logs.

All types are plain immutable values built on small numpy arrays. They are
safe to copy between threads and carry no hidden state. Every type has a
JSON round-trip (`to_dict` / `from_dict`) that preserves floats bit-exactly.
"""

from __future__ import annotations

import csv
import enum
import io
import json
from dataclasses import dataclass, field

import numpy as np

QUAT_NORM_TOL = 1e-9

SCHEMA_VERSION = 1


def _vec3(v) -> np.ndarray:
    a = np.asarray(v, dtype=float).reshape(3)
    return a


class ContactSide(enum.Enum):
    """Which side of the grasped object a collision happened on.

    `left` is the negative-y side, `right` the positive-y side (top-down view,
    press axis along +x).
    """

    LEFT = "left"
    RIGHT = "right"

    def opposite(self) -> "ContactSide":
        return ContactSide.RIGHT if self is ContactSide.LEFT else ContactSide.LEFT


class FeedbackSource(enum.Enum):
    HUMAN = "human"
    RECOVERY = "recovery"


@dataclass(frozen=True)
class Pose:
    """Position (meters) plus unit quaternion orientation in (w, x, y, z) order."""

    position: np.ndarray
    orientation: np.ndarray = field(
        default_factory=lambda: np.array([1.0, 0.0, 0.0, 0.0])
    )

    def __post_init__(self):
        object.__setattr__(self, "position", _vec3(self.position))
        q = np.asarray(self.orientation, dtype=float).reshape(4)
        n = np.linalg.norm(q)
        if n == 0 or not np.isfinite(n):
            raise ValueError("orientation quaternion must be nonzero and finite")
        if abs(n - 1.0) > QUAT_NORM_TOL:
            q = q / n
        object.__setattr__(self, "orientation", q)

    def to_dict(self) -> dict:
        return {
            "position": self.position.tolist(),
            "orientation": self.orientation.tolist(),
        }

    @staticmethod
    def from_dict(d: dict) -> "Pose":
        return Pose(np.array(d["position"]), np.array(d["orientation"]))

    def __eq__(self, other):
        if not isinstance(other, Pose):
            return NotImplemented
        return np.array_equal(self.position, other.position) and np.array_equal(
            self.orientation, other.orientation
        )


@dataclass(frozen=True)
class Wrench:
    """Force (N) and torque (N·m) sensed at the end effector."""

    force: np.ndarray
    torque: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "force", _vec3(self.force))
        object.__setattr__(self, "torque", _vec3(self.torque))
        if not (np.all(np.isfinite(self.force)) and np.all(np.isfinite(self.torque))):
            raise ValueError("wrench components must be finite")

    @staticmethod
    def zero() -> "Wrench":
        return Wrench(np.zeros(3), np.zeros(3))

    def as_array(self) -> np.ndarray:
        """6-vector in channel order (fx, fy, fz, tx, ty, tz)."""
        return np.concatenate([self.force, self.torque])

    def to_dict(self) -> dict:
        return {"force": self.force.tolist(), "torque": self.torque.tolist()}

    @staticmethod
    def from_dict(d: dict) -> "Wrench":
        return Wrench(np.array(d["force"]), np.array(d["torque"]))

    def __eq__(self, other):
        if not isinstance(other, Wrench):
            return NotImplemented
        return np.array_equal(self.force, other.force) and np.array_equal(
            self.torque, other.torque
        )


@dataclass(frozen=True)
class DemoSample:
    """One recorded demonstration sample: state, attractor distance, stiffness."""

    state: np.ndarray
    attractor_distance: np.ndarray
    stiffness: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "state", _vec3(self.state))
        object.__setattr__(self, "attractor_distance", _vec3(self.attractor_distance))
        object.__setattr__(self, "stiffness", _vec3(self.stiffness))
        if np.any(self.stiffness < 0):
            raise ValueError("stiffness must be non-negative")

    def to_dict(self) -> dict:
        return {
            "state": self.state.tolist(),
            "attractor_distance": self.attractor_distance.tolist(),
            "stiffness": self.stiffness.tolist(),
        }

    @staticmethod
    def from_dict(d: dict) -> "DemoSample":
        return DemoSample(
            np.array(d["state"]),
            np.array(d["attractor_distance"]),
            np.array(d["stiffness"]),
        )

    def __eq__(self, other):
        if not isinstance(other, DemoSample):
            return NotImplemented
        return (
            np.array_equal(self.state, other.state)
            and np.array_equal(self.attractor_distance, other.attractor_distance)
            and np.array_equal(self.stiffness, other.stiffness)
        )


@dataclass(frozen=True)
class Demonstration:
    """Ordered demonstration samples with a fixed sampling interval."""

    samples: tuple
    dt: float

    def __post_init__(self):
        object.__setattr__(self, "samples", tuple(self.samples))
        if len(self.samples) == 0:
            raise ValueError("demonstration must be non-empty")
        if self.dt <= 0:
            raise ValueError("dt must be positive")

    def states(self) -> np.ndarray:
        return np.array([s.state for s in self.samples])

    def attractor_distances(self) -> np.ndarray:
        return np.array([s.attractor_distance for s in self.samples])

    def stiffnesses(self) -> np.ndarray:
        return np.array([s.stiffness for s in self.samples])

    def to_dict(self) -> dict:
        return {
            "schema_version": SCHEMA_VERSION,
            "dt": self.dt,
            "samples": [s.to_dict() for s in self.samples],
        }

    @staticmethod
    def from_dict(d: dict) -> "Demonstration":
        return Demonstration(
            tuple(DemoSample.from_dict(s) for s in d["samples"]), d["dt"]
        )


@dataclass(frozen=True)
class Feedback:
    """Directional correction offsets in [-cap, cap] per axis."""

    offsets: np.ndarray
    source: FeedbackSource = FeedbackSource.HUMAN

    def __post_init__(self):
        object.__setattr__(self, "offsets", _vec3(self.offsets))

    def validate(self, cap: float) -> None:
        if np.any(np.abs(self.offsets) > cap):
            raise ValueError(f"feedback offsets exceed cap {cap}")

    def to_dict(self) -> dict:
        return {"offsets": self.offsets.tolist(), "source": self.source.value}

    @staticmethod
    def from_dict(d: dict) -> "Feedback":
        return Feedback(np.array(d["offsets"]), FeedbackSource(d["source"]))

    def __eq__(self, other):
        if not isinstance(other, Feedback):
            return NotImplemented
        return np.array_equal(self.offsets, other.offsets) and self.source == other.source


@dataclass
class CollisionEvent:
    time: float
    side: ContactSide
    recovered: bool

    def to_dict(self) -> dict:
        return {"time": self.time, "side": self.side.value, "recovered": self.recovered}

    @staticmethod
    def from_dict(d: dict) -> "CollisionEvent":
        return CollisionEvent(d["time"], ContactSide(d["side"]), d["recovered"])


@dataclass
class RunRecord:
    """Per-trial log: trajectory, wrenches, collisions and final outcome."""

    trajectory: list  # list of (time, Pose)
    wrench_log: list  # list of (time, Wrench)
    collisions: list  # list of CollisionEvent
    success: bool
    ticks: int

    def __post_init__(self):
        for seq in (self.trajectory, self.wrench_log):
            times = [t for t, _ in seq]
            if any(b <= a for a, b in zip(times, times[1:])):
                raise ValueError("log times must be strictly increasing")

    def to_dict(self) -> dict:
        return {
            "schema_version": SCHEMA_VERSION,
            "trajectory": [[t, p.to_dict()] for t, p in self.trajectory],
            "wrench_log": [[t, w.to_dict()] for t, w in self.wrench_log],
            "collisions": [c.to_dict() for c in self.collisions],
            "success": self.success,
            "ticks": self.ticks,
        }

    @staticmethod
    def from_dict(d: dict) -> "RunRecord":
        return RunRecord(
            [(t, Pose.from_dict(p)) for t, p in d["trajectory"]],
            [(t, Wrench.from_dict(w)) for t, w in d["wrench_log"]],
            [CollisionEvent.from_dict(c) for c in d["collisions"]],
            d["success"],
            d["ticks"],
        )

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @staticmethod
    def from_json(s: str) -> "RunRecord":
        return RunRecord.from_dict(json.loads(s))


WRENCH_CSV_COLUMNS = ["t", "fx", "fy", "fz", "tx", "ty", "tz"]


def wrench_log_to_csv(log) -> str:
    """Serialize a (time, Wrench) log to CSV with columns t,fx,fy,fz,tx,ty,tz."""
    buf = io.StringIO()
    writer = csv.writer(buf)
    writer.writerow(WRENCH_CSV_COLUMNS)
    for t, w in log:
        writer.writerow([repr(float(t))] + [repr(float(x)) for x in w.as_array()])
    return buf.getvalue()


def wrench_log_from_csv(text: str):
    reader = csv.reader(io.StringIO(text))
    header = next(reader)
    if header != WRENCH_CSV_COLUMNS:
        raise ValueError(f"unexpected wrench CSV header: {header}")
    log = []
    for row in reader:
        vals = [float(x) for x in row]
        log.append((vals[0], Wrench(vals[1:4], vals[4:7])))
    return log


def pose_distance(a: Pose, b: Pose) -> float:
    """Euclidean distance between the positions of two poses.

    Orientation is intentionally ignored: goal monitoring is positional only
    and the simulator holds orientation fixed.
    """
    return float(np.linalg.norm(a.position - b.position))


def mirror_y(w: Wrench) -> Wrench:
    """Reflect a wrench across the x-z plane (negates fy, tx, tz).

    An involution; pairs with mirrored worlds in the simulator so that
    left/right collision symmetry can be tested end to end.
    """
    return Wrench(
        w.force * np.array([1.0, -1.0, 1.0]),
        w.torque * np.array([-1.0, 1.0, -1.0]),
    )
