"""Experiment batteries over scenario presets with deterministic reports.

A battery runs every (preset, mode) pair for a number of trials, each with a
small seeded start-pose jitter, and produces per-trial CSV rows plus a text
summary table. All randomness derives from one master seed, so reports are
reproducible byte for byte.
"""

from __future__ import annotations

import csv
import importlib.resources
import io
import json
from dataclasses import dataclass, field

import numpy as np

from . import runtime as rt
from . import sim as simulation
from .policy import Policy, PolicyConfig, record_demonstration, train
from .types import Feedback, Pose

START_PRESETS = tuple(f"start_variation_{i}" for i in range(1, 6))
GOAL_PRESETS = tuple(f"goal_{i}" for i in range(1, 6))
GRASP_PRESETS = tuple(f"grasp_{i}" for i in range(1, 6))


# --- reference policy --------------------------------------------------------


def default_demonstration(samples: int = 30, dt: float = 0.1):
    """Straight-line kinesthetic demonstration from the training start pose
    to the slot center, resampled uniformly."""
    line = np.linspace(simulation.TRAINING_START, simulation.TRAINING_GOAL, samples)
    return record_demonstration([(dt * i, Pose(p)) for i, p in enumerate(line)])


def load_correction_rules(path=None) -> list:
    """Scripted-teacher rules from the versioned fixture JSON."""
    if path is None:
        ref = importlib.resources.files("pressfit.data") / "training_corrections.json"
        data = json.loads(ref.read_text())
    else:
        with open(path) as f:
            data = json.load(f)
    if data.get("version") != 1:
        raise ValueError(f"unsupported corrections fixture version {data.get('version')}")
    return data["rules"]


def scripted_teacher(rules):
    """Teacher callable replaying fixture rules during an episode.

    Each rule fires when the end-effector coordinate on `trigger_axis` exceeds
    `trigger_above`, at most `max_applications` times, spaced at least
    `min_spacing_ticks` control ticks apart.
    """
    fired = [[] for _ in rules]

    def teacher(tick, state, policy):
        x = state.ee_pose.position
        for i, rule in enumerate(rules):
            if len(fired[i]) >= rule["max_applications"]:
                continue
            if x[rule["trigger_axis"]] <= rule["trigger_above"]:
                continue
            if fired[i] and tick - fired[i][-1] < rule["min_spacing_ticks"]:
                continue
            fired[i].append(tick)
            return Feedback(offsets=np.array(rule["offsets"], dtype=float))
        return None

    return teacher


def train_reference_policy(
    seed: int = 0,
    config: PolicyConfig = PolicyConfig(),
    corrections_path=None,
) -> Policy:
    """Demonstrate, fit the GPs, then teach press-phase corrections in one
    interactive episode on the nominal scenario."""
    demo = default_demonstration()
    policy = train(demo, config=config, seed=seed, frame_goal=simulation.TRAINING_GOAL)
    world, start, goal = simulation.spawn_scenario("training")
    teacher = scripted_teacher(load_correction_rules(corrections_path))
    result = rt.run_episode(
        policy,
        world,
        start,
        goal,
        cfg=rt.MonitorConfig(max_ticks=1500),
        mode=rt.Mode.ILOSA,
        teacher=teacher,
        seed=seed,
    )
    if not result.record.success:
        raise RuntimeError("teaching episode did not reach the goal")
    return result.policy


# --- batteries ---------------------------------------------------------------


@dataclass(frozen=True)
class ExperimentSpec:
    name: str
    presets: tuple
    modes: tuple = (rt.Mode.ILOSA, rt.Mode.ACCIFR)
    trials: int = 20
    master_seed: int = 0
    start_jitter: float = 0.002  # m, uniform per-axis lateral jitter
    monitor: rt.MonitorConfig = field(default_factory=rt.MonitorConfig)

    def __post_init__(self):
        object.__setattr__(self, "modes", tuple(rt.Mode(m) for m in self.modes))
        if self.trials < 1:
            raise ValueError("trials must be >= 1")


@dataclass
class TrialResult:
    preset: str
    mode: rt.Mode
    trial: int
    seed: int
    success: bool
    ticks: int
    collision_count: int
    record: object  # RunRecord


@dataclass
class ExperimentResult:
    spec: ExperimentSpec
    rows: list  # of TrialResult

    def success_table(self) -> dict:
        """{preset: {mode_value: successes}} over all trials."""
        table = {p: {m.value: 0 for m in self.spec.modes} for p in self.spec.presets}
        for r in self.rows:
            table[r.preset][r.mode.value] += int(r.success)
        return table

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf)
        w.writerow(["preset", "mode", "trial", "seed", "success", "ticks", "collisions"])
        for r in self.rows:
            w.writerow(
                [r.preset, r.mode.value, r.trial, r.seed, int(r.success), r.ticks, r.collision_count]
            )
        return buf.getvalue()

    def report_text(self) -> str:
        table = self.success_table()
        lines = [f"experiment: {self.spec.name}"]
        lines.append(f"trials per cell: {self.spec.trials}")
        header = "preset".ljust(20) + "".join(m.value.rjust(10) for m in self.spec.modes)
        lines.append(header)
        for preset in self.spec.presets:
            cells = "".join(
                f"{table[preset][m.value]}/{self.spec.trials}".rjust(10)
                for m in self.spec.modes
            )
            lines.append(preset.ljust(20) + cells)
        return "\n".join(lines) + "\n"


def trial_seed(spec: ExperimentSpec, preset: str, mode: rt.Mode, trial: int) -> int:
    """Stable per-trial seed derived from the master seed and cell identity."""
    key = f"{spec.name}/{preset}/{mode.value}/{trial}".encode()
    ss = np.random.SeedSequence([spec.master_seed, *key])
    return int(ss.generate_state(1)[0])


def run_experiment(
    spec: ExperimentSpec,
    policy: Policy,
    classify=None,
    on_trial=None,
) -> ExperimentResult:
    """Run the full battery sequentially (stable ordering keeps the report
    deterministic). `classify` is required when any mode needs recovery."""
    if any(m is rt.Mode.ACCIFR for m in spec.modes) and classify is None:
        raise ValueError("battery includes accifr mode but no classifier was given")
    rows = []
    for preset in spec.presets:
        for mode in spec.modes:
            for trial in range(spec.trials):
                seed = trial_seed(spec, preset, mode, trial)
                world, start, goal = simulation.spawn_scenario(preset)
                jitter_rng = np.random.default_rng(seed)
                jitter = np.append(
                    jitter_rng.uniform(-spec.start_jitter, spec.start_jitter, size=2), 0.0
                )
                result = rt.run_episode(
                    policy,
                    world,
                    Pose(start.position + jitter),
                    goal,
                    cfg=spec.monitor,
                    mode=mode,
                    classify=classify if mode is rt.Mode.ACCIFR else None,
                    seed=seed + 1,
                )
                row = TrialResult(
                    preset=preset,
                    mode=mode,
                    trial=trial,
                    seed=seed,
                    success=result.record.success,
                    ticks=result.record.ticks,
                    collision_count=len(result.record.collisions),
                    record=result.record,
                )
                rows.append(row)
                if on_trial is not None:
                    on_trial(row)
    return ExperimentResult(spec=spec, rows=rows)


def start_battery_spec(master_seed: int = 0, trials: int = 20) -> ExperimentSpec:
    return ExperimentSpec(
        name="start_variations", presets=START_PRESETS, master_seed=master_seed, trials=trials
    )


def goal_battery_spec(master_seed: int = 0, trials: int = 20) -> ExperimentSpec:
    return ExperimentSpec(
        name="goal_variations", presets=GOAL_PRESETS, master_seed=master_seed, trials=trials
    )


def grasp_battery_spec(master_seed: int = 0, trials: int = 20) -> ExperimentSpec:
    return ExperimentSpec(
        name="grasp_variations", presets=GRASP_PRESETS, master_seed=master_seed, trials=trials
    )
