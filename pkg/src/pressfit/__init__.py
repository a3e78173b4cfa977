"""Variable-impedance press-fit skills learned from one demonstration plus
interactive corrections, with collision-aware recovery.

Layers, bottom up:

* :mod:`pressfit.gp`         -- exact GP regression and the correction update
* :mod:`pressfit.policy`     -- demonstration recording, training, modulation
* :mod:`pressfit.sim`        -- planar contact simulator and scenario presets
* :mod:`pressfit.classifier` -- contact-side classifier on wrench windows
* :mod:`pressfit.runtime`    -- monitored execution loop with recovery
* :mod:`pressfit.harness`    -- experiment batteries and reports
* :mod:`pressfit.server`     -- websocket teaching service
"""

from .classifier import (
    ClassifierModel,
    LabeledDataset,
    TrainConfig,
    WrenchWindow,
    generate_dataset,
    history_length_sweep,
    train_classifier,
)
from .gp import GpModel, Kernel, ZeroCorrelationError, fit_hyperparameters
from .harness import (
    ExperimentResult,
    ExperimentSpec,
    run_experiment,
    train_reference_policy,
)
from .policy import Policy, PolicyConfig, record_demonstration, train
from .runtime import (
    EpisodeSpec,
    Mode,
    MonitorConfig,
    collision_wrench_stream,
    detect_collision,
    monitor,
    recover,
    run_episode,
)
from .sim import PRESET_NAMES, SimState, WorldConfig, spawn_scenario, step
from .types import (
    CollisionEvent,
    ContactSide,
    Demonstration,
    DemoSample,
    Feedback,
    Pose,
    RunRecord,
    Wrench,
    mirror_y,
    pose_distance,
)

__version__ = "0.1.0"

__all__ = [
    "ClassifierModel",
    "CollisionEvent",
    "ContactSide",
    "DemoSample",
    "Demonstration",
    "EpisodeSpec",
    "ExperimentResult",
    "ExperimentSpec",
    "Feedback",
    "GpModel",
    "Kernel",
    "LabeledDataset",
    "Mode",
    "MonitorConfig",
    "PRESET_NAMES",
    "Policy",
    "PolicyConfig",
    "Pose",
    "RunRecord",
    "SimState",
    "TrainConfig",
    "WorldConfig",
    "Wrench",
    "WrenchWindow",
    "ZeroCorrelationError",
    "collision_wrench_stream",
    "detect_collision",
    "fit_hyperparameters",
    "generate_dataset",
    "history_length_sweep",
    "mirror_y",
    "monitor",
    "pose_distance",
    "recover",
    "run_episode",
    "run_experiment",
    "spawn_scenario",
    "step",
    "train",
    "train_classifier",
    "train_reference_policy",
]
