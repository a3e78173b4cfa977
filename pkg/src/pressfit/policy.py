"""Learning and execution layer: demonstration recording, GP policy training,
uncertainty-driven stabilization/modulation, and interactive corrections.

Six scalar GPs share the demonstration states as inputs: three predict the
attractor distance per axis, three the stiffness per axis. Hyperparameters
are fitted once after the demonstration and frozen; corrections only move
training outputs (or append new data in uncertain regions).
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace

import numpy as np

from . import gp
from .types import Demonstration, DemoSample, Feedback

SNAPSHOT_VERSION = 1


class TooShortError(ValueError):
    pass


@dataclass(frozen=True)
class PolicyConfig:
    delta_lim: float = 0.005  # m, attractor-distance cap per axis
    alpha: float = 0.003  # m, stabilization step at saturation
    grad_ref_fraction: float = 0.02  # sets where the stabilization saturates
    feedback_gain: float = 0.005  # m per unit feedback offset
    feedback_cap: float = 1.0  # offsets live in [-cap, cap]
    k_max: float = 1200.0  # N/m
    k_floor_min: float = 250.0  # stiffness floor at zero uncertainty
    k_floor_max: float = 600.0  # stiffness floor in fully uncertain regions
    default_stiffness: float = 600.0  # N/m, assigned to demonstration samples
    initial_length_scale: float = 0.06  # m, also frozen for axes without spread
    sigma_threshold_fraction: float = 0.3  # of the prior variance
    fit_restarts: int = 3

    def to_dict(self) -> dict:
        return {k: getattr(self, k) for k in self.__dataclass_fields__}

    @staticmethod
    def from_dict(d: dict) -> "PolicyConfig":
        return PolicyConfig(**d)


@dataclass(frozen=True)
class ControlCommand:
    attractor_distance: np.ndarray
    stiffness: np.ndarray


@dataclass
class Policy:
    gp_dx: list  # 3 GpModel, attractor distance per axis
    gp_ks: list  # 3 GpModel, stiffness per axis
    config: PolicyConfig
    sigma_threshold: float
    sigma_prior: float  # max signal variance of the attractor GPs
    frame_goal: np.ndarray | None = None  # goal pose the policy was trained toward

    def copy(self) -> "Policy":
        """Cheap copy; GP models are immutable so sharing them is safe."""
        return Policy(
            gp_dx=list(self.gp_dx),
            gp_ks=list(self.gp_ks),
            config=self.config,
            sigma_threshold=self.sigma_threshold,
            sigma_prior=self.sigma_prior,
            frame_goal=None if self.frame_goal is None else self.frame_goal.copy(),
        )

    # -- queries ------------------------------------------------------------

    def query(self, x) -> tuple[np.ndarray, np.ndarray, float]:
        """Per-axis attractor distance and stiffness means, plus the scalar
        uncertainty gate (max per-axis attractor-distance variance)."""
        dx = np.empty(3)
        var = np.empty(3)
        for i, m in enumerate(self.gp_dx):
            dx[i], var[i] = m.posterior(x)
        ks = np.array([m.posterior(x)[0] for m in self.gp_ks])
        return dx, ks, float(var.max())

    def variance_gradient(self, x) -> np.ndarray:
        """Gradient of the uncertainty gate: the max-variance axis' gradient."""
        variances = [m.posterior(x)[1] for m in self.gp_dx]
        return self.gp_dx[int(np.argmax(variances))].variance_gradient(x)

    def stabilization_force(self, x) -> np.ndarray:
        """Variance-descent field, -alpha * dSigma/dx with a saturating scale.

        The raw gradient spans many orders of magnitude between the data
        corridor and far-off states; the saturation keeps the step bounded by
        `alpha` meters near data while preserving a usable pull far away.
        Always anti-parallel to the variance gradient.
        """
        g = self.variance_gradient(x)
        norm = float(np.linalg.norm(g))
        c = self.config
        g_ref = c.grad_ref_fraction * self.sigma_prior / c.initial_length_scale
        if norm == 0.0:
            return np.zeros(3)
        return -c.alpha * g / (norm + g_ref)

    def modulate(self, dx, ks, f_stable, sigma) -> ControlCommand:
        """Clip the stabilized attractor distance and floor the stiffness.

        The floor rises with uncertainty so the stabilization field keeps
        authority in regions where the learned stiffness reverts to prior.
        """
        c = self.config
        dx_out = np.clip(np.asarray(dx) + np.asarray(f_stable), -c.delta_lim, c.delta_lim)
        frac = min(1.0, sigma / max(self.sigma_prior, 1e-300))
        floor = c.k_floor_min + (c.k_floor_max - c.k_floor_min) * frac
        ks_out = np.clip(np.asarray(ks), floor, c.k_max)
        return ControlCommand(attractor_distance=dx_out, stiffness=ks_out)

    # -- corrections ---------------------------------------------------------

    def interpret_feedback(self, fb: Feedback, dx, ks) -> tuple[np.ndarray, np.ndarray]:
        """Map feedback offsets to attractor and stiffness increments.

        The attractor increment is direct; the stiffness increment keeps the
        commanded force consistent with the cap:
        (K_s + K_inc) * delta_lim = K_s * |dx + dx_inc|, clipped to [0, k_max].
        """
        c = self.config
        fb.validate(c.feedback_cap)
        dx_inc = c.feedback_gain * fb.offsets
        ks = np.asarray(ks, dtype=float)
        ks_target = ks * np.abs(np.asarray(dx) + dx_inc) / c.delta_lim
        ks_inc = np.clip(ks_target, 0.0, c.k_max) - ks
        return dx_inc, ks_inc

    def absorb_feedback(self, x, fb: Feedback) -> "Policy":
        """Fold one correction into the policy (new Policy returned).

        High uncertainty at x appends a fresh training pair to every GP;
        otherwise the correction is distributed over correlated training
        outputs through the pseudoinverse update. Zero-correlation corrections
        fall back to appending.
        """
        x = np.asarray(x, dtype=float).reshape(3)
        if np.all(fb.offsets == 0.0):
            return self
        dx, ks, sigma = self.query(x)
        dx_inc, ks_inc = self.interpret_feedback(fb, dx, ks)
        c = self.config

        if np.all(dx_inc == 0.0) and np.all(ks_inc == 0.0):
            return self

        new_dx = list(self.gp_dx)
        new_ks = list(self.gp_ks)
        if sigma >= self.sigma_threshold:
            append = True
        else:
            append = False
            try:
                for i in range(3):
                    new_dx[i] = new_dx[i].apply_correction(x, float(dx_inc[i]))
                    new_ks[i] = new_ks[i].apply_correction(x, float(ks_inc[i]))
            except gp.ZeroCorrelationError:
                new_dx = list(self.gp_dx)
                new_ks = list(self.gp_ks)
                append = True
        if append:
            dx_new = np.clip(dx + dx_inc, -c.delta_lim, c.delta_lim)
            ks_new = np.clip(ks + ks_inc, 0.0, c.k_max)
            for i in range(3):
                new_dx[i] = new_dx[i].append(x, float(dx_new[i]))
                new_ks[i] = new_ks[i].append(x, float(ks_new[i]))

        return replace_models(self, new_dx, new_ks)

    # -- persistence ----------------------------------------------------------

    def to_dict(self) -> dict:
        return {
            "schema_version": SNAPSHOT_VERSION,
            "gp_dx": [m.to_dict() for m in self.gp_dx],
            "gp_ks": [m.to_dict() for m in self.gp_ks],
            "config": self.config.to_dict(),
            "sigma_threshold": self.sigma_threshold,
            "sigma_prior": self.sigma_prior,
            "frame_goal": None if self.frame_goal is None else self.frame_goal.tolist(),
        }

    @staticmethod
    def from_dict(d: dict) -> "Policy":
        return Policy(
            gp_dx=[gp.GpModel.from_dict(m) for m in d["gp_dx"]],
            gp_ks=[gp.GpModel.from_dict(m) for m in d["gp_ks"]],
            config=PolicyConfig.from_dict(d["config"]),
            sigma_threshold=d["sigma_threshold"],
            sigma_prior=d["sigma_prior"],
            frame_goal=None if d["frame_goal"] is None else np.array(d["frame_goal"]),
        )

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @staticmethod
    def from_json(s: str) -> "Policy":
        return Policy.from_dict(json.loads(s))

    def save(self, path) -> None:
        with open(path, "w") as f:
            f.write(self.to_json())

    @staticmethod
    def load(path) -> "Policy":
        with open(path) as f:
            return Policy.from_json(f.read())


def replace_models(policy: Policy, gp_dx, gp_ks) -> Policy:
    return Policy(
        gp_dx=gp_dx,
        gp_ks=gp_ks,
        config=policy.config,
        sigma_threshold=policy.sigma_threshold,
        sigma_prior=policy.sigma_prior,
        frame_goal=policy.frame_goal,
    )


def record_demonstration(
    trajectory, config: PolicyConfig = PolicyConfig()
) -> Demonstration:
    """Turn a recorded (time, Pose) trajectory into a demonstration.

    Attractor distances are consecutive position differences; the final
    sample gets a zero attractor distance (come to rest). Stiffness is the
    configured per-axis default since kinesthetic teaching does not observe
    stiffness directly.
    """
    if len(trajectory) < 2:
        raise TooShortError("need at least 2 trajectory samples")
    times = np.array([t for t, _ in trajectory])
    if np.any(np.diff(times) <= 0):
        raise ValueError("trajectory times must be strictly increasing")
    positions = np.array([p.position for _, p in trajectory])
    deltas = np.vstack([np.diff(positions, axis=0), np.zeros(3)])
    deltas = np.clip(deltas, -config.delta_lim, config.delta_lim)
    ks = np.full(3, config.default_stiffness)
    samples = [
        DemoSample(state=positions[i], attractor_distance=deltas[i], stiffness=ks)
        for i in range(len(positions))
    ]
    return Demonstration(samples=tuple(samples), dt=float(np.median(np.diff(times))))


def train(
    demo: Demonstration,
    config: PolicyConfig = PolicyConfig(),
    seed: int = 0,
    frame_goal=None,
) -> Policy:
    """Fit the six GPs on a demonstration and freeze their hyperparameters.

    Deterministic for a given seed. Axes without spread in the training data
    keep the initial length scale (their likelihood gradient vanishes).
    """
    X = demo.states()
    dx_targets = demo.attractor_distances()
    ks_targets = demo.stiffnesses()
    # input dims with no spread leave the likelihood flat in their length
    # scale; pin those to the initial value so off-data uncertainty growth
    # stays well defined laterally
    degenerate_dims = (X.max(axis=0) - X.min(axis=0)) < 1e-9

    def fit_group(targets, signal_cap):
        models = []
        for axis in range(3):
            y = targets[:, axis]
            init = gp.Kernel(
                signal_variance=max(float(np.var(y)), 1e-8),
                length_scales=np.full(3, config.initial_length_scale),
                noise_variance=max(float(np.var(y)) * 1e-2, 1e-10),
            )
            model = gp.GpModel(X, y, init)
            kernel = gp.fit_hyperparameters(
                model,
                seed=seed + axis,
                restarts=config.fit_restarts,
                signal_variance_cap=signal_cap,
            )
            ls = np.where(
                degenerate_dims, config.initial_length_scale, kernel.length_scales
            )
            kernel = gp.Kernel(kernel.signal_variance, ls, kernel.noise_variance)
            models.append(model.with_kernel(kernel))
        return models

    gp_dx = fit_group(dx_targets, signal_cap=1.0)
    gp_ks = fit_group(ks_targets, signal_cap=1e7)

    sigma_prior = max(m.kernel.signal_variance for m in gp_dx)
    return Policy(
        gp_dx=gp_dx,
        gp_ks=gp_ks,
        config=config,
        sigma_threshold=config.sigma_threshold_fraction * sigma_prior,
        sigma_prior=sigma_prior,
        frame_goal=None if frame_goal is None else np.asarray(frame_goal, float),
    )
