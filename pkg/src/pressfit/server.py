"""Websocket teaching service.

One session per websocket connection, moving through four phases:

* ``idle``          -- nothing running; accepts start_demo / train / start_episode
* ``demonstrating`` -- collecting kinesthetic demo points
* ``executing``     -- an episode runs in a worker thread, ticks stream out
* ``correcting``    -- a teacher correction is queued and not yet absorbed

Outbound tick messages go through a bounded queue: under backpressure the
oldest *tick* is dropped, while event messages (collision, correction applied,
episode end) are always delivered. Inbound corrections are never dropped.
"""

from __future__ import annotations

import asyncio
import collections
import json
import threading
import time

import numpy as np
from fastapi import FastAPI, WebSocket, WebSocketDisconnect

from . import classifier as clf
from . import runtime as rt
from . import sim as simulation
from .policy import Policy, record_demonstration, train
from .types import Feedback, Pose

TICK_QUEUE_SIZE = 64
SCHEMA_VERSION = 1

_DROPPABLE = {"tick"}


def _scene_payload(preset: str) -> dict:
    """Top-down scene geometry plus world bounds, enough for a client to set
    up a pixel-to-meter projection and draw the container."""
    world, start, goal = simulation.spawn_scenario(preset)
    rects = [world.container] + list(world.placed_cartons) + list(world.wall_rects())
    lo = np.min([r.center - r.half for r in rects], axis=0)
    hi = np.max([r.center + r.half for r in rects], axis=0)
    lo = np.minimum(lo, start.position[:2])
    hi = np.maximum(hi, start.position[:2])
    margin = 0.01
    return {
        "preset": preset,
        "bounds": {
            "min": (lo - margin).tolist(),
            "max": (hi + margin).tolist(),
        },
        "container": world.container.to_dict(),
        "placed_cartons": [r.to_dict() for r in world.placed_cartons],
        "walls": [r.to_dict() for r in world.wall_rects()],
        "dt": world.dt,
        "carton_half": world.carton_half.tolist(),
        "grasp_offset": world.grasp_offset.tolist(),
        "start": start.position.tolist(),
        "goal": goal.position.tolist(),
    }


class _StopEpisode(Exception):
    pass


def _tick_message(trace: rt.TickTrace) -> dict:
    return {
        "type": "tick",
        "time": trace.time,
        "position": trace.ee_pose.position.tolist(),
        "attractor_distance": trace.attractor_distance.tolist(),
        "stiffness": trace.stiffness.tolist(),
        "sigma": trace.sigma,
        "wrench": trace.wrench.as_array().tolist(),
        "event": trace.event.value,
    }


class Session:
    """Per-connection state machine; thread-safe where the episode worker
    touches it (feedback queue, stop flag, outbound queue)."""

    def __init__(self, loop, outbox: asyncio.Queue, tick_rate: float):
        self.loop = loop
        self.outbox = outbox
        self.tick_rate = tick_rate
        self.phase = "idle"
        self.demo_points = []
        self.demonstration = None
        self.policy: Policy | None = None
        self.classifier = None
        self.feedback: collections.deque = collections.deque()
        self.stop_flag = threading.Event()
        self.worker: threading.Thread | None = None

    # -- outbound -------------------------------------------------------------

    def post(self, message: dict) -> None:
        """Queue an outbound message from any thread; drops the oldest tick
        when the queue is full and the new message is itself droppable."""

        def put():
            if self.outbox.full():
                if message["type"] in _DROPPABLE:
                    try:
                        stale = self.outbox.get_nowait()
                        if stale["type"] not in _DROPPABLE:
                            # never lose an event to make room for a tick
                            self.outbox.put_nowait(stale)
                            return
                    except asyncio.QueueEmpty:
                        pass
                else:
                    while self.outbox.full():
                        try:
                            stale = self.outbox.get_nowait()
                        except asyncio.QueueEmpty:
                            break
                        if stale["type"] not in _DROPPABLE:
                            self.outbox.put_nowait(stale)
            try:
                self.outbox.put_nowait(message)
            except asyncio.QueueFull:
                pass

        self.loop.call_soon_threadsafe(put)

    def post_phase(self) -> None:
        self.post({"type": "phase", "phase": self.phase})

    # -- episode worker -------------------------------------------------------

    def _teacher(self, tick, state, policy):
        if self.feedback:
            offsets = self.feedback.popleft()
            if not self.feedback:
                self.phase = "executing"
                self.post_phase()
            self.post({"type": "correction_applied", "offsets": list(offsets)})
            return Feedback(offsets=np.asarray(offsets, dtype=float))
        return None

    def _on_tick(self, trace: rt.TickTrace):
        if self.stop_flag.is_set():
            raise _StopEpisode
        self.post(_tick_message(trace))
        if trace.event is not rt.TickEvent.NORMAL:
            self.post({"type": "event", "event": trace.event.value, "time": trace.time})
        if self.tick_rate > 0:
            time.sleep(1.0 / self.tick_rate)

    def _run(self, preset: str, mode: rt.Mode, seed: int, monitor: rt.MonitorConfig):
        try:
            world, start, goal = simulation.spawn_scenario(preset)
            classify = self.classifier.predict if self.classifier else None
            result = rt.run_episode(
                self.policy,
                world,
                start,
                goal,
                cfg=monitor,
                mode=mode,
                classify=classify,
                teacher=self._teacher,
                seed=seed,
                on_tick=self._on_tick,
            )
            self.policy = result.policy
            self.post(
                {
                    "type": "episode_end",
                    "success": result.record.success,
                    "ticks": result.record.ticks,
                    "collisions": len(result.record.collisions),
                }
            )
        except _StopEpisode:
            self.post({"type": "stopped"})
        except Exception as exc:  # surfaced to the client instead of killing the socket
            self.post({"type": "error", "message": str(exc)})
        finally:
            self.phase = "idle"
            self.post_phase()

    # -- message handling -----------------------------------------------------

    def handle(self, msg: dict) -> None:
        kind = msg.get("type")
        handler = getattr(self, f"_on_{kind}", None)
        if handler is None:
            self.post({"type": "error", "message": f"unknown message type {kind!r}"})
            return
        try:
            handler(msg)
        except Exception as exc:
            self.post({"type": "error", "message": str(exc)})

    def _require_phase(self, *phases):
        if self.phase not in phases:
            raise RuntimeError(f"not allowed in phase {self.phase!r}")

    def _on_start_demo(self, msg):
        self._require_phase("idle")
        self.demo_points = []
        self.phase = "demonstrating"
        self.post_phase()

    def _on_demo_point(self, msg):
        self._require_phase("demonstrating")
        self.demo_points.append((float(msg["t"]), Pose(np.asarray(msg["position"], float))))

    def _on_end_demo(self, msg):
        self._require_phase("demonstrating")
        self.demonstration = record_demonstration(self.demo_points)
        self.phase = "idle"
        self.post(
            {
                "type": "demo_recorded",
                "samples": len(self.demo_points),
                "path": [s.state.tolist() for s in self.demonstration.samples],
            }
        )
        self.post_phase()

    def _on_train(self, msg):
        self._require_phase("idle")
        if self.demonstration is None:
            raise RuntimeError("no demonstration recorded")
        self.policy = train(
            self.demonstration,
            seed=int(msg.get("seed", 0)),
            frame_goal=simulation.TRAINING_GOAL,
        )
        self.post({"type": "trained", "points": len(self.demonstration.samples)})

    def _on_load_policy(self, msg):
        self._require_phase("idle")
        self.policy = Policy.from_dict(msg["policy"])
        self.post({"type": "policy_loaded"})

    def _on_load_classifier(self, msg):
        self._require_phase("idle")
        self.classifier = clf.ClassifierModel.load(msg["path"])
        self.post({"type": "classifier_loaded"})

    def _on_start_episode(self, msg):
        self._require_phase("idle")
        if self.policy is None:
            raise RuntimeError("no trained policy")
        mode = rt.Mode(msg.get("mode", "ilosa"))
        if mode is rt.Mode.ACCIFR and self.classifier is None:
            raise RuntimeError("accifr mode needs a loaded classifier")
        monitor = rt.MonitorConfig.from_dict(msg.get("monitor", {}))
        preset = msg.get("preset", "training")
        self.post({"type": "scene", "scene": _scene_payload(preset)})
        self.stop_flag.clear()
        self.feedback.clear()
        self.phase = "executing"
        self.post_phase()
        self.worker = threading.Thread(
            target=self._run,
            args=(preset, mode, int(msg.get("seed", 0)), monitor),
            daemon=True,
        )
        self.worker.start()

    def _on_feedback(self, msg):
        self._require_phase("executing", "correcting")
        offsets = [float(v) for v in msg["offsets"]]
        self.feedback.append(offsets)
        self.phase = "correcting"
        self.post_phase()

    def _on_stop(self, msg):
        self.stop_flag.set()


def create_app(tick_rate: float = 25.0, ui_dir: str | None = None) -> FastAPI:
    """Application factory; `tick_rate` caps the broadcast rate in Hz
    (0 disables pacing, useful for tests). Pass `ui_dir` to serve a built
    browser client from the root path."""
    app = FastAPI(title="pressfit teach server")

    @app.get("/healthz")
    def healthz():
        return {"status": "ok"}

    @app.websocket("/session")
    async def session_endpoint(ws: WebSocket):
        await ws.accept()
        outbox: asyncio.Queue = asyncio.Queue(maxsize=TICK_QUEUE_SIZE)
        session = Session(asyncio.get_running_loop(), outbox, tick_rate)
        session.post(
            {
                "type": "hello",
                "version": SCHEMA_VERSION,
                "scene": _scene_payload("training"),
            }
        )
        session.post_phase()

        async def sender():
            while True:
                await ws.send_text(json.dumps(await outbox.get()))

        send_task = asyncio.create_task(sender())
        try:
            while True:
                raw = await ws.receive_text()
                try:
                    msg = json.loads(raw)
                except json.JSONDecodeError:
                    session.post({"type": "error", "message": "invalid JSON"})
                    continue
                blocking = msg.get("type") in ("train",)
                if blocking:
                    await asyncio.to_thread(session.handle, msg)
                else:
                    session.handle(msg)
        except WebSocketDisconnect:
            pass
        finally:
            session.stop_flag.set()
            send_task.cancel()
            if session.worker is not None:
                session.worker.join(timeout=5.0)

    if ui_dir is not None:
        from fastapi.staticfiles import StaticFiles

        app.mount("/", StaticFiles(directory=ui_dir, html=True), name="ui")
    return app


app = create_app()


def main() -> None:
    import argparse

    import uvicorn

    parser = argparse.ArgumentParser(description="press-fit teaching server")
    parser.add_argument("--host", default="127.0.0.1")
    parser.add_argument("--port", type=int, default=8765)
    parser.add_argument("--tick-rate", type=float, default=25.0,
                        help="broadcast cap in Hz (0 = unpaced)")
    parser.add_argument("--ui-dir", default=None,
                        help="serve a built browser client from this directory")
    args = parser.parse_args()
    uvicorn.run(
        create_app(tick_rate=args.tick_rate, ui_dir=args.ui_dir),
        host=args.host,
        port=args.port,
    )


if __name__ == "__main__":
    main()
