"""Live session service: fixed-rate simulation streamed over a WebSocket.

One session thread owns the world; client inputs land in a queue and are
applied at the next tick boundary only. Each connected client has a
latest-value outbox (drop-oldest), so slow consumers never block the
tick. Teleop twists always pass through the shield when one is loaded.
"""

from __future__ import annotations

import asyncio
import json
import logging
import math
import queue
import threading
import time

import numpy as np
from fastapi import FastAPI, WebSocket, WebSocketDisconnect

from ..core.behaviors import HumanPuppet
from ..core.collision import check_collision
from ..core.types import Box, Circle, Obstacle, PlantConfig, Twist, Vec2
from ..core.world import step_world
from ..errors import ConfigError
from ..guidance.scenarios import GeneratedScenario, ScenarioSpec, generate
from ..raycast.api import ScanContext, ground_truth_rays
from ..rl.obs import assemble_obs_nav, assemble_obs_shield

log = logging.getLogger(__name__)

HUMAN_ID = 999
HUMAN_SPEED_CAP = 3.0


def _shape_json(ob: Obstacle) -> dict:
    if isinstance(ob.shape, Circle):
        return {"type": "circle", "radius": ob.shape.radius}
    return {"type": "box", "half_extents": [ob.shape.half_x, ob.shape.half_y]}


class SimSession:
    """Simulation loop owner; thread-safe submit/subscribe interface."""

    def __init__(
        self,
        gen: GeneratedScenario,
        shield=None,
        nav=None,
        estimator=None,
        seed: int = 0,
        hz: float = 50.0,
        slowdown: float = 1.0,
        add_human: bool = True,
        ray_noise: float = 0.0,
    ):
        self.base_spec = gen.spec
        self.shield = shield
        self.nav = nav
        self.estimator = estimator
        self.seed = seed
        self.hz = hz
        self.slowdown = slowdown
        self.add_human = add_human
        self.ray_noise = ray_noise
        self.plant = PlantConfig()
        self._inputs: "queue.Queue[dict]" = queue.Queue()
        self._subscribers: list[queue.Queue] = []
        self._sub_lock = threading.Lock()
        self._running = False
        self._thread: threading.Thread | None = None
        self.paused = False
        self._teleop = Twist.ZERO
        self._install(gen)

    # ------------------------------------------------------------ lifecycle
    def _install(self, gen: GeneratedScenario) -> None:
        self.world = gen.world
        self.goal = gen.goal
        self.field = gen.field
        self._guidance_dirty = True
        if self.add_human and self.world.obstacle_by_id(HUMAN_ID) is None:
            corner = Vec2(self.world.bounds.xmax - 1.0, self.world.bounds.ymax - 1.0)
            self.world.obstacles.append(
                Obstacle(
                    id=HUMAN_ID,
                    shape=Circle(radius=0.3),
                    height=1.7,
                    position=corner,
                    behavior=HumanPuppet(speed_cap=HUMAN_SPEED_CAP),
                )
            )
        self.ctx = ScanContext(self.world)
        self.shield_state = self.shield.init_state(1) if self.shield else None
        self.nav_state = self.nav.init_state(1) if self.nav else None
        self.shield_prev = Twist.ZERO
        import numpy as _np

        from .. import rng as rng_mod

        self.noise_rng = rng_mod.stream(self.seed, "serve/noise")

    def submit(self, msg: dict) -> None:
        self._inputs.put(msg)

    def subscribe(self) -> queue.Queue:
        q: queue.Queue = queue.Queue(maxsize=1)
        with self._sub_lock:
            self._subscribers.append(q)
        return q

    def unsubscribe(self, q: queue.Queue) -> None:
        with self._sub_lock:
            if q in self._subscribers:
                self._subscribers.remove(q)

    def start(self) -> None:
        self._running = True
        self._thread = threading.Thread(target=self._loop, daemon=True)
        self._thread.start()

    def stop(self) -> None:
        self._running = False
        if self._thread is not None:
            self._thread.join(timeout=2.0)

    def _loop(self) -> None:
        period = self.slowdown / self.hz
        while self._running:
            t0 = time.monotonic()
            self.run_ticks(1)
            rest = period - (time.monotonic() - t0)
            if rest > 0:
                time.sleep(rest)

    # ------------------------------------------------------------- stepping
    def run_ticks(self, n: int) -> None:
        """Advance n tick boundaries (used directly for scripted replays)."""
        for _ in range(n):
            self._apply_inputs()
            if not self.paused:
                self._tick()
            self._broadcast()

    def _apply_inputs(self) -> None:
        while True:
            try:
                msg = self._inputs.get_nowait()
            except queue.Empty:
                return
            try:
                self._apply_one(msg)
            except Exception as exc:  # malformed input keeps the session alive
                log.warning("ignoring bad client message %r: %s", msg, exc)

    def _apply_one(self, msg: dict) -> None:
        kind = msg.get("type")
        if kind == "teleop_cmd":
            vx, vy, wz = msg["twist"]
            self._teleop = Twist(float(vx), float(vy), float(wz))
        elif kind == "obstacle_pose":
            ob = self.world.obstacle_by_id(int(msg["id"]))
            if ob is not None and isinstance(ob.behavior, HumanPuppet):
                x, y = msg["position"]
                ob.behavior.target = self.world.bounds.clamp(Vec2(float(x), float(y)))
            else:
                log.warning("obstacle_pose for non-draggable id %s", msg.get("id"))
        elif kind == "set_goal":
            x, y = msg["position"]
            self.goal = self.world.bounds.clamp(Vec2(float(x), float(y)))
        elif kind == "pause":
            self.paused = True
        elif kind == "resume":
            self.paused = False
        elif kind == "reset":
            spec = self.base_spec
            if msg.get("scenario"):
                spec = ScenarioSpec(
                    kind=msg["scenario"], seed=self.seed, scale=spec.scale
                )
            self._install(generate(spec))
        else:
            log.warning("unknown message type %r", kind)

    def _tick(self) -> None:
        rays_gt = ground_truth_rays(self.world, ctx=self.ctx)
        if self.ray_noise > 0:
            d = rays_gt.distances + self.noise_rng.uniform(
                -self.ray_noise, self.ray_noise, rays_gt.distances.shape
            )
            rays_gt.distances = np.clip(d, 1e-3, rays_gt.max_range)
        self._rays_est = None
        rays_for_policy = rays_gt
        if self.estimator is not None:
            if not hasattr(self, "_est_sensor") or self._est_sensor is None:
                from ..evaluation.episode import _EstimatorSensor

                self._est_sensor = _EstimatorSensor(
                    self.estimator, self.world, self.noise_rng, self.ray_noise
                )
            rays_for_policy = self._est_sensor.rays(self.world)
            self._rays_est = rays_for_policy

        r = self.world.robot
        if self.nav is not None and self.goal is not None:
            obs = assemble_obs_nav(
                r.position, r.heading, r.body_velocity, self.goal, rays_for_policy
            )
            mean, _, self.nav_state, _ = self.nav.act(obs[None, :], self.nav_state, rng=None)
            cmd_nav = Twist(*[float(v) for v in mean[0]])
        else:
            cmd_nav = self._teleop
        if self.shield is not None:
            sobs = assemble_obs_shield(cmd_nav, r.body_velocity, self.shield_prev, rays_for_policy)
            mean, _, self.shield_state, _ = self.shield.act(
                sobs[None, :], self.shield_state, rng=None
            )
            cmd_safe = Twist(*[float(v) for v in mean[0]])
            self.shield_prev = cmd_safe
        else:
            cmd_safe = self.plant.clamp_twist(cmd_nav)
        self._cmd_nav = cmd_nav
        self._cmd_safe = cmd_safe
        self._rays_gt = rays_gt
        step_world(self.world, cmd_safe, self.plant)
        self._collisions = check_collision(self.world)

    # ------------------------------------------------------------ messaging
    def state_message(self) -> dict:
        w = self.world
        msg = {
            "type": "state",
            "tick": w.tick,
            "paused": self.paused,
            "robot": {
                "position": [w.robot.position.x, w.robot.position.y],
                "heading": w.robot.heading,
                "body_velocity": list(w.robot.body_velocity.as_tuple()),
                "radius": w.robot.radius,
            },
            "obstacles": [
                {
                    "id": ob.id,
                    "shape": _shape_json(ob),
                    "position": [ob.position.x, ob.position.y],
                    "angle": ob.angle,
                    "velocity": [ob.velocity.x, ob.velocity.y],
                    "height": ob.height,
                    "draggable": isinstance(ob.behavior, HumanPuppet),
                }
                for ob in w.obstacles
            ],
            "bounds": [w.bounds.xmin, w.bounds.ymin, w.bounds.xmax, w.bounds.ymax],
            "cmd_nav": list(getattr(self, "_cmd_nav", Twist.ZERO).as_tuple()),
            "cmd_safe": list(getattr(self, "_cmd_safe", Twist.ZERO).as_tuple()),
            "collisions": getattr(self, "_collisions", []),
        }
        if self.goal is not None:
            msg["goal"] = [self.goal.x, self.goal.y]
        rays_gt = getattr(self, "_rays_gt", None)
        if rays_gt is not None:
            msg["rays_gt"] = [round(float(v), 4) for v in rays_gt.distances]
        rays_est = getattr(self, "_rays_est", None)
        if rays_est is not None:
            msg["rays_est"] = [round(float(v), 4) for v in rays_est.distances]
        if self.field is not None and self._guidance_dirty:
            g = self.field.grid
            step = 4
            dirs = self.field.direction[::step, ::step].reshape(-1, 2)
            msg["guidance"] = {
                "cell_size": g.cell_size * step,
                "origin": [g.origin.x, g.origin.y],
                "nx": int(math.ceil(g.nx / step)),
                "ny": int(math.ceil(g.ny / step)),
                "dirs": [round(float(v), 3) for v in dirs.reshape(-1)],
            }
            self._guidance_dirty = False
        return msg

    def _broadcast(self) -> None:
        payload = json.dumps(self.state_message())
        with self._sub_lock:
            subs = list(self._subscribers)
        for q in subs:
            try:
                q.put_nowait(payload)
            except queue.Full:
                try:
                    q.get_nowait()
                except queue.Empty:
                    pass
                try:
                    q.put_nowait(payload)
                except queue.Full:
                    pass


def build_app(session: SimSession, static_dir: str | None = None):
    app = FastAPI(title="reasim live session")

    @app.websocket("/ws")
    async def ws_endpoint(websocket: WebSocket):
        await websocket.accept()
        outbox = session.subscribe()

        async def pump_out():
            while True:
                try:
                    payload = outbox.get_nowait()
                except queue.Empty:
                    await asyncio.sleep(0.004)
                    continue
                await websocket.send_text(payload)

        sender = asyncio.create_task(pump_out())
        try:
            while True:
                text = await websocket.receive_text()
                try:
                    msg = json.loads(text)
                    if not isinstance(msg, dict):
                        raise ValueError("message must be a JSON object")
                except ValueError as exc:
                    log.warning("malformed client frame ignored: %s", exc)
                    continue
                session.submit(msg)
        except WebSocketDisconnect:
            pass
        finally:
            sender.cancel()
            session.unsubscribe(outbox)

    @app.get("/healthz")
    async def healthz():
        return {"tick": session.world.tick, "paused": session.paused}

    if static_dir:
        from fastapi.staticfiles import StaticFiles

        app.mount("/", StaticFiles(directory=static_dir, html=True), name="cockpit")
    return app
