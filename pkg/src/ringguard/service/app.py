"""FastAPI service: batch runs and calibration over REST, teleoperation over
a WebSocket speaking line-oriented JSON frames.

Frame types on the socket:

    server -> client   {"type": "telemetry", ...}   20 Hz snapshots
    client -> server   {"type": "cmd.velocity", "vx": .., "vy": .., "vz": ..}
                       {"type": "cmd.waypoint", "position": [x,y,z], "hold_time_s": ..}
                       {"type": "cmd.guard", "action": "expand|collapse|stop|seek|emergency",
                        "radius_m": ..}
    server -> client   {"type": "err", "message": ..}   for rejected frames

The simulation advances on a single asyncio task paced by the wall clock
(scaled by ``timescale``). If the host falls behind, simulated time stalls
rather than stepping a larger dt, so a served run stays tick-for-tick
identical to a headless one. Commands land at the next tick boundary; no
connected client is required for the simulation to run.
"""
from __future__ import annotations

import asyncio
import contextlib
import json
import math

from fastapi import FastAPI, HTTPException, WebSocket, WebSocketDisconnect

from .. import __version__
from ..actuation import rack_spec_for_band
from ..engine import FrameError, Simulation, run_headless
from ..errors import RingDefinitionError, ScenarioValidationError
from ..scenario import Scenario, scenario_from_dict, scenario_to_dict
from ..scissor import calibrate_ring
from .schemas import (
    CalibrateRequest,
    CalibrateResponse,
    HealthResponse,
    MetricsModel,
    RunRequest,
    RunResponse,
    ValidateRequest,
    ValidateResponse,
)

# cap on catch-up work per pacing iteration; beyond it sim time stalls
_MAX_BATCH_TICKS = 400


def run_scenario(request: RunRequest) -> RunResponse:
    """Service-layer batch run; also the code path behind ``POST /api/run``."""
    doc = dict(request.scenario)
    if request.seed is not None:
        doc["seed"] = request.seed
    scenario = scenario_from_dict(doc)
    log, metrics = run_headless(scenario, duration_s=request.duration_s)
    return RunResponse(
        metrics=MetricsModel(**metrics.as_dict()),
        events_jsonl=log.to_jsonl().decode(),
        record_count=len(log.records),
    )


def calibrate(request: CalibrateRequest) -> CalibrateResponse:
    """Ring geometry for a target size band; the code behind ``POST /api/calibrate``."""
    if not request.collapsed_diameter_m < request.target_max_diameter_m:
        raise RingDefinitionError("collapsed diameter must be below the target maximum")
    spec, deployment = calibrate_ring(
        request.units,
        request.collapsed_diameter_m / 2.0,
        request.target_max_diameter_m / 2.0,
    )
    rack = rack_spec_for_band(spec, deployment)
    return CalibrateResponse(
        units=request.units,
        segment_length_m=spec.segment_length,
        kink_angle_rad=spec.kink_angle,
        kink_angle_deg=math.degrees(spec.kink_angle),
        theta_min_rad=deployment.theta_min,
        theta_max_rad=deployment.theta_max,
        rack_stroke_m=rack.rack_stroke,
        outer_radius_band_m=(
            request.collapsed_diameter_m / 2.0,
            request.target_max_diameter_m / 2.0,
        ),
    )


class _RealtimeState:
    def __init__(self, scenario: Scenario, timescale: float):
        self.sim = Simulation(scenario)
        self.timescale = timescale
        self.clients: set[asyncio.Queue] = set()
        self.telemetry_cursor = 0
        self.stop = False

    def drain_new_telemetry(self) -> list[dict]:
        frames = []
        records = self.sim.log.records
        while self.telemetry_cursor < len(records):
            rec = records[self.telemetry_cursor]
            self.telemetry_cursor += 1
            if rec.kind == "telemetry":
                frames.append({"type": "telemetry", **rec.as_dict()["data"]})
        return frames


async def _realtime_loop(state: _RealtimeState) -> None:
    loop = asyncio.get_running_loop()
    sim = state.sim
    duration = sim.scenario.duration_s
    carried = 0.0
    last = loop.time()
    while not state.stop and sim.time < duration:
        await asyncio.sleep(0.005)
        now = loop.time()
        carried += (now - last) * state.timescale
        last = now
        ticks = int(carried / sim.dt)
        if ticks > _MAX_BATCH_TICKS:
            ticks = _MAX_BATCH_TICKS
            carried = 0.0  # host fell behind: stall, do not stretch dt
        else:
            carried -= ticks * sim.dt
        for _ in range(ticks):
            if sim.time >= duration:
                break
            sim.step()
        for frame in state.drain_new_telemetry():
            for q in list(state.clients):
                try:
                    q.put_nowait(frame)
                except asyncio.QueueFull:
                    with contextlib.suppress(asyncio.QueueEmpty):
                        q.get_nowait()  # drop the oldest frame for a slow client
                    with contextlib.suppress(asyncio.QueueFull):
                        q.put_nowait(frame)


def create_app(scenario: Scenario | None = None, timescale: float = 1.0) -> FastAPI:
    @contextlib.asynccontextmanager
    async def lifespan(app: FastAPI):
        task = None
        if scenario is not None:
            state = _RealtimeState(scenario, timescale)
            app.state.realtime = state
            task = asyncio.create_task(_realtime_loop(state))
        yield
        if task is not None:
            app.state.realtime.stop = True
            task.cancel()
            with contextlib.suppress(asyncio.CancelledError):
                await task

    app = FastAPI(title="ringguard", version=__version__, lifespan=lifespan)
    app.state.realtime = None

    @app.get("/api/health", response_model=HealthResponse)
    async def health() -> HealthResponse:
        state = app.state.realtime
        return HealthResponse(
            status="ok",
            version=__version__,
            serving_scenario=state.sim.scenario.name if state else None,
            sim_time_s=state.sim.time if state else None,
        )

    @app.post("/api/run", response_model=RunResponse)
    async def run(request: RunRequest) -> RunResponse:
        try:
            return run_scenario(request)
        except ScenarioValidationError as exc:
            raise HTTPException(status_code=422, detail=exc.problems) from exc

    @app.post("/api/calibrate", response_model=CalibrateResponse)
    async def calibrate_endpoint(request: CalibrateRequest) -> CalibrateResponse:
        try:
            return calibrate(request)
        except (RingDefinitionError, ValueError) as exc:
            raise HTTPException(status_code=422, detail=str(exc)) from exc

    @app.post("/api/validate", response_model=ValidateResponse)
    async def validate(request: ValidateRequest) -> ValidateResponse:
        try:
            scenario_from_dict(request.scenario)
        except ScenarioValidationError as exc:
            return ValidateResponse(valid=False, problems=exc.problems)
        return ValidateResponse(valid=True, problems=[])

    @app.get("/api/scenario")
    async def served_scenario() -> dict:
        state = app.state.realtime
        if state is None:
            raise HTTPException(status_code=404, detail="not serving a scenario")
        return scenario_to_dict(state.sim.scenario)

    @app.websocket("/ws")
    async def teleop_socket(ws: WebSocket) -> None:
        state: _RealtimeState | None = app.state.realtime
        if state is None:
            await ws.close(code=1013)
            return
        await ws.accept()
        queue: asyncio.Queue = asyncio.Queue(maxsize=200)
        state.clients.add(queue)
        if state.sim.latest_telemetry is not None:
            queue.put_nowait({"type": "telemetry", **state.sim.latest_telemetry})

        async def sender() -> None:
            while True:
                frame = await queue.get()
                await ws.send_text(json.dumps(frame, sort_keys=True))

        async def receiver() -> None:
            while True:
                text = await ws.receive_text()
                try:
                    frame = json.loads(text)
                except json.JSONDecodeError:
                    await ws.send_text(
                        json.dumps({"type": "err", "message": "frame is not valid JSON"})
                    )
                    continue
                try:
                    state.sim.submit_frame(frame)
                except FrameError as exc:
                    await ws.send_text(json.dumps({"type": "err", "message": str(exc)}))

        try:
            recv_task = asyncio.create_task(receiver())
            send_task = asyncio.create_task(sender())
            done, pending = await asyncio.wait(
                {recv_task, send_task}, return_when=asyncio.FIRST_COMPLETED
            )
            for task in pending:
                task.cancel()
                with contextlib.suppress(asyncio.CancelledError, WebSocketDisconnect):
                    await task
            for task in done:
                with contextlib.suppress(WebSocketDisconnect):
                    task.result()
        except WebSocketDisconnect:
            pass
        finally:
            state.clients.discard(queue)

    return app


def serve_realtime(
    scenario: Scenario,
    port: int,
    host: str = "127.0.0.1",
    timescale: float = 1.0,
) -> None:
    """Blocking entry point: serve one realtime scenario on a port."""
    import uvicorn

    if scenario.mode != "teleop":
        raise ScenarioValidationError(["mode: serve needs a teleop-mode scenario"])
    app = create_app(scenario, timescale=timescale)
    uvicorn.run(app, host=host, port=port, log_level="info")
