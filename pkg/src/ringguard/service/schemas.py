"""Pydantic request/response models for the REST surface.

Scenario documents stay plain dicts (the engine owns their validation and
reports every problem at once); these models shape the endpoints around them.
"""
from __future__ import annotations

from pydantic import BaseModel, Field


class RunRequest(BaseModel):
    scenario: dict
    seed: int | None = None
    duration_s: float | None = Field(default=None, gt=0)


class MetricsModel(BaseModel):
    mission_outcome: str
    peak_contact_force_n: float
    contact_count: int
    min_human_separation_m: float | None
    min_obstacle_distance_m: float | None
    expansion_latency_s: float | None
    structure_damaged: bool
    flight_time_s: float


class RunResponse(BaseModel):
    metrics: MetricsModel
    events_jsonl: str
    record_count: int


class CalibrateRequest(BaseModel):
    units: int = Field(default=16, ge=4)
    target_max_diameter_m: float = Field(default=0.85, gt=0)
    collapsed_diameter_m: float = Field(default=0.52, gt=0)


class CalibrateResponse(BaseModel):
    units: int
    segment_length_m: float
    kink_angle_rad: float
    kink_angle_deg: float
    theta_min_rad: float
    theta_max_rad: float
    rack_stroke_m: float
    outer_radius_band_m: tuple[float, float]


class ValidateRequest(BaseModel):
    scenario: dict


class ValidateResponse(BaseModel):
    valid: bool
    problems: list[str]


class HealthResponse(BaseModel):
    status: str
    version: str
    serving_scenario: str | None = None
    sim_time_s: float | None = None
