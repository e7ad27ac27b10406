"""Constant-count highway vehicle process.

A fixed population travels the segment at constant per-vehicle speeds on
fixed lanes. A vehicle reaching its far edge is immediately replaced by a
fresh one (new id, new random speed) at the entry edge of the same lane, so
the population and the directional split never change.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from beamsim.analytic import EAST, HighwayGeometry

KMH = 1.0 / 3.6

SPEED_MIN_KMH = 80.0
SPEED_MAX_KMH = 110.0


@dataclass(frozen=True)
class TrafficConfig:
    vehicle_count: int
    highway: HighwayGeometry
    speed_min: float = SPEED_MIN_KMH * KMH
    speed_max: float = SPEED_MAX_KMH * KMH

    def __post_init__(self):
        # zero is allowed as the degenerate empty-highway case
        if self.vehicle_count < 0 or self.vehicle_count % 2:
            raise ValueError("vehicle_count must be even and >= 0")
        if not 0 < self.speed_min <= self.speed_max:
            raise ValueError("speed bounds must satisfy 0 < min <= max")


@dataclass(frozen=True)
class Vehicle:
    id: int
    x: float
    lane_index: int
    speed: float
    heading: float
    spawn_time: float


def _lanes_by_heading(hw: HighwayGeometry):
    east = [i for i, lane in enumerate(hw.lanes) if lane.heading == EAST]
    west = [i for i, lane in enumerate(hw.lanes) if lane.heading != EAST]
    return east, west


def spawn_population(cfg: TrafficConfig, rng, now: float = 0.0) -> list[Vehicle]:
    """Half eastbound, half westbound, positions jittered along the segment.

    The jitter makes the population steady-state from the first tick instead
    of trickling in from the edges. ``rng`` may be a Generator or a seed.
    """
    if isinstance(rng, int):
        rng = np.random.default_rng(rng)
    east_lanes, west_lanes = _lanes_by_heading(cfg.highway)
    vehicles = []
    half = cfg.vehicle_count // 2
    for i in range(cfg.vehicle_count):
        eastbound = i < half
        lanes = east_lanes if eastbound else west_lanes
        vehicles.append(Vehicle(
            id=i,
            x=float(rng.uniform(0.0, cfg.highway.length)),
            lane_index=lanes[i % len(lanes)],
            speed=float(rng.uniform(cfg.speed_min, cfg.speed_max)),
            heading=cfg.highway.lanes[lanes[i % len(lanes)]].heading,
            spawn_time=now,
        ))
    return vehicles


def step(vehicle: Vehicle, dt: float) -> Vehicle:
    """Advance one tick: same lane, same speed, fixed heading."""
    if dt <= 0:
        raise ValueError(f"dt must be positive, got {dt}")
    return replace(vehicle, x=vehicle.x + math.cos(vehicle.heading) * vehicle.speed * dt)


def has_left_segment(vehicle: Vehicle, hw: HighwayGeometry) -> bool:
    if vehicle.heading == EAST:
        return vehicle.x >= hw.length
    return vehicle.x <= 0.0


def wrap(vehicle: Vehicle, cfg: TrafficConfig, rng, new_id: int,
         now: float) -> Vehicle:
    """Replace a vehicle that crossed its far edge with a fresh one.

    Same lane and direction, entry-edge position, independent new speed.
    """
    entry_x = 0.0 if vehicle.heading == EAST else cfg.highway.length
    return Vehicle(
        id=new_id,
        x=entry_x,
        lane_index=vehicle.lane_index,
        speed=float(rng.uniform(cfg.speed_min, cfg.speed_max)),
        heading=vehicle.heading,
        spawn_time=now,
    )
