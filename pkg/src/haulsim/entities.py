"""Simulation entities: trucks, shovels, sites, roads, and the truck
state machine.

The truck cycle is EMPTY_RUN -> WAITING_FOR_LOADING -> LOADING ->
FULL_RUN -> WAITING_FOR_UNLOADING -> UNLOADING -> EMPTY_RUN, entered
from AT_CHARGING at the first dispatch.  Fault states (UNDER_REPAIR,
BROKEN) can be entered from any moving or queued state; BROKEN is
terminal.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum


class TruckState(str, Enum):
    AT_CHARGING = "AtCharging"
    EMPTY_RUN = "EmptyRun"
    WAITING_FOR_LOADING = "WaitingForLoading"
    LOADING = "Loading"
    FULL_RUN = "FullRun"
    WAITING_FOR_UNLOADING = "WaitingForUnloading"
    UNLOADING = "Unloading"
    UNDER_REPAIR = "UnderRepair"
    BROKEN = "Broken"


CYCLE_STATES = (
    TruckState.EMPTY_RUN,
    TruckState.WAITING_FOR_LOADING,
    TruckState.LOADING,
    TruckState.FULL_RUN,
    TruckState.WAITING_FOR_UNLOADING,
    TruckState.UNLOADING,
)

MOVING_STATES = (TruckState.EMPTY_RUN, TruckState.FULL_RUN)

WAITING_STATES = (TruckState.WAITING_FOR_LOADING, TruckState.WAITING_FOR_UNLOADING)


class Trigger(str, Enum):
    INIT_DEPART = "init_depart"
    ARRIVE_LOAD_SITE = "arrive_load_site"
    LOAD_START = "load_start"
    LOAD_COMPLETE = "load_complete"
    ARRIVE_DUMP_SITE = "arrive_dump_site"
    UNLOAD_START = "unload_start"
    UNLOAD_COMPLETE = "unload_complete"
    REDISPATCH = "redispatch"
    REPAIR_START = "repair_start"
    REPAIR_END = "repair_end"
    BREAKDOWN = "breakdown"


# (state, trigger) -> successor. REPAIR_END is handled specially: the
# successor is the state saved when the repair started.
TRANSITIONS: dict[tuple[TruckState, Trigger], TruckState] = {
    (TruckState.AT_CHARGING, Trigger.INIT_DEPART): TruckState.EMPTY_RUN,
    (TruckState.EMPTY_RUN, Trigger.ARRIVE_LOAD_SITE): TruckState.WAITING_FOR_LOADING,
    (TruckState.WAITING_FOR_LOADING, Trigger.LOAD_START): TruckState.LOADING,
    (TruckState.LOADING, Trigger.LOAD_COMPLETE): TruckState.FULL_RUN,
    (TruckState.FULL_RUN, Trigger.ARRIVE_DUMP_SITE): TruckState.WAITING_FOR_UNLOADING,
    (TruckState.WAITING_FOR_UNLOADING, Trigger.UNLOAD_START): TruckState.UNLOADING,
    (TruckState.UNLOADING, Trigger.UNLOAD_COMPLETE): TruckState.EMPTY_RUN,
    # a queued truck sent elsewhere after its shovel broke down
    (TruckState.WAITING_FOR_LOADING, Trigger.REDISPATCH): TruckState.EMPTY_RUN,
}
for _s in CYCLE_STATES:
    TRANSITIONS[(_s, Trigger.REPAIR_START)] = TruckState.UNDER_REPAIR
    TRANSITIONS[(_s, Trigger.BREAKDOWN)] = TruckState.BROKEN
TRANSITIONS[(TruckState.UNDER_REPAIR, Trigger.BREAKDOWN)] = TruckState.BROKEN


class IllegalTransition(Exception):
    """A trigger was fired from a state that does not accept it (kernel bug)."""


class SubjectStatus(str, Enum):
    UP = "Up"
    UNDER_REPAIR = "UnderRepair"
    BROKEN = "Broken"


class RoadStatus(str, Enum):
    UP = "Up"
    UNDER_MAINTENANCE = "UnderMaintenance"


@dataclass
class Journey:
    """One trip along a road; position is interpolated by completion rate."""

    road_id: str | None          # None for an off-road leg (breakdown return)
    origin: str
    target: str
    departure_time: float
    arrival_time: float
    token: int                   # invalidates stale arrival events after extensions
    origin_pos: tuple[float, float] = (0.0, 0.0)
    target_pos: tuple[float, float] = (0.0, 0.0)

    def completion_rate(self, now: float) -> float:
        span = self.arrival_time - self.departure_time
        if span <= 0:
            return 1.0
        c = (now - self.departure_time) / span
        return min(1.0, max(0.0, c))


@dataclass
class Truck:
    id: str
    truck_type: str
    capacity: float              # tons
    speed: float                 # km per minute
    state: TruckState = TruckState.AT_CHARGING
    journey: Journey | None = None
    current_site: str | None = None
    resume_state: TruckState | None = None   # state to restore after repair
    load_tons: float = 0.0
    trips_completed: int = 0

    def transition(self, trigger: Trigger) -> TruckState:
        """Return the successor state for ``trigger`` (no side effects)."""
        if trigger is Trigger.REPAIR_END:
            if self.state is not TruckState.UNDER_REPAIR or self.resume_state is None:
                raise IllegalTransition(f"{self.id}: repair_end in state {self.state.value}")
            return self.resume_state
        key = (self.state, trigger)
        if key not in TRANSITIONS:
            raise IllegalTransition(
                f"{self.id}: trigger {trigger.value} illegal in state {self.state.value}")
        return TRANSITIONS[key]


@dataclass
class Shovel:
    id: str
    shovel_type: str
    bucket_size: float           # tons per pass
    cycle_time: float            # minutes per pass
    site: str
    status: SubjectStatus = SubjectStatus.UP
    queue: list[str] = field(default_factory=list)   # waiting truck ids, FIFO
    serving: str | None = None                        # truck currently loading
    service_token: int = 0

    def loading_time(self, capacity: float) -> float:
        """Minutes to fill a truck: whole bucket passes, at least one."""
        return math.ceil(capacity / self.bucket_size) * self.cycle_time


@dataclass
class DumpSpot:
    id: str
    unload_time: float
    site: str
    queue: list[str] = field(default_factory=list)
    serving: str | None = None


@dataclass
class LoadSite:
    id: str
    name: str
    position: tuple[float, float]
    shovels: list[Shovel]
    parking_queue: list[str] = field(default_factory=list)
    tons_loaded: float = 0.0

    def up_shovels(self) -> list[Shovel]:
        return [s for s in self.shovels if s.status is SubjectStatus.UP]

    def usable(self) -> bool:
        """Eligible as a dispatch target: at least one non-broken shovel."""
        return any(s.status is not SubjectStatus.BROKEN for s in self.shovels)


@dataclass
class DumpSite:
    id: str
    name: str
    position: tuple[float, float]
    spots: list[DumpSpot]
    parking_queue: list[str] = field(default_factory=list)
    total_tons_received: float = 0.0


@dataclass
class Road:
    id: str
    endpoints: tuple[str, str]
    distance: float              # km
    status: RoadStatus = RoadStatus.UP
    trucks_on_road: dict[str, None] = field(default_factory=dict)  # ordered set
    jam_count: int = 0
    completed_trips: int = 0
    maintenance_until: float = 0.0


def travel_time(truck: Truck, road: Road) -> float:
    """Base kinematic trip duration in minutes, before event penalties."""
    if road.distance <= 0:
        raise ValueError(f"road {road.id}: non-positive distance {road.distance}")
    if truck.speed <= 0:
        raise ValueError(f"truck {truck.id}: non-positive speed {truck.speed}")
    return road.distance / truck.speed
