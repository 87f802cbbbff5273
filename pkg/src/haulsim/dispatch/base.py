"""Dispatch policy interface and the read-only mine snapshot it sees.

A policy is invoked at three order points (init order leaving charging,
haul order after loading, back order after unloading) plus the shovel
and dump-spot choices on site arrival.  Policies receive an immutable
MineSnapshot and return the id of an eligible target; the kernel
validates every returned id.  ``on_event`` notifies the policy of
random events; baseline policies ignore it.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass, field

from ..config import MineConfig


@dataclass(frozen=True)
class ShovelView:
    id: str
    shovel_type: str
    status: str                       # Up | UnderRepair | Broken
    queue_len: int                    # waiting trucks, serving excluded
    serving: bool
    bucket_size: float
    cycle_time: float
    queued_capacities: tuple[float, ...] = ()   # serving first, then queue order

    def loading_time(self, capacity: float) -> float:
        return math.ceil(capacity / self.bucket_size) * self.cycle_time


@dataclass(frozen=True)
class LoadSiteView:
    id: str
    index: int
    distance: float                   # km from the requesting truck's site
    shovels: tuple[ShovelView, ...]
    queue_len: int                    # waiting + serving + parked at the site
    en_route: int                     # trucks whose journey targets this site
    queued_capacities: tuple[float, ...] = ()
    en_route_capacities: tuple[float, ...] = ()

    @property
    def usable(self) -> bool:
        return any(s.status != "Broken" for s in self.shovels)

    def up_shovels(self) -> tuple[ShovelView, ...]:
        return tuple(s for s in self.shovels if s.status == "Up")


@dataclass(frozen=True)
class SpotView:
    id: str
    queue_len: int
    serving: bool
    unload_time: float


@dataclass(frozen=True)
class DumpSiteView:
    id: str
    index: int
    distance: float
    spots: tuple[SpotView, ...]
    queue_len: int
    en_route: int


@dataclass(frozen=True)
class RoadView:
    id: str
    status: str
    occupancy: int
    jam_count: int


@dataclass(frozen=True)
class MineSnapshot:
    """Immutable view of the mine handed to policies at decision time."""

    clock: float
    truck_id: str
    truck_type: str
    truck_capacity: float
    truck_location: str
    load_sites: tuple[LoadSiteView, ...]
    dump_sites: tuple[DumpSiteView, ...]
    roads: tuple[RoadView, ...] = ()

    def eligible_load_sites(self) -> tuple[LoadSiteView, ...]:
        return tuple(s for s in self.load_sites if s.usable)


class DispatchPolicy:
    """Base policy. Subclasses implement the five decision methods.

    Policies must not retain references into the kernel; the snapshot is
    the whole world they may inspect.
    """

    name = "base"

    def initialize(self, config: MineConfig, rng: random.Random) -> None:
        """One-time setup per run; timed as the policy's init cost."""

    def give_init_order(self, snapshot: MineSnapshot) -> str:
        raise NotImplementedError

    def give_haul_order(self, snapshot: MineSnapshot) -> str:
        raise NotImplementedError

    def give_back_order(self, snapshot: MineSnapshot) -> str:
        raise NotImplementedError

    def choose_shovel(self, snapshot: MineSnapshot, load_site: LoadSiteView) -> str:
        raise NotImplementedError

    def choose_dump_spot(self, snapshot: MineSnapshot, dump_site: DumpSiteView) -> str:
        raise NotImplementedError

    def on_event(self, event: dict) -> None:
        """Notification of a random event (jam, fault, maintenance)."""


_REGISTRY: dict[str, type[DispatchPolicy]] = {}


def register_policy(cls: type[DispatchPolicy]) -> type[DispatchPolicy]:
    """Register a policy class under its ``name`` (also usable as a decorator)."""
    if not cls.name or cls.name == "base":
        raise ValueError("policy classes must define a unique non-default name")
    _REGISTRY[cls.name] = cls
    return cls


def get_policy(name: str) -> DispatchPolicy:
    """Instantiate a registered policy by name."""
    if name not in _REGISTRY:
        raise KeyError(
            f"unknown dispatcher {name!r}; registered: {', '.join(sorted(_REGISTRY))}")
    return _REGISTRY[name]()


def available_policies() -> list[str]:
    return sorted(_REGISTRY)
