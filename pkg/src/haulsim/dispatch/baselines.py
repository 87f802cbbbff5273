"""Baseline dispatchers: naive, random, nearest, shortest-queue,
shortest-processing-time-first, and fixed-group assignment.

Ties everywhere break toward the lowest site/shovel/spot index so every
baseline is deterministic given its RNG stream.
"""

from __future__ import annotations

import random

from ..config import MineConfig, truck_roster
from .base import (
    DispatchPolicy,
    DumpSiteView,
    LoadSiteView,
    MineSnapshot,
    register_policy,
)


def _lowest_index(sites):
    return min(sites, key=lambda s: s.index)


def _spot_queue(spot) -> int:
    return spot.queue_len + (1 if spot.serving else 0)


@register_policy
class NaiveDispatcher(DispatchPolicy):
    """Constant policy: always the lowest-index eligible target."""

    name = "NaiveDispatcher"

    def give_init_order(self, snapshot: MineSnapshot) -> str:
        return _lowest_index(snapshot.eligible_load_sites()).id

    give_back_order = give_init_order

    def give_haul_order(self, snapshot: MineSnapshot) -> str:
        return _lowest_index(snapshot.dump_sites).id

    def choose_shovel(self, snapshot: MineSnapshot, load_site: LoadSiteView) -> str:
        return load_site.up_shovels()[0].id

    def choose_dump_spot(self, snapshot: MineSnapshot, dump_site: DumpSiteView) -> str:
        return dump_site.spots[0].id


@register_policy
class RandomDispatcher(DispatchPolicy):
    """Uniform choice over eligible targets."""

    name = "RandomDispatcher"

    def __init__(self):
        self.rng = random.Random(0)

    def initialize(self, config: MineConfig, rng: random.Random) -> None:
        self.rng = rng

    def give_init_order(self, snapshot: MineSnapshot) -> str:
        return self.rng.choice(snapshot.eligible_load_sites()).id

    give_back_order = give_init_order

    def give_haul_order(self, snapshot: MineSnapshot) -> str:
        return self.rng.choice(snapshot.dump_sites).id

    def choose_shovel(self, snapshot: MineSnapshot, load_site: LoadSiteView) -> str:
        return self.rng.choice(load_site.up_shovels()).id

    def choose_dump_spot(self, snapshot: MineSnapshot, dump_site: DumpSiteView) -> str:
        return self.rng.choice(dump_site.spots).id


@register_policy
class NearestDispatcher(DispatchPolicy):
    """Greedy on road distance from the truck's current site."""

    name = "NearestDispatcher"

    def give_init_order(self, snapshot: MineSnapshot) -> str:
        return min(snapshot.eligible_load_sites(), key=lambda s: (s.distance, s.index)).id

    give_back_order = give_init_order

    def give_haul_order(self, snapshot: MineSnapshot) -> str:
        return min(snapshot.dump_sites, key=lambda s: (s.distance, s.index)).id

    def choose_shovel(self, snapshot: MineSnapshot, load_site: LoadSiteView) -> str:
        return load_site.up_shovels()[0].id

    def choose_dump_spot(self, snapshot: MineSnapshot, dump_site: DumpSiteView) -> str:
        return dump_site.spots[0].id


@register_policy
class SQDispatcher(DispatchPolicy):
    """Shortest queue, counting trucks already en route as queued ahead.

    Initial orders are uniform-random over the load sites.
    """

    name = "SQDispatcher"

    def __init__(self):
        self.rng = random.Random(0)

    def initialize(self, config: MineConfig, rng: random.Random) -> None:
        self.rng = rng

    def give_init_order(self, snapshot: MineSnapshot) -> str:
        return self.rng.choice(snapshot.eligible_load_sites()).id

    def give_back_order(self, snapshot: MineSnapshot) -> str:
        return min(snapshot.eligible_load_sites(),
                   key=lambda s: (s.queue_len + s.en_route, s.index)).id

    def give_haul_order(self, snapshot: MineSnapshot) -> str:
        return min(snapshot.dump_sites,
                   key=lambda s: (s.queue_len + s.en_route, s.index)).id

    def choose_shovel(self, snapshot: MineSnapshot, load_site: LoadSiteView) -> str:
        return min(load_site.up_shovels(),
                   key=lambda s: (s.queue_len + (1 if s.serving else 0), s.id)).id

    def choose_dump_spot(self, snapshot: MineSnapshot, dump_site: DumpSiteView) -> str:
        return min(dump_site.spots, key=lambda s: (_spot_queue(s), s.id)).id


@register_policy
class SPTFDispatcher(DispatchPolicy):
    """Shortest processing time first: expected queue wait plus own
    service time, with en-route trucks counted into the queue."""

    name = "SPTFDispatcher"

    @staticmethod
    def _site_processing(site: LoadSiteView, capacity: float) -> float:
        shovels = site.up_shovels()
        best = min(shovels, key=lambda s: (s.loading_time(capacity), s.id))
        waiting = list(site.queued_capacities) + list(site.en_route_capacities)
        return sum(best.loading_time(c) for c in waiting) + best.loading_time(capacity)

    @staticmethod
    def _dump_processing(site: DumpSiteView) -> float:
        unload = min(s.unload_time for s in site.spots)
        return (site.queue_len + site.en_route) * unload + unload

    def give_init_order(self, snapshot: MineSnapshot) -> str:
        return min(snapshot.eligible_load_sites(),
                   key=lambda s: (self._site_processing(s, snapshot.truck_capacity), s.index)).id

    give_back_order = give_init_order

    def give_haul_order(self, snapshot: MineSnapshot) -> str:
        return min(snapshot.dump_sites,
                   key=lambda s: (self._dump_processing(s), s.index)).id

    def choose_shovel(self, snapshot: MineSnapshot, load_site: LoadSiteView) -> str:
        def total(s):
            own = s.loading_time(snapshot.truck_capacity)
            return sum(s.loading_time(c) for c in s.queued_capacities) + own
        return min(load_site.up_shovels(), key=lambda s: (total(s), s.id)).id

    def choose_dump_spot(self, snapshot: MineSnapshot, dump_site: DumpSiteView) -> str:
        return min(dump_site.spots,
                   key=lambda s: (_spot_queue(s) * s.unload_time + s.unload_time, s.id)).id


def productivity_ratio(config: MineConfig) -> list[float]:
    """Output-rate share of each load site: shovel tons-per-minute at the
    site over the mine-wide total.  Ratios sum to one."""
    rates = []
    for site in config.load_sites:
        rate = 0.0
        for g in site.shovels:
            if g.cycle_time <= 0:
                raise ValueError(f"{site.name}/{g.type}: non-positive shovel cycle time")
            rate += g.count * (g.bucket_size / g.cycle_time)
        rates.append(rate)
    total = sum(rates)
    if total <= 0:
        raise ValueError("mine has no shovel output capacity")
    return [r / total for r in rates]


def fixed_group_assign(config: MineConfig) -> dict[str, str]:
    """Static truck -> load-site binding proportional to site output rates.

    Trucks are taken in descending capacity order and each goes to the
    site with the largest remaining capacity deficit, where a site's
    target is its productivity share of the total fleet capacity.  Sites
    with zero output rate receive no trucks.
    """
    ratios = productivity_ratio(config)
    roster = truck_roster(config)
    total_capacity = sum(cap for _, _, cap, _ in roster)
    targets = [r * total_capacity for r in ratios]
    assigned = [0.0] * len(ratios)
    eligible = [i for i, r in enumerate(ratios) if r > 0]

    binding: dict[str, str] = {}
    order = sorted(roster, key=lambda r: (-r[2], r[0]))
    for truck_id, _, capacity, _ in order:
        site_idx = max(eligible, key=lambda i: (targets[i] - assigned[i], -i))
        binding[truck_id] = config.load_sites[site_idx].name
        assigned[site_idx] += capacity
    return binding


@register_policy
class FixedGroupDispatcher(DispatchPolicy):
    """Static grouping: trucks are bound to load sites by productivity
    share; within a site the shortest queue wins, dumps by nearest
    distance.  The binding never changes during a run."""

    name = "FixedGroupDispatcher"

    def __init__(self):
        self.binding: dict[str, str] = {}

    def initialize(self, config: MineConfig, rng: random.Random) -> None:
        self.binding = fixed_group_assign(config)

    def give_init_order(self, snapshot: MineSnapshot) -> str:
        return self.binding[snapshot.truck_id]

    give_back_order = give_init_order

    def give_haul_order(self, snapshot: MineSnapshot) -> str:
        return min(snapshot.dump_sites, key=lambda s: (s.distance, s.index)).id

    def choose_shovel(self, snapshot: MineSnapshot, load_site: LoadSiteView) -> str:
        return min(load_site.up_shovels(),
                   key=lambda s: (s.queue_len + (1 if s.serving else 0), s.id)).id

    def choose_dump_spot(self, snapshot: MineSnapshot, dump_site: DumpSiteView) -> str:
        return min(dump_site.spots, key=lambda s: (_spot_queue(s), s.id)).id


BASELINE_NAMES = [
    "NaiveDispatcher",
    "RandomDispatcher",
    "NearestDispatcher",
    "SQDispatcher",
    "SPTFDispatcher",
    "FixedGroupDispatcher",
]
