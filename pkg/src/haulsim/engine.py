"""The discrete-event kernel.

A run owns a single World: a time-ordered event queue with stable
sequence numbers (ties break by insertion order, so identical inputs
replay identically), the entities built from the config, per-entity RNG
substreams, and the append-only event pool that every KPI derives from.

Flow per truck: an init order sends it from charging to a load site;
on arrival the policy picks a shovel (or the truck parks if none is
up); loading, a haul order, unloading and a back order complete the
cycle.  Random events (jams, maintenance, repairs, breakdowns) perturb
trips and service; every perturbation only ever extends arrival times.
"""

from __future__ import annotations

import heapq
import logging
import math
import time as _time
from dataclasses import dataclass, field

from . import randomevents as rnd
from .config import MineConfig, config_hash, truck_roster
from .dispatch.base import (
    DispatchPolicy,
    DumpSiteView,
    LoadSiteView,
    MineSnapshot,
    RoadView,
    ShovelView,
    SpotView,
    get_policy,
)
from .entities import (
    DumpSite,
    DumpSpot,
    Journey,
    LoadSite,
    Road,
    RoadStatus,
    Shovel,
    SubjectStatus,
    Trigger,
    Truck,
    TruckState,
    travel_time,
)
from .kpi import DecisionLog, KpiSummary, compute_kpis
from .rng import substream
from .ticklog import EVENT_SCHEMA, TICK_SCHEMA, make_header

log = logging.getLogger("haulsim")


class PolicyError(Exception):
    """A dispatch policy raised; the run aborts with its logs flushed."""

    def __init__(self, message: str, events: list[dict], decision_log: DecisionLog):
        super().__init__(message)
        self.events = events
        self.decision_log = decision_log


def expected_ticks(duration: float, interval: float) -> int:
    """Number of tick records for a run: whole intervals, endpoints inclusive."""
    return int(duration / interval + 1e-9) + 1


@dataclass
class SimResult:
    """Everything a finished run leaves behind; the World is discarded."""

    config: MineConfig
    policy_name: str
    seed: int
    duration: float
    events: list[dict]
    ticks: list[dict]
    kpis: KpiSummary
    decision_log: DecisionLog
    wall_seconds: float

    def tick_header(self) -> dict:
        return make_header(TICK_SCHEMA, config_hash=config_hash(self.config),
                           policy=self.policy_name, seed=self.seed,
                           duration=self.duration,
                           tick_interval=self.config.simulation.tick_interval)

    def event_header(self) -> dict:
        return make_header(EVENT_SCHEMA, config_hash=config_hash(self.config),
                           policy=self.policy_name, seed=self.seed,
                           duration=self.duration,
                           tick_interval=self.config.simulation.tick_interval)


class Engine:
    """One simulation run. Strictly single-threaded; build, run(), discard."""

    def __init__(
        self,
        cfg: MineConfig,
        policy: DispatchPolicy | str,
        *,
        seed: int | None = None,
        duration: float | None = None,
        disable_random_events: bool = False,
    ):
        self.cfg = cfg
        self.policy = get_policy(policy) if isinstance(policy, str) else policy
        self.seed = cfg.simulation.seed if seed is None else seed
        self.duration = cfg.simulation.duration_minutes if duration is None else duration
        if self.duration <= 0:
            raise ValueError(f"duration must be > 0, got {self.duration}")
        self.tick_interval = cfg.simulation.tick_interval
        self.random_events_enabled = not disable_random_events

        self.clock = 0.0
        self._queue: list[tuple[float, int, str, dict]] = []
        self._qseq = 0
        self._token = 0
        self.events: list[dict] = []
        self.ticks: list[dict] = []
        self.decision_log = DecisionLog(policy=self.policy.name)

        self._positions: dict[str, tuple[float, float]] = {
            cfg.charging_site.name: cfg.charging_site.position}
        self.charging_name = cfg.charging_site.name

        self.trucks: dict[str, Truck] = {}
        for tid, ttype, cap, speed in truck_roster(cfg):
            self.trucks[tid] = Truck(id=tid, truck_type=ttype, capacity=cap, speed=speed,
                                     current_site=self.charging_name)
        self._truck_hazards = {
            f.type: f.hazard for f in cfg.charging_site.fleets}

        self.load_sites: dict[str, LoadSite] = {}
        self._shovels: dict[str, Shovel] = {}
        self._shovel_hazards: dict[str, object] = {}
        for site_cfg in cfg.load_sites:
            shovels = []
            for group in site_cfg.shovels:
                for k in range(1, group.count + 1):
                    sid = f"{site_cfg.name}/{group.type}-{k}"
                    sh = Shovel(id=sid, shovel_type=group.type,
                                bucket_size=group.bucket_size,
                                cycle_time=group.cycle_time, site=site_cfg.name)
                    shovels.append(sh)
                    self._shovels[sid] = sh
                    self._shovel_hazards[sid] = group.hazard
            self.load_sites[site_cfg.name] = LoadSite(
                id=site_cfg.name, name=site_cfg.name,
                position=site_cfg.position, shovels=shovels)
            self._positions[site_cfg.name] = site_cfg.position

        self.dump_sites: dict[str, DumpSite] = {}
        for d_cfg in cfg.dump_sites:
            spots = [DumpSpot(id=f"{d_cfg.name}/spot-{k}",
                              unload_time=d_cfg.spots.unload_time, site=d_cfg.name)
                     for k in range(1, d_cfg.spots.count + 1)]
            self.dump_sites[d_cfg.name] = DumpSite(
                id=d_cfg.name, name=d_cfg.name, position=d_cfg.position, spots=spots)
            self._positions[d_cfg.name] = d_cfg.position

        self.roads: dict[str, Road] = {}
        self._road_by_pair: dict[frozenset, Road] = {}
        for a, b in cfg.road_pairs():
            road = Road(id=f"{a}--{b}", endpoints=(a, b), distance=cfg.road_distance(a, b))
            self.roads[road.id] = road
            self._road_by_pair[frozenset((a, b))] = road

        # independent substreams so entities never perturb each other
        self._policy_rng = substream(self.seed, "policy")
        self._jam_rng = {r.id: substream(self.seed, "jam", r.id) for r in self.roads.values()}
        self._road_rng = {r.id: substream(self.seed, "road", r.id) for r in self.roads.values()}
        self._truck_rng = {tid: substream(self.seed, "truck", tid) for tid in self.trucks}
        self._shovel_rng = {sid: substream(self.seed, "shovel", sid) for sid in self._shovels}

    # -- plumbing ----------------------------------------------------------

    def schedule(self, t: float, kind: str, ctx: dict) -> None:
        heapq.heappush(self._queue, (t, self._qseq, kind, ctx))
        self._qseq += 1

    def emit(self, kind: str, subject: str, **payload) -> dict:
        record = {"t": self.clock, "seq": len(self.events), "kind": kind,
                  "subject": subject, **payload}
        self.events.append(record)
        log.debug("t=%.3f seq=%05d %s %s %s", self.clock, record["seq"], kind,
                  subject, payload)
        return record

    def _next_token(self) -> int:
        self._token += 1
        return self._token

    def _road_between(self, a: str, b: str) -> Road | None:
        return self._road_by_pair.get(frozenset((a, b)))

    def _distance(self, a: str, b: str) -> float:
        road = self._road_between(a, b)
        if road is not None:
            return road.distance
        (ax, ay), (bx, by) = self._positions[a], self._positions[b]
        return math.hypot(ax - bx, ay - by)

    def truck_position(self, truck: Truck) -> tuple[float, float]:
        if truck.journey is not None:
            c = truck.journey.completion_rate(self.clock)
            (ox, oy) = truck.journey.origin_pos
            (tx, ty) = truck.journey.target_pos
            return (ox + c * (tx - ox), oy + c * (ty - oy))
        if truck.current_site is not None:
            return self._positions[truck.current_site]
        return self._positions[self.charging_name]

    def _set_state(self, truck: Truck, trigger: Trigger, **ctx) -> None:
        old = truck.state
        if trigger is Trigger.REPAIR_START:
            truck.resume_state = old
        new = truck.transition(trigger)
        truck.state = new
        if trigger is Trigger.REPAIR_END:
            truck.resume_state = None
        self.emit("state", truck.id, **{"from": old.value, "to": new.value,
                                        "trigger": trigger.value, **ctx})

    # -- policy wrappers ----------------------------------------------------

    def _timed(self, fn, *args):
        t0 = _time.perf_counter()
        try:
            result = fn(*args)
        except Exception as e:
            raise PolicyError(f"policy {self.policy.name} raised: {e!r}",
                              self.events, self.decision_log) from e
        self.decision_log.record_order(_time.perf_counter() - t0)
        return result

    def _notify_policy(self, event: dict) -> None:
        try:
            self.policy.on_event(event)
        except Exception as e:
            raise PolicyError(f"policy {self.policy.name} raised in on_event: {e!r}",
                              self.events, self.decision_log) from e

    # -- snapshot -----------------------------------------------------------

    def build_snapshot(self, truck: Truck) -> MineSnapshot:
        loc = truck.current_site or self.charging_name
        en_route: dict[str, list[float]] = {name: [] for name in self.load_sites}
        en_route.update({name: [] for name in self.dump_sites})
        for t in self.trucks.values():
            if t.journey is not None and t.state is not TruckState.BROKEN \
                    and t.journey.target in en_route:
                en_route[t.journey.target].append(t.capacity)

        load_views = []
        for idx, site in enumerate(self.load_sites.values()):
            shovel_views = []
            site_caps: list[float] = []
            for sh in site.shovels:
                caps = []
                if sh.serving is not None:
                    caps.append(self.trucks[sh.serving].capacity)
                caps.extend(self.trucks[tid].capacity for tid in sh.queue)
                shovel_views.append(ShovelView(
                    id=sh.id, shovel_type=sh.shovel_type, status=sh.status.value,
                    queue_len=len(sh.queue), serving=sh.serving is not None,
                    bucket_size=sh.bucket_size, cycle_time=sh.cycle_time,
                    queued_capacities=tuple(caps)))
                site_caps.extend(caps)
            site_caps.extend(self.trucks[tid].capacity for tid in site.parking_queue)
            load_views.append(LoadSiteView(
                id=site.id, index=idx, distance=self._distance(loc, site.id),
                shovels=tuple(shovel_views), queue_len=len(site_caps),
                en_route=len(en_route[site.id]), queued_capacities=tuple(site_caps),
                en_route_capacities=tuple(en_route[site.id])))

        dump_views = []
        for idx, site in enumerate(self.dump_sites.values()):
            spot_views = tuple(SpotView(id=sp.id, queue_len=len(sp.queue),
                                        serving=sp.serving is not None,
                                        unload_time=sp.unload_time)
                               for sp in site.spots)
            queue_len = sum(len(sp.queue) + (1 if sp.serving else 0) for sp in site.spots)
            queue_len += len(site.parking_queue)
            dump_views.append(DumpSiteView(
                id=site.id, index=idx, distance=self._distance(loc, site.id),
                spots=spot_views, queue_len=queue_len, en_route=len(en_route[site.id])))

        road_views = tuple(RoadView(id=r.id, status=r.status.value,
                                    occupancy=len(r.trucks_on_road), jam_count=r.jam_count)
                           for r in self.roads.values())
        return MineSnapshot(
            clock=self.clock, truck_id=truck.id, truck_type=truck.truck_type,
            truck_capacity=truck.capacity, truck_location=loc,
            load_sites=tuple(load_views), dump_sites=tuple(dump_views), roads=road_views)

    # -- order handling -----------------------------------------------------

    def _usable_load_sites(self) -> list[LoadSite]:
        return [s for s in self.load_sites.values() if s.usable()]

    def _handle_request(self, ctx: dict) -> None:
        truck = self.trucks[ctx["truck"]]
        if truck.state is TruckState.BROKEN:
            return
        order = ctx["order"]
        if order in ("shovel", "spot"):
            # retried in-site assignment; skip if parking was already drained
            site_obj = (self.load_sites if order == "shovel" else self.dump_sites)[ctx["site"]]
            if truck.id not in site_obj.parking_queue:
                return
            site_obj.parking_queue.remove(truck.id)
            if order == "shovel":
                self._assign_shovel(truck, site_obj)
            else:
                self._assign_spot(truck, site_obj)
            return
        self._request_site_order(truck, order, ctx.get("reason", ""))

    def _request_site_order(self, truck: Truck, order: str, reason: str) -> None:
        self.emit("request", truck.id, order=order, reason=reason,
                  at=truck.current_site)
        if order == "haul":
            eligible = {name for name in self.dump_sites}
            ask = self.policy.give_haul_order
        else:
            eligible = {s.id for s in self._usable_load_sites()}
            ask = {"init": self.policy.give_init_order,
                   "back": self.policy.give_back_order}[order]
        if not eligible:
            self.emit("idle", truck.id, reason="no_target", order=order,
                      at=truck.current_site)
            self.schedule(self.clock + 1.0, "request",
                          {"truck": truck.id, "order": order, "reason": "retry"})
            return
        snapshot = self.build_snapshot(truck)
        target = self._timed(ask, snapshot)
        self.emit("order", truck.id, order=order, target=target)
        if target not in eligible:
            self.emit("policy_fault", truck.id, order=order, returned=str(target))
            target = self._timed(ask, snapshot)
            self.emit("order", truck.id, order=order, target=target)
            if target not in eligible:
                self.emit("policy_fault", truck.id, order=order, returned=str(target))
                self.emit("idle", truck.id, reason="invalid_target", order=order,
                          at=truck.current_site)
                self.schedule(self.clock + 1.0, "request",
                              {"truck": truck.id, "order": order, "reason": "retry"})
                return
        self._depart(truck, target, order)

    def _depart(self, truck: Truck, target: str, order: str) -> None:
        origin = truck.current_site or self.charging_name
        road = self._road_between(origin, target)
        if road is not None:
            base = travel_time(truck, road)
        else:
            base = self._distance(origin, target) / truck.speed  # off-road leg

        penalty_fraction = 0.0
        trip = base
        jam_delay = 0.0
        if road is not None and self.random_events_enabled:
            if road.status is RoadStatus.UNDER_MAINTENANCE:
                penalty_fraction = rnd.sample_maintenance_penalty(
                    self.cfg.roads.maintenance, self._road_rng[road.id])
                trip = base * (1.0 + penalty_fraction)
                if penalty_fraction > 0.0:
                    self.emit("maintenance_penalty", truck.id, road=road.id,
                              fraction=penalty_fraction)
            if self.cfg.roads.jam.probability > 0.0:
                completions = [self.trucks[tid].journey.completion_rate(self.clock)
                               for tid in road.trucks_on_road
                               if self.trucks[tid].journey is not None]
                jam = rnd.sample_jam(completions, trip, self.cfg.roads.jam,
                                     self._jam_rng[road.id])
                if jam is not None:
                    record = self.emit("jam", road.id, truck=truck.id,
                                       position=jam.position, duration=jam.duration,
                                       affected=jam.affected, delay=jam.delay)
                    if jam.affected:
                        jam_delay = jam.delay
                        road.jam_count += 1
                    self._notify_policy(record)

        arrival = self.clock + trip + jam_delay
        if truck.state is TruckState.AT_CHARGING:
            self._set_state(truck, Trigger.INIT_DEPART, target=target)
        elif truck.state is TruckState.WAITING_FOR_LOADING:
            self._set_state(truck, Trigger.REDISPATCH, target=target)
        journey = Journey(
            road_id=road.id if road is not None else None,
            origin=origin, target=target,
            departure_time=self.clock, arrival_time=arrival,
            token=self._next_token(),
            origin_pos=self._positions[origin], target_pos=self._positions[target])
        truck.journey = journey
        truck.current_site = None
        if road is not None:
            road.trucks_on_road[truck.id] = None
        self.emit("depart", truck.id, road=road.id if road else None, origin=origin,
                  target=target, order=order, base_minutes=base,
                  penalty_fraction=penalty_fraction, jam_delay=jam_delay,
                  arrival=arrival)
        self.schedule(arrival, "arrive", {"truck": truck.id, "token": journey.token})

    def _handle_arrive(self, ctx: dict) -> None:
        truck = self.trucks[ctx["truck"]]
        journey = truck.journey
        if journey is None or journey.token != ctx["token"]:
            return  # superseded by a repair extension or breakdown
        if journey.road_id is not None:
            road = self.roads[journey.road_id]
            road.trucks_on_road.pop(truck.id, None)
            road.completed_trips += 1
        truck.journey = None
        truck.current_site = journey.target
        self.emit("arrive", truck.id, site=journey.target)
        if journey.target in self.load_sites:
            self._set_state(truck, Trigger.ARRIVE_LOAD_SITE, site=journey.target)
            self._assign_shovel(truck, self.load_sites[journey.target])
        else:
            self._set_state(truck, Trigger.ARRIVE_DUMP_SITE, site=journey.target)
            self._assign_spot(truck, self.dump_sites[journey.target])

    # -- loading ------------------------------------------------------------

    def _assign_shovel(self, truck: Truck, site: LoadSite) -> None:
        if not site.up_shovels():
            if site.usable():
                site.parking_queue.append(truck.id)
                self.emit("park", truck.id, site=site.id, reason="no_up_shovel")
                return
            # every shovel broke while the truck was traveling: ask again
            self._request_site_order(truck, "back", "site_unusable")
            return
        snapshot = self.build_snapshot(truck)
        view = next(v for v in snapshot.load_sites if v.id == site.id)
        up_ids = {s.id for s in site.up_shovels()}
        shovel_id = self._timed(self.policy.choose_shovel, snapshot, view)
        self.emit("order", truck.id, order="shovel", target=shovel_id)
        if shovel_id not in up_ids:
            self.emit("policy_fault", truck.id, order="shovel", returned=str(shovel_id))
            shovel_id = self._timed(self.policy.choose_shovel, snapshot, view)
            self.emit("order", truck.id, order="shovel", target=shovel_id)
            if shovel_id not in up_ids:
                self.emit("policy_fault", truck.id, order="shovel", returned=str(shovel_id))
                self.emit("idle", truck.id, reason="invalid_target", order="shovel",
                          at=site.id)
                site.parking_queue.append(truck.id)
                self.schedule(self.clock + 1.0, "request",
                              {"truck": truck.id, "order": "shovel", "site": site.id,
                               "reason": "retry"})
                return
        self.enqueue_at_shovel(truck, site, shovel_id)

    def enqueue_at_shovel(self, truck: Truck, site: LoadSite, shovel_id: str) -> int:
        """FIFO append; loading starts at once when the shovel is idle.
        Returns the truck's queue position."""
        shovel = self._shovels[shovel_id]
        if shovel.status is not SubjectStatus.UP:
            raise ValueError(f"shovel {shovel_id} is not up; order must be re-requested")
        shovel.queue.append(truck.id)
        position = len(shovel.queue) - 1
        self.emit("enqueue", truck.id, shovel=shovel_id, site=site.id, position=position)
        if shovel.serving is None:
            self._start_next_loading(shovel)
        return position

    def _start_next_loading(self, shovel: Shovel) -> None:
        if shovel.serving is not None or not shovel.queue \
                or shovel.status is not SubjectStatus.UP:
            return
        tid = shovel.queue.pop(0)
        truck = self.trucks[tid]
        shovel.serving = tid
        shovel.service_token += 1
        self._set_state(truck, Trigger.LOAD_START, shovel=shovel.id)
        minutes = shovel.loading_time(truck.capacity)
        self.emit("load_start", tid, shovel=shovel.id, site=shovel.site, minutes=minutes)
        self.schedule(self.clock + minutes, "load_complete",
                      {"shovel": shovel.id, "truck": tid, "token": shovel.service_token})

    def _handle_load_complete(self, ctx: dict) -> None:
        shovel = self._shovels[ctx["shovel"]]
        if shovel.service_token != ctx["token"] or shovel.serving != ctx["truck"]:
            return
        truck = self.trucks[ctx["truck"]]
        shovel.serving = None
        truck.load_tons = truck.capacity
        site = self.load_sites[shovel.site]
        site.tons_loaded += truck.capacity
        self._set_state(truck, Trigger.LOAD_COMPLETE, shovel=shovel.id)
        self.emit("load_complete", truck.id, shovel=shovel.id, site=shovel.site,
                  tons=truck.capacity)
        self._start_next_loading(shovel)
        self._request_site_order(truck, "haul", "loaded")

    # -- unloading ----------------------------------------------------------

    def _assign_spot(self, truck: Truck, site: DumpSite) -> None:
        snapshot = self.build_snapshot(truck)
        view = next(v for v in snapshot.dump_sites if v.id == site.id)
        spot_ids = {sp.id: sp for sp in site.spots}
        spot_id = self._timed(self.policy.choose_dump_spot, snapshot, view)
        self.emit("order", truck.id, order="spot", target=spot_id)
        if spot_id not in spot_ids:
            self.emit("policy_fault", truck.id, order="spot", returned=str(spot_id))
            spot_id = self._timed(self.policy.choose_dump_spot, snapshot, view)
            self.emit("order", truck.id, order="spot", target=spot_id)
            if spot_id not in spot_ids:
                self.emit("policy_fault", truck.id, order="spot", returned=str(spot_id))
                self.emit("idle", truck.id, reason="invalid_target", order="spot",
                          at=site.id)
                site.parking_queue.append(truck.id)
                self.schedule(self.clock + 1.0, "request",
                              {"truck": truck.id, "order": "spot", "site": site.id,
                               "reason": "retry"})
                return
        spot = spot_ids[spot_id]
        spot.queue.append(truck.id)
        self.emit("enqueue", truck.id, spot=spot_id, site=site.id,
                  position=len(spot.queue) - 1)
        if spot.serving is None:
            self._start_next_unloading(spot)

    def _start_next_unloading(self, spot: DumpSpot) -> None:
        if spot.serving is not None or not spot.queue:
            return
        tid = spot.queue.pop(0)
        truck = self.trucks[tid]
        spot.serving = tid
        self._set_state(truck, Trigger.UNLOAD_START, spot=spot.id)
        self.emit("unload_start", tid, spot=spot.id, site=spot.site,
                  minutes=spot.unload_time)
        self.schedule(self.clock + spot.unload_time, "unload_complete",
                      {"spot": spot.id, "truck": tid})

    def _handle_unload_complete(self, ctx: dict) -> None:
        site = self.dump_sites[self._spot(ctx["spot"]).site]
        spot = self._spot(ctx["spot"])
        if spot.serving != ctx["truck"]:
            return
        truck = self.trucks[ctx["truck"]]
        spot.serving = None
        tons = truck.load_tons
        truck.load_tons = 0.0
        truck.trips_completed += 1
        site.total_tons_received += tons
        self._set_state(truck, Trigger.UNLOAD_COMPLETE, spot=spot.id)
        self.emit("unload_complete", truck.id, spot=spot.id, site=site.id, tons=tons)
        self._start_next_unloading(spot)
        self._request_site_order(truck, "back", "unloaded")

    def _spot(self, spot_id: str) -> DumpSpot:
        site_name = spot_id.split("/spot-")[0]
        for sp in self.dump_sites[site_name].spots:
            if sp.id == spot_id:
                return sp
        raise KeyError(spot_id)

    # -- random events ------------------------------------------------------

    def apply_truck_fault(self, truck_id: str, fault: rnd.AvailabilityFault) -> bool:
        truck = self.trucks[truck_id]
        if truck.state not in (TruckState.EMPTY_RUN, TruckState.FULL_RUN) \
                or truck.journey is None:
            self.emit("fault_ignored", truck_id, state=truck.state.value)
            return False
        if fault.breakdown:
            journey = truck.journey
            if journey.road_id is not None:
                self.roads[journey.road_id].trucks_on_road.pop(truck.id, None)
            here = self.truck_position(truck)
            self._set_state(truck, Trigger.BREAKDOWN)
            back = math.hypot(here[0] - self._positions[self.charging_name][0],
                              here[1] - self._positions[self.charging_name][1])
            truck.journey = Journey(
                road_id=None, origin="breakdown", target=self.charging_name,
                departure_time=self.clock,
                arrival_time=self.clock + (back / truck.speed if back > 0 else 0.0),
                token=self._next_token(), origin_pos=here,
                target_pos=self._positions[self.charging_name])
            record = self.emit("truck_breakdown", truck.id, returning=True)
        else:
            self._set_state(truck, Trigger.REPAIR_START)
            journey = truck.journey
            journey.arrival_time += fault.repair_minutes
            journey.token = self._next_token()
            # repair end first so a zero-length remainder still arrives repaired
            self.schedule(self.clock + fault.repair_minutes, "truck_repair_end",
                          {"truck": truck.id})
            self.schedule(journey.arrival_time, "arrive",
                          {"truck": truck.id, "token": journey.token})
            record = self.emit("truck_repair_start", truck.id,
                               duration=fault.repair_minutes)
        self._notify_policy(record)
        return True

    def _handle_truck_repair_end(self, ctx: dict) -> None:
        truck = self.trucks[ctx["truck"]]
        if truck.state is not TruckState.UNDER_REPAIR:
            return
        self._set_state(truck, Trigger.REPAIR_END)
        self.emit("truck_repair_end", truck.id)

    def apply_shovel_fault(self, shovel_id: str, fault: rnd.AvailabilityFault) -> bool:
        shovel = self._shovels[shovel_id]
        if shovel.status is not SubjectStatus.UP:
            self.emit("fault_ignored", shovel_id, status=shovel.status.value)
            return False
        if fault.breakdown:
            shovel.status = SubjectStatus.BROKEN
            requeued = list(shovel.queue)
            shovel.queue.clear()
            record = self.emit("shovel_breakdown", shovel.id, site=shovel.site,
                               requeued=len(requeued))
            self._notify_policy(record)
            # a truck mid-loading finishes; queued trucks ask for dispatch again
            for tid in requeued:
                self._redispatch_from_broken_shovel(self.trucks[tid],
                                                    self.load_sites[shovel.site])
        else:
            shovel.status = SubjectStatus.UNDER_REPAIR
            record = self.emit("shovel_repair_start", shovel.id, site=shovel.site,
                               duration=fault.repair_minutes)
            self.schedule(self.clock + fault.repair_minutes, "shovel_repair_end",
                          {"shovel": shovel.id})
            self._notify_policy(record)
        return True

    def _redispatch_from_broken_shovel(self, truck: Truck, site: LoadSite) -> None:
        if site.up_shovels():
            self.emit("request", truck.id, order="shovel", reason="shovel_breakdown",
                      at=site.id)
            self._assign_shovel(truck, site)
        elif site.usable():
            site.parking_queue.append(truck.id)
            self.emit("park", truck.id, site=site.id, reason="shovel_breakdown")
        else:
            self._request_site_order(truck, "back", "shovel_breakdown")

    def _handle_shovel_repair_end(self, ctx: dict) -> None:
        shovel = self._shovels[ctx["shovel"]]
        if shovel.status is not SubjectStatus.UNDER_REPAIR:
            return
        shovel.status = SubjectStatus.UP
        self.emit("shovel_repair_end", shovel.id, site=shovel.site)
        self._start_next_loading(shovel)
        self._drain_parking(self.load_sites[shovel.site])

    def _drain_parking(self, site: LoadSite) -> None:
        waiting = list(site.parking_queue)
        site.parking_queue.clear()
        for tid in waiting:
            self._assign_shovel(self.trucks[tid], site)

    def _handle_road_maintenance_end(self, ctx: dict) -> None:
        road = self.roads[ctx["road"]]
        if road.status is not RoadStatus.UNDER_MAINTENANCE:
            return
        road.status = RoadStatus.UP
        self.emit("road_maintenance_end", road.id)

    def _hazard_sweep(self) -> None:
        if not self.random_events_enabled:
            return
        now = self.clock
        for road in self.roads.values():
            if road.status is not RoadStatus.UP:
                continue
            duration = rnd.sample_road_maintenance(
                self.cfg.roads.maintenance, now, self._road_rng[road.id])
            if duration is None:
                continue
            road.status = RoadStatus.UNDER_MAINTENANCE
            road.maintenance_until = now + duration
            record = self.emit("road_maintenance_start", road.id, duration=duration)
            self.schedule(now + duration, "road_maintenance_end", {"road": road.id})
            self._notify_policy(record)
        for tid, truck in self.trucks.items():
            # availability is checked while the truck is actually traveling
            if truck.state not in (TruckState.EMPTY_RUN, TruckState.FULL_RUN) \
                    or truck.journey is None:
                continue
            fault = rnd.sample_availability(
                self._truck_hazards[truck.truck_type], now, self._truck_rng[tid])
            if fault is not None:
                rnd.apply_fault(self, "truck", tid, fault)
        for sid, shovel in self._shovels.items():
            if shovel.status is not SubjectStatus.UP:
                continue
            fault = rnd.sample_availability(
                self._shovel_hazards[sid], now, self._shovel_rng[sid])
            if fault is not None:
                rnd.apply_fault(self, "shovel", sid, fault)

    # -- ticking ------------------------------------------------------------

    def _emit_tick(self, index: int) -> None:
        trucks = {}
        for tid, truck in self.trucks.items():
            x, y = self.truck_position(truck)
            target = truck.journey.target if truck.journey else truck.current_site
            trucks[tid] = {"xy": [x, y], "state": truck.state.value, "target": target}
        load_sites = {}
        for name, site in self.load_sites.items():
            queue = sum(len(sh.queue) + (1 if sh.serving else 0) for sh in site.shovels)
            load_sites[name] = {"queue": queue, "parking": len(site.parking_queue),
                                "tons_loaded": site.tons_loaded}
        dump_sites = {}
        for name, site in self.dump_sites.items():
            queue = sum(len(sp.queue) + (1 if sp.serving else 0) for sp in site.spots)
            queue += len(site.parking_queue)
            dump_sites[name] = {"queue": queue, "tons": site.total_tons_received}
        roads = {rid: {"status": r.status.value, "n": len(r.trucks_on_road),
                       "jams": r.jam_count}
                 for rid, r in self.roads.items()}
        self.ticks.append({"t": self.clock, "i": index, "trucks": trucks,
                           "load_sites": load_sites, "dump_sites": dump_sites,
                           "roads": roads})

    def _handle_tick(self, ctx: dict) -> None:
        index = ctx["i"]
        self._emit_tick(index)       # snapshot first: faults of this minute follow
        self._hazard_sweep()
        next_t = (index + 1) * self.tick_interval
        if next_t <= self.duration + 1e-9:
            self.schedule(next_t, "tick", {"i": index + 1})

    # -- main loop ----------------------------------------------------------

    _HANDLERS = {
        "tick": _handle_tick,
        "request": _handle_request,
        "arrive": _handle_arrive,
        "load_complete": _handle_load_complete,
        "unload_complete": _handle_unload_complete,
        "truck_repair_end": _handle_truck_repair_end,
        "shovel_repair_end": _handle_shovel_repair_end,
        "road_maintenance_end": _handle_road_maintenance_end,
    }

    def run(self) -> SimResult:
        wall0 = _time.perf_counter()
        t0 = _time.perf_counter()
        try:
            self.policy.initialize(self.cfg, self._policy_rng)
        except Exception as e:
            raise PolicyError(f"policy {self.policy.name} failed to initialize: {e!r}",
                              self.events, self.decision_log) from e
        self.decision_log.record_init(_time.perf_counter() - t0)

        log.info("run start: policy=%s seed=%d duration=%.1f trucks=%d",
                 self.policy.name, self.seed, self.duration, len(self.trucks))
        self.schedule(0.0, "tick", {"i": 0})
        for tid in self.trucks:
            self.schedule(0.0, "request", {"truck": tid, "order": "init",
                                           "reason": "init"})
        while self._queue and self._queue[0][0] <= self.duration + 1e-9:
            t, _, kind, ctx = heapq.heappop(self._queue)
            if t < self.clock:
                raise RuntimeError(f"clock went backwards: {t} < {self.clock}")
            self.clock = t
            self._HANDLERS[kind](self, ctx)
        self.clock = self.duration

        kpis = compute_kpis(self.events, self.cfg, self.duration,
                            policy=self.policy.name, seed=self.seed,
                            decision_log=self.decision_log)
        wall = _time.perf_counter() - wall0
        log.info("run end: produced=%.2f t wait=%.2f min jams=%d events=%d",
                 kpis.produced_tons, kpis.total_wait_time, kpis.road_jams,
                 len(self.events))
        return SimResult(config=self.cfg, policy_name=self.policy.name, seed=self.seed,
                         duration=self.duration, events=self.events, ticks=self.ticks,
                         kpis=kpis, decision_log=self.decision_log, wall_seconds=wall)


def run_simulation(
    cfg: MineConfig,
    policy: DispatchPolicy | str,
    seed: int | None = None,
    duration: float | None = None,
    *,
    disable_random_events: bool = False,
) -> SimResult:
    """Run one simulation to completion and return its result bundle."""
    engine = Engine(cfg, policy, seed=seed, duration=duration,
                    disable_random_events=disable_random_events)
    return engine.run()
