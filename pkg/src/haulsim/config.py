"""Mine configuration: schema, validation and canonical JSON round-trip.

A mine is described by one JSON document: a charging site with truck
fleets, load sites with shovel groups, dump sites with unload spots,
road parameters (jams, maintenance, optional explicit distances) and the
simulation block (duration, tick interval, seed).  ``load_config``
validates the whole document and reports *every* problem it finds, each
with a path into the document, instead of stopping at the first.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass, field, asdict
from pathlib import Path


class ConfigError(Exception):
    """Invalid mine configuration. ``errors`` lists every violation found."""

    def __init__(self, errors: list[str]):
        self.errors = list(errors)
        super().__init__("invalid configuration:\n" + "\n".join(f"  - {e}" for e in self.errors))


@dataclass(frozen=True)
class HazardParams:
    """Exponential availability model for one subject class.

    ``rate_per_min`` is the exponential rate checked once per simulated
    minute; a fault becomes a terminal breakdown with
    ``breakdown_probability``, otherwise a repair whose duration is
    Normal(repair_mean, repair_std) clamped at zero.
    """

    rate_per_min: float = 0.0
    repair_mean: float = 20.0
    repair_std: float = 5.0
    breakdown_probability: float = 0.0


@dataclass(frozen=True)
class JamParams:
    """Traffic-jam sampling parameters shared by all roads.

    ``mu`` shifts each mixture component away from the truck that anchors
    it, in journey-completion units; ``sigma`` is the component spread.
    Jam duration is Weibull(shape, scale) minutes.
    """

    mu: float = 0.0
    sigma: float = 0.1
    probability: float = 0.0
    weibull_shape: float = 2.0
    weibull_scale: float = 10.0


@dataclass(frozen=True)
class MaintenanceParams:
    """Road maintenance: exponential trigger plus entry-time penalties."""

    rate_per_min: float = 0.0
    duration_mean: float = 20.0
    duration_std: float = 5.0
    penalty_mean: float = 0.25
    penalty_std: float = 0.1


@dataclass(frozen=True)
class FleetSpecConfig:
    type: str
    count: int
    capacity: float          # tons
    speed: float             # km per minute
    hazard: HazardParams = field(default_factory=HazardParams)


@dataclass(frozen=True)
class ChargingSiteConfig:
    name: str
    position: tuple[float, float]
    fleets: tuple[FleetSpecConfig, ...]


@dataclass(frozen=True)
class ShovelGroupConfig:
    type: str
    count: int
    bucket_size: float       # tons per pass
    cycle_time: float        # minutes per pass
    hazard: HazardParams = field(default_factory=HazardParams)


@dataclass(frozen=True)
class LoadSiteConfig:
    name: str
    position: tuple[float, float]
    shovels: tuple[ShovelGroupConfig, ...]


@dataclass(frozen=True)
class DumpSpotsConfig:
    count: int
    unload_time: float       # minutes per truck


@dataclass(frozen=True)
class DumpSiteConfig:
    name: str
    position: tuple[float, float]
    spots: DumpSpotsConfig


@dataclass(frozen=True)
class RoadsConfig:
    jam: JamParams = field(default_factory=JamParams)
    maintenance: MaintenanceParams = field(default_factory=MaintenanceParams)
    # Explicit (site name, site name) -> km overrides; Euclidean otherwise.
    distances: tuple[tuple[str, str, float], ...] = ()


@dataclass(frozen=True)
class SimulationConfig:
    duration_minutes: float = 240.0
    tick_interval: float = 1.0
    seed: int = 42


@dataclass(frozen=True)
class MineConfig:
    name: str
    charging_site: ChargingSiteConfig
    load_sites: tuple[LoadSiteConfig, ...]
    dump_sites: tuple[DumpSiteConfig, ...]
    roads: RoadsConfig = field(default_factory=RoadsConfig)
    simulation: SimulationConfig = field(default_factory=SimulationConfig)

    def truck_count(self) -> int:
        return sum(f.count for f in self.charging_site.fleets)

    def shovel_count(self) -> int:
        return sum(g.count for s in self.load_sites for g in s.shovels)

    def site_names(self) -> list[str]:
        names = [self.charging_site.name]
        names += [s.name for s in self.load_sites]
        names += [d.name for d in self.dump_sites]
        return names

    def road_distance(self, a: str, b: str) -> float:
        """Distance in km between two connected sites (explicit or Euclidean)."""
        for x, y, km in self.roads.distances:
            if {x, y} == {a, b}:
                return km
        pos = {self.charging_site.name: self.charging_site.position}
        pos.update({s.name: s.position for s in self.load_sites})
        pos.update({d.name: d.position for d in self.dump_sites})
        (ax, ay), (bx, by) = pos[a], pos[b]
        return math.hypot(ax - bx, ay - by)

    def road_pairs(self) -> list[tuple[str, str]]:
        """Complete bipartite road set: charging<->load and load<->dump."""
        pairs = [(self.charging_site.name, s.name) for s in self.load_sites]
        pairs += [(s.name, d.name) for s in self.load_sites for d in self.dump_sites]
        return pairs


def truck_roster(cfg: MineConfig) -> list[tuple[str, str, float, float]]:
    """Expand fleets into individual trucks: (id, type, capacity, speed).

    Ids are stable ("<type>-<nn>", 1-based) so policies and the kernel
    agree on them.
    """
    roster = []
    for fleet in cfg.charging_site.fleets:
        for k in range(1, fleet.count + 1):
            roster.append((f"{fleet.type}-{k:02d}", fleet.type, fleet.capacity, fleet.speed))
    return roster


# ---------------------------------------------------------------------------
# parsing / validation


def _check_hazard(raw, path: str, errors: list[str]) -> HazardParams:
    if not isinstance(raw, dict):
        errors.append(f"{path}: expected an object")
        return HazardParams()
    hp = HazardParams(
        rate_per_min=_num(raw, "rate_per_min", path, errors, default=0.0, minimum=0.0),
        repair_mean=_num(raw, "repair_mean", path, errors, default=20.0, positive=True),
        repair_std=_num(raw, "repair_std", path, errors, default=5.0, minimum=0.0),
        breakdown_probability=_num(raw, "breakdown_probability", path, errors,
                                   default=0.0, minimum=0.0, maximum=1.0),
    )
    return hp


def _num(raw: dict, key: str, path: str, errors: list[str], *, default=None,
         positive=False, minimum=None, maximum=None):
    if key not in raw:
        if default is None:
            errors.append(f"{path}.{key}: missing required field")
            return 1.0
        return default
    v = raw[key]
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        errors.append(f"{path}.{key}: expected a number, got {type(v).__name__}")
        return default if default is not None else 1.0
    v = float(v)
    if positive and v <= 0:
        errors.append(f"{path}.{key}: must be > 0, got {v}")
    if minimum is not None and v < minimum:
        errors.append(f"{path}.{key}: must be >= {minimum}, got {v}")
    if maximum is not None and v > maximum:
        errors.append(f"{path}.{key}: must be <= {maximum}, got {v}")
    return v


def _int(raw: dict, key: str, path: str, errors: list[str], *, default=None, positive=False):
    if key not in raw:
        if default is None:
            errors.append(f"{path}.{key}: missing required field")
            return 1
        return default
    v = raw[key]
    if isinstance(v, bool) or not isinstance(v, int):
        errors.append(f"{path}.{key}: expected an integer, got {type(v).__name__}")
        return default if default is not None else 1
    if positive and v <= 0:
        errors.append(f"{path}.{key}: must be > 0, got {v}")
    return v


def _str(raw: dict, key: str, path: str, errors: list[str]) -> str:
    v = raw.get(key)
    if not isinstance(v, str) or not v:
        errors.append(f"{path}.{key}: missing or empty name")
        return f"<unnamed {path}>"
    return v


def _position(raw: dict, path: str, errors: list[str]) -> tuple[float, float]:
    v = raw.get("position")
    if (not isinstance(v, (list, tuple)) or len(v) != 2
            or any(isinstance(c, bool) or not isinstance(c, (int, float)) for c in v)):
        errors.append(f"{path}.position: expected [x, y] in km")
        return (0.0, 0.0)
    return (float(v[0]), float(v[1]))


def parse_config(data: dict) -> MineConfig:
    """Validate a parsed JSON document and build a MineConfig.

    Raises ConfigError carrying every violation found.
    """
    errors: list[str] = []
    if not isinstance(data, dict):
        raise ConfigError(["document root must be a JSON object"])

    name = _str(data, "name", "$", errors)

    # charging site & fleets
    ch_raw = data.get("charging_site")
    fleets: list[FleetSpecConfig] = []
    if not isinstance(ch_raw, dict):
        errors.append("$.charging_site: missing or not an object")
        charging = ChargingSiteConfig("charging", (0.0, 0.0), ())
    else:
        cname = _str(ch_raw, "name", "$.charging_site", errors)
        cpos = _position(ch_raw, "$.charging_site", errors)
        raw_fleets = ch_raw.get("fleets")
        if not isinstance(raw_fleets, list) or not raw_fleets:
            errors.append("$.charging_site.fleets: at least one truck fleet is required")
            raw_fleets = []
        seen_types = set()
        for i, rf in enumerate(raw_fleets):
            p = f"$.charging_site.fleets[{i}]"
            if not isinstance(rf, dict):
                errors.append(f"{p}: expected an object")
                continue
            ftype = _str(rf, "type", p, errors)
            if ftype in seen_types:
                errors.append(f"{p}.type: duplicate fleet type {ftype!r}")
            seen_types.add(ftype)
            fleets.append(FleetSpecConfig(
                type=ftype,
                count=_int(rf, "count", p, errors, positive=True),
                capacity=_num(rf, "capacity", p, errors, positive=True),
                speed=_num(rf, "speed", p, errors, positive=True),
                hazard=_check_hazard(rf.get("hazard", {}), f"{p}.hazard", errors),
            ))
        charging = ChargingSiteConfig(cname, cpos, tuple(fleets))

    # load sites
    load_sites: list[LoadSiteConfig] = []
    raw_ls = data.get("load_sites")
    if not isinstance(raw_ls, list) or not raw_ls:
        errors.append("$.load_sites: at least one load site is required")
        raw_ls = []
    for i, rs in enumerate(raw_ls):
        p = f"$.load_sites[{i}]"
        if not isinstance(rs, dict):
            errors.append(f"{p}: expected an object")
            continue
        sname = _str(rs, "name", p, errors)
        spos = _position(rs, p, errors)
        groups: list[ShovelGroupConfig] = []
        raw_groups = rs.get("shovels")
        if not isinstance(raw_groups, list) or not raw_groups:
            errors.append(f"{p}.shovels: at least one shovel group is required")
            raw_groups = []
        for j, rg in enumerate(raw_groups):
            gp = f"{p}.shovels[{j}]"
            if not isinstance(rg, dict):
                errors.append(f"{gp}: expected an object")
                continue
            groups.append(ShovelGroupConfig(
                type=_str(rg, "type", gp, errors),
                count=_int(rg, "count", gp, errors, positive=True),
                bucket_size=_num(rg, "bucket_size", gp, errors, positive=True),
                cycle_time=_num(rg, "cycle_time", gp, errors, positive=True),
                hazard=_check_hazard(rg.get("hazard", {}), f"{gp}.hazard", errors),
            ))
        load_sites.append(LoadSiteConfig(sname, spos, tuple(groups)))

    # dump sites
    dump_sites: list[DumpSiteConfig] = []
    raw_ds = data.get("dump_sites")
    if not isinstance(raw_ds, list) or not raw_ds:
        errors.append("$.dump_sites: at least one dump site is required")
        raw_ds = []
    for i, rd in enumerate(raw_ds):
        p = f"$.dump_sites[{i}]"
        if not isinstance(rd, dict):
            errors.append(f"{p}: expected an object")
            continue
        dname = _str(rd, "name", p, errors)
        dpos = _position(rd, p, errors)
        raw_spots = rd.get("spots")
        if not isinstance(raw_spots, dict):
            errors.append(f"{p}.spots: expected an object with count and unload_time")
            spots = DumpSpotsConfig(1, 1.0)
        else:
            spots = DumpSpotsConfig(
                count=_int(raw_spots, "count", f"{p}.spots", errors, positive=True),
                unload_time=_num(raw_spots, "unload_time", f"{p}.spots", errors, positive=True),
            )
        dump_sites.append(DumpSiteConfig(dname, dpos, spots))

    # roads
    raw_roads = data.get("roads", {})
    if not isinstance(raw_roads, dict):
        errors.append("$.roads: expected an object")
        raw_roads = {}
    raw_jam = raw_roads.get("jam", {})
    if not isinstance(raw_jam, dict):
        errors.append("$.roads.jam: expected an object")
        raw_jam = {}
    jam = JamParams(
        mu=_num(raw_jam, "mu", "$.roads.jam", errors, default=0.0),
        sigma=_num(raw_jam, "sigma", "$.roads.jam", errors, default=0.1, positive=True),
        probability=_num(raw_jam, "probability", "$.roads.jam", errors,
                         default=0.0, minimum=0.0, maximum=1.0),
        weibull_shape=_num(raw_jam, "weibull_shape", "$.roads.jam", errors,
                           default=2.0, positive=True),
        weibull_scale=_num(raw_jam, "weibull_scale", "$.roads.jam", errors,
                           default=10.0, positive=True),
    )
    raw_maint = raw_roads.get("maintenance", {})
    if not isinstance(raw_maint, dict):
        errors.append("$.roads.maintenance: expected an object")
        raw_maint = {}
    maintenance = MaintenanceParams(
        rate_per_min=_num(raw_maint, "rate_per_min", "$.roads.maintenance", errors,
                          default=0.0, minimum=0.0),
        duration_mean=_num(raw_maint, "duration_mean", "$.roads.maintenance", errors,
                           default=20.0, positive=True),
        duration_std=_num(raw_maint, "duration_std", "$.roads.maintenance", errors,
                          default=5.0, minimum=0.0),
        penalty_mean=_num(raw_maint, "penalty_mean", "$.roads.maintenance", errors,
                          default=0.25, minimum=0.0),
        penalty_std=_num(raw_maint, "penalty_std", "$.roads.maintenance", errors,
                         default=0.1, minimum=0.0),
    )
    distances: list[tuple[str, str, float]] = []
    raw_dist = raw_roads.get("distances") or []
    if not isinstance(raw_dist, list):
        errors.append("$.roads.distances: expected a list of {from, to, km}")
        raw_dist = []
    for i, rd in enumerate(raw_dist):
        p = f"$.roads.distances[{i}]"
        if not isinstance(rd, dict) or not {"from", "to", "km"} <= set(rd):
            errors.append(f"{p}: expected an object with from, to, km")
            continue
        km = _num(rd, "km", p, errors, positive=True)
        distances.append((str(rd["from"]), str(rd["to"]), km))
    roads = RoadsConfig(jam=jam, maintenance=maintenance, distances=tuple(distances))

    # simulation block
    raw_sim = data.get("simulation", {})
    if not isinstance(raw_sim, dict):
        errors.append("$.simulation: expected an object")
        raw_sim = {}
    sim = SimulationConfig(
        duration_minutes=_num(raw_sim, "duration_minutes", "$.simulation", errors,
                              default=240.0, positive=True),
        tick_interval=_num(raw_sim, "tick_interval", "$.simulation", errors,
                           default=1.0, positive=True),
        seed=_int(raw_sim, "seed", "$.simulation", errors, default=42),
    )

    cfg = MineConfig(
        name=name,
        charging_site=charging,
        load_sites=tuple(load_sites),
        dump_sites=tuple(dump_sites),
        roads=roads,
        simulation=sim,
    )

    # cross-cutting checks: unique site names, consistent shovel types,
    # distance refs, degenerate roads
    names = cfg.site_names()
    dupes = {n for n in names if names.count(n) > 1}
    for d in sorted(dupes):
        errors.append(f"$: site name {d!r} is not unique")
    shovel_specs: dict[str, tuple[float, float]] = {}
    for i, site in enumerate(cfg.load_sites):
        for j, g in enumerate(site.shovels):
            spec = (g.bucket_size, g.cycle_time)
            if g.type in shovel_specs and shovel_specs[g.type] != spec:
                errors.append(
                    f"$.load_sites[{i}].shovels[{j}]: shovel type {g.type!r} redefined "
                    "with different bucket_size/cycle_time")
            shovel_specs.setdefault(g.type, spec)
    valid_pairs = {frozenset(p) for p in cfg.road_pairs()}
    for i, (a, b, km) in enumerate(cfg.roads.distances):
        if a not in names or b not in names:
            errors.append(f"$.roads.distances[{i}]: unknown site in ({a!r}, {b!r})")
        elif frozenset((a, b)) not in valid_pairs:
            errors.append(f"$.roads.distances[{i}]: no road exists between {a!r} and {b!r}")
    if not errors:
        for a, b in cfg.road_pairs():
            if cfg.road_distance(a, b) <= 0:
                errors.append(f"$.roads: road {a!r} -- {b!r} has non-positive distance "
                              "(co-located sites need an explicit distance)")

    if errors:
        raise ConfigError(errors)
    return cfg


def load_config(path: str | Path) -> MineConfig:
    """Read and validate a mine configuration file."""
    p = Path(path)
    if not p.exists():
        raise ConfigError([f"config file not found: {p}"])
    try:
        data = json.loads(p.read_text(encoding="utf-8"))
    except json.JSONDecodeError as e:
        raise ConfigError([f"not valid JSON: {e}"]) from e
    return parse_config(data)


def config_to_dict(cfg: MineConfig) -> dict:
    """Canonical plain-dict form; parse_config(config_to_dict(c)) == c."""
    d = asdict(cfg)
    d["charging_site"]["position"] = list(cfg.charging_site.position)
    d["charging_site"]["fleets"] = [asdict(f) for f in cfg.charging_site.fleets]
    d["load_sites"] = []
    for s in cfg.load_sites:
        sd = asdict(s)
        sd["position"] = list(s.position)
        d["load_sites"].append(sd)
    d["dump_sites"] = []
    for s in cfg.dump_sites:
        sd = asdict(s)
        sd["position"] = list(s.position)
        d["dump_sites"].append(sd)
    d["roads"]["distances"] = [
        {"from": a, "to": b, "km": km} for a, b, km in cfg.roads.distances
    ]
    return d


def emit_config(cfg: MineConfig) -> str:
    """Canonical JSON text for a config (stable across runs)."""
    return json.dumps(config_to_dict(cfg), indent=2) + "\n"


def config_hash(cfg: MineConfig) -> str:
    """SHA-256 of the canonical JSON; identifies a config in log headers."""
    return hashlib.sha256(emit_config(cfg).encode("utf-8")).hexdigest()
