"""Key performance indicators computed from the event pool.

Everything here is a pure function of (events, config, duration) except
decision latency, which is wall-clock instrumentation collected by the
kernel around policy calls.  The event pool is the ground truth: all
indicators are recomputable from a persisted events.ndjson archive and
compare equal to the live run.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from types import MappingProxyType

from .config import MineConfig
from .entities import TruckState


@dataclass
class DecisionLog:
    """Wall-clock timing of one policy's decisions over one run.

    ``init_durations`` holds one entry per initialization (seconds);
    ``order_durations`` one entry per dispatch order.
    """

    policy: str = ""
    init_durations: list[float] = field(default_factory=list)
    order_durations: list[float] = field(default_factory=list)

    def record_init(self, seconds: float) -> None:
        self.init_durations.append(seconds)

    def record_order(self, seconds: float) -> None:
        self.order_durations.append(seconds)

    @property
    def order_count(self) -> int:
        return len(self.order_durations)


def adl(log: DecisionLog) -> float | None:
    """Mean seconds per dispatch order, with initialization amortized.

    Undefined (None) when no orders were issued.
    """
    n = len(log.order_durations)
    if n == 0:
        return None
    return (math.fsum(log.init_durations) + math.fsum(log.order_durations)) / n


@dataclass(frozen=True)
class FleetSpec:
    """Static fleet description used by the match factor.

    ``ult`` maps (truck type, shovel type) to the minutes that shovel
    type needs to fill that truck type; ``truck_cycle_time`` is the mean
    observed full cycle in minutes.
    """

    truck_counts: dict[str, int]
    shovel_counts: dict[str, int]
    ult: dict[tuple[str, str], float]
    truck_cycle_time: float


_LCM_GRID = 10  # deciminutes: lcm needs integers; the scale cancels


def match_factor(spec: FleetSpec) -> float:
    """Fleet balance ratio: truck service demand over shovel capacity.

    Computed on the heterogeneous construction: per truck type i, the
    least common multiple of its loading times across shovel types sets
    a common service window; shovel capacity is how many trucks of each
    type the shovel fleet fills per window.  1.0 means a balanced fleet,
    above 1 truck redundancy, below 1 idle shovel capacity.
    """
    if spec.truck_cycle_time <= 0:
        raise ValueError("truck_cycle_time must be positive")
    truck_types = [t for t, n in spec.truck_counts.items() if n > 0]
    shovel_types = [s for s, n in spec.shovel_counts.items() if n > 0]
    if not truck_types or not shovel_types:
        raise ValueError("fleet needs at least one truck and one shovel")

    ult_grid: dict[tuple[str, str], int] = {}
    for i in truck_types:
        for j in shovel_types:
            if (i, j) not in spec.ult:
                raise ValueError(f"missing loading time for ({i}, {j})")
            v = spec.ult[(i, j)]
            if v <= 0:
                raise ValueError(f"non-positive loading time for ({i}, {j})")
            ult_grid[(i, j)] = max(1, round(v * _LCM_GRID))

    n_trucks = sum(spec.truck_counts[t] for t in truck_types)
    lcm_by_type = {
        i: math.lcm(*(ult_grid[(i, j)] for j in shovel_types)) for i in truck_types
    }
    numerator = n_trucks * sum(lcm_by_type[i] for i in truck_types)
    capacity_per_window = sum(
        spec.shovel_counts[j] * lcm_by_type[i] / ult_grid[(i, j)]
        for i in truck_types
        for j in shovel_types
    )
    cycle_grid = spec.truck_cycle_time * _LCM_GRID
    return numerator / (capacity_per_window * cycle_grid)


def fleet_spec_from_config(cfg: MineConfig, truck_cycle_time: float) -> FleetSpec:
    """Build the static fleet description from a mine config."""
    truck_counts: dict[str, int] = {}
    capacities: dict[str, float] = {}
    for f in cfg.charging_site.fleets:
        truck_counts[f.type] = truck_counts.get(f.type, 0) + f.count
        capacities[f.type] = f.capacity
    shovel_counts: dict[str, int] = {}
    shovel_specs: dict[str, tuple[float, float]] = {}
    for site in cfg.load_sites:
        for g in site.shovels:
            shovel_counts[g.type] = shovel_counts.get(g.type, 0) + g.count
            shovel_specs[g.type] = (g.bucket_size, g.cycle_time)
    ult = {
        (t, s): math.ceil(capacities[t] / bucket) * cycle
        for t in truck_counts
        for s, (bucket, cycle) in shovel_specs.items()
    }
    return FleetSpec(truck_counts, shovel_counts, ult, truck_cycle_time)


# ---------------------------------------------------------------------------
# event-pool derived indicators

_WAITING = {TruckState.WAITING_FOR_LOADING.value, TruckState.WAITING_FOR_UNLOADING.value}


def production_curve(events: list[dict]) -> list[tuple[float, float]]:
    """Cumulative tons over time, one step per completed unload."""
    curve = [(0.0, 0.0)]
    total = 0.0
    for e in events:
        if e["kind"] == "unload_complete":
            total += e["tons"]
            curve.append((e["t"], total))
    return curve


def waiting_curve(events: list[dict]) -> list[tuple[float, int]]:
    """Number of trucks queued at load or dump sites over time."""
    curve = [(0.0, 0)]
    count = 0
    for e in events:
        if e["kind"] != "state":
            continue
        delta = (e["to"] in _WAITING) - (e["from"] in _WAITING)
        if delta:
            count += delta
            if curve[-1][0] == e["t"]:
                curve[-1] = (e["t"], count)
            else:
                curve.append((e["t"], count))
    return curve


def total_wait_time(events: list[dict], duration: float) -> float:
    """Total truck-minutes spent waiting for loading or unloading.

    Waits still open at the horizon are truncated at ``duration``.
    """
    entered: dict[str, float] = {}
    total = 0.0
    for e in events:
        if e["kind"] != "state":
            continue
        truck = e["subject"]
        if e["from"] in _WAITING and truck in entered:
            total += e["t"] - entered.pop(truck)
        if e["to"] in _WAITING:
            entered[truck] = e["t"]
    for t0 in entered.values():
        total += duration - t0
    return total


def truck_cycle_times(events: list[dict]) -> list[float]:
    """Durations of completed cycles: successive entries into the
    waiting-for-loading state of the same truck."""
    last_entry: dict[str, float] = {}
    cycles: list[float] = []
    for e in events:
        if e["kind"] != "state" or e["to"] != TruckState.WAITING_FOR_LOADING.value:
            continue
        truck = e["subject"]
        if truck in last_entry:
            cycles.append(e["t"] - last_entry[truck])
        last_entry[truck] = e["t"]
    return cycles


def produced_tons(events: list[dict]) -> float:
    return math.fsum(e["tons"] for e in events if e["kind"] == "unload_complete")


def road_jam_count(events: list[dict]) -> int:
    return sum(1 for e in events if e["kind"] == "jam" and e["affected"])


@dataclass
class KpiSummary:
    """One run's scorecard; the deterministic fields depend only on
    (config, seed, policy), while adl is wall-clock instrumentation."""

    policy: str
    seed: int
    produced_tons: float
    match_factor: float | None
    total_wait_time: float
    road_jams: int
    adl: float | None
    production_curve: list[tuple[float, float]]
    waiting_curve: list[tuple[float, int]]
    custom: dict[str, float] = field(default_factory=dict)

    def deterministic_fields(self) -> dict:
        """Everything except the wall-clock decision latency."""
        return {
            "policy": self.policy,
            "seed": self.seed,
            "produced_tons": self.produced_tons,
            "match_factor": self.match_factor,
            "total_wait_time": self.total_wait_time,
            "road_jams": self.road_jams,
            "production_curve": self.production_curve,
            "waiting_curve": self.waiting_curve,
            "custom": self.custom,
        }


_INDICATORS: dict[str, object] = {}


def register_indicator(name: str, fn) -> None:
    """Register a custom indicator: fn(events, config) -> float.

    Indicators receive the complete event pool as read-only mappings and
    appear as extra columns in summary reports.
    """
    _INDICATORS[name] = fn


def unregister_indicator(name: str) -> None:
    _INDICATORS.pop(name, None)


def custom_indicators() -> list[str]:
    return sorted(_INDICATORS)


def compute_kpis(
    events: list[dict],
    cfg: MineConfig,
    duration: float,
    *,
    policy: str = "",
    seed: int = 0,
    decision_log: DecisionLog | None = None,
) -> KpiSummary:
    """Derive the full scorecard from an event pool."""
    cycles = truck_cycle_times(events)
    mf = None
    if cycles:
        mean_cycle = math.fsum(cycles) / len(cycles)
        mf = match_factor(fleet_spec_from_config(cfg, mean_cycle))
    custom = {}
    if _INDICATORS:
        frozen = tuple(MappingProxyType(e) for e in events)
        for name in sorted(_INDICATORS):
            custom[name] = _INDICATORS[name](frozen, cfg)
    return KpiSummary(
        policy=policy,
        seed=seed,
        produced_tons=produced_tons(events),
        match_factor=mf,
        total_wait_time=total_wait_time(events, duration),
        road_jams=road_jam_count(events),
        adl=adl(decision_log) if decision_log is not None else None,
        production_curve=production_curve(events),
        waiting_curve=waiting_curve(events),
        custom=custom,
    )


# ---------------------------------------------------------------------------
# comparison reports

_COLUMNS = ["Name", "Produced Tons", "Matching Factor", "Total Wait Time",
            "Road Jams", "ADL"]


def _fmt(v, digits=2) -> str:
    if v is None:
        return ""
    if isinstance(v, float):
        return f"{v:.{digits}f}"
    return str(v)


@dataclass
class SummaryReport:
    """Per-policy comparison table, sorted by produced tons descending."""

    rows: list[dict]
    extra_columns: list[str] = field(default_factory=list)

    @property
    def columns(self) -> list[str]:
        return _COLUMNS + self.extra_columns

    def to_csv(self) -> str:
        lines = [",".join(self.columns)]
        for r in self.rows:
            lines.append(",".join(_fmt(r.get(c), 6 if c == "ADL" else 2)
                                  for c in self.columns))
        return "\n".join(lines) + "\n"

    def to_markdown(self) -> str:
        head = "| " + " | ".join(self.columns) + " |"
        sep = "|" + "|".join("---" for _ in self.columns) + "|"
        lines = [head, sep]
        for r in self.rows:
            lines.append("| " + " | ".join(_fmt(r.get(c), 6 if c == "ADL" else 2)
                                           for c in self.columns) + " |")
        return "\n".join(lines) + "\n"


def summary_report(summaries: list[KpiSummary]) -> SummaryReport:
    """Build the comparison table, one row per summary."""
    if not summaries:
        raise ValueError("summary_report needs at least one run")
    extra = sorted({k for s in summaries for k in s.custom})
    rows = []
    for s in sorted(summaries, key=lambda s: -s.produced_tons):
        row = {
            "Name": s.policy,
            "Produced Tons": s.produced_tons,
            "Matching Factor": s.match_factor,
            "Total Wait Time": s.total_wait_time,
            "Road Jams": s.road_jams,
            "ADL": s.adl,
        }
        for k in extra:
            row[k] = s.custom.get(k)
        rows.append(row)
    return SummaryReport(rows=rows, extra_columns=extra)
