"""Stochastic event layer: traffic jams, road maintenance, truck and
shovel repairs/breakdowns.

Jam positions are drawn from a completion-weighted mixture of normal
distributions, one component per truck currently on the road, each
centered at that truck's journey completion (plus a configurable offset)
and truncated to the road's [0, 1] completion range.  Jam durations are
Weibull.  Availability of roads, trucks and shovels follows an
exponential trigger checked once per simulated minute: a fault fires
when a fresh Exp(rate) draw falls below the current clock.

All samplers draw from per-entity substreams (see ``rng``) so one
entity's events never perturb another's.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from statistics import NormalDist

from .config import HazardParams, JamParams, MaintenanceParams

_STD_NORMAL = NormalDist()


@dataclass(frozen=True)
class TruncatedNormal:
    """Normal(center, sigma) restricted and renormalized to [0, 1]."""

    center: float
    sigma: float

    def _bounds(self) -> tuple[float, float]:
        lo = _STD_NORMAL.cdf((0.0 - self.center) / self.sigma)
        hi = _STD_NORMAL.cdf((1.0 - self.center) / self.sigma)
        return lo, hi

    def pdf(self, x: float) -> float:
        if x < 0.0 or x > 1.0:
            return 0.0
        lo, hi = self._bounds()
        mass = max(hi - lo, 1e-300)
        z = (x - self.center) / self.sigma
        return _STD_NORMAL.pdf(z) / self.sigma / mass

    def cdf(self, x: float) -> float:
        if x <= 0.0:
            return 0.0
        if x >= 1.0:
            return 1.0
        lo, hi = self._bounds()
        mass = max(hi - lo, 1e-300)
        return (_STD_NORMAL.cdf((x - self.center) / self.sigma) - lo) / mass

    def sample(self, rng: random.Random) -> float:
        lo, hi = self._bounds()
        if hi - lo < 1e-12:
            # component essentially outside the road; collapse to the edge
            return min(1.0, max(0.0, self.center))
        u = lo + rng.random() * (hi - lo)
        x = self.center + self.sigma * _STD_NORMAL.inv_cdf(u)
        return min(1.0, max(0.0, x))


@dataclass(frozen=True)
class JamPositionDensity:
    """Mixture over road positions (completion-rate units).

    Component i is anchored at truck i's completion rate C_i, shifted by
    the configured offset, weighted by C_i itself; trucks that all just
    departed (every C_i == 0) get uniform weights.
    """

    weights: tuple[float, ...]
    components: tuple[TruncatedNormal, ...]

    def pdf(self, x: float) -> float:
        return sum(w * c.pdf(x) for w, c in zip(self.weights, self.components))

    def cdf(self, x: float) -> float:
        return sum(w * c.cdf(x) for w, c in zip(self.weights, self.components))

    def sample(self, rng: random.Random) -> float:
        u = rng.random()
        acc = 0.0
        for w, comp in zip(self.weights, self.components):
            acc += w
            if u <= acc:
                return comp.sample(rng)
        return self.components[-1].sample(rng)


def jam_position_density(completions: list[float], params: JamParams) -> JamPositionDensity | None:
    """Density of potential jam locations given on-road journey completions.

    Returns None when the road is empty (no jam possible).
    """
    if not completions:
        return None
    total = sum(completions)
    if total > 0:
        weights = tuple(c / total for c in completions)
    else:
        weights = tuple(1.0 / len(completions) for _ in completions)
    components = tuple(
        TruncatedNormal(center=c + params.mu, sigma=params.sigma) for c in completions
    )
    return JamPositionDensity(weights=weights, components=components)


@dataclass(frozen=True)
class JamSample:
    position: float       # completion-rate units along the departing truck's trip
    duration: float       # minutes
    affected: bool
    delay: float          # residual jam minutes added to the trip


def sample_jam(
    completions: list[float],
    trip_minutes: float,
    params: JamParams,
    rng: random.Random,
) -> JamSample | None:
    """Draw a potential jam for one departure onto a road.

    ``completions`` are the journey completion rates of the trucks already
    on the road (the departing truck excluded).  The departing truck is
    affected iff it reaches the jam position strictly before the jam ends;
    if affected, its trip is extended by the jam's residual duration at
    that moment.
    """
    if not completions or params.probability <= 0.0:
        return None
    if rng.random() >= params.probability:
        return None
    density = jam_position_density(completions, params)
    position = density.sample(rng)
    duration = rng.weibullvariate(params.weibull_scale, params.weibull_shape)
    reach = position * trip_minutes
    affected = reach < duration
    delay = duration - reach if affected else 0.0
    return JamSample(position=position, duration=duration, affected=affected, delay=delay)


@dataclass(frozen=True)
class AvailabilityFault:
    breakdown: bool
    repair_minutes: float   # 0 when breakdown


def sample_availability(
    params: HazardParams, now: float, rng: random.Random
) -> AvailabilityFault | None:
    """Per-minute availability check for a subject that is currently up.

    A fault fires when Exp(rate) < now; it is terminal (breakdown) with
    ``breakdown_probability``, otherwise a repair with Normal-distributed
    duration clamped at zero.
    """
    if params.rate_per_min <= 0.0:
        return None
    x = rng.expovariate(params.rate_per_min)
    if x >= now:
        return None
    if rng.random() < params.breakdown_probability:
        return AvailabilityFault(breakdown=True, repair_minutes=0.0)
    duration = max(0.0, rng.normalvariate(params.repair_mean, params.repair_std))
    return AvailabilityFault(breakdown=False, repair_minutes=duration)


def sample_road_maintenance(
    params: MaintenanceParams, now: float, rng: random.Random
) -> float | None:
    """Per-minute maintenance check for an up road; returns the window
    duration in minutes when maintenance starts."""
    if params.rate_per_min <= 0.0:
        return None
    x = rng.expovariate(params.rate_per_min)
    if x >= now:
        return None
    return max(0.0, rng.normalvariate(params.duration_mean, params.duration_std))


def sample_maintenance_penalty(params: MaintenanceParams, rng: random.Random) -> float:
    """Per-entrant fractional time penalty on a maintained road, >= 0."""
    return max(0.0, rng.normalvariate(params.penalty_mean, params.penalty_std))


def apply_fault(engine, kind: str, subject_id: str, fault: AvailabilityFault) -> bool:
    """Apply a sampled fault to the world via the kernel's mutators.

    Faults never stack: a subject that is not currently up ignores the
    fault (logged).  Returns True when the fault was applied.
    """
    if kind == "truck":
        return engine.apply_truck_fault(subject_id, fault)
    if kind == "shovel":
        return engine.apply_shovel_fault(subject_id, fault)
    raise ValueError(f"unknown fault subject kind: {kind}")
