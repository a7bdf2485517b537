"""Closed-form evaluation of a single foraging trial.

Spokes are straight out-and-back flights at constant speed, so each one has an
exact cost: ``2 * exit_distance / v`` when it misses every cluster, or
``hit_distance / v`` when it ends the trial.  A trial is a merge of the
searchers' spoke schedules in time order, with an optional nest queue that
delays departures and returns.
"""
from __future__ import annotations

import heapq
import math
from dataclasses import dataclass, field
from typing import Iterator, Optional, Sequence

import numpy as np

from .geometry import (
    PHI_SEQUENCE,
    TWO_PI,
    ArenaConfig,
    SpokeSequence,
    multi_searcher_angle,
    normalize_angle,
    ray_exit_distance,
    ray_hits_disk,
    ray_hits_square,
)

DEFAULT_SPOKE_CAP = 10**7
SCHEDULERS = ("golden", "ballistic")
_FIT_EPS = 1e-9


class ConfigError(ValueError):
    """Invalid or infeasible simulation configuration."""


class SpokeCapExceeded(RuntimeError):
    """A searcher flew more spokes than the configured cap without a hit."""


@dataclass(frozen=True)
class ClusterSpec:
    """Target cluster centred at polar ``(distance, bearing)`` from the nest.

    ``diameter`` is the diameter of the disk, or of the circumscribed circle for
    a square cluster (side ``diameter / sqrt(2)``, axis-aligned).
    """

    bearing: float
    distance: float
    diameter: float
    shape: str = "disk"

    def __post_init__(self):
        if self.shape not in ("disk", "square"):
            raise ConfigError(f"cluster shape must be 'disk' or 'square', got {self.shape!r}")
        if not self.diameter > 0.0:
            raise ConfigError(f"cluster diameter must be positive, got {self.diameter}")
        if self.distance < 0.0:
            raise ConfigError(f"cluster distance must be >= 0, got {self.distance}")
        object.__setattr__(self, "bearing", normalize_angle(self.bearing))

    @classmethod
    def square_with_side(cls, bearing: float, distance: float, side: float) -> "ClusterSpec":
        return cls(bearing, distance, side * math.sqrt(2.0), "square")

    @property
    def side(self) -> float:
        return self.diameter / math.sqrt(2.0)

    @property
    def center(self) -> tuple[float, float]:
        return self.distance * math.cos(self.bearing), self.distance * math.sin(self.bearing)

    def hit_distance(self, theta: float) -> Optional[float]:
        if self.shape == "disk":
            return ray_hits_disk(theta, self.bearing, self.distance, self.diameter)
        return ray_hits_square(theta, self.bearing, self.distance, self.side)

    def fits_in(self, arena: ArenaConfig) -> bool:
        cx, cy = self.center
        if self.shape == "disk":
            return _disk_fits(cx, cy, self.diameter / 2.0, arena)
        return _square_fits(cx, cy, self.side / 2.0, arena)


def _disk_fits(cx: float, cy: float, r: float, arena: ArenaConfig) -> bool:
    if arena.shape == "circle":
        return math.hypot(cx, cy) + r <= arena.extent + _FIT_EPS
    return max(abs(cx), abs(cy)) + r <= arena.extent + _FIT_EPS


def _square_fits(cx: float, cy: float, half: float, arena: ArenaConfig) -> bool:
    if arena.shape == "circle":
        # farthest corner from the nest
        return math.hypot(abs(cx) + half, abs(cy) + half) <= arena.extent + _FIT_EPS
    return max(abs(cx), abs(cy)) + half <= arena.extent + _FIT_EPS


@dataclass(frozen=True)
class SearcherConfig:
    speed: float = 1.0

    def __post_init__(self):
        if not self.speed > 0.0:
            raise ConfigError(f"searcher speed must be positive, got {self.speed}")


@dataclass(frozen=True)
class CongestionModel:
    """Shared nest queue.  Every departure and every return is one event.

    ``capacity`` is the number of events the nest clears per ``service_time``;
    an event occupies the nest for ``service_time / capacity`` seconds.  With
    ``discipline="fifo"`` events wait their turn in arrival order, ties by rank.
    With ``discipline="shared"`` all waiting events are cleared together at the
    shared rate (processor sharing), so a crowd slows everyone in it.
    """

    capacity: float = 1.0
    service_time: float = 1.0
    discipline: str = "shared"

    def __post_init__(self):
        if not self.capacity > 0.0:
            raise ConfigError(f"nest capacity must be positive, got {self.capacity}")
        if self.service_time < 0.0:
            raise ConfigError(f"service time must be >= 0, got {self.service_time}")
        if self.discipline not in ("fifo", "shared"):
            raise ConfigError(f"congestion discipline must be 'fifo' or 'shared', got {self.discipline!r}")

    @property
    def slot(self) -> float:
        return self.service_time / self.capacity


def congestion_delay(event_index: int, model: CongestionModel) -> float:
    """Wait of the ``event_index``-th (0-based) of a batch of simultaneous FIFO nest events."""
    return max(0.0, event_index / model.capacity * model.service_time)


@dataclass(frozen=True)
class SwarmConfig:
    n: int = 1
    scheduler: str = "golden"
    sequence: SpokeSequence = PHI_SEQUENCE
    searcher: SearcherConfig = field(default_factory=SearcherConfig)
    congestion: Optional[CongestionModel] = None
    spoke_cap: int = DEFAULT_SPOKE_CAP

    def __post_init__(self):
        if self.n < 1:
            raise ConfigError(f"swarm size must be >= 1, got {self.n}")
        if self.scheduler not in SCHEDULERS:
            raise ConfigError(f"unknown scheduler {self.scheduler!r}; expected one of {SCHEDULERS}")
        if self.spoke_cap < 1:
            raise ConfigError(f"spoke cap must be >= 1, got {self.spoke_cap}")


@dataclass(frozen=True)
class TrialResult:
    discovery_time: float
    discovering_searcher: int
    hit_spoke_index: int
    full_spokes_completed: int
    distance_travelled_total: float
    hit_angle: float
    # swarm-wide spokes started before the discovery instant, hit spoke included
    spokes_flown: int

    def as_dict(self) -> dict:
        return {
            "discovery_time": self.discovery_time,
            "discovering_searcher": self.discovering_searcher,
            "hit_spoke_index": self.hit_spoke_index,
            "full_spokes_completed": self.full_spokes_completed,
            "distance_travelled_total": self.distance_travelled_total,
            "hit_angle": self.hit_angle,
            "spokes_flown": self.spokes_flown,
        }


# ---------------------------------------------------------------------------
# cluster placement


def place_cluster(arena: ArenaConfig, diameter: float, seed, shape: str = "disk") -> ClusterSpec:
    """Cluster centre uniform over every position where the cluster fits.

    Rejection sampling over the bounding box of the feasible centres.  ``seed``
    is anything ``numpy.random.default_rng`` accepts.
    """
    if not diameter > 0.0:
        raise ConfigError(f"cluster diameter must be positive, got {diameter}")
    half = diameter / 2.0 if shape == "disk" else diameter / (2.0 * math.sqrt(2.0))
    reach = arena.extent - (diameter / 2.0 if arena.shape == "circle" else half)
    if reach < -_FIT_EPS:
        raise ConfigError(f"cluster of diameter {diameter} does not fit in {arena}")
    if reach <= _FIT_EPS:
        return ClusterSpec(0.0, 0.0, diameter, shape)
    rng = np.random.default_rng(seed)
    fits = _disk_fits if shape == "disk" else _square_fits
    while True:
        cx, cy = rng.uniform(-reach, reach, size=2)
        if fits(cx, cy, half, arena):
            return ClusterSpec(math.atan2(cy, cx), math.hypot(cx, cy), diameter, shape)


def place_cluster_at_distance(distance: float, diameter: float, seed, shape: str = "disk") -> ClusterSpec:
    """Cluster at a fixed nest distance with a uniformly random bearing."""
    rng = np.random.default_rng(seed)
    return ClusterSpec(rng.uniform(0.0, TWO_PI), distance, diameter, shape)


# ---------------------------------------------------------------------------
# spoke schedules


def _golden_headings(rank: int, swarm: SwarmConfig) -> Iterator[float]:
    t = 0
    while True:
        yield multi_searcher_angle(rank, t, swarm.n, swarm.sequence)
        t += 1


def ballistic_stream(seed: int, rank: int) -> np.random.Generator:
    """Private uniform stream of searcher ``rank`` within the trial seeded by ``seed``."""
    return np.random.default_rng([seed, rank])


def _ballistic_headings(rank: int, seed: int, batch: int = 256) -> Iterator[float]:
    rng = ballistic_stream(seed, rank)
    while True:
        for u in rng.random(batch):
            yield TWO_PI * float(u)


def _first_hit(theta: float, clusters: Sequence[ClusterSpec]) -> Optional[float]:
    best = None
    for c in clusters:
        h = c.hit_distance(theta)
        if h is not None and (best is None or h < best):
            best = h
    return best


@dataclass
class _Searcher:
    rank: int
    headings: Iterator[float]
    step: int = 0
    legs: list = field(default_factory=list)  # (start, duration, full)


def searcher_detection_time(
    rank: int,
    swarm: SwarmConfig,
    arena: ArenaConfig,
    clusters: Sequence[ClusterSpec],
    seed: int = 0,
) -> Optional[tuple[float, int, float]]:
    """``(time, step, hit_distance)`` at which searcher ``rank`` alone first hits a cluster.

    Ignores the rest of the swarm, so no congestion applies.  Returns None only
    when ``clusters`` is empty.
    """
    if not 1 <= rank <= swarm.n:
        raise ConfigError(f"searcher rank {rank} outside 1..{swarm.n}")
    if not clusters:
        return None
    v = swarm.searcher.speed
    headings = _headings(rank, swarm, seed)
    elapsed = 0.0
    for t in range(swarm.spoke_cap):
        theta = next(headings)
        h = _first_hit(theta, clusters)
        if h is not None:
            return elapsed + h / v, t, h
        elapsed += 2.0 * ray_exit_distance(theta, arena) / v
    raise SpokeCapExceeded(f"searcher {rank} flew {swarm.spoke_cap} spokes without a hit")


def _headings(rank: int, swarm: SwarmConfig, seed: int) -> Iterator[float]:
    if swarm.scheduler == "golden":
        return _golden_headings(rank, swarm)
    return _ballistic_headings(rank, seed)


def validate_clusters(arena: ArenaConfig, clusters: Sequence[ClusterSpec]) -> None:
    if not clusters:
        raise ConfigError("at least one cluster is required")
    for c in clusters:
        if not c.fits_in(arena):
            raise ConfigError(f"cluster {c} is not contained in arena {arena}")


def simulate_trial(
    arena: ArenaConfig,
    clusters: Sequence[ClusterSpec],
    swarm: SwarmConfig,
    seed: int = 0,
) -> TrialResult:
    """Run one trial until the first searcher contacts any cluster.

    All searchers leave the nest at time 0.  The earliest contact wins, ties
    going to the lowest rank; everyone else stops at that instant.
    """
    validate_clusters(arena, clusters)
    if swarm.congestion is not None and swarm.congestion.discipline == "shared":
        return _simulate_shared(arena, clusters, swarm, seed)

    v = swarm.searcher.speed
    cong = swarm.congestion
    searchers = [_Searcher(r, _headings(r, swarm, seed)) for r in range(1, swarm.n + 1)]
    # (request time, rank, is_return)
    queue = [(0.0, r, False) for r in range(1, swarm.n + 1)]
    nest_free = 0.0
    best = (math.inf, swarm.n + 1)
    hit_info = None

    while queue:
        tau, rank, is_return = heapq.heappop(queue)
        if (tau, rank) > best:
            break
        start = tau
        if cong is not None and cong.slot > 0.0:
            start = max(tau, nest_free)
            nest_free = start + cong.slot
        if is_return:
            heapq.heappush(queue, (start, rank, False))
            continue
        s = searchers[rank - 1]
        if s.step >= swarm.spoke_cap:
            raise SpokeCapExceeded(f"searcher {rank} flew {swarm.spoke_cap} spokes without a hit")
        theta = next(s.headings)
        h = _first_hit(theta, clusters)
        if h is not None:
            s.legs.append((start, h / v, False))
            if (start + h / v, rank) < best:
                best = (start + h / v, rank)
                hit_info = (rank, s.step, theta)
        else:
            dur = 2.0 * ray_exit_distance(theta, arena) / v
            s.legs.append((start, dur, True))
            heapq.heappush(queue, (start + dur, rank, cong is not None))
        s.step += 1

    return _summarise(best[0], hit_info, searchers, v)


def _simulate_shared(arena, clusters, swarm, seed) -> TrialResult:
    # Processor-sharing nest: the n events in service each progress at 1/n of
    # full rate.  A searcher is released ``slot`` before its event clears, so
    # an uncontended transit costs nothing, matching the FIFO release rule.
    v = swarm.searcher.speed
    slot = swarm.congestion.slot
    searchers = [_Searcher(r, _headings(r, swarm, seed)) for r in range(1, swarm.n + 1)]
    arrivals = [(0.0, r, False) for r in range(1, swarm.n + 1)]
    jobs: dict[int, list] = {}  # rank -> [remaining work, is_return, arrival time]
    clock = 0.0
    best = (math.inf, swarm.n + 1)
    hit_info = None

    def depart(rank, at):
        nonlocal best, hit_info
        s = searchers[rank - 1]
        if s.step >= swarm.spoke_cap:
            raise SpokeCapExceeded(f"searcher {rank} flew {swarm.spoke_cap} spokes without a hit")
        theta = next(s.headings)
        h = _first_hit(theta, clusters)
        if h is not None:
            s.legs.append((at, h / v, False))
            if (at + h / v, rank) < best:
                best = (at + h / v, rank)
                hit_info = (rank, s.step, theta)
        else:
            dur = 2.0 * ray_exit_distance(theta, arena) / v
            s.legs.append((at, dur, True))
            heapq.heappush(arrivals, (max(clock, at + dur), rank, True))
        s.step += 1

    while arrivals or jobs:
        next_arrival = arrivals[0][0] if arrivals else math.inf
        finish = least = math.inf
        if jobs:
            least = min(j[0] for j in jobs.values())
            finish = clock + least * len(jobs)
        if min(next_arrival, finish) - slot > best[0]:
            break
        if finish <= next_arrival:
            done = sorted(r for r, j in jobs.items() if j[0] <= least)
            for j in jobs.values():
                j[0] -= least
            clock = finish
            for rank in done:
                _, is_return, arrived = jobs.pop(rank)
                release = max(arrived, clock - slot)
                if is_return:
                    jobs[rank] = [slot, False, release]
                else:
                    depart(rank, release)
            continue
        if jobs:
            share = (next_arrival - clock) / len(jobs)
            for j in jobs.values():
                j[0] = max(0.0, j[0] - share)
        clock = next_arrival
        while arrivals and arrivals[0][0] == clock:
            _, rank, is_return = heapq.heappop(arrivals)
            if slot > 0.0:
                jobs[rank] = [slot, is_return, clock]
            elif is_return:
                heapq.heappush(arrivals, (clock, rank, False))
            else:
                depart(rank, clock)

    return _summarise(best[0], hit_info, searchers, v)


def _summarise(T: float, hit_info, searchers: list[_Searcher], v: float) -> TrialResult:
    if hit_info is None:
        raise SpokeCapExceeded("no searcher reached a cluster")
    rank, step, theta = hit_info
    full = 0
    flown = 0
    moving = 0.0
    for s in searchers:
        for start, dur, is_full in s.legs:
            if start > T:
                continue
            flown += 1
            moving += min(dur, T - start)
            if is_full and start + dur <= T:
                full += 1
    return TrialResult(
        discovery_time=T,
        discovering_searcher=rank,
        hit_spoke_index=step,
        full_spokes_completed=full,
        distance_travelled_total=v * moving,
        hit_angle=theta,
        spokes_flown=flown,
    )
