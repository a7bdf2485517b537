"""Seeded sweeps, summary statistics, scaling fits and scheduler comparisons."""
from __future__ import annotations

import hashlib
import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Optional, Sequence

import numpy as np

from .geometry import GOLDEN_ANGLE, PHI, ArenaConfig, SpokeSequence, cluster_half_angle
from .sim import (
    DEFAULT_SPOKE_CAP,
    ConfigError,
    CongestionModel,
    SearcherConfig,
    SpokeCapExceeded,
    SwarmConfig,
    TrialResult,
    place_cluster,
    place_cluster_at_distance,
    simulate_trial,
)

DEFAULT_SLOPE = 32.0
# cluster sides of 8..128 resources spaced 0.15 m apart
REFERENCE_DIAMETERS = (1.2, 2.4, 4.8, 9.6, 19.2)

# scheduler name -> (swarm scheduler, heading increment)
SCHEDULER_VARIANTS = {
    "golden": ("golden", PHI),
    "golden-angle": ("golden", GOLDEN_ANGLE),
    "ballistic": ("ballistic", PHI),
}


def predict_discovery_time(R: float, D: float, n: int, delta: float, c: float = DEFAULT_SLOPE,
                           full_form: bool = False) -> float:
    """Predicted time to first discovery, ``c*R*D/(n*delta)``.

    ``full_form`` adds the travel term: ``c*(R/(n*delta) + 1)*D``.
    """
    for name, value in (("R", R), ("D", D), ("n", n), ("delta", delta), ("c", c)):
        if not value > 0:
            raise ValueError(f"{name} must be positive, got {value}")
    if full_form:
        return c * (R / (n * delta) + 1.0) * D
    return c * R * D / (n * delta)


@dataclass(frozen=True)
class SummaryStats:
    n: int
    mean: float
    std: float
    p5: float
    p25: float
    p50: float
    p75: float
    p95: float
    outliers: int

    @classmethod
    def from_samples(cls, values: Sequence[float]) -> "SummaryStats":
        x = np.asarray(values, dtype=float)
        if x.size == 0:
            nan = math.nan
            return cls(0, nan, nan, nan, nan, nan, nan, nan, 0)
        p5, p25, p50, p75, p95 = np.percentile(x, [5, 25, 50, 75, 95])
        iqr = p75 - p25
        outliers = int(np.count_nonzero((x < p25 - 1.5 * iqr) | (x > p75 + 1.5 * iqr)))
        std = float(x.std(ddof=1)) if x.size > 1 else 0.0
        return cls(int(x.size), float(x.mean()), std, float(p5), float(p25), float(p50),
                   float(p75), float(p95), outliers)


@dataclass(frozen=True)
class SweepConfig:
    """A grid of cells (scheduler x cluster diameter x swarm size), each run
    ``trials_per_cell`` times.

    With ``cluster_distance`` unset, clusters are placed uniformly over the
    arena; otherwise they sit at that nest distance with a uniform bearing.
    """

    arena: ArenaConfig
    deltas: tuple[float, ...]
    ns: tuple[int, ...]
    schedulers: tuple[str, ...] = ("golden",)
    trials_per_cell: int = 100
    master_seed: int = 0
    congestion: Optional[CongestionModel] = None
    cluster_shape: str = "disk"
    cluster_distance: Optional[float] = None
    speed: float = 1.0
    spoke_cap: int = DEFAULT_SPOKE_CAP

    def __post_init__(self):
        object.__setattr__(self, "deltas", tuple(float(d) for d in self.deltas))
        object.__setattr__(self, "ns", tuple(int(n) for n in self.ns))
        object.__setattr__(self, "schedulers", tuple(self.schedulers))
        if self.trials_per_cell < 1:
            raise ConfigError("trials_per_cell must be >= 1")
        if not self.deltas or not self.ns or not self.schedulers:
            raise ConfigError("sweep grids must be non-empty")
        for name in self.schedulers:
            if name not in SCHEDULER_VARIANTS:
                raise ConfigError(f"unknown scheduler {name!r}; expected one of {sorted(SCHEDULER_VARIANTS)}")
        if self.cluster_shape not in ("disk", "square"):
            raise ConfigError(f"cluster shape must be 'disk' or 'square', got {self.cluster_shape!r}")

    def cells(self) -> list["CellKey"]:
        return [CellKey(s, d, n) for s in self.schedulers for d in self.deltas for n in self.ns]

    def to_dict(self) -> dict:
        return {
            "arena_shape": self.arena.shape,
            "extent": self.arena.extent,
            "deltas": list(self.deltas),
            "n_searchers": list(self.ns),
            "schedulers": list(self.schedulers),
            "trials_per_cell": self.trials_per_cell,
            "master_seed": self.master_seed,
            "cluster_shape": self.cluster_shape,
            "cluster_distance": self.cluster_distance,
            "speed": self.speed,
            "spoke_cap": self.spoke_cap,
            "congestion": None if self.congestion is None else {
                "capacity": self.congestion.capacity,
                "service_time": self.congestion.service_time,
                "discipline": self.congestion.discipline,
            },
        }


@dataclass(frozen=True)
class CellKey:
    scheduler: str
    delta: float
    n: int


@dataclass
class CellResult:
    key: CellKey
    trials: list  # TrialResult, or None where the trial failed
    errors: list[str] = field(default_factory=list)

    @property
    def times(self) -> np.ndarray:
        return np.array([t.discovery_time for t in self.trials if t is not None])

    @property
    def stats(self) -> SummaryStats:
        return SummaryStats.from_samples(self.times)


def trial_seed(cfg: SweepConfig, key: CellKey, j: int) -> int:
    """Stable 64-bit seed for trial ``j`` of a cell.

    Derived from the cell's content, never its grid position, and
    independent of the scheduler so every scheduler meets the same clusters.
    """
    payload = json.dumps(
        [cfg.master_seed, cfg.arena.shape, repr(cfg.arena.extent), cfg.cluster_shape,
         repr(cfg.cluster_distance), repr(key.delta), key.n, j],
        separators=(",", ":"),
    )
    return int.from_bytes(hashlib.blake2b(payload.encode(), digest_size=8).digest(), "big")


def swarm_for(cfg: SweepConfig, key: CellKey) -> SwarmConfig:
    scheduler, increment = SCHEDULER_VARIANTS[key.scheduler]
    return SwarmConfig(
        n=key.n,
        scheduler=scheduler,
        sequence=SpokeSequence(increment),
        searcher=SearcherConfig(cfg.speed),
        congestion=cfg.congestion,
        spoke_cap=cfg.spoke_cap,
    )


def cluster_for(cfg: SweepConfig, key: CellKey, seed: int):
    if cfg.cluster_distance is None:
        return place_cluster(cfg.arena, key.delta, seed, cfg.cluster_shape)
    return place_cluster_at_distance(cfg.cluster_distance, key.delta, seed, cfg.cluster_shape)


def run_trial(cfg: SweepConfig, key: CellKey, j: int) -> TrialResult:
    seed = trial_seed(cfg, key, j)
    return simulate_trial(cfg.arena, [cluster_for(cfg, key, seed)], swarm_for(cfg, key), seed)


def run_cell(cfg: SweepConfig, key: CellKey) -> CellResult:
    out = CellResult(key, [])
    for j in range(cfg.trials_per_cell):
        try:
            out.trials.append(run_trial(cfg, key, j))
        except (SpokeCapExceeded, ConfigError) as exc:
            out.trials.append(None)
            out.errors.append(f"trial {j}: {exc}")
    return out


def _run_cell_args(args):
    return run_cell(*args)


def run_sweep(cfg: SweepConfig, workers: int = 1) -> list[CellResult]:
    """Every cell of the grid, in grid order.

    Each trial depends only on its derived seed, so ``workers`` changes
    wall time and nothing else.
    """
    cells = cfg.cells()
    if workers <= 1 or len(cells) == 1:
        return [run_cell(cfg, key) for key in cells]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(_run_cell_args, [(cfg, key) for key in cells]))


def fit_inverse_scaling(points: Sequence[tuple[float, float]]) -> tuple[float, float, float]:
    """Least-squares fit of ``y = slope / x + intercept``; returns ``(slope, intercept, r2)``."""
    if len(points) < 3:
        raise ValueError("need at least 3 points")
    x = np.array([p[0] for p in points], dtype=float)
    y = np.array([p[1] for p in points], dtype=float)
    if np.ptp(x) == 0.0:
        raise ValueError("x values are all equal")
    slope, intercept = np.polyfit(1.0 / x, y, 1)
    return float(slope), float(intercept), r_squared(y, slope / x + intercept)


def r_squared(y, fitted) -> float:
    y = np.asarray(y, dtype=float)
    ss_res = float(np.sum((y - np.asarray(fitted)) ** 2))
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    return 1.0 - ss_res / ss_tot if ss_tot > 0 else 1.0


def fit_swarm_scaling(R: float, D: float, delta: float, ns: Sequence[int], means: Sequence[float]):
    """Fit ``mean = a*R*D/(n*delta) + b*D``; returns ``(a, b, r2)``."""
    ns = np.asarray(ns, dtype=float)
    design = np.column_stack([R * D / (ns * delta), np.full_like(ns, D)])
    (a, b), *_ = np.linalg.lstsq(design, np.asarray(means, dtype=float), rcond=None)
    return float(a), float(b), r_squared(means, design @ np.array([a, b]))


def bootstrap_mean_diff(a: np.ndarray, b: np.ndarray, seed: int, resamples: int = 10_000,
                        level: float = 0.95) -> tuple[float, float]:
    """Percentile bootstrap CI for ``mean(a - b)`` over paired samples."""
    d = np.asarray(a, dtype=float) - np.asarray(b, dtype=float)
    rng = np.random.default_rng(seed)
    means = np.empty(resamples)
    for lo in range(0, resamples, 1000):
        hi = min(resamples, lo + 1000)
        idx = rng.integers(0, d.size, size=(hi - lo, d.size))
        means[lo:hi] = d[idx].mean(axis=1)
    tail = (1.0 - level) / 2.0 * 100.0
    low, high = np.percentile(means, [tail, 100.0 - tail])
    return float(low), float(high)


@dataclass(frozen=True)
class ComparisonRow:
    delta: float
    n: int
    first: SummaryStats
    second: SummaryStats
    mean_diff: float  # first minus second
    std_ratio: float  # first over second
    ci_low: float
    ci_high: float

    @property
    def ci_excludes_zero(self) -> bool:
        return self.ci_low > 0.0 or self.ci_high < 0.0


@dataclass
class ComparisonReport:
    schedulers: tuple[str, str]
    rows: list[ComparisonRow]
    cells: list[CellResult]


def compare_algorithms(cfg: SweepConfig, workers: int = 1, resamples: int = 10_000) -> ComparisonReport:
    """Paired per-cell comparison of exactly two schedulers.

    Both schedulers see the same cluster in trial ``j`` of a cell, so the
    bootstrap resamples trial pairs.
    """
    if len(cfg.schedulers) != 2:
        raise ConfigError(f"comparison needs exactly two schedulers, got {list(cfg.schedulers)}")
    first, second = cfg.schedulers
    cells = run_sweep(cfg, workers)
    by_key = {c.key: c for c in cells}
    rows = []
    for delta in cfg.deltas:
        for n in cfg.ns:
            ca, cb = by_key[CellKey(first, delta, n)], by_key[CellKey(second, delta, n)]
            pairs = [(x.discovery_time, y.discovery_time)
                     for x, y in zip(ca.trials, cb.trials) if x is not None and y is not None]
            a = np.array([p[0] for p in pairs])
            b = np.array([p[1] for p in pairs])
            sa, sb = SummaryStats.from_samples(a), SummaryStats.from_samples(b)
            seed = trial_seed(cfg, CellKey("bootstrap", delta, n), -1)
            low, high = bootstrap_mean_diff(a, b, seed, resamples) if pairs else (math.nan, math.nan)
            ratio = sa.std / sb.std if sb.std > 0 else (1.0 if sa.std == 0 else math.inf)
            rows.append(ComparisonRow(delta, n, sa, sb, sa.mean - sb.mean, ratio, low, high))
    return ComparisonReport((first, second), rows, cells)


def golden_worst_case_spokes(D: float, delta: float, bearings: int = 10_000,
                             seq: SpokeSequence = SpokeSequence()) -> int:
    """Most spokes (hit spoke included) the golden schedule needs over an even
    grid of cluster bearings at nest distance ``D``."""
    half = cluster_half_angle(D, delta)
    grid = np.arange(bearings) * (2.0 * math.pi / bearings)
    pending = np.ones(bearings, dtype=bool)
    worst = 0
    start, chunk = 0, 512
    while pending.any():
        ang = seq.angles(chunk, start)
        d = np.abs(ang[None, :] - grid[pending][:, None])
        d = np.minimum(d, 2.0 * math.pi - d)
        hit = d <= half
        found = hit.any(axis=1)
        if found.any():
            worst = max(worst, start + int(hit[found].argmax(axis=1).max()) + 1)
        idx = np.flatnonzero(pending)
        pending[idx[found]] = False
        start += chunk
    return worst
