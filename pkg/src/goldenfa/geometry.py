"""Angular spoke sequences, circular gap analysis and nest-centred ray geometry.

Angles are plain floats in radians, normalised to ``[0, 2*pi)``.  Every
function here is pure, so it is safe to call from any thread.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

TWO_PI = 2.0 * math.pi
PHI = (1.0 + math.sqrt(5.0)) / 2.0
# 2*pi*(1 - 1/phi), the botanical golden angle
GOLDEN_ANGLE = TWO_PI * (1.0 - 1.0 / PHI)

GAP_TOLERANCE = 1e-9


def normalize_angle(theta: float) -> float:
    """Map ``theta`` into ``[0, 2*pi)``."""
    a = math.fmod(theta, TWO_PI)
    if a < 0.0:
        a += TWO_PI
    if a >= TWO_PI:
        a -= TWO_PI
    return a


def circular_distance(a: float, b: float) -> float:
    """Shortest angular separation between two headings, in ``[0, pi]``."""
    d = abs(normalize_angle(a) - normalize_angle(b))
    return min(d, TWO_PI - d)


@dataclass(frozen=True)
class SpokeSequence:
    """Headings ``offset + i * increment`` (mod 2*pi) for spoke index ``i``."""

    increment: float = PHI
    offset: float = 0.0

    def __post_init__(self):
        if not self.increment > 0.0:
            raise ValueError(f"increment must be positive, got {self.increment}")

    @classmethod
    def golden_angle(cls, offset: float = 0.0) -> "SpokeSequence":
        return cls(GOLDEN_ANGLE, offset)

    def angles(self, count: int, start: int = 0) -> np.ndarray:
        """Vector of headings for spoke indices ``start .. start+count-1``."""
        idx = np.arange(start, start + count, dtype=np.float64)
        out = np.mod(self.offset + idx * self.increment, TWO_PI)
        out[out >= TWO_PI] -= TWO_PI
        return out


PHI_SEQUENCE = SpokeSequence()


def golden_spoke_angle(i: int, seq: SpokeSequence = PHI_SEQUENCE) -> float:
    """Heading of the ``i``-th spoke of a single searcher.

    Computed by direct multiplication so error does not accumulate with ``i``.
    """
    if i < 0:
        raise ValueError(f"spoke index must be >= 0, got {i}")
    return normalize_angle(seq.offset + i * seq.increment)


def multi_searcher_angle(s: int, t: int, n: int, seq: SpokeSequence = PHI_SEQUENCE) -> float:
    """Heading of step ``t`` for searcher rank ``s`` (1-based) in a swarm of ``n``.

    Searcher ``s`` starts ``s - 1`` increments past the reference heading and
    advances ``n`` increments per spoke, so the swarm jointly traces the
    single-searcher sequence: rank ``s`` at step ``t`` flies spoke ``s - 1 + t*n``.
    """
    if not 1 <= s <= n:
        raise ValueError(f"searcher rank {s} outside 1..{n}")
    if t < 0:
        raise ValueError(f"step must be >= 0, got {t}")
    return golden_spoke_angle((s - 1) + t * n, seq)


@dataclass(frozen=True)
class GapStructure:
    """Distinct circular gaps between the first ``k`` spoke headings.

    ``gaps`` holds ``(width, multiplicity)`` pairs sorted by width.
    """

    k: int
    gaps: tuple[tuple[float, int], ...]

    @property
    def max_gap(self) -> float:
        return self.gaps[-1][0]

    @property
    def distinct(self) -> int:
        return len(self.gaps)

    def total(self) -> float:
        return math.fsum(w * m for w, m in self.gaps)


def _raw_gaps(k: int, seq: SpokeSequence) -> np.ndarray:
    pts = np.sort(seq.angles(k))
    gaps = np.empty(k)
    gaps[:-1] = np.diff(pts)
    gaps[-1] = pts[0] + TWO_PI - pts[-1]
    return gaps


def max_gap(k: int, seq: SpokeSequence = PHI_SEQUENCE) -> float:
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    return float(_raw_gaps(k, seq).max())


def gap_structure(k: int, seq: SpokeSequence = PHI_SEQUENCE, tol: float = GAP_TOLERANCE) -> GapStructure:
    """Sorted circular gaps of the first ``k`` headings, merging widths within ``tol``.

    A merged entry reports the mean of its members, which keeps
    ``sum(width * multiplicity)`` equal to 2*pi.
    """
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    widths = np.sort(_raw_gaps(k, seq))
    # split wherever consecutive sorted widths differ by more than tol
    breaks = np.flatnonzero(np.diff(widths) > tol) + 1
    groups = np.split(widths, breaks)
    return GapStructure(k, tuple((float(g.mean()), int(g.size)) for g in groups))


def verify_three_gap(g: GapStructure) -> bool:
    return g.distinct <= 3


def min_spokes_for_max_gap(theta: float, seq: SpokeSequence = PHI_SEQUENCE) -> int:
    """Smallest ``k`` whose largest circular gap is at most ``theta``.

    Adding a heading only ever splits a gap, so the largest gap is
    non-increasing in ``k``; that lets us bracket by doubling and bisect
    instead of scanning every ``k``.
    """
    if not theta > 0.0:
        raise ValueError(f"theta must be positive, got {theta}")
    if theta >= TWO_PI:
        return 1
    lo, hi = 1, 2
    while max_gap(hi, seq) > theta:
        lo, hi = hi, hi * 2
        if hi > 1 << 26:
            raise ValueError(f"no prefix of the sequence reaches max gap {theta}")
    # invariant: max_gap(lo) > theta >= max_gap(hi)
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if max_gap(mid, seq) > theta:
            lo = mid
        else:
            hi = mid
    return hi


def cluster_half_angle(distance: float, diameter: float) -> float:
    """Half the angular width of a disk cluster as seen from the nest.

    Clamped to pi/2 once the nest lies on or inside the cluster.
    """
    if not distance > 0.0:
        raise ValueError(f"distance must be positive, got {distance}")
    if diameter < 0.0:
        raise ValueError(f"diameter must be >= 0, got {diameter}")
    return math.asin(min(1.0, diameter / (2.0 * distance)))


def ray_hits_disk(theta: float, bearing: float, distance: float, diameter: float) -> Optional[float]:
    """Distance along the ray at heading ``theta`` to a disk cluster, or None.

    The disk has its centre at polar ``(distance, bearing)`` from the nest.
    """
    r = diameter / 2.0
    if distance <= r:
        return 0.0
    delta = circular_distance(theta, bearing)
    # same comparison as cluster_half_angle so the two agree at the boundary
    if delta > cluster_half_angle(distance, diameter):
        return None
    off = distance * math.sin(delta)
    along = distance * math.cos(delta)
    return max(0.0, along - math.sqrt(max(0.0, r * r - off * off)))


def ray_hits_square(theta: float, bearing: float, distance: float, side: float) -> Optional[float]:
    """First-contact distance of the ray with an axis-aligned square, or None.

    Slab method on the square centred at polar ``(distance, bearing)``.
    """
    half = side / 2.0
    cx, cy = distance * math.cos(bearing), distance * math.sin(bearing)
    dx, dy = math.cos(theta), math.sin(theta)
    t_near, t_far = 0.0, math.inf
    for c, d in ((cx, dx), (cy, dy)):
        lo, hi = c - half, c + half
        if abs(d) < 1e-15:
            if not lo <= 0.0 <= hi:
                return None
            continue
        t1, t2 = lo / d, hi / d
        if t1 > t2:
            t1, t2 = t2, t1
        t_near = max(t_near, t1)
        t_far = min(t_far, t2)
        if t_near > t_far:
            return None
    return t_near


@dataclass(frozen=True)
class ArenaConfig:
    """Search region centred on the nest: a circle of radius ``extent`` or a
    square of half-width ``extent``."""

    shape: str = "circle"
    extent: float = 50.0

    def __post_init__(self):
        if self.shape not in ("circle", "square"):
            raise ValueError(f"arena shape must be 'circle' or 'square', got {self.shape!r}")
        if not self.extent > 0.0:
            raise ValueError(f"arena extent must be positive, got {self.extent}")


def ray_exit_distance(theta: float, arena: ArenaConfig) -> float:
    """Length of the spoke from the nest to the arena boundary."""
    if arena.shape == "circle":
        return arena.extent
    return arena.extent / max(abs(math.cos(theta)), abs(math.sin(theta)))
