"""Hit times, separation sets, and horizon-relative sensitivity verdicts.

A probe asks, for each region of a cover, at which times some sampled pair
of starting points has drifted more than delta apart. The classifier from
``families`` then decides whether that set of times is rich enough. All
verdicts are explicitly horizon-relative: they say what happened in the
computed window under the stated sampling, nothing more.

Scans are organized so that one orbit computation per sample point serves
every delta and every probe mode. Orbit points are produced by the exact
scalar ``apply`` path; numpy only ever touches distances, so equal prefixes
yield bitwise equal separations across probes (the embedding checks rely
on this).
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from . import families, spaces
from .families import FamilySpec, WindowedIndexSet, member, windowed
from .spaces import (
    CIRCLE,
    INTERVAL,
    SYMBOLIC,
    FiniteSubset,
    Region,
    distance,
    dist_symbolic,
    hausdorff_ball,
    region_contains,
    sample_region,
)
from .systems import MapSequence, net_shift_series, orbit

HOLDS = "holds-at-horizon"
FAILS = "fails-at-horizon"

HYPERSPACE_CARDINALITY_BOUND = 3


def _pair_indices(count: int):
    i, j = np.triu_indices(count, k=1)
    return i.astype(np.intp), j.astype(np.intp)


def _pointwise_distances(space, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    if space == INTERVAL:
        return np.abs(a - b)
    if space == CIRCLE:
        d = np.abs(a - b) % 1.0
        return np.minimum(d, 1.0 - d)
    raise ValueError(f"no vectorized metric for {space!r}")


class RegionScan:
    """Per-region orbit data: max pairwise separation at each time, the
    achieving pair, and per-pair separation series on demand.

    ``max_series[n]`` is the largest sampled pair distance at time n; index
    0 holds the initial spread. Delta enters only when slicing.
    """

    def __init__(self, sample, horizon, max_series, argmax_i, argmax_j,
                 pair_series_fn, truncation_bound=None):
        self.sample = sample
        self.horizon = horizon
        self.max_series = max_series
        self.argmax_i = argmax_i
        self.argmax_j = argmax_j
        self._pair_series_fn = pair_series_fn
        self.truncation_bound = truncation_bound
        n = len(sample)
        self.pairs = [(i, j) for i in range(n) for j in range(i + 1, n)]

    def times(self, delta: float) -> WindowedIndexSet:
        hits = np.nonzero(self.max_series[1:] > delta)[0] + 1
        return windowed(hits.tolist(), self.horizon)

    def witness(self, n: int):
        i = int(self.argmax_i[n])
        j = int(self.argmax_j[n])
        return i, j, float(self.max_series[n])

    def pair_series(self, i: int, j: int) -> np.ndarray:
        return self._pair_series_fn(i, j)

    def pair_times(self, i: int, j: int, delta: float) -> WindowedIndexSet:
        series = self.pair_series(i, j)
        hits = np.nonzero(series[1:] > delta)[0] + 1
        return windowed(hits.tolist(), self.horizon)


def _scan_numeric(seq: MapSequence, sample, horizon: int,
                  space) -> RegionScan:
    count = len(sample)
    orbits = np.empty((horizon + 1, count), dtype=np.float64)
    for c, x in enumerate(sample):
        orbits[:, c] = orbit(seq, x, horizon)
    pi, pj = _pair_indices(count)
    dists = _pointwise_distances(space, orbits[:, pi], orbits[:, pj])
    best = np.argmax(dists, axis=1)
    rows = np.arange(horizon + 1)
    max_series = dists[rows, best]
    argmax_i = pi[best]
    argmax_j = pj[best]

    def pair_series(i, j):
        return _pointwise_distances(space, orbits[:, i], orbits[:, j])

    return RegionScan(sample, horizon, max_series, argmax_i, argmax_j,
                      pair_series)


def _scan_symbolic(seq: MapSequence, sample, horizon: int) -> RegionScan:
    shifts = net_shift_series(seq, horizon)
    if shifts is None:
        raise ValueError("symbolic sequences must be built from shifts")
    count = len(sample)
    pi, pj = _pair_indices(count)
    distinct = sorted(set(shifts))
    col_of = {s: c for c, s in enumerate(distinct)}
    # distance between two shifted points depends only on the shift amount,
    # so one evaluation per (pair, shift) covers the whole horizon
    table = np.empty((len(pi), len(distinct)), dtype=np.float64)
    for col, s in enumerate(distinct):
        for row in range(len(pi)):
            x = sample[pi[row]].shifted(s)
            y = sample[pj[row]].shifted(s)
            table[row, col] = dist_symbolic(x, y)
    shift_cols = np.array([col_of[s] for s in shifts], dtype=np.intp)
    per_time = table[:, shift_cols]
    best = np.argmax(per_time, axis=0)
    cols = np.arange(horizon + 1)
    max_series = per_time[best, cols]
    argmax_i = pi[best]
    argmax_j = pj[best]
    # both points of a pair shift together, so the narrowest window seen is
    # the smallest sample radius less the largest displacement
    worst_window = min(p.radius for p in sample) - max(abs(s) for s in distinct)
    bound = 2.0 ** (1 - worst_window)

    pair_col = {(int(a), int(b)): r for r, (a, b) in enumerate(zip(pi, pj))}

    def pair_series(i, j):
        return per_time[pair_col[(i, j)], :]

    return RegionScan(sample, horizon, max_series, argmax_i, argmax_j,
                      pair_series, truncation_bound=bound)


def _scan_subsets(seq: MapSequence, sample, horizon: int) -> RegionScan:
    base = sample[0].space
    if base not in (INTERVAL, CIRCLE):
        raise ValueError("subset scans need an interval or circle base")
    width = max(len(s.elements) for s in sample)
    count = len(sample)
    # pad by repeating the first element: duplicates never change the
    # Hausdorff distance, and fixed width keeps everything vectorized
    orbits = np.empty((horizon + 1, count, width), dtype=np.float64)
    for c, s in enumerate(sample):
        elems = list(s.elements) + [s.elements[0]] * (width - len(s.elements))
        for e, x in enumerate(elems):
            orbits[:, c, e] = orbit(seq, x, horizon)
    pi, pj = _pair_indices(count)

    def hausdorff_block(a, b):
        # a, b: (..., width); all-pairs element distances then max of the
        # two directed max-min values
        cross = _pointwise_distances(base, a[..., :, None], b[..., None, :])
        d_ab = cross.min(axis=-1).max(axis=-1)
        d_ba = cross.min(axis=-2).max(axis=-1)
        return np.maximum(d_ab, d_ba)

    dists = hausdorff_block(orbits[:, pi, :], orbits[:, pj, :])
    best = np.argmax(dists, axis=1)
    rows = np.arange(horizon + 1)
    max_series = dists[rows, best]
    argmax_i = pi[best]
    argmax_j = pj[best]

    def pair_series(i, j):
        return hausdorff_block(orbits[:, i, :], orbits[:, j, :])

    return RegionScan(sample, horizon, max_series, argmax_i, argmax_j,
                      pair_series)


@lru_cache(maxsize=128)
def region_scan(seq: MapSequence, region: Region, horizon: int,
                resolution: int) -> RegionScan:
    """Shared scan cache: every probe mode and delta reuses one orbit pass."""
    sample = sample_region(region, resolution)
    if len(sample) < 2:
        raise ValueError(f"region sample is degenerate "
                         f"(single point): {region.label or region.kind}")
    if region.kind == "hausdorff-ball":
        return _scan_subsets(seq, sample, horizon)
    space = seq.space or region.space
    if space == SYMBOLIC:
        return _scan_symbolic(seq, sample, horizon)
    return _scan_numeric(seq, sample, horizon, space)


# ---------------------------------------------------------------------------
# Public operations


@dataclass(frozen=True)
class HitTimeSet:
    times: WindowedIndexSet
    witnesses: dict
    region: Region
    delta: float
    horizon: int
    resolution: int


def hit_times(seq: MapSequence, region: Region, delta: float, horizon: int,
              resolution: int) -> HitTimeSet:
    """Times at which some sampled pair of the region separates past delta."""
    if delta <= 0:
        raise ValueError("delta must be positive")
    if horizon < 1:
        raise ValueError("horizon must be positive")
    scan = region_scan(seq, region, horizon, resolution)
    times = scan.times(delta)
    witnesses = {}
    for n in times.indices:
        i, j, sep = scan.witness(n)
        witnesses[n] = (scan.sample[i], scan.sample[j], sep)
    return HitTimeSet(times=times, witnesses=witnesses, region=region,
                      delta=delta, horizon=horizon, resolution=resolution)


def pair_separation_times(seq: MapSequence, x, y, delta: float,
                          horizon: int) -> WindowedIndexSet:
    """{n <= horizon : d(prefix_n(x), prefix_n(y)) > delta}."""
    if delta <= 0:
        raise ValueError("delta must be positive")
    space = seq.space
    if space is None:
        space = INTERVAL if isinstance(x, float) else SYMBOLIC
    ox = orbit(seq, x, horizon)
    oy = orbit(seq, y, horizon)
    hits = [n for n in range(1, horizon + 1)
            if distance(space, ox[n], oy[n]) > delta]
    return windowed(hits, horizon)


@dataclass(frozen=True)
class AsymptoticVerdict:
    is_asymptotic: bool
    family: FamilySpec
    delta: float
    horizon: int
    stay_close: WindowedIndexSet
    separation: WindowedIndexSet


def asym_pair_test(seq: MapSequence, x, y, delta: float, fam: FamilySpec,
                   horizon: int = 500) -> AsymptoticVerdict:
    """Whether the pair's stay-close set belongs to the dual family.

    The stay-close and separation sets partition [1, horizon].
    """
    separation = pair_separation_times(seq, x, y, delta, horizon)
    stay_close = families.complement(separation)
    verdict = member(families.dual(fam), stay_close)
    return AsymptoticVerdict(is_asymptotic=verdict, family=fam, delta=delta,
                             horizon=horizon, stay_close=stay_close,
                             separation=separation)


def _max_gap(times: WindowedIndexSet) -> int:
    idx = times.indices
    if not idx:
        return times.horizon
    gaps = [idx[0] - 1, times.horizon - idx[-1]]
    gaps.extend(b - a for a, b in zip(idx, idx[1:]))
    return max(gaps)


@dataclass(frozen=True)
class RegionRecord:
    label: str
    passed: bool
    hit_count: int
    times: WindowedIndexSet
    max_gap: int
    witness: dict
    truncation_bound: float = None

    def to_dict(self) -> dict:
        out = {
            "region": self.label,
            "passed": self.passed,
            "hit_count": self.hit_count,
            "times": list(self.times.indices),
            "max_gap": self.max_gap,
            "witness": self.witness,
        }
        if self.truncation_bound is not None:
            out["truncation_bound"] = self.truncation_bound
        return out


@dataclass(frozen=True)
class SensitivityReport:
    mode: str
    family: FamilySpec
    delta: float
    horizon: int
    resolution: int
    verdict: str
    regions: tuple
    failing_region: str = None

    @property
    def holds(self) -> bool:
        return self.verdict == HOLDS

    def to_dict(self) -> dict:
        return {
            "mode": self.mode,
            "family": families.family_to_dict(self.family),
            "delta": self.delta,
            "horizon": self.horizon,
            "resolution": self.resolution,
            "verdict": self.verdict,
            "failing_region": self.failing_region,
            "regions": [r.to_dict() for r in self.regions],
        }


_STRONG_MODES = {"nonempty": "sensitive", "cofinite": "cofinite",
                 "syndetic": "syndetic"}


def _region_label(region: Region, index: int) -> str:
    return region.label or f"region-{index:02d}"


def sensitivity_probe(seq: MapSequence, delta: float, fam: FamilySpec, cover,
                      horizon: int, resolution: int) -> SensitivityReport:
    """Verdict holds exactly when every region's hit-time set is accepted
    by the family."""
    cover = list(cover)
    if not cover:
        raise ValueError("cover must contain at least one region")
    records = []
    failing = None
    for idx, region in enumerate(cover):
        scan = region_scan(seq, region, horizon, resolution)
        times = scan.times(delta)
        passed = member(fam, times)
        witness = {}
        if times.indices:
            first = times.indices[0]
            i, j, sep = scan.witness(first)
            witness = {"time": first, "pair": [i, j], "separation": sep}
        rec = RegionRecord(label=_region_label(region, idx), passed=passed,
                           hit_count=len(times.indices), times=times,
                           max_gap=_max_gap(times), witness=witness,
                           truncation_bound=scan.truncation_bound)
        records.append(rec)
        if not passed and failing is None:
            failing = rec.label
    verdict = HOLDS if failing is None else FAILS
    mode = _STRONG_MODES.get(fam.kind, "F-sensitive")
    return SensitivityReport(mode=mode, family=fam, delta=delta,
                             horizon=horizon, resolution=resolution,
                             verdict=verdict, regions=tuple(records),
                             failing_region=failing)


def weak_sensitivity_probe(seq: MapSequence, delta: float, fam: FamilySpec,
                           cover, horizon: int,
                           resolution: int) -> SensitivityReport:
    """Verdict holds exactly when every region contains one sampled pair
    whose own separation-time set is accepted by the family."""
    cover = list(cover)
    if not cover:
        raise ValueError("cover must contain at least one region")
    records = []
    failing = None
    for idx, region in enumerate(cover):
        scan = region_scan(seq, region, horizon, resolution)
        found = None
        for i, j in scan.pairs:
            times = scan.pair_times(i, j, delta)
            if member(fam, times):
                found = (i, j, times)
                break
        if found is not None:
            i, j, times = found
            witness = {"pair": [i, j], "separation_count": len(times.indices)}
            rec = RegionRecord(label=_region_label(region, idx), passed=True,
                               hit_count=len(times.indices), times=times,
                               max_gap=_max_gap(times), witness=witness,
                               truncation_bound=scan.truncation_bound)
        else:
            empty = windowed([], horizon)
            rec = RegionRecord(label=_region_label(region, idx), passed=False,
                               hit_count=0, times=empty,
                               max_gap=_max_gap(empty), witness={},
                               truncation_bound=scan.truncation_bound)
            if failing is None:
                failing = rec.label
        records.append(rec)
    verdict = HOLDS if failing is None else FAILS
    return SensitivityReport(mode="weakly-F-sensitive", family=fam,
                             delta=delta, horizon=horizon,
                             resolution=resolution, verdict=verdict,
                             regions=tuple(records), failing_region=failing)


def weak_implication_ok(strong: SensitivityReport,
                        weak: SensitivityReport) -> bool:
    """The strong verdict may never hold while the weak one fails at
    identical parameters."""
    same = (strong.family == weak.family and strong.delta == weak.delta
            and strong.horizon == weak.horizon
            and strong.resolution == weak.resolution)
    if not same:
        raise ValueError("reports were produced at different parameters")
    return (not strong.holds) or weak.holds


def hyperspace_probe(seq: MapSequence, delta: float, fam: FamilySpec,
                     centers, radius: float, horizon: int,
                     resolution: int) -> SensitivityReport:
    """Run the strong probe on finite subsets moved elementwise, with
    Hausdorff-ball regions around the given center subsets."""
    centers = list(centers)
    for c in centers:
        if len(c.elements) > HYPERSPACE_CARDINALITY_BOUND:
            raise ValueError(
                f"center of cardinality {len(c.elements)} exceeds bound "
                f"{HYPERSPACE_CARDINALITY_BOUND}")
    cover = [hausdorff_ball(c, radius, label=f"hball-{i:02d}")
             for i, c in enumerate(centers)]
    return sensitivity_probe(seq, delta, fam, cover, horizon, resolution)


def attaching_estimate(seq: MapSequence, region: Region, fam: FamilySpec,
                       probe_points: FiniteSubset,
                       horizon: int) -> FiniteSubset:
    """Probe points whose visit-time set to the region the family accepts.

    Region membership uses the region predicate, not sampling. The result
    may be empty; empty subsets are data here, never metric operands.
    """
    attached = []
    for x in probe_points.elements:
        pts = orbit(seq, x, horizon)
        visits = [n for n in range(1, horizon + 1)
                  if region_contains(region, pts[n])]
        if member(fam, windowed(visits, horizon)):
            attached.append(x)
    if not attached:
        return FiniteSubset(elements=(), space=probe_points.space)
    return spaces.finite_subset(attached, probe_points.space)
