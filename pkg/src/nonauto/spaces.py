"""Phase spaces, metrics, and finite sample covers.

Four kinds of points move through the rest of the package: floats on the
unit interval, floats on the unit circle, two-sided binary sequences with a
finite sampled window, and finite subsets of any of those. Every consumer
goes through ``distance`` so the choice of metric lives here and nowhere
else.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

# Tolerance for treating two sampled points as the same point.
DEDUP_TOL = 1e-12

# Default half-width of the sampled window of a binary sequence. Shifts
# consume window on one side, so this must comfortably exceed the largest
# net shift a probe will ever apply.
WINDOW_RADIUS = 64

# Cylinder samples only pin coordinates out to this index by default.
CYLINDER_MARGIN = 8

# A distance between binary sequences needs at least this much shared window.
MIN_COMMON_RADIUS = 1

INTERVAL = "interval"
CIRCLE = "circle"
SYMBOLIC = "symbolic"


@dataclass(frozen=True)
class ProductSpace:
    left: object
    right: object


@dataclass(frozen=True)
class SubsetSpace:
    """Finite subsets of a base space under the Hausdorff metric."""

    base: object


@dataclass(frozen=True)
class ProductPoint:
    left: object
    right: object
    left_space: object = INTERVAL
    right_space: object = INTERVAL


@dataclass(frozen=True)
class SymbolicPoint:
    """A two-sided binary sequence sampled on a finite window.

    ``bits`` stores coordinates ``-origin .. len(bits)-1-origin``; anything
    outside the stored window reads as 0. Shifting moves the origin, not the
    bits, so iteration is O(1) and points from a common orbit share storage.
    """

    bits: tuple
    origin: int

    def coord(self, j: int) -> int:
        k = self.origin + j
        if 0 <= k < len(self.bits):
            return self.bits[k]
        return 0

    def shifted(self, k: int) -> "SymbolicPoint":
        # shifted(1).coord(j) == coord(j+1): the left shift.
        return SymbolicPoint(self.bits, self.origin + k)

    @property
    def radius(self) -> int:
        return min(self.origin, len(self.bits) - 1 - self.origin)


def make_symbolic(assignments: dict | None = None, radius: int = WINDOW_RADIUS,
                  fill: int = 0) -> SymbolicPoint:
    """Build a sequence point from sparse coordinate assignments.

    Unassigned coordinates inside the window take ``fill``; everything
    outside the window reads as 0 regardless.
    """
    if radius < MIN_COMMON_RADIUS:
        raise ValueError(f"radius must be at least {MIN_COMMON_RADIUS}")
    if fill not in (0, 1):
        raise ValueError("fill must be 0 or 1")
    bits = [fill] * (2 * radius + 1)
    for j, v in (assignments or {}).items():
        if abs(j) > radius:
            raise ValueError(f"coordinate {j} outside window radius {radius}")
        if v not in (0, 1):
            raise ValueError(f"coordinate value must be 0 or 1, got {v!r}")
        bits[radius + j] = v
    return SymbolicPoint(tuple(bits), radius)


@lru_cache(maxsize=None)
def _weights(window: int) -> np.ndarray:
    j = np.arange(-window, window + 1)
    return 0.5 ** np.abs(j).astype(np.float64)


@lru_cache(maxsize=4096)
def _bits_array(bits: tuple) -> np.ndarray:
    return np.asarray(bits, dtype=np.float64)


def dist_interval(a: float, b: float) -> float:
    return abs(a - b)


def circle_distance(a: float, b: float) -> float:
    d = abs(a - b) % 1.0
    return min(d, 1.0 - d)


def dist_symbolic(x: SymbolicPoint, y: SymbolicPoint) -> float:
    """Weighted coordinate distance over the shared sampled window.

    Coordinates at index j carry weight 2**-|j|. Truncating to the shared
    window under-reports by at most ``symbolic_truncation_bound``.
    """
    w = min(x.radius, y.radius)
    if w < MIN_COMMON_RADIUS:
        raise ValueError("points have drifted past their sampled windows")
    bx = _bits_array(x.bits)[x.origin - w:x.origin + w + 1]
    by = _bits_array(y.bits)[y.origin - w:y.origin + w + 1]
    return float(np.abs(bx - by) @ _weights(w))


def symbolic_truncation_bound(x: SymbolicPoint, y: SymbolicPoint) -> float:
    w = min(x.radius, y.radius)
    return 2.0 ** (1 - w)


@dataclass(frozen=True)
class FiniteSubset:
    """A finite subset with a canonical element order. Build via finite_subset."""

    elements: tuple
    space: object

    def __len__(self) -> int:
        return len(self.elements)


def element_sort_key(space, p):
    if space in (INTERVAL, CIRCLE):
        return (p,)
    if space == SYMBOLIC:
        return tuple(p.coord(j) for j in range(-p.radius, p.radius + 1))
    raise ValueError(f"no canonical order for elements of {space!r}")


def finite_subset(elements, space) -> FiniteSubset:
    """Sort and deduplicate, so equal sets compare equal as tuples."""
    items = sorted(elements, key=lambda p: element_sort_key(space, p))
    if not items:
        raise ValueError("a finite subset needs at least one element")
    kept = []
    for p in items:
        if all(distance(space, p, q) > DEDUP_TOL for q in kept):
            kept.append(p)
    return FiniteSubset(tuple(kept), space)


def hausdorff(a: FiniteSubset, b: FiniteSubset) -> float:
    if a.space != b.space:
        raise ValueError("subsets live in different spaces")
    d_ab = max(min(distance(a.space, p, q) for q in b.elements) for p in a.elements)
    d_ba = max(min(distance(a.space, p, q) for q in a.elements) for p in b.elements)
    return max(d_ab, d_ba)


def dist_product(p: ProductPoint, q: ProductPoint) -> float:
    if (p.left_space, p.right_space) != (q.left_space, q.right_space):
        raise ValueError("product points live in different spaces")
    return (distance(p.left_space, p.left, q.left)
            + distance(p.right_space, p.right, q.right))


def distance(space, a, b) -> float:
    if space == INTERVAL:
        return dist_interval(a, b)
    if space == CIRCLE:
        return circle_distance(a, b)
    if space == SYMBOLIC:
        return dist_symbolic(a, b)
    if isinstance(space, ProductSpace):
        return (distance(space.left, a.left, b.left)
                + distance(space.right, a.right, b.right))
    if isinstance(space, SubsetSpace):
        return hausdorff(a, b)
    raise ValueError(f"unknown space: {space!r}")


# ---------------------------------------------------------------------------
# Regions and sample covers


@dataclass(frozen=True)
class Region:
    kind: str
    space: object
    center: object = None
    radius: float = 0.0
    constraints: tuple = ()
    margin: int = CYLINDER_MARGIN
    label: str = ""


def metric_ball(space, center, radius: float, label: str = "") -> Region:
    if radius <= 0:
        raise ValueError("ball radius must be positive")
    return Region(kind="ball", space=space, center=center, radius=radius,
                  label=label)


def cylinder_region(constraints, margin: int = CYLINDER_MARGIN,
                    label: str = "") -> Region:
    """All sequences agreeing with ``constraints`` on the pinned coordinates."""
    items = tuple(sorted(dict(constraints).items()))
    for j, v in items:
        if v not in (0, 1):
            raise ValueError(f"coordinate value must be 0 or 1, got {v!r}")
        if abs(j) > WINDOW_RADIUS:
            raise ValueError(f"constraint index {j} outside representable window")
    return Region(kind="cylinder", space=SYMBOLIC, constraints=items,
                  margin=margin, label=label)


def hausdorff_ball(center: FiniteSubset, radius: float, label: str = "") -> Region:
    if radius <= 0:
        raise ValueError("ball radius must be positive")
    return Region(kind="hausdorff-ball", space=SubsetSpace(center.space),
                  center=center, radius=radius, label=label)


def region_contains(region: Region, point) -> bool:
    if region.kind == "ball":
        return distance(region.space, region.center, point) < region.radius
    if region.kind == "cylinder":
        return all(point.coord(j) == v for j, v in region.constraints)
    if region.kind == "hausdorff-ball":
        return hausdorff(region.center, point) < region.radius
    raise ValueError(f"unknown region kind: {region.kind!r}")


def grid_points(lo: float, hi: float, count: int) -> list:
    # Endpoint grid. Written so that doubling count-1 keeps every old node
    # bitwise identical: i/(2n) == (i/2)/n exactly in binary floating point.
    if count < 2:
        raise ValueError("a grid needs at least two points")
    den = count - 1
    return [lo + (hi - lo) * (i / den) for i in range(count)]


def _dedup_sorted(values, tol=DEDUP_TOL):
    kept = []
    for v in values:
        if not kept or v - kept[-1] > tol:
            kept.append(v)
    return kept


def _interval_ball_values(center: float, radius: float, count: int):
    lo = max(0.0, center - radius)
    hi = min(1.0, center + radius)
    if hi < lo:
        raise ValueError("ball does not meet the interval")
    pts = grid_points(lo, hi, count)
    # Snap near-misses onto the center so it survives deduplication exactly.
    pts = [center if abs(v - center) <= DEDUP_TOL else v for v in pts]
    pts.append(center)
    return tuple(_dedup_sorted(sorted(pts)))


def _circle_ball_values(center: float, radius: float, count: int):
    raw = grid_points(center - radius, center + radius, count)
    c = center % 1.0
    pts = [v % 1.0 for v in raw]
    pts = [c if circle_distance(v, c) <= DEDUP_TOL else v for v in pts]
    pts.append(c)
    pts.sort()
    kept = []
    for v in pts:
        if not kept or circle_distance(v, kept[-1]) > DEDUP_TOL:
            kept.append(v)
    if len(kept) > 1 and circle_distance(kept[0], kept[-1]) <= DEDUP_TOL:
        kept.pop()
    return tuple(kept)


def _sample_interval_ball(region: Region, resolution: int):
    return _interval_ball_values(region.center, region.radius, resolution)


def _sample_circle_ball(region: Region, resolution: int):
    return _circle_ball_values(region.center, region.radius, resolution)


def _sample_cylinder(region: Region, resolution: int):
    pinned = dict(region.constraints)
    c_max = max((j for j in pinned), default=0)
    free = [j for j in range(max(c_max, 0) + 1, region.margin + 1)]
    points = [make_symbolic(pinned)]
    if free:
        cap = max(2, resolution - len(free) - 2)
        head = 0
        while head < len(free) and 2 ** (head + 1) <= cap:
            head += 1
        for mask in range(2 ** head):
            extra = {free[i]: (mask >> i) & 1 for i in range(head)}
            points.append(make_symbolic({**pinned, **extra}))
        for j in free:
            points.append(make_symbolic({**pinned, j: 1}))
        points.append(make_symbolic({**pinned, **{j: 1 for j in free}}))
    seen = {}
    for p in points:
        seen.setdefault((p.bits, p.origin), p)
    return tuple(sorted(seen.values(),
                        key=lambda p: element_sort_key(SYMBOLIC, p)))


def _sample_hausdorff_ball(region: Region, resolution: int):
    center: FiniteSubset = region.center
    base = center.space
    if base not in (INTERVAL, CIRCLE):
        raise ValueError("subset sampling needs an interval or circle base")
    k = len(center.elements)
    per = max(2, resolution // k)
    subsets = {center.elements: center}
    for i, e in enumerate(center.elements):
        if base == INTERVAL:
            values = _interval_ball_values(e, region.radius, per)
        else:
            values = _circle_ball_values(e, region.radius, per)
        for v in values:
            elems = list(center.elements)
            elems[i] = v
            s = finite_subset(elems, base)
            subsets.setdefault(s.elements, s)
    ordered = sorted(subsets.values(),
                     key=lambda s: tuple(element_sort_key(base, p)
                                         for p in s.elements))
    return tuple(ordered)


def sample_region(region: Region, resolution: int):
    """A deterministic finite sample of a region, densest-first friendly.

    Interval and circle balls use endpoint grids, so rerunning with
    resolution 2r-1 reproduces every point of the resolution-r sample
    bitwise. Cylinders enumerate coordinate patterns out to the margin.
    """
    if resolution < 2:
        raise ValueError("resolution must be at least 2")
    if region.kind == "ball" and region.space == INTERVAL:
        out = _sample_interval_ball(region, resolution)
    elif region.kind == "ball" and region.space == CIRCLE:
        out = _sample_circle_ball(region, resolution)
    elif region.kind == "cylinder":
        out = _sample_cylinder(region, resolution)
    elif region.kind == "hausdorff-ball":
        out = _sample_hausdorff_ball(region, resolution)
    else:
        raise ValueError(f"cannot sample region kind {region.kind!r} "
                         f"over {region.space!r}")
    if not out:
        raise ValueError("region sample came out empty")
    return out
