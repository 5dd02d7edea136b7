"""Maps, time-varying map sequences, and their prefix compositions.

A MapSpec is a small closed vocabulary of concrete maps: the identity,
coordinate shifts on binary sequences, piecewise-linear interval maps,
circle rotations, and compositions of those. A MapSequence produces the
map acting at each time step n >= 1; orbits always use the prefix
composition (apply map 1, then map 2, and so on).

Everything here is exact in the sense that matters downstream: piecewise
slopes are small integers evaluated once per step, shifts move an origin
index, and grids reuse the shared breakpoint set, so equal prefixes give
bitwise equal points.
"""

from __future__ import annotations

from bisect import bisect_right
from dataclasses import dataclass, field
from functools import lru_cache

from . import spaces
from .spaces import (
    CIRCLE,
    INTERVAL,
    SYMBOLIC,
    FiniteSubset,
    circle_distance,
    distance,
    finite_subset,
    grid_points,
)

MAX_SHIFT = 32

# Slack for the output of a piecewise-linear evaluation drifting past [0,1].
CLAMP_TOL = 1e-12

COMMUTE_TOL = 1e-9


@dataclass(frozen=True)
class MapSpec:
    kind: str
    power: int = 0
    offset: float = 0.0
    knots: tuple = ()
    maps: tuple = ()


def identity() -> MapSpec:
    return MapSpec(kind="identity")


def shift(power: int) -> MapSpec:
    if abs(power) > MAX_SHIFT:
        raise ValueError(f"shift power {power} exceeds bound {MAX_SHIFT}")
    return MapSpec(kind="shift", power=power)


def piecewise_linear(knots) -> MapSpec:
    pts = tuple((float(x), float(y)) for x, y in knots)
    if len(pts) < 2:
        raise ValueError("need at least two knots")
    xs = [x for x, _ in pts]
    if xs[0] != 0.0 or xs[-1] != 1.0:
        raise ValueError("knots must start at x=0 and end at x=1")
    if any(b <= a for a, b in zip(xs, xs[1:])):
        raise ValueError("knot x values must strictly ascend")
    if any(not (0.0 <= y <= 1.0) for _, y in pts):
        raise ValueError("knot values must lie in [0,1]")
    return MapSpec(kind="piecewise-linear", knots=pts)


def rotation(offset: float) -> MapSpec:
    return MapSpec(kind="rotation", offset=float(offset) % 1.0)


def composition(maps) -> MapSpec:
    flat = []
    for m in maps:
        if m.kind == "composition":
            flat.extend(m.maps)
        else:
            flat.append(m)
    if not flat:
        raise ValueError("composition needs at least one map")
    if len(flat) == 1:
        return flat[0]
    return MapSpec(kind="composition", maps=tuple(flat))


@lru_cache(maxsize=None)
def _pwl_tables(knots: tuple):
    xs = tuple(x for x, _ in knots)
    ys = tuple(y for _, y in knots)
    slopes = tuple((ys[i + 1] - ys[i]) / (xs[i + 1] - xs[i])
                   for i in range(len(knots) - 1))
    return xs, ys, slopes


def _apply_pwl(knots: tuple, x: float) -> float:
    if not (-CLAMP_TOL <= x <= 1.0 + CLAMP_TOL):
        raise ValueError(f"point {x!r} outside [0,1]")
    x = min(1.0, max(0.0, x))
    xs, ys, slopes = _pwl_tables(knots)
    i = bisect_right(xs, x) - 1
    if i >= len(slopes):
        i = len(slopes) - 1
    y = ys[i] + (x - xs[i]) * slopes[i]
    if y < 0.0:
        if y < -CLAMP_TOL:
            raise ValueError(f"map left [0,1]: {y!r}")
        y = 0.0
    elif y > 1.0:
        if y > 1.0 + CLAMP_TOL:
            raise ValueError(f"map left [0,1]: {y!r}")
        y = 1.0
    return y


def apply(m: MapSpec, x):
    """Evaluate one map at one point. Compositions apply members in list order."""
    if m.kind == "identity":
        return x
    if m.kind == "shift":
        return x.shifted(m.power)
    if m.kind == "rotation":
        return (x + m.offset) % 1.0
    if m.kind == "piecewise-linear":
        return _apply_pwl(m.knots, x)
    if m.kind == "composition":
        for g in m.maps:
            x = apply(g, x)
        return x
    raise ValueError(f"unknown map kind: {m.kind!r}")


def map_space(m: MapSpec):
    """The space a map acts on; None means it acts on anything (identity)."""
    if m.kind == "identity":
        return None
    if m.kind == "shift":
        return SYMBOLIC
    if m.kind == "rotation":
        return CIRCLE
    if m.kind == "piecewise-linear":
        return INTERVAL
    if m.kind == "composition":
        tag = None
        for g in m.maps:
            s = map_space(g)
            if s is None:
                continue
            if tag is None:
                tag = s
            elif tag != s:
                raise ValueError(f"composition mixes spaces {tag} and {s}")
        return tag
    raise ValueError(f"unknown map kind: {m.kind!r}")


def map_net_shift(m: MapSpec):
    """Total coordinate shift if the map is built only of shifts, else None."""
    if m.kind == "identity":
        return 0
    if m.kind == "shift":
        return m.power
    if m.kind == "composition":
        total = 0
        for g in m.maps:
            s = map_net_shift(g)
            if s is None:
                return None
            total += s
        return total
    return None


def _preimages(m: MapSpec, v: float):
    if m.kind == "identity":
        return [v]
    if m.kind == "rotation":
        return [(v - m.offset) % 1.0]
    if m.kind == "piecewise-linear":
        xs, ys, slopes = _pwl_tables(m.knots)
        out = []
        for i, s in enumerate(slopes):
            if s == 0.0:
                continue
            x = xs[i] + (v - ys[i]) / s
            if xs[i] - CLAMP_TOL <= x <= xs[i + 1] + CLAMP_TOL:
                out.append(min(xs[i + 1], max(xs[i], x)))
        return out
    if m.kind == "composition":
        vals = [v]
        for g in reversed(m.maps):
            vals = [u for w in vals for u in _preimages(g, w)]
        return vals
    return []


def breakpoints(m: MapSpec) -> tuple:
    """Points of [0,1] where the map may kink, including pulled-back kinks
    of later composition stages."""
    if m.kind == "piecewise-linear":
        return tuple(x for x, _ in m.knots)
    if m.kind != "composition":
        return ()
    first, rest = m.maps[0], m.maps[1:]
    pts = set(breakpoints(first))
    if rest:
        tail = composition(rest)
        for v in breakpoints(tail):
            pts.update(_preimages(first, v))
    return tuple(sorted(p for p in pts if 0.0 <= p <= 1.0))


# ---------------------------------------------------------------------------
# Map sequences


# generator name -> (r -> tuple of MapSpec for block r), r = 1, 2, ...
BLOCK_GENERATORS: dict = {}


def register_block_generator(name: str, fn) -> None:
    if name in BLOCK_GENERATORS and BLOCK_GENERATORS[name] is not fn:
        raise ValueError(f"block generator {name!r} already registered")
    BLOCK_GENERATORS[name] = fn


@dataclass(frozen=True)
class MapSequence:
    """Map at each time step n >= 1 under one of four construction rules.

    cyclic: maps repeat with period len(maps).
    explicit-list: maps as listed; past the end, tail rule "hold" repeats
        the last map and "identity" pads with identities.
    block-structured: a registered generator emits block r for r = 1, 2, ...
        and time indices walk the concatenated blocks.
    kth-iterate: map n is the composition of maps k(n-1)+1 .. kn of base.
    """

    rule: str
    maps: tuple = ()
    tail: str = "identity"
    space: object = None
    generator_name: str = ""
    base: object = None
    k: int = 1


_BLOCK_CACHE: dict = {}


def _block_walk(name: str, n: int) -> MapSpec:
    # Grow cached (end_index, block) rows until the block containing n exists.
    fn = BLOCK_GENERATORS[name]
    rows = _BLOCK_CACHE.setdefault(name, [])
    while not rows or rows[-1][0] < n:
        r = len(rows) + 1
        block = tuple(fn(r))
        if not block:
            raise ValueError(f"generator {name!r} produced an empty block")
        prev_end = rows[-1][0] if rows else 0
        rows.append((prev_end + len(block), block))
    for end, block in rows:
        if n <= end:
            return block[n - (end - len(block)) - 1]
    raise AssertionError("unreachable")


def map_at(seq: MapSequence, n: int) -> MapSpec:
    if n < 1:
        raise ValueError("map indices start at 1")
    if seq.rule == "cyclic":
        return seq.maps[(n - 1) % len(seq.maps)]
    if seq.rule == "explicit-list":
        if n <= len(seq.maps):
            return seq.maps[n - 1]
        if seq.tail == "hold":
            return seq.maps[-1]
        if seq.tail == "identity":
            return identity()
        raise ValueError(f"unknown tail rule: {seq.tail!r}")
    if seq.rule == "block-structured":
        return _block_walk(seq.generator_name, n)
    if seq.rule == "kth-iterate":
        parts = tuple(map_at(seq.base, seq.k * (n - 1) + i)
                      for i in range(1, seq.k + 1))
        return composition(parts)
    raise ValueError(f"unknown sequence rule: {seq.rule!r}")


def _infer_space(maps) -> object:
    tag = None
    for m in maps:
        s = map_space(m)
        if s is not None:
            if tag is not None and tag != s:
                raise ValueError(f"maps act on different spaces: {tag}, {s}")
            tag = s
    return tag


def cyclic_sequence(maps, space=None) -> MapSequence:
    maps = tuple(maps)
    if not maps:
        raise ValueError("cyclic sequence needs at least one map")
    return MapSequence(rule="cyclic", maps=maps,
                       space=space if space is not None else _infer_space(maps))


def explicit_sequence(maps, tail="identity", space=None) -> MapSequence:
    maps = tuple(maps)
    if not maps:
        raise ValueError("explicit sequence needs at least one map")
    if tail not in ("hold", "identity"):
        raise ValueError(f"unknown tail rule: {tail!r}")
    return MapSequence(rule="explicit-list", maps=maps, tail=tail,
                       space=space if space is not None else _infer_space(maps))


def block_sequence(generator_name: str, space=None) -> MapSequence:
    if generator_name not in BLOCK_GENERATORS:
        raise ValueError(f"unknown block generator: {generator_name!r}")
    return MapSequence(rule="block-structured", generator_name=generator_name,
                       space=space)


def generated_system(family) -> MapSequence:
    """The cyclic sequence f1, f2, ..., fk, f1, f2, ... over a finite family."""
    return cyclic_sequence(family)


def kth_iterate(seq: MapSequence, k: int) -> MapSequence:
    if k < 1:
        raise ValueError("k must be positive")
    return MapSequence(rule="kth-iterate", base=seq, k=k, space=seq.space)


def prefix_compose(seq: MapSequence, n: int, x):
    """Apply maps 1 .. n in order; n = 0 returns x unchanged."""
    if n < 0:
        raise ValueError("n must be nonnegative")
    for i in range(1, n + 1):
        x = apply(map_at(seq, i), x)
    return x


def orbit(seq: MapSequence, x, horizon: int) -> tuple:
    """Points at times 0 .. horizon; orbit[n] is the prefix of length n at x."""
    out = [x]
    for i in range(1, horizon + 1):
        x = apply(map_at(seq, i), x)
        out.append(x)
    return tuple(out)


def net_shift_series(seq: MapSequence, horizon: int):
    """Cumulative shift after each prefix, or None if any map is not a shift.

    Entry n (0-based list index n) is the net displacement of the length-n
    prefix. Symbolic scans use this to reduce orbits to origin arithmetic.
    """
    totals = [0]
    total = 0
    for i in range(1, horizon + 1):
        s = map_net_shift(map_at(seq, i))
        if s is None:
            return None
        total += s
        totals.append(total)
    return totals


def induced_apply(m: MapSpec, a: FiniteSubset) -> FiniteSubset:
    """Elementwise image; deduplication may drop collapsed elements."""
    return finite_subset([apply(m, e) for e in a.elements], a.space)


# ---------------------------------------------------------------------------
# Supremum metric and perturbation bounds


def _common_space(f: MapSpec, g: MapSpec):
    sf, sg = map_space(f), map_space(g)
    if sf is None and sg is None:
        return None
    if sf is None:
        return sg
    if sg is None:
        return sf
    if sf != sg:
        raise ValueError(f"maps act on different spaces: {sf}, {sg}")
    return sf


def _is_rotational(m: MapSpec) -> bool:
    if m.kind in ("identity", "rotation"):
        return True
    if m.kind == "composition":
        return all(_is_rotational(g) for g in m.maps)
    return False


def _rotation_offset(m: MapSpec) -> float:
    if m.kind == "identity":
        return 0.0
    if m.kind == "rotation":
        return m.offset
    total = 0.0
    for g in m.maps:
        total = (total + _rotation_offset(g)) % 1.0
    return total


def sup_metric(f: MapSpec, g: MapSpec, resolution: int = 256) -> float:
    """Largest pointwise distance over a grid that includes both maps'
    breakpoints, hence exact for piecewise-linear maps and rotations."""
    if resolution < 100:
        raise ValueError("sup_metric needs resolution >= 100")
    space = _common_space(f, g)
    if space is None:
        return 0.0
    if space == SYMBOLIC:
        raise ValueError("no finite grid is faithful on the sequence space")
    if _is_rotational(f) and _is_rotational(g):
        # constant displacement field: every grid sees the true supremum
        return circle_distance(_rotation_offset(f), _rotation_offset(g))
    grid = set(grid_points(0.0, 1.0, resolution))
    grid.update(breakpoints(f))
    grid.update(breakpoints(g))
    return max(distance(space, apply(f, x), apply(g, x)) for x in sorted(grid))


@dataclass(frozen=True)
class PerturbationReport:
    partial_sums: tuple
    converged: bool
    tolerance: float
    records: tuple = ()


def tail_sum(seq: MapSequence, f: MapSpec, n_terms: int,
             resolution: int = 256, tolerance: float = 1e-6) -> PerturbationReport:
    """Partial sums of sup_metric(f_i, f); convergence is flagged when the
    second half of the sum contributes less than the tolerance."""
    if n_terms < 1:
        raise ValueError("need at least one term")
    sums = []
    total = 0.0
    for i in range(1, n_terms + 1):
        total += sup_metric(map_at(seq, i), f, resolution)
        sums.append(total)
    converged = n_terms >= 2 and (sums[-1] - sums[n_terms // 2 - 1]) < tolerance
    return PerturbationReport(partial_sums=tuple(sums), converged=converged,
                              tolerance=tolerance)


class CommutationError(ValueError):
    def __init__(self, index: int, x: float, gap: float):
        self.index = index
        self.x = x
        self.gap = gap
        super().__init__(
            f"map {index} fails to commute with the reference map: "
            f"disagreement {gap:.3g} at x = {x!r}")


@dataclass(frozen=True)
class ShadowBoundRecord:
    x: object
    n: int
    k: int
    lhs: float
    rhs: float
    ok: bool


def shadow_bound_check(seq: MapSequence, f: MapSpec, x, n: int,
                       k: int) -> ShadowBoundRecord:
    """Compare the true time-(n+k) point against k applications of the
    reference map from the time-n point; the bound is the summed map gaps.

    Requires every sequence map involved to commute with f (checked on a
    grid); the bound is meaningless otherwise.
    """
    if n < 0 or k < 1:
        raise ValueError("need n >= 0 and k >= 1")
    space = seq.space or map_space(f) or CIRCLE
    grid = grid_points(0.0, 1.0, 17)
    grid += [b for b in breakpoints(f)]
    for i in range(1, n + k + 1):
        g = map_at(seq, i)
        grid_i = sorted(set(grid) | set(breakpoints(g)))
        for p in grid_i:
            gap = distance(space, apply(f, apply(g, p)), apply(g, apply(f, p)))
            if gap > COMMUTE_TOL:
                raise CommutationError(i, p, gap)
    mid = prefix_compose(seq, n, x)
    true_pt = prefix_compose(seq, n + k, x)
    shadow = mid
    for _ in range(k):
        shadow = apply(f, shadow)
    lhs = distance(space, true_pt, shadow)
    rhs = 0.0
    for i in range(1, k + 1):
        rhs += sup_metric(map_at(seq, i + 1), f)
    return ShadowBoundRecord(x=x, n=n, k=k, lhs=lhs, rhs=rhs,
                             ok=lhs <= rhs + COMMUTE_TOL)


def feeble_open_probe(m: MapSpec, region, resolution: int) -> bool:
    """Whether the image of a sampled interval region contains an interval of
    length at least 1/resolution. Piecewise-linear images are exact."""
    if region.kind != "ball" or region.space != INTERVAL:
        raise ValueError("only interval ball regions are supported")
    space = map_space(m)
    if space not in (None, INTERVAL):
        raise ValueError("only interval-space maps are supported")
    lo = max(0.0, region.center - region.radius)
    hi = min(1.0, region.center + region.radius)
    if hi <= lo:
        return False
    cuts = sorted({lo, hi, *(b for b in breakpoints(m) if lo < b < hi)})
    pieces = []
    for a, b in zip(cuts, cuts[1:]):
        fa, fb = apply(m, a), apply(m, b)
        pieces.append((min(fa, fb), max(fa, fb)))
    pieces.sort()
    best = 0.0
    cur_lo, cur_hi = pieces[0]
    for a, b in pieces[1:]:
        if a <= cur_hi:
            cur_hi = max(cur_hi, b)
        else:
            best = max(best, cur_hi - cur_lo)
            cur_lo, cur_hi = a, b
    best = max(best, cur_hi - cur_lo)
    return best >= 1.0 / resolution


# ---------------------------------------------------------------------------
# JSON round trip


def map_to_dict(m: MapSpec) -> dict:
    if m.kind == "identity":
        return {"kind": "identity"}
    if m.kind == "shift":
        return {"kind": "shift", "power": m.power}
    if m.kind == "rotation":
        return {"kind": "rotation", "offset": m.offset}
    if m.kind == "piecewise-linear":
        return {"kind": "piecewise-linear", "knots": [list(k) for k in m.knots]}
    if m.kind == "composition":
        return {"kind": "composition", "maps": [map_to_dict(g) for g in m.maps]}
    raise ValueError(f"unknown map kind: {m.kind!r}")


def map_from_dict(d: dict) -> MapSpec:
    kind = d.get("kind")
    if kind == "identity":
        return identity()
    if kind == "shift":
        return shift(int(d["power"]))
    if kind == "rotation":
        return rotation(float(d["offset"]))
    if kind == "piecewise-linear":
        return piecewise_linear(d["knots"])
    if kind == "composition":
        return composition([map_from_dict(g) for g in d["maps"]])
    raise ValueError(f"unknown map kind: {kind!r}")


def sequence_to_dict(seq: MapSequence) -> dict:
    out = {"rule": seq.rule}
    if seq.space is not None:
        out["space"] = seq.space
    if seq.rule in ("cyclic", "explicit-list"):
        out["maps"] = [map_to_dict(m) for m in seq.maps]
        if seq.rule == "explicit-list":
            out["tail"] = seq.tail
    elif seq.rule == "block-structured":
        out["generator"] = seq.generator_name
    elif seq.rule == "kth-iterate":
        out["k"] = seq.k
        out["base"] = sequence_to_dict(seq.base)
    return out


def sequence_from_dict(d: dict) -> MapSequence:
    rule = d.get("rule")
    space = d.get("space")
    if rule == "cyclic":
        return cyclic_sequence([map_from_dict(m) for m in d["maps"]], space=space)
    if rule == "explicit-list":
        return explicit_sequence([map_from_dict(m) for m in d["maps"]],
                                 tail=d.get("tail", "identity"), space=space)
    if rule == "block-structured":
        return block_sequence(d["generator"], space=space)
    if rule == "kth-iterate":
        return kth_iterate(sequence_from_dict(d["base"]), int(d["k"]))
    raise ValueError(f"unknown sequence rule: {rule!r}")
