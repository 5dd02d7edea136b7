"""Built-in systems, their piece tables, and recommended probe parameters.

Interval maps are transcribed as (lo, hi, slope, intercept) piece tables
first and converted to knot form second, so a transcription slip shows up
as a continuity violation at a shared breakpoint instead of silently
bending the map. All breakpoints and slopes are exact dyadics.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import product

from .spaces import (
    CIRCLE,
    INTERVAL,
    SYMBOLIC,
    cylinder_region,
    metric_ball,
)
from .systems import (
    MapSequence,
    MapSpec,
    block_sequence,
    composition,
    cyclic_sequence,
    generated_system,
    identity,
    register_block_generator,
    rotation,
    shift,
)

CONTINUITY_TOL = 1e-12

# (lo, hi, slope, intercept) per piece; value on [lo, hi] is slope*x + intercept
F1_PIECES = (
    (0.0, 0.25, 4.0, 0.0),
    (0.25, 1.0, -1.0, 1.25),
)
F2_PIECES = (
    (0.0, 0.25, -1.0, 0.25),
    (0.25, 0.5, 4.0, -1.0),
    (0.5, 1.0, -2.0, 2.0),
)
# closed form of the two-step composition (apply f1, then f2)
TWO_STEP_PIECES = (
    (0.0, 0.0625, -4.0, 0.25),
    (0.0625, 0.125, 16.0, -1.0),
    (0.125, 0.25, -8.0, 2.0),
    (0.25, 0.75, 2.0, -0.5),
    (0.75, 1.0, -4.0, 4.0),
)


def map_from_pieces(pieces) -> MapSpec:
    """Knot form of a piece table; knot values come from the right piece."""
    from .systems import piecewise_linear

    knots = []
    for lo, hi, slope, intercept in pieces:
        knots.append((lo, slope * lo + intercept))
    last_lo, last_hi, last_slope, last_intercept = pieces[-1]
    knots.append((last_hi, last_slope * last_hi + last_intercept))
    return piecewise_linear(knots)


@dataclass(frozen=True)
class ContinuityReport:
    system: str
    continuous: bool
    breakpoint_values: dict
    violations: tuple

    def to_dict(self) -> dict:
        return {
            "system": self.system,
            "continuous": self.continuous,
            "breakpoint_values": {k: [list(p) for p in v]
                                  for k, v in self.breakpoint_values.items()},
            "violations": [list(v) for v in self.violations],
        }


@dataclass(frozen=True)
class ProbeParams:
    deltas: tuple
    horizon: int
    resolution: int
    cover_kind: str


@dataclass(frozen=True)
class NamedSystem:
    name: str
    description: str
    sequence: MapSequence
    space: object
    params: ProbeParams
    piece_tables: tuple = ()


def _shift_blocks(r: int):
    return (identity(),) * (2 ** r) + (shift(r), shift(-r))


def _rot_summable(r: int):
    return (rotation(2.0 ** -r),)


def _rot_harmonic(r: int):
    return (rotation(1.0 / r),)


register_block_generator("shift-blocks", _shift_blocks)
register_block_generator("rot-summable", _rot_summable)
register_block_generator("rot-harmonic", _rot_harmonic)

_F1 = map_from_pieces(F1_PIECES)
_F2 = map_from_pieces(F2_PIECES)


def _build_registry() -> dict:
    entries = [
        NamedSystem(
            name="example31",
            description=("binary sequence space: identity blocks of doubling "
                         "length punctuated by matched forward and backward "
                         "shifts, so displacement spikes recur with widening "
                         "gaps"),
            sequence=block_sequence("shift-blocks", space=SYMBOLIC),
            space=SYMBOLIC,
            params=ProbeParams(deltas=(0.5,), horizon=2000, resolution=64,
                               cover_kind="cylinders"),
        ),
        NamedSystem(
            name="example41_f1",
            description=("tent-like interval map, expanding left of 1/4 and "
                         "an isometric involution on [1/4, 1], run "
                         "autonomously"),
            sequence=cyclic_sequence([_F1]),
            space=INTERVAL,
            params=ProbeParams(deltas=(0.2,), horizon=200, resolution=64,
                               cover_kind="interval-balls"),
            piece_tables=(("f1", F1_PIECES),),
        ),
        NamedSystem(
            name="example41_f2",
            description=("interval map that reflects [0, 1/4] onto itself "
                         "isometrically and folds the rest, run "
                         "autonomously"),
            sequence=cyclic_sequence([_F2]),
            space=INTERVAL,
            params=ProbeParams(deltas=(0.2,), horizon=200, resolution=64,
                               cover_kind="interval-balls"),
            piece_tables=(("f2", F2_PIECES),),
        ),
        NamedSystem(
            name="example41_composition",
            description=("autonomous system driven by the two-step "
                         "composition, whose five linear pieces all have "
                         "slope magnitude at least 2"),
            sequence=cyclic_sequence([composition([_F1, _F2])]),
            space=INTERVAL,
            params=ProbeParams(deltas=(0.2,), horizon=200, resolution=64,
                               cover_kind="interval-balls"),
            piece_tables=(("f1", F1_PIECES), ("f2", F2_PIECES),
                          ("two-step", TWO_STEP_PIECES)),
        ),
        NamedSystem(
            name="example41_generated",
            description=("alternating application of the two interval maps; "
                         "even-time prefixes agree bitwise with the "
                         "two-step composition system"),
            sequence=generated_system([_F1, _F2]),
            space=INTERVAL,
            params=ProbeParams(deltas=(0.2,), horizon=400, resolution=64,
                               cover_kind="interval-balls"),
            piece_tables=(("f1", F1_PIECES), ("f2", F2_PIECES)),
        ),
        NamedSystem(
            name="rotations_summable",
            description=("circle rotations by 2^-n: displacements sum to 1, "
                         "so the sequence converges to the identity in the "
                         "supremum metric"),
            sequence=block_sequence("rot-summable", space=CIRCLE),
            space=CIRCLE,
            params=ProbeParams(deltas=(0.25,), horizon=100, resolution=64,
                               cover_kind="circle-balls"),
        ),
        NamedSystem(
            name="rotations_harmonic",
            description=("circle rotations by 1/n: individual maps converge "
                         "to the identity but displacements sum like the "
                         "harmonic series"),
            sequence=block_sequence("rot-harmonic", space=CIRCLE),
            space=CIRCLE,
            params=ProbeParams(deltas=(0.25,), horizon=100, resolution=64,
                               cover_kind="circle-balls"),
        ),
        NamedSystem(
            name="identity",
            description="constant identity sequence on the interval",
            sequence=cyclic_sequence([identity()], space=INTERVAL),
            space=INTERVAL,
            params=ProbeParams(deltas=(0.1,), horizon=200, resolution=64,
                               cover_kind="interval-balls"),
        ),
    ]
    return {e.name: e for e in entries}


_REGISTRY = _build_registry()


def registry_names() -> tuple:
    return tuple(_REGISTRY)


def build(name: str) -> NamedSystem:
    if name not in _REGISTRY:
        raise KeyError(f"unknown system: {name!r}; "
                       f"known: {', '.join(_REGISTRY)}")
    return _REGISTRY[name]


def default_cover(cover_kind: str):
    """The standard region cover for each space kind.

    Interval and circle covers are 16 balls of radius 1/32 at odd
    multiples of 1/32; the cylinder cover pins every pattern on
    coordinates -2 .. 2.
    """
    if cover_kind == "interval-balls":
        return [metric_ball(INTERVAL, (2 * i + 1) / 32.0, 1 / 32.0,
                            label=f"ball-{i:02d}")
                for i in range(16)]
    if cover_kind == "circle-balls":
        return [metric_ball(CIRCLE, (2 * i + 1) / 32.0, 1 / 32.0,
                            label=f"ball-{i:02d}")
                for i in range(16)]
    if cover_kind == "cylinders":
        cover = []
        for bits in product((0, 1), repeat=5):
            constraints = dict(zip(range(-2, 3), bits))
            label = "cyl-" + "".join(str(b) for b in bits)
            cover.append(cylinder_region(constraints, label=label))
        return cover
    raise ValueError(f"unknown cover kind: {cover_kind!r}")


def verify_continuity(named: NamedSystem) -> ContinuityReport:
    """Adjacent pieces of every transcribed table must meet at their shared
    breakpoints; the report lists the value at every breakpoint."""
    values = {}
    violations = []
    for label, pieces in named.piece_tables:
        pts = []
        for idx, (lo, hi, slope, intercept) in enumerate(pieces):
            pts.append((lo, slope * lo + intercept))
            if idx + 1 < len(pieces):
                nlo, nhi, nslope, nintercept = pieces[idx + 1]
                left = slope * hi + intercept
                right = nslope * nlo + nintercept
                if hi != nlo:
                    violations.append((label, hi, left, right))
                elif abs(left - right) > CONTINUITY_TOL:
                    violations.append((label, hi, left, right))
        last = pieces[-1]
        pts.append((last[1], last[2] * last[1] + last[3]))
        values[label] = tuple(pts)
    return ContinuityReport(system=named.name,
                            continuous=not violations,
                            breakpoint_values=values,
                            violations=tuple(violations))
