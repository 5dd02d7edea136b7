"""Finite-window decision rules for collections of time index sets.

A WindowedIndexSet is a subset of [1, H] standing in for an unbounded set
of hit times observed only up to a horizon. A FamilySpec classifies such
sets: nonempty, "infinite" (enough indices, reaching into the window's
tail), cofinite (few misses and a clean suffix), syndetic (bounded gaps,
boundary gaps included), or the dual of another rule. Duals are evaluated
through the complement within the window and collapse under double
application, so dual is an involution by construction.

Every verdict is window-relative. The rules are chosen to be hereditary
upwards (adding indices never turns a yes into a no), matching how the
underlying asymptotic notions behave.
"""

from __future__ import annotations

from dataclasses import dataclass

DEFAULT_MIN_COUNT = 10
DEFAULT_TAIL_FRACTION = 0.25
DEFAULT_MAX_MISSING = 20
DEFAULT_MAX_GAP = 64


@dataclass(frozen=True)
class WindowedIndexSet:
    horizon: int
    indices: tuple

    def __len__(self) -> int:
        return len(self.indices)


def windowed(indices, horizon: int) -> WindowedIndexSet:
    if horizon < 1:
        raise ValueError("horizon must be positive")
    idx = tuple(sorted(set(int(i) for i in indices)))
    if idx and (idx[0] < 1 or idx[-1] > horizon):
        raise ValueError(f"indices must lie in [1, {horizon}]")
    return WindowedIndexSet(horizon=horizon, indices=idx)


def complement(s: WindowedIndexSet) -> WindowedIndexSet:
    have = set(s.indices)
    return WindowedIndexSet(
        horizon=s.horizon,
        indices=tuple(i for i in range(1, s.horizon + 1) if i not in have))


def intersect(a: WindowedIndexSet, b: WindowedIndexSet) -> WindowedIndexSet:
    if a.horizon != b.horizon:
        raise ValueError("index sets have different horizons")
    other = set(b.indices)
    return WindowedIndexSet(horizon=a.horizon,
                            indices=tuple(i for i in a.indices if i in other))


@dataclass(frozen=True)
class FamilySpec:
    kind: str
    min_count: int = 0
    tail_fraction: float = 0.0
    max_missing: int = 0
    max_gap: int = 0
    inner: object = None


def nonempty() -> FamilySpec:
    return FamilySpec(kind="nonempty")


def infinite_family(min_count: int = DEFAULT_MIN_COUNT,
                    tail_fraction: float = DEFAULT_TAIL_FRACTION) -> FamilySpec:
    if min_count < 1:
        raise ValueError("min_count must be positive")
    if not (0.0 < tail_fraction <= 1.0):
        raise ValueError("tail_fraction must be in (0, 1]")
    return FamilySpec(kind="infinite", min_count=min_count,
                      tail_fraction=tail_fraction)


def cofinite_family(max_missing: int = DEFAULT_MAX_MISSING) -> FamilySpec:
    if max_missing < 1:
        raise ValueError("max_missing must be positive")
    return FamilySpec(kind="cofinite", max_missing=max_missing)


def syndetic_family(max_gap: int = DEFAULT_MAX_GAP) -> FamilySpec:
    if max_gap < 1:
        raise ValueError("max_gap must be positive")
    return FamilySpec(kind="syndetic", max_gap=max_gap)


def dual(fam: FamilySpec) -> FamilySpec:
    """Sets whose complement the wrapped rule rejects. An involution."""
    if fam.kind == "dual":
        return fam.inner
    return FamilySpec(kind="dual", inner=fam)


def member(fam: FamilySpec, s: WindowedIndexSet) -> bool:
    h = s.horizon
    idx = s.indices
    if fam.kind == "nonempty":
        return len(idx) >= 1
    if fam.kind == "infinite":
        return (len(idx) >= fam.min_count
                and bool(idx) and idx[-1] > (1.0 - fam.tail_fraction) * h)
    if fam.kind == "cofinite":
        if h - len(idx) > fam.max_missing:
            return False
        suffix_start = max(1, h - fam.max_missing + 1)
        have = set(idx)
        return all(i in have for i in range(suffix_start, h + 1))
    if fam.kind == "syndetic":
        if not idx:
            return h <= fam.max_gap
        if idx[0] - 1 > fam.max_gap or h - idx[-1] > fam.max_gap:
            return False
        return all(b - a <= fam.max_gap for a, b in zip(idx, idx[1:]))
    if fam.kind == "dual":
        return not member(fam.inner, complement(s))
    raise ValueError(f"unknown family kind: {fam.kind!r}")


def translate(s: WindowedIndexSet, i: int) -> WindowedIndexSet:
    """Shift every index by i; the horizon shrinks by |i| so translated
    verdicts never rely on indices that left the observed window."""
    if abs(i) >= s.horizon:
        raise ValueError("translation exceeds the window")
    new_h = s.horizon - abs(i)
    moved = (j + i for j in s.indices)
    return WindowedIndexSet(horizon=new_h,
                            indices=tuple(j for j in moved if 1 <= j <= new_h))


@dataclass(frozen=True)
class FilterdualReport:
    pairs_checked: int
    counterexamples: tuple
    passed: bool


def filterdual_probe(fam: FamilySpec, samples) -> FilterdualReport:
    """Check dual-family closure under pairwise intersection on a sample
    suite: for sets the dual accepts, their intersections must be accepted
    too. A counterexample is a pair of sample positions."""
    samples = list(samples)
    if len(samples) < 2:
        raise ValueError("need at least two samples")
    d = dual(fam)
    accepted = [i for i, s in enumerate(samples) if member(d, s)]
    checked = 0
    bad = []
    for a in range(len(accepted)):
        for b in range(a + 1, len(accepted)):
            i, j = accepted[a], accepted[b]
            checked += 1
            if not member(d, intersect(samples[i], samples[j])):
                bad.append((i, j))
    return FilterdualReport(pairs_checked=checked,
                            counterexamples=tuple(bad), passed=not bad)


def family_to_dict(fam: FamilySpec) -> dict:
    if fam.kind == "nonempty":
        return {"kind": "nonempty"}
    if fam.kind == "infinite":
        return {"kind": "infinite", "min_count": fam.min_count,
                "tail_fraction": fam.tail_fraction}
    if fam.kind == "cofinite":
        return {"kind": "cofinite", "max_missing": fam.max_missing}
    if fam.kind == "syndetic":
        return {"kind": "syndetic", "max_gap": fam.max_gap}
    if fam.kind == "dual":
        return {"kind": "dual", "of": family_to_dict(fam.inner)}
    raise ValueError(f"unknown family kind: {fam.kind!r}")


def family_from_dict(d: dict) -> FamilySpec:
    kind = d.get("kind")
    if kind == "nonempty":
        return nonempty()
    if kind == "infinite":
        return infinite_family(int(d.get("min_count", DEFAULT_MIN_COUNT)),
                               float(d.get("tail_fraction",
                                           DEFAULT_TAIL_FRACTION)))
    if kind == "cofinite":
        return cofinite_family(int(d.get("max_missing", DEFAULT_MAX_MISSING)))
    if kind == "syndetic":
        return syndetic_family(int(d.get("max_gap", DEFAULT_MAX_GAP)))
    if kind == "dual":
        return dual(family_from_dict(d["of"]))
    raise ValueError(f"unknown family kind: {kind!r}")
