"""End-to-end self checks, one verdict per property.

``run_all`` executes every check (or one named check) and returns
structured results; the command line prints them and the test suite
asserts them individually. Expectations are stated as computed: when the
finite window genuinely cannot meet one, the check stays red rather than
being quietly loosened.
"""

from __future__ import annotations

import random
from dataclasses import dataclass

from . import families, sensitivity, spaces
from .families import (
    cofinite_family,
    dual,
    filterdual_probe,
    infinite_family,
    intersect,
    member,
    syndetic_family,
    windowed,
)
from .registry import (
    TWO_STEP_PIECES,
    build,
    default_cover,
    map_from_pieces,
    registry_names,
    verify_continuity,
)
from .sensitivity import (
    hyperspace_probe,
    region_scan,
    sensitivity_probe,
    weak_implication_ok,
    weak_sensitivity_probe,
)
from .spaces import (
    CIRCLE,
    INTERVAL,
    distance,
    dist_symbolic,
    finite_subset,
    hausdorff,
    make_symbolic,
)
from .systems import (
    apply,
    kth_iterate,
    rotation,
    shadow_bound_check,
    tail_sum,
)

TRANSCRIPTION_TOL = 1e-12
TRIANGLE_SLACK = 1e-12
GRID_POINTS = 10 ** 4
STANDARD_FAMILIES = (infinite_family(10, 0.25), cofinite_family(20),
                     syndetic_family(64))


@dataclass(frozen=True)
class CriterionResult:
    key: str
    title: str
    passed: bool
    details: str

    def to_dict(self) -> dict:
        return {"key": self.key, "title": self.title, "passed": self.passed,
                "details": self.details}


def _grid(lo: float, hi: float, count: int = GRID_POINTS):
    den = count - 1
    return [lo + (hi - lo) * (i / den) for i in range(count)]


# ---------------------------------------------------------------------------
# 1. transcription guard


def _check_transcription_guard():
    """Piece tables are continuous, the composed pair matches its closed
    form on a dense grid, and each map preserves its invariant interval."""
    problems = []
    for name in ("example41_f1", "example41_f2", "example41_composition"):
        rep = verify_continuity(build(name))
        if not rep.continuous:
            problems.append(f"{name} discontinuous at {rep.violations}")

    comp = build("example41_composition").sequence.maps[0]
    closed = map_from_pieces(TWO_STEP_PIECES)
    dev = max(abs(apply(comp, x) - apply(closed, x)) for x in _grid(0.0, 1.0))
    if dev > TRANSCRIPTION_TOL:
        problems.append(f"composition deviates from closed form by {dev:.3e}")

    f1 = build("example41_f1").sequence.maps[0]
    f2 = build("example41_f2").sequence.maps[0]
    if not all(0.25 <= apply(f1, x) <= 1.0 for x in _grid(0.25, 1.0)):
        problems.append("f1 leaves [1/4, 1]")
    if not all(0.0 <= apply(f2, x) <= 0.25 for x in _grid(0.0, 0.25)):
        problems.append("f2 leaves [0, 1/4]")

    details = (f"continuity gaps <= {TRANSCRIPTION_TOL}; composition vs "
               f"closed form max deviation {dev:.3e} on {GRID_POINTS} grid "
               f"points; invariant intervals preserved")
    if problems:
        details = "; ".join(problems)
    return not problems, details


# ---------------------------------------------------------------------------
# 2. two-map family


def _ball_bounds(cover, label):
    region = next(r for r in cover if r.label == label)
    return region.center - region.radius, region.center + region.radius


def _check_two_map_family():
    """The composed cycle separates every ball while each factor map,
    run alone, stalls inside its invariant interval."""
    fam = infinite_family(10, 0.25)
    cover = default_cover("interval-balls")
    reps = {}
    for name in ("example41_composition", "example41_f1", "example41_f2"):
        reps[name] = sensitivity_probe(build(name).sequence, 0.2, fam,
                                       cover, 200, 64)
    comp, rf1, rf2 = (reps["example41_composition"], reps["example41_f1"],
                      reps["example41_f2"])
    ok = comp.holds and not rf1.holds and not rf2.holds
    placement = True
    if not rf1.holds:
        lo, hi = _ball_bounds(cover, rf1.failing_region)
        placement &= 0.25 <= lo and hi <= 1.0
    if not rf2.holds:
        lo, hi = _ball_bounds(cover, rf2.failing_region)
        placement &= 0.0 <= lo and hi <= 0.25
    details = (f"composition {comp.verdict}; f1 {rf1.verdict} at "
               f"{rf1.failing_region} inside [1/4, 1]; f2 {rf2.verdict} at "
               f"{rf2.failing_region} inside [0, 1/4]")
    return ok and placement, details


# ---------------------------------------------------------------------------
# 3. doubling-block shifts


def _check_shift_blocks():
    """Spike times on the cylinder cover: plentiful enough for the
    count-and-tail classifier, but neither cofinal nor of bounded gap."""
    named = build("example31")
    cover = default_cover("cylinders")
    seq = named.sequence
    r_inf = sensitivity_probe(seq, 0.5, infinite_family(10, 0.25), cover,
                              2000, 64)
    r_cof = sensitivity_probe(seq, 0.5, cofinite_family(20), cover, 2000, 64)
    r_syn = sensitivity_probe(seq, 0.5, syndetic_family(64), cover, 2000, 64)
    worst_gap = max(r.max_gap for r in r_syn.regions if not r.passed)
    sample = r_inf.regions[0]
    ok = (r_inf.holds and not r_cof.holds and not r_syn.holds
          and worst_gap >= 2 ** 8)
    details = (f"count-and-tail classifier {r_inf.verdict} "
               f"(hits {sample.times.indices}: {sample.hit_count} spike "
               f"times, latest {max(sample.times.indices)}, needs >= 10 "
               f"with one beyond 1500); cofinite {r_cof.verdict}; syndetic "
               f"{r_syn.verdict} with max gap {worst_gap} >= 256")
    return ok, details


# ---------------------------------------------------------------------------
# 4. doubled-time embedding


def _check_generated_embedding():
    """Every hit of the composed cycle reappears at doubled time in the
    alternating system, with bitwise equal witness separations."""
    comp = build("example41_composition").sequence
    gen = build("example41_generated").sequence
    cover = default_cover("interval-balls")
    checked = 0
    violations = 0
    mismatches = 0
    for region in cover:
        sc = region_scan(comp, region, 200, 64)
        sg = region_scan(gen, region, 400, 64)
        hits_g = set(sg.times(0.2).indices)
        for m in sc.times(0.2).indices:
            checked += 1
            if 2 * m not in hits_g:
                violations += 1
            if sc.max_series[m] != sg.max_series[2 * m]:
                mismatches += 1
    ok = checked > 0 and violations == 0 and mismatches == 0
    details = (f"{checked} hit times across {len(cover)} regions; "
               f"{violations} missing at doubled time; {mismatches} witness "
               f"separations not bitwise equal")
    return ok, details


# ---------------------------------------------------------------------------
# 5. iterate embedding


def _check_iterate_embedding():
    """Hits of the k-step bundled system land at k-times in the base
    system, exactly."""
    cases = [("example41_generated", 0.2, "interval-balls", 100),
             ("example31", 0.5, "cylinders", 400)]
    checked = 0
    violations = 0
    mismatches = 0
    for name, delta, cover_kind, h_it in cases:
        seq = build(name).sequence
        cover = default_cover(cover_kind)
        for k in (2, 3):
            it_seq = kth_iterate(seq, k)
            for region in cover:
                si = region_scan(it_seq, region, h_it, 64)
                sb = region_scan(seq, region, k * h_it, 64)
                hits_b = set(sb.times(delta).indices)
                for n in si.times(delta).indices:
                    checked += 1
                    if k * n not in hits_b:
                        violations += 1
                    if si.max_series[n] != sb.max_series[k * n]:
                        mismatches += 1
    ok = checked > 0 and violations == 0 and mismatches == 0
    details = (f"{checked} iterate hit times over k in {{2, 3}}; "
               f"{violations} missing at multiplied time; {mismatches} "
               f"witness separations not bitwise equal")
    return ok, details


# ---------------------------------------------------------------------------
# 6. finite-subset consistency


def _check_hyperspace_consistency():
    """Singleton subset probes reproduce point probes exactly; two-point
    subsets reach the same verdict."""
    gen = build("example41_generated").sequence
    fam = infinite_family(10, 0.25)
    cover = default_cover("interval-balls")
    base = sensitivity_probe(gen, 0.2, fam, cover, 200, 64)
    centers = [(2 * i + 1) / 32.0 for i in range(16)]
    singles = [finite_subset([c], INTERVAL) for c in centers]
    hs = hyperspace_probe(gen, 0.2, fam, singles, 1 / 32.0, 200, 64)
    exact = all(h.times.indices == b.times.indices
                for h, b in zip(hs.regions, base.regions))
    pairs = [finite_subset([c, 1.0 - c], INTERVAL) for c in centers]
    hp = hyperspace_probe(gen, 0.2, fam, pairs, 1 / 32.0, 200, 64)
    ok = exact and hp.verdict == base.verdict
    details = (f"singleton hit sets {'equal' if exact else 'differ'}; "
               f"two-point verdict {hp.verdict} vs base {base.verdict}")
    return ok, details


# ---------------------------------------------------------------------------
# 7. weak vs strong


def _check_weak_strong_agreement():
    """Across every built-in system and its recommended parameters, the
    union probe never holds while the per-pair probe fails; with the
    count-and-tail family the verdicts coincide."""
    grid = 0
    impl_violations = []
    agree_breaks = []
    for name in registry_names():
        named = build(name)
        cover = default_cover(named.params.cover_kind)
        for delta in named.params.deltas:
            for fam in STANDARD_FAMILIES:
                strong = sensitivity_probe(named.sequence, delta, fam, cover,
                                           named.params.horizon,
                                           named.params.resolution)
                weak = weak_sensitivity_probe(named.sequence, delta, fam,
                                              cover, named.params.horizon,
                                              named.params.resolution)
                grid += 1
                if not weak_implication_ok(strong, weak):
                    impl_violations.append((name, fam.kind))
                if fam.kind == "infinite" and strong.holds != weak.holds:
                    agree_breaks.append(name)
    ok = not impl_violations and not agree_breaks
    details = (f"{grid} probe pairs over {len(registry_names())} systems; "
               f"implication violations {impl_violations or 0}; "
               f"count-and-tail agreement breaks {agree_breaks or 0}")
    return ok, details


# ---------------------------------------------------------------------------
# 8. family classifiers


def _brute_infinite(idx, h, min_count, tail_fraction):
    return (len(idx) >= min_count
            and any(n > (1 - tail_fraction) * h for n in idx))


def _brute_cofinite(idx, h, max_missing):
    present = set(idx)
    missing = h - len(present)
    suffix = range(max(1, h - max_missing + 1), h + 1)
    return missing <= max_missing and all(n in present for n in suffix)


def _brute_syndetic(idx, h, max_gap):
    # runs-of-absent formulation: no absent run longer than allowed
    if not idx:
        return h <= max_gap
    runs = []
    prev = 0
    for n in idx:
        runs.append(n - prev - 1)
        prev = n
    lead = runs[0] if runs else 0
    trail = h - idx[-1]
    internal = runs[1:]
    return (lead <= max_gap and trail <= max_gap
            and all(r <= max_gap - 1 for r in internal))


def _curated_suite(h=200):
    full = windowed(range(1, h + 1), h)
    co_single = windowed([i for i in range(1, h + 1) if i != 5], h)
    co_double = windowed([i for i in range(1, h + 1) if i not in (6, 7)], h)
    tail100 = windowed(range(101, h + 1), h)
    tail150 = windowed(range(151, h + 1), h)
    evens = windowed(range(2, h + 1, 2), h)
    odds = windowed(range(1, h + 1, 2), h)
    geometric = windowed([1, 2, 4, 8, 16, 32, 64, 128], h)
    return [full, co_single, co_double, tail100, tail150, evens, odds,
            geometric]


def _check_family_classifiers():
    """Windowed classifiers agree with direct predicate evaluation on every
    subset of a short window, stay hereditary upwards on sampled pairs, and
    the intersection-closure probe splits as expected."""
    h = 16
    fams = [(infinite_family(4, 0.25),
             lambda idx: _brute_infinite(idx, h, 4, 0.25)),
            (cofinite_family(3), lambda idx: _brute_cofinite(idx, h, 3)),
            (syndetic_family(3), lambda idx: _brute_syndetic(idx, h, 3))]
    mismatches = 0
    for mask in range(2 ** h):
        idx = tuple(j + 1 for j in range(h) if mask >> j & 1)
        s = windowed(idx, h)
        comp = tuple(n for n in range(1, h + 1) if n not in set(idx))
        for fam, brute in fams:
            if member(fam, s) != brute(idx):
                mismatches += 1
            if member(dual(fam), s) != (not brute(comp)):
                mismatches += 1

    rng = random.Random(20260816)
    hered_fams = [infinite_family(), cofinite_family(), syndetic_family(),
                  dual(infinite_family())]
    hered_violations = 0
    for _ in range(10 ** 5):
        bits = [rng.random() < 0.5 for _ in range(200)]
        grow = [b or rng.random() < 0.05 for b in bits]
        small = windowed([n + 1 for n, b in enumerate(bits) if b], 200)
        big = windowed([n + 1 for n, b in enumerate(grow) if b], 200)
        for fam in hered_fams:
            if member(fam, small) and not member(fam, big):
                hered_violations += 1

    suite = _curated_suite()
    fd_inf = filterdual_probe(infinite_family(10, 0.25), suite)
    fd_cof = filterdual_probe(cofinite_family(20), suite)
    fd_ok = fd_inf.passed and not fd_cof.passed
    if fd_cof.counterexamples:
        i, j = fd_cof.counterexamples[0]
        fd_ok &= len(intersect(suite[i], suite[j])) == 0

    ok = mismatches == 0 and hered_violations == 0 and fd_ok
    details = (f"exhaustive window 16: {mismatches} classifier mismatches "
               f"over {2 ** h} subsets; hereditary violations "
               f"{hered_violations} over 100000 pairs; intersection closure "
               f"passed={fd_inf.passed} for count-and-tail, "
               f"counterexamples={len(fd_cof.counterexamples)} for cofinite")
    return ok, details


# ---------------------------------------------------------------------------
# 9. perturbation bound


def _check_perturbation_bound():
    """Orbit displacement from the limit rotation stays under the summed
    map gaps, and the two rotation tails split on convergence."""
    seq = build("rotations_summable").sequence
    limit = rotation(0.0)
    rng = random.Random(41)
    failures = 0
    for _ in range(1000):
        x = rng.random()
        n = rng.randint(1, 50)
        k = rng.randint(1, 20)
        rec = shadow_bound_check(seq, limit, x, n, k)
        if not rec.ok:
            failures += 1
    summable = tail_sum(seq, limit, 1000)
    harmonic = tail_sum(build("rotations_harmonic").sequence, limit, 1000)
    sum_ok = summable.converged and abs(summable.partial_sums[-1] - 1.0) <= 1e-6
    ok = failures == 0 and sum_ok and not harmonic.converged
    details = (f"{failures} bound failures over 1000 sampled (x, n, k); "
               f"summable tail S_1000={summable.partial_sums[-1]!r} "
               f"converged={summable.converged}; harmonic "
               f"converged={harmonic.converged}")
    return ok, details


# ---------------------------------------------------------------------------
# 10. metric suite


def _axiom_failures(d_fn, triples):
    bad = 0
    for x, y, z in triples:
        dxy = d_fn(x, y)
        if dxy < 0 or d_fn(x, x) != 0.0 or d_fn(y, x) != dxy:
            bad += 1
        elif d_fn(x, z) > dxy + d_fn(y, z) + TRIANGLE_SLACK:
            bad += 1
    return bad


def _mutual_cover(a, b, eps):
    da = all(min(distance(a.space, p, q) for q in b.elements) <= eps
             for p in a.elements)
    db = all(min(distance(a.space, p, q) for p in a.elements) <= eps
             for q in b.elements)
    return da and db


def _check_metric_suite():
    """Metric axioms per space, Hausdorff mutual-covering equivalence, and
    window-enlargement stability of the sequence metric."""
    rng = random.Random(5150)
    n = GRID_POINTS
    bad = {}

    triples = [(rng.random(), rng.random(), rng.random()) for _ in range(n)]
    bad["interval"] = _axiom_failures(
        lambda a, b: distance(INTERVAL, a, b), triples)
    bad["circle"] = _axiom_failures(
        lambda a, b: distance(CIRCLE, a, b), triples)

    def sym_point():
        support = {rng.randint(-12, 12): 1
                   for _ in range(rng.randint(0, 10))}
        return make_symbolic(support)

    sym_triples = [(sym_point(), sym_point(), sym_point()) for _ in range(n)]
    bad["symbolic"] = _axiom_failures(dist_symbolic, sym_triples)

    def subset():
        k = rng.randint(1, 4)
        return finite_subset([rng.random() for _ in range(k)], INTERVAL)

    subset_triples = [(subset(), subset(), subset()) for _ in range(n)]
    bad["subsets"] = _axiom_failures(hausdorff, subset_triples)

    cover_breaks = 0
    for a, b, _ in subset_triples:
        eps = rng.random()
        if (hausdorff(a, b) <= eps) != _mutual_cover(a, b, eps):
            cover_breaks += 1

    window_breaks = 0
    for _ in range(n):
        support_x = {rng.randint(-8, 8): 1 for _ in range(rng.randint(0, 6))}
        support_y = {rng.randint(-8, 8): 1 for _ in range(rng.randint(0, 6))}
        w = rng.randint(10, 40)
        wide = w + rng.randint(1, 24)
        d_small = dist_symbolic(make_symbolic(support_x, radius=w),
                                make_symbolic(support_y, radius=w))
        d_wide = dist_symbolic(make_symbolic(support_x, radius=wide),
                               make_symbolic(support_y, radius=wide))
        if abs(d_small - d_wide) > 2.0 ** (1 - w):
            window_breaks += 1

    axiom_failures = sum(bad.values())
    ok = axiom_failures == 0 and cover_breaks == 0 and window_breaks == 0
    details = (f"axiom failures per space {bad}; covering equivalence "
               f"breaks {cover_breaks}; window enlargement breaks "
               f"{window_breaks}; {n} samples each")
    return ok, details


# ---------------------------------------------------------------------------

CRITERIA = (
    ("transcription-guard",
     "piece tables: continuity, closed form, invariant intervals",
     _check_transcription_guard),
    ("two-map-family",
     "composed cycle separates where neither factor does",
     _check_two_map_family),
    ("shift-blocks",
     "doubling-block spikes split the three classifiers",
     _check_shift_blocks),
    ("generated-embedding",
     "composition hits embed at doubled times",
     _check_generated_embedding),
    ("iterate-embedding",
     "bundled-iterate hits embed at multiplied times",
     _check_iterate_embedding),
    ("hyperspace-consistency",
     "finite-subset probes agree with point probes",
     _check_hyperspace_consistency),
    ("weak-strong-agreement",
     "per-pair probe never contradicts the union probe",
     _check_weak_strong_agreement),
    ("family-classifiers",
     "windowed classifiers match brute-force predicates",
     _check_family_classifiers),
    ("perturbation-bound",
     "displacement bound and tail convergence split",
     _check_perturbation_bound),
    ("metric-suite",
     "metric axioms and mutual-covering equivalence",
     _check_metric_suite),
)

CRITERION_KEYS = tuple(key for key, _, _ in CRITERIA)


def run_all(only: str | None = None) -> tuple:
    """Run every check, or just the named one. Results keep listing order."""
    if only is not None and only not in CRITERION_KEYS:
        raise KeyError(f"unknown check: {only!r}; "
                       f"known: {', '.join(CRITERION_KEYS)}")
    results = []
    for key, title, fn in CRITERIA:
        if only is not None and key != only:
            continue
        passed, details = fn()
        results.append(CriterionResult(key=key, title=title, passed=passed,
                                       details=details))
    return tuple(results)
