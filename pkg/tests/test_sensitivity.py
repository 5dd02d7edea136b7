"""Hit-time and probe tests, checked against naive recomputation oracles.

The oracles here recompose prefixes step by step for every time index
(quadratic on purpose) and sum symbolic distances over explicit coordinate
dicts, so they share no orbit or windowing code with the scan machinery.
"""

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from nonauto import families, registry, sensitivity, spaces
from nonauto.families import (
    cofinite_family,
    infinite_family,
    nonempty,
    syndetic_family,
)
from nonauto.sensitivity import (
    FAILS,
    HOLDS,
    asym_pair_test,
    attaching_estimate,
    hit_times,
    hyperspace_probe,
    pair_separation_times,
    region_scan,
    sensitivity_probe,
    weak_implication_ok,
    weak_sensitivity_probe,
)
from nonauto.spaces import (
    CIRCLE,
    INTERVAL,
    cylinder_region,
    distance,
    finite_subset,
    make_symbolic,
    metric_ball,
    sample_region,
)
from nonauto.systems import (
    apply,
    cyclic_sequence,
    identity,
    map_at,
    piecewise_linear,
    rotation,
)

F1 = piecewise_linear([(0.0, 0.0), (0.25, 1.0), (1.0, 0.25)])
F2 = piecewise_linear([(0.0, 0.25), (0.25, 0.0), (0.5, 1.0), (1.0, 0.0)])


def naive_hit_times(seq, sample, delta, horizon, space):
    """Recompose the prefix from scratch at every n; no shared orbit state."""
    hits = []
    for n in range(1, horizon + 1):
        found = False
        for a in range(len(sample)):
            for b in range(a + 1, len(sample)):
                xa, xb = sample[a], sample[b]
                for i in range(1, n + 1):
                    m = map_at(seq, i)
                    xa = apply(m, xa)
                    xb = apply(m, xb)
                if distance(space, xa, xb) > delta:
                    found = True
                    break
            if found:
                break
        if found:
            hits.append(n)
    return tuple(hits)


class TestHitTimesAgainstOracle:
    def test_interval_two_map_cycle(self):
        seq = cyclic_sequence([F1, F2])
        region = metric_ball(INTERVAL, 0.5, 1 / 32.0)
        sample = sample_region(region, 6)
        expected = naive_hit_times(seq, sample, 0.2, 25, INTERVAL)
        got = hit_times(seq, region, 0.2, 25, resolution=6)
        assert got.times.indices == expected
        assert expected  # the oracle run must actually exercise hits

    def test_circle_rotation_cycle(self):
        seq = cyclic_sequence([rotation(0.3), rotation(0.45)], space=CIRCLE)
        region = metric_ball(CIRCLE, 0.1, 0.05)
        sample = sample_region(region, 5)
        expected = naive_hit_times(seq, sample, 0.04, 20, CIRCLE)
        got = hit_times(seq, region, 0.04, 20, resolution=5)
        assert got.times.indices == expected


def naive_symbolic_distance(dx, dy, window):
    total = 0.0
    for j in range(-window, window + 1):
        total += abs(dx.get(j, 0) - dy.get(j, 0)) * 2.0 ** -abs(j)
    return total


def shift_dict(d, s):
    # left shift by s: coordinate j of the result reads coordinate j+s
    return {j - s: v for j, v in d.items()}


class TestSymbolicScanAgainstOracle:
    def test_block_walk_pair_times(self):
        # independent reconstruction of the doubling-blocks step list
        steps = []
        r = 1
        while len(steps) < 50:
            steps.extend([0] * (2 ** r) + [r, -r])
            r += 1
        ax = {0: 1, 1: 1, 4: 1}
        ay = {0: 1, -3: 1}
        x = make_symbolic(ax)
        y = make_symbolic(ay)
        seq = registry.build("example31").sequence
        delta = 0.3
        expected = []
        net = 0
        dx, dy = dict(ax), dict(ay)
        for n in range(1, 51):
            net += steps[n - 1]
            dx = shift_dict(dict(ax), net)
            dy = shift_dict(dict(ay), net)
            # shared window after a net shift of s is 64 - |s|
            if naive_symbolic_distance(dx, dy, 64 - abs(net)) > delta:
                expected.append(n)
        got = pair_separation_times(seq, x, y, delta, 50)
        assert got.indices == tuple(expected)
        assert expected


class TestTrivialCases:
    def test_small_region_under_identity_never_hits(self):
        seq = cyclic_sequence([identity()], space=INTERVAL)
        region = metric_ball(INTERVAL, 0.5, 0.02)
        got = hit_times(seq, region, 0.1, 50, resolution=8)
        assert got.times.indices == ()

    def test_far_pair_under_identity_always_separated(self):
        seq = cyclic_sequence([identity()], space=INTERVAL)
        times = pair_separation_times(seq, 0.1, 0.9, 0.3, 40)
        assert times.indices == tuple(range(1, 41))

    def test_identical_points_never_separate(self):
        seq = cyclic_sequence([F1, F2])
        times = pair_separation_times(seq, 0.625, 0.625, 0.01, 40)
        assert times.indices == ()

    def test_separation_is_strict(self):
        seq = cyclic_sequence([identity()], space=INTERVAL)
        # |0.25 - 0.5| == 0.25 exactly: not a hit at delta 0.25
        assert pair_separation_times(seq, 0.25, 0.5, 0.25, 10).indices == ()
        assert pair_separation_times(
            seq, 0.25, 0.5, 0.249, 10).indices == tuple(range(1, 11))


class TestFrozenHitSets:
    def test_two_step_composition_ball(self):
        named = registry.build("example41_composition")
        region = metric_ball(INTERVAL, 17 / 32.0, 1 / 32.0)
        got = hit_times(named.sequence, region, 0.2, 200, resolution=64)
        assert got.times.indices[:6] == (2, 3, 4, 5, 6, 7)
        assert len(got.times.indices) == 199

    def test_doubling_blocks_cylinder(self):
        # spike times from the block structure: sum of (2^s + 2) for s < r,
        # plus 2^r + 1
        def spike(r):
            return sum(2 ** s + 2 for s in range(1, r)) + 2 ** r + 1

        named = registry.build("example31")
        region = cylinder_region({j: 0 for j in range(-2, 3)})
        got = hit_times(named.sequence, region, 0.5, 2000, resolution=64)
        assert got.times.indices == tuple(spike(r) for r in range(2, 10))

    def test_doubling_blocks_witness_separation(self):
        named = registry.build("example31")
        region = cylinder_region({j: 0 for j in range(-2, 3)})
        got = hit_times(named.sequence, region, 0.5, 2000, resolution=64)
        first = got.times.indices[0]
        x, y, sep = got.witnesses[first]
        assert sep > 0.5
        assert sep <= 3.0  # metric diameter


class TestDeltaAndResolutionMonotonicity:
    def test_larger_delta_hits_subset(self):
        seq = cyclic_sequence([F1, F2])
        region = metric_ball(INTERVAL, 0.5, 1 / 32.0)
        small = hit_times(seq, region, 0.1, 100, resolution=16)
        large = hit_times(seq, region, 0.3, 100, resolution=16)
        assert set(large.times.indices) <= set(small.times.indices)

    def test_supersampled_hits_superset(self):
        # grids nest bitwise at resolutions R and 2R-1, so every coarse hit
        # survives refinement
        seq = cyclic_sequence([F1, F2])
        region = metric_ball(INTERVAL, 0.5, 1 / 32.0)
        coarse = hit_times(seq, region, 0.2, 100, resolution=8)
        fine = hit_times(seq, region, 0.2, 100, resolution=15)
        assert set(coarse.times.indices) <= set(fine.times.indices)

    @given(delta=st.floats(min_value=0.01, max_value=0.9))
    @settings(max_examples=30, deadline=None)
    def test_hit_series_matches_threshold_slice(self, delta):
        seq = cyclic_sequence([F1, F2])
        region = metric_ball(INTERVAL, 0.5, 1 / 32.0)
        scan = region_scan(seq, region, 60, 8)
        got = scan.times(delta)
        expected = tuple(n for n in range(1, 61)
                         if scan.max_series[n] > delta)
        assert got.indices == expected


class TestProbeVerdicts:
    def test_composition_holds_on_ball_cover(self):
        named = registry.build("example41_composition")
        cover = registry.default_cover("interval-balls")
        rep = sensitivity_probe(named.sequence, 0.2, infinite_family(),
                                cover, 200, 64)
        assert rep.verdict == HOLDS
        assert rep.holds
        assert rep.failing_region is None
        assert len(rep.regions) == 16

    def test_single_maps_fail_on_ball_cover(self):
        cover = registry.default_cover("interval-balls")
        rep1 = sensitivity_probe(registry.build("example41_f1").sequence,
                                 0.2, infinite_family(), cover, 200, 64)
        rep2 = sensitivity_probe(registry.build("example41_f2").sequence,
                                 0.2, infinite_family(), cover, 200, 64)
        assert rep1.verdict == FAILS
        assert rep2.verdict == FAILS
        # each map has an interval it never stretches past delta: the first
        # failing ball sits inside it
        assert rep1.failing_region == "ball-04"
        assert rep2.failing_region == "ball-00"

    def test_identity_fails_everywhere(self):
        named = registry.build("identity")
        cover = registry.default_cover("interval-balls")
        rep = sensitivity_probe(named.sequence, 0.1, nonempty(), cover,
                                50, 16)
        assert rep.verdict == FAILS
        assert all(not r.passed for r in rep.regions)

    def test_doubling_blocks_family_split(self):
        named = registry.build("example31")
        cover = registry.default_cover("cylinders")
        syn = sensitivity_probe(named.sequence, 0.5, syndetic_family(),
                                cover, 2000, 64)
        cof = sensitivity_probe(named.sequence, 0.5, cofinite_family(),
                                cover, 2000, 64)
        non = sensitivity_probe(named.sequence, 0.5, nonempty(), cover,
                                2000, 64)
        assert non.verdict == HOLDS
        assert syn.verdict == FAILS
        assert cof.verdict == FAILS
        # widening identity blocks leave a gap that outgrows any bound
        assert syn.regions[0].max_gap == 961

    def test_report_serialization_shape(self):
        named = registry.build("example41_composition")
        cover = registry.default_cover("interval-balls")[:2]
        rep = sensitivity_probe(named.sequence, 0.2, infinite_family(),
                                cover, 50, 8)
        d = rep.to_dict()
        assert d["verdict"] in (HOLDS, FAILS)
        assert len(d["regions"]) == 2
        assert {"region", "passed", "hit_count", "times", "max_gap",
                "witness"} <= set(d["regions"][0])

    def test_empty_cover_rejected(self):
        named = registry.build("identity")
        with pytest.raises(ValueError):
            sensitivity_probe(named.sequence, 0.1, nonempty(), [], 10, 8)


class TestWeakProbe:
    def test_strong_never_outruns_weak(self):
        cover = registry.default_cover("interval-balls")
        for name in ("example41_f1", "example41_f2", "example41_composition"):
            seq = registry.build(name).sequence
            strong = sensitivity_probe(seq, 0.2, infinite_family(), cover,
                                       200, 64)
            weak = weak_sensitivity_probe(seq, 0.2, infinite_family(), cover,
                                          200, 64)
            assert weak_implication_ok(strong, weak)

    def test_weak_holds_for_composition(self):
        named = registry.build("example41_composition")
        cover = registry.default_cover("interval-balls")
        rep = weak_sensitivity_probe(named.sequence, 0.2, infinite_family(),
                                     cover, 200, 64)
        assert rep.verdict == HOLDS
        assert rep.mode == "weakly-F-sensitive"

    def test_weak_fails_under_identity(self):
        named = registry.build("identity")
        cover = registry.default_cover("interval-balls")
        rep = weak_sensitivity_probe(named.sequence, 0.1, nonempty(), cover,
                                     50, 16)
        assert rep.verdict == FAILS

    def test_parameter_mismatch_rejected(self):
        named = registry.build("identity")
        cover = registry.default_cover("interval-balls")[:2]
        a = sensitivity_probe(named.sequence, 0.1, nonempty(), cover, 20, 8)
        b = weak_sensitivity_probe(named.sequence, 0.2, nonempty(), cover,
                                   20, 8)
        with pytest.raises(ValueError):
            weak_implication_ok(a, b)


class TestHyperspaceProbe:
    def test_singletons_reproduce_base_hit_sets(self):
        named = registry.build("example41_composition")
        cover = registry.default_cover("interval-balls")
        base = sensitivity_probe(named.sequence, 0.2, infinite_family(),
                                 cover, 200, 64)
        centers = [finite_subset([(2 * i + 1) / 32.0], INTERVAL)
                   for i in range(16)]
        hyper = hyperspace_probe(named.sequence, 0.2, infinite_family(),
                                 centers, 1 / 32.0, 200, 64)
        for hrec, brec in zip(hyper.regions, base.regions):
            assert hrec.times.indices == brec.times.indices

    def test_two_point_subsets_run(self):
        named = registry.build("example41_composition")
        centers = [finite_subset([c, 1.0 - c], INTERVAL)
                   for c in (0.125, 0.375)]
        rep = hyperspace_probe(named.sequence, 0.2, infinite_family(),
                               centers, 1 / 32.0, 200, 32)
        assert rep.verdict in (HOLDS, FAILS)
        assert len(rep.regions) == 2

    def test_cardinality_bound_enforced(self):
        named = registry.build("identity")
        big = finite_subset([0.1, 0.3, 0.5, 0.7], INTERVAL)
        with pytest.raises(ValueError):
            hyperspace_probe(named.sequence, 0.1, nonempty(), [big],
                             0.05, 10, 8)


class TestAsymptoticPairs:
    def test_rotations_preserve_close_pairs(self):
        seq = registry.build("rotations_summable").sequence
        v = asym_pair_test(seq, 0.1, 0.3, 0.25, infinite_family(),
                           horizon=200)
        assert v.is_asymptotic
        assert v.separation.indices == ()

    def test_rotations_preserve_far_pairs(self):
        seq = registry.build("rotations_summable").sequence
        v = asym_pair_test(seq, 0.1, 0.55, 0.25, infinite_family(),
                           horizon=200)
        assert not v.is_asymptotic
        assert v.stay_close.indices == ()

    @given(x=st.floats(min_value=0.0, max_value=1.0),
           y=st.floats(min_value=0.0, max_value=1.0),
           delta=st.floats(min_value=0.05, max_value=0.8))
    @settings(max_examples=30, deadline=None)
    def test_partition_of_window(self, x, y, delta):
        seq = cyclic_sequence([F1, F2])
        v = asym_pair_test(seq, x, y, delta, cofinite_family(), horizon=60)
        stay = set(v.stay_close.indices)
        sep = set(v.separation.indices)
        assert stay | sep == set(range(1, 61))
        assert not (stay & sep)


class TestAttaching:
    def test_identity_attaches_points_inside_region(self):
        seq = registry.build("identity").sequence
        ball = metric_ball(INTERVAL, 0.5, 0.1)
        probe = finite_subset([0.5, 0.55, 0.9], INTERVAL)
        got = attaching_estimate(seq, ball, cofinite_family(), probe, 100)
        assert got.elements == (0.5, 0.55)

    def test_attached_set_may_be_empty(self):
        seq = registry.build("identity").sequence
        ball = metric_ball(INTERVAL, 0.5, 0.1)
        probe = finite_subset([0.9], INTERVAL)
        got = attaching_estimate(seq, ball, cofinite_family(), probe, 100)
        assert got.elements == ()
        assert got.space == INTERVAL

    def test_period_two_returns_are_syndetic_not_cofinite(self):
        seq = cyclic_sequence([rotation(0.5)], space=CIRCLE)
        ball = metric_ball(CIRCLE, 0.25, 0.1)
        probe = finite_subset([0.25], CIRCLE)
        syn = attaching_estimate(seq, ball, syndetic_family(2), probe, 100)
        cof = attaching_estimate(seq, ball, cofinite_family(), probe, 100)
        assert syn.elements == (0.25,)
        assert cof.elements == ()


class TestScanMachinery:
    def test_scan_cache_returns_same_object(self):
        named = registry.build("example41_composition")
        region = metric_ball(INTERVAL, 0.5, 1 / 32.0)
        a = region_scan(named.sequence, region, 50, 8)
        b = region_scan(named.sequence, region, 50, 8)
        assert a is b

    def test_degenerate_sample_rejected(self):
        named = registry.build("identity")
        point = metric_ball(INTERVAL, 0.5, 1e-15)
        with pytest.raises(ValueError):
            region_scan(named.sequence, point, 10, 4)

    def test_symbolic_records_carry_truncation_bound(self):
        named = registry.build("example31")
        cover = registry.default_cover("cylinders")[:1]
        rep = sensitivity_probe(named.sequence, 0.5, nonempty(), cover,
                                100, 64)
        bound = rep.regions[0].truncation_bound
        assert bound is not None
        assert 0.0 < bound < 1e-12

    def test_invalid_probe_parameters(self):
        named = registry.build("identity")
        region = metric_ball(INTERVAL, 0.5, 0.1)
        with pytest.raises(ValueError):
            hit_times(named.sequence, region, 0.0, 10, resolution=8)
        with pytest.raises(ValueError):
            hit_times(named.sequence, region, 0.1, 0, resolution=8)
