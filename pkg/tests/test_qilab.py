"""Tests for boundary transducers, interior maps, and the tile map."""

import itertools
import json
import random
from collections import Counter
from fractions import Fraction

import pytest

from dllab.dlgraph import (
    ball,
    base_vertex,
    box_members,
    canonical_box,
    dl_key,
    dl_neighbors,
    dl_vertex,
    graph_params,
    heights,
    height_cube,
    rho,
    tree_vertex,
)
from dllab.qilab import (
    BoundaryMap,
    LevelPerm,
    PrefixRewrite,
    Shift,
    clone,
    clone_measure,
    collapse,
    compose,
    count_vertices_in_clone,
    distortion,
    fiber_count_audit,
    identity_map,
    interior_map,
    level_perm,
    make_tiling,
    map_from_description,
    map_to_json,
    measure_linear_constant,
    prefix_rewrite,
    preimage_count,
    preimage_vertices,
    psi_apply,
    psi_eval,
    section,
    shift_map,
    uf_chain_scan,
    umap,
    umap_displacement,
    umap_eval,
    vertex_clone,
    vertices_in_clone,
)


def random_primitive(rng, q):
    kind = rng.choice(["shift", "perm", "prefix"])
    if kind == "shift":
        return Shift(rng.choice([-1, 1]))
    if kind == "perm":
        levels = rng.sample(range(-1, 2), rng.choice([1, 2]))
        perms = []
        for lvl in sorted(levels):
            table = list(range(q))
            rng.shuffle(table)
            perms.append((lvl, tuple(table)))
        return level_perm(perms)
    lo = rng.choice([-1, 0])
    hi = lo + rng.choice([0, 1])
    words = list(itertools.product(range(q), repeat=hi - lo + 1))
    images = list(words)
    rng.shuffle(images)
    return prefix_rewrite(lo, hi, zip(words, images))


def random_boundary_map(rng, q):
    return BoundaryMap(q, tuple(random_primitive(rng, q) for _ in range(rng.choice([1, 2]))))


# ---------------------------------------------------------------------------
# clones

class TestClones:
    def test_normalization_drops_zero_digits(self):
        assert clone(3, [(1, 0), (2, 1)]) == (3, ((2, 1),))

    def test_rejects_digit_above_level(self):
        with pytest.raises(ValueError):
            clone(1, [(2, 1)])

    def test_rejects_duplicate_index(self):
        with pytest.raises(ValueError):
            clone(3, [(1, 1), (1, 2)])

    def test_measure(self):
        assert clone_measure(clone(0), 2) == 1
        assert clone_measure(clone(3), 2) == Fraction(1, 8)
        assert clone_measure(clone(-2), 3) == 9

    def test_count_vertices_below_clone_level(self):
        # clone at level 1, vertices at level 3: q^2 completions
        assert count_vertices_in_clone(clone(1, [(0, 1)]), 3, 2) == 4

    def test_count_vertices_above_clone_level(self):
        # clone pins digits above the vertex level: they must vanish
        assert count_vertices_in_clone(clone(3, [(3, 1)]), 2, 2) == 0
        assert count_vertices_in_clone(clone(3, [(1, 1)]), 2, 2) == 1

    def test_vertices_match_counts(self):
        for c in [clone(1, [(0, 1)]), clone(3, [(3, 1)]), clone(3, [(1, 1)]), clone(-1)]:
            for level in (0, 1, 2):
                vs = vertices_in_clone(c, level, 2)
                assert len(vs) == count_vertices_in_clone(c, level, 2)
                assert len(set(vs)) == len(vs)


# ---------------------------------------------------------------------------
# primitives

class TestShift:
    def test_stream_action(self):
        assert Shift(2).apply_stream({0: 1, 3: 2}) == {2: 1, 5: 2}

    def test_clone_image_level_moves(self):
        [img] = Shift(1).clone_images(clone(2, [(0, 1)]))
        assert img == (3, ((1, 1),))

    def test_lam_and_bilip(self):
        assert Shift(2).lam(3) == Fraction(1, 9)
        assert Shift(-1).lam(2) == 2
        assert Shift(-2).bilip(2) == 4

    def test_inverse_cancels(self):
        c = clone(2, [(1, 1)])
        [img] = Shift(3).clone_images(c)
        [back] = Shift(3).clone_preimages(img)
        assert back == c


class TestLevelPerm:
    def test_requires_bijection(self):
        with pytest.raises(ValueError):
            level_perm([(0, (0, 0))])

    def test_stream_action_swaps_digit(self):
        p = level_perm([(1, (1, 0))])
        assert p.apply_stream({1: 1}) == {}
        assert p.apply_stream({}) == {1: 1}

    def test_clone_image_only_touches_pinned_levels(self):
        p = level_perm([(0, (1, 0)), (5, (1, 0))])
        [img] = p.clone_images(clone(2))
        # index 0 is pinned by the clone and flips; index 5 is free and stays free
        assert img == (2, ((0, 1),))

    def test_isometry_constants(self):
        p = level_perm([(0, (1, 0))])
        assert p.lam(2) == 1
        assert p.bilip(2) == 1

    def test_measured_constant_is_one(self):
        m = BoundaryMap(2, (level_perm([(0, (1, 0)), (2, (1, 0))]),))
        check = measure_linear_constant(m, depth=4)
        assert check.constant is True
        assert check.ratio == 1


class TestPrefixRewrite:
    def swap_window(self, q=2):
        # reverse the two-digit window [0, 1]
        words = list(itertools.product(range(q), repeat=2))
        return prefix_rewrite(0, 1, ((w, w[::-1]) for w in words))

    def test_requires_bijection(self):
        with pytest.raises(ValueError):
            prefix_rewrite(0, 1, [((0, 0), (0, 0)), ((0, 1), (0, 0)),
                                  ((1, 0), (1, 0)), ((1, 1), (1, 1))])

    def test_stream_action(self):
        rw = self.swap_window()
        assert rw.apply_stream({0: 1, 3: 1}) == {1: 1, 3: 1}

    def test_clone_image_deep_clone_stays_single(self):
        rw = self.swap_window()
        [img] = rw.clone_images(clone(4, [(0, 1)]))
        assert img == (4, ((1, 1),))

    def test_clone_image_shallow_clone_splits(self):
        rw = self.swap_window()
        imgs = rw.clone_images(clone(0, [(0, 1)]))
        # one subclone per free digit at index 1: window (1,0) -> (0,1)
        # and window (1,1) -> (1,1)
        assert sorted(imgs) == [(1, ((0, 1), (1, 1))), (1, ((1, 1),))]
        total = sum(clone_measure(c, 2) for c in imgs)
        assert total == clone_measure(clone(0, [(0, 1)]), 2)

    def test_measure_preserving(self):
        rw = self.swap_window()
        assert rw.lam(2) == 1
        check = measure_linear_constant(BoundaryMap(2, (rw,)), depth=3)
        assert check.constant and check.ratio == 1


# ---------------------------------------------------------------------------
# boundary maps and measure scalars

class TestBoundaryMaps:
    def test_shift_lam_values(self):
        for q in (2, 3):
            for m in range(-2, 3):
                check = measure_linear_constant(shift_map(q, m), depth=4)
                assert check.constant
                assert check.ratio == Fraction(q) ** (-m)
                assert shift_map(q, m).lam() == Fraction(q) ** (-m)

    def test_identity_lam(self):
        check = measure_linear_constant(identity_map(2), depth=3)
        assert check.constant and check.ratio == 1

    def test_lam_multiplicative_on_random_pairs(self):
        rng = random.Random(17)
        for _ in range(20):
            q = rng.choice([2, 3])
            f = random_boundary_map(rng, q)
            g = random_boundary_map(rng, q)
            fg = compose(f, g)
            span = fg.source_span()
            depth = max(3, (span[1] if span else 0) + 1)
            mf = measure_linear_constant(f, depth)
            mg = measure_linear_constant(g, depth)
            mfg = measure_linear_constant(fg, depth)
            assert mf.constant and mg.constant and mfg.constant
            assert mfg.ratio == mf.ratio * mg.ratio
            assert mf.ratio == f.lam()
            assert mg.ratio == g.lam()

    def test_inverse_acts_as_identity_on_streams(self):
        rng = random.Random(7)
        for _ in range(20):
            q = rng.choice([2, 3])
            f = random_boundary_map(rng, q)
            round_trip = compose(f, f.inverse())
            stream = {i: rng.randrange(q) for i in range(-2, 4)}
            stream = {i: v for i, v in stream.items() if v}
            assert round_trip.apply_stream(stream) == stream

    def test_clone_mass_conservation(self):
        rng = random.Random(5)
        for _ in range(20):
            q = rng.choice([2, 3])
            f = random_boundary_map(rng, q)
            c = clone(2, [(0, 1), (2, q - 1)])
            images = f.clone_images(c)
            assert sum(clone_measure(ci, q) for ci in images) == f.lam() * clone_measure(c, q)
            back = [c2 for ci in images for c2 in f.clone_preimages(ci)]
            assert sum(clone_measure(ci, q) for ci in back) == clone_measure(c, q)

    def test_description_roundtrip(self):
        rng = random.Random(11)
        for _ in range(20):
            q = rng.choice([2, 3])
            f = random_boundary_map(rng, q)
            back = map_from_description(q, json.loads(map_to_json(f)))
            assert back == f

    def test_depth_below_span_rejected(self):
        rw = prefix_rewrite(2, 3, (
            (w, w[::-1]) for w in itertools.product(range(2), repeat=2)
        ))
        with pytest.raises(ValueError):
            measure_linear_constant(BoundaryMap(2, (rw,)), depth=1)

    def test_probe_budget_guard(self):
        with pytest.raises(ValueError):
            measure_linear_constant(shift_map(2, 1), depth=40, budget=100)

    def test_net_shift(self):
        m = BoundaryMap(2, (Shift(2), Shift(-1)))
        assert m.net_shift() == 1


# ---------------------------------------------------------------------------
# section and collapse

class TestSectionCollapse:
    def test_roundtrip(self):
        p = graph_params(2, 3)
        x = dl_vertex(p, (tree_vertex(2, [(1, 2)], 3), tree_vertex(-2, [(-2, 1)], 3)))
        y = collapse(p, [2, -2], section(x))
        assert y == x

    def test_collapse_truncates_high_digits(self):
        p = graph_params(2, 2)
        streams = [{0: 1, 5: 1}, {}]
        y = collapse(p, [1, -1], streams)
        assert y.coords[0] == tree_vertex(1, [(0, 1)], 2)

    def test_roundtrip_on_ball(self):
        p = graph_params(2, 2)
        for v in ball(base_vertex(p), 4).vertices:
            assert collapse(p, heights(v), section(v)) == v

    def test_sections_separate_vertices_on_ball(self):
        p = graph_params(2, 2)
        seen = set()
        for v in ball(base_vertex(p), 3).vertices:
            key = (heights(v),
                   tuple(tuple(sorted(s.items())) for s in section(v)))
            assert key not in seen
            seen.add(key)

    def test_collapse_selects_child_by_digit(self):
        p = graph_params(2, 2)
        base = base_vertex(p)
        steps = set(dl_neighbors(base))
        picked = [collapse(p, (1, -1), ({1: digit}, {})) for digit in (0, 1)]
        assert len(set(picked)) == 2
        for y in picked:
            assert y in steps


# ---------------------------------------------------------------------------
# interior maps and exact fibers

class TestInteriorMaps:
    def params(self):
        return graph_params(2, 2)

    def lift_lower(self):
        # contract the first coordinate, fix the second
        return interior_map(self.params(), (shift_map(2, 1), identity_map(2)))

    def box(self, h=4):
        p = self.params()
        return p, canonical_box(p, height_cube([(0, h)]))

    def test_identity_psi_fixes_vertices(self):
        p, box = self.box()
        im = interior_map(p, (identity_map(2), identity_map(2)))
        for x in box_members(p, box):
            assert psi_apply(im, x) == x
            assert preimage_count(im, x) == 1

    def test_heights_preserved(self):
        p, box = self.box()
        im = self.lift_lower()
        for x in box_members(p, box):
            assert rho(psi_apply(im, x)) == rho(x)

    def test_contraction_fibers_constant_q(self):
        p, box = self.box()
        im = self.lift_lower()
        counts = [preimage_count(im, x) for x in box_members(p, box)]
        assert set(counts) == {2}
        assert sum(counts) == 160

    def test_preimage_vertices_match_counts_and_map_back(self):
        p, box = self.box()
        im = self.lift_lower()
        for x in list(box_members(p, box))[:24]:
            fiber = preimage_vertices(im, x)
            assert len(fiber) == preimage_count(im, x)
            assert len(set(fiber)) == len(fiber)
            for y in fiber:
                assert psi_apply(im, y) == x

    def test_forward_sweep_finds_no_extra_preimages(self):
        # over a padded box, forward evaluation must agree with the
        # exact fiber counts computed through clone preimages
        p = self.params()
        inner = canonical_box(p, height_cube([(1, 3)]))
        outer = canonical_box(p, height_cube([(0, 4)]))
        im = self.lift_lower()
        hits = Counter()
        for y in box_members(p, outer):
            hits[dl_key(psi_apply(im, y))] += 1
        for x in box_members(p, inner):
            # every preimage of an inner vertex lies inside the outer box:
            # the transducers move digit indices by at most one
            assert hits[dl_key(x)] == preimage_count(im, x)

    def test_opposite_shifts_give_zero_or_q_fibers(self):
        p, box = self.box()
        im = interior_map(p, (shift_map(2, 1), shift_map(2, -1)))
        members = list(box_members(p, box))
        counts = [preimage_count(im, x) for x in members]
        assert set(counts) == {0, 2}
        by_height = {}
        for x, c in zip(members, counts):
            by_height.setdefault(rho(x)[0], []).append(c)
        # at heights where the second coordinate's leading digit is free,
        # fibers average exactly one; the bottom row is pinned to the
        # all-zero root, whose leading digit vanishes, so it averages q
        for h, vals in by_height.items():
            avg = Fraction(sum(vals), len(vals))
            assert avg == (2 if h == 4 else 1)

    def test_d3_double_contraction_fibers(self):
        p = graph_params(3, 2)
        im = interior_map(p, (shift_map(2, 1), shift_map(2, 1), identity_map(2)))
        box = canonical_box(p, height_cube([(0, 4), (0, 4)]))
        counts = [preimage_count(im, x) for x in box_members(p, box)]
        assert len(counts) == 6400
        assert set(counts) == {4}

    def test_eval_table_preserves_order(self):
        p, box = self.box(2)
        im = self.lift_lower()
        members = sorted(box_members(p, box), key=dl_key)
        table = psi_eval(im, members)
        assert list(table) == members


# ---------------------------------------------------------------------------
# fiber-count audit

class TestFiberAudit:
    def test_contraction_audit_d2(self):
        p = graph_params(2, 2)
        im = interior_map(p, (shift_map(2, 1), identity_map(2)))
        box = canonical_box(p, height_cube([(0, 4)]))
        audit = fiber_count_audit(im, box, r=1, bilip=2)
        assert audit.box_size == 80
        assert audit.boundary_size == 32
        assert audit.total_preimages == 160
        assert audit.lower_bound == 96
        assert audit.upper_bound == 288
        assert audit.bounds_ok
        assert audit.interior_constant and audit.interior_value == 2

    def test_contraction_audit_d3(self):
        p = graph_params(3, 2)
        im = interior_map(p, (shift_map(2, 1), shift_map(2, 1), identity_map(2)))
        box = canonical_box(p, height_cube([(0, 4), (0, 4)]))
        audit = fiber_count_audit(im, box, r=1, bilip=2)
        assert audit.box_size == 6400
        assert audit.boundary_size == 4096
        assert audit.total_preimages == 25600
        assert audit.lower_bound == 9216
        assert audit.upper_bound == 58368
        assert audit.bounds_ok

    def test_default_radius_covers_bilip(self):
        p = graph_params(2, 2)
        im = interior_map(p, (shift_map(2, 1), identity_map(2)))
        box = canonical_box(p, height_cube([(0, 2)]))
        audit = fiber_count_audit(im, box)
        assert audit.r == 1 and audit.bilip == 2
        assert audit.bounds_ok

    def test_workers_agree(self):
        p = graph_params(2, 2)
        im = interior_map(p, (shift_map(2, 1), identity_map(2)))
        box = canonical_box(p, height_cube([(0, 4)]))
        a1 = fiber_count_audit(im, box, r=1, bilip=2, workers=1)
        a4 = fiber_count_audit(im, box, r=1, bilip=2, workers=4)
        assert a1 == a4


# ---------------------------------------------------------------------------
# chain scans

class TestChainScan:
    def scan_map(self):
        p = graph_params(2, 2)
        return interior_map(p, (shift_map(2, 1), identity_map(2)))

    def test_matching_target_vanishes_identically(self):
        records = uf_chain_scan(self.scan_map(), 2, [2, 4, 6], r=1)
        assert all(r.chain_sum == 0 for r in records)
        assert all(r.ratio_boundary == 0 for r in records)

    def test_mismatched_target_diverges_at_boundary_rate(self):
        records = uf_chain_scan(self.scan_map(), 3, [2, 4, 6], r=1)
        assert [abs(r.ratio_boundary) for r in records] == [
            Fraction(3, 2),
            Fraction(5, 2),
            Fraction(7, 2),
        ]
        assert all(abs(r.ratio_box) == 1 for r in records)
        growth = abs(records[2].ratio_boundary) / abs(records[0].ratio_boundary)
        assert growth >= 2

    def test_box_sizes_recorded(self):
        records = uf_chain_scan(self.scan_map(), 2, [2, 4], r=1)
        assert [(r.h, r.box_size, r.boundary_size) for r in records] == [
            (2, 12, 8),
            (4, 80, 32),
        ]

    def test_rejects_nonpositive_target(self):
        with pytest.raises(ValueError):
            uf_chain_scan(self.scan_map(), 0, [2])

    def test_workers_agree(self):
        r1 = uf_chain_scan(self.scan_map(), 3, [2, 4], r=1, workers=1)
        r4 = uf_chain_scan(self.scan_map(), 3, [2, 4], r=1, workers=4)
        assert r1 == r4


# ---------------------------------------------------------------------------
# tile map onto the index-k lattice

class TestUmap:
    def tiling(self, d, q, k, spans=3):
        p = graph_params(d, q)
        side = spans * k
        region = height_cube([(0, side - 1)] * (d - 1))
        return p, make_tiling(p, region, k)

    def test_region_must_align(self):
        p = graph_params(2, 2)
        with pytest.raises(ValueError):
            make_tiling(p, height_cube([(0, 4)]), 2)
        with pytest.raises(ValueError):
            make_tiling(p, height_cube([(1, 6)]), 2)

    def test_tile_side_must_equal_k(self):
        p, tiling = self.tiling(2, 2, 2)
        x = next(iter(box_members(p, tiling.ambient)))
        with pytest.raises(ValueError):
            umap(tiling, 3, x)

    @pytest.mark.parametrize("k", [2, 3])
    def test_exactly_k_to_one_d2(self, k):
        p, tiling = self.tiling(2, 2, k)
        table = umap_eval(tiling, k)
        hits = Counter(dl_key(y) for y in table.values())
        assert set(hits.values()) == {k}
        expected = {
            dl_key(x)
            for x in box_members(p, tiling.ambient)
            if rho(x)[0] % k == 0
        }
        assert set(hits) == expected

    def test_exactly_k_to_one_d3(self):
        p, tiling = self.tiling(3, 2, 2, spans=2)
        table = umap_eval(tiling, 2)
        hits = Counter(dl_key(y) for y in table.values())
        assert set(hits.values()) == {2}

    def test_identity_on_sublattice(self):
        p, tiling = self.tiling(2, 2, 2)
        table = umap_eval(tiling, 2)
        for x, y in table.items():
            if rho(x)[0] % 2 == 0:
                assert dl_key(y) == dl_key(x)

    def test_images_live_in_index_k_lattice(self):
        p, tiling = self.tiling(2, 2, 3)
        for y in umap_eval(tiling, 3).values():
            assert y.params.k == 3
            assert rho(y)[0] % 3 == 0

    def test_displacement_regression_values(self):
        # frozen from the first audited runs; displacement is uniformly
        # bounded and must never grow under refactoring
        p2, t2 = self.tiling(2, 2, 2)
        assert umap_displacement(t2, 2) == 1
        p3, t3 = self.tiling(2, 2, 3)
        assert umap_displacement(t3, 3) == 3
        pd3, td3 = self.tiling(3, 2, 2, spans=2)
        assert umap_displacement(td3, 2) == 3


# ---------------------------------------------------------------------------
# distortion reports

class TestDistortion:
    def test_identity_reports_no_distortion(self):
        p = graph_params(2, 2)
        im = interior_map(p, (identity_map(2), identity_map(2)))
        box = canonical_box(p, height_cube([(0, 4)]))
        table = psi_eval(im, sorted(box_members(p, box), key=dl_key))
        report = distortion(table, n_pairs=40, seed=3)
        assert report.k_est == 1
        assert report.c_est == 0
        assert report.max_displacement == 0

    def test_seeded_runs_reproduce(self):
        p = graph_params(2, 2)
        im = interior_map(p, (shift_map(2, 1), identity_map(2)))
        box = canonical_box(p, height_cube([(0, 3)]))
        table = psi_eval(im, sorted(box_members(p, box), key=dl_key))
        a = distortion(table, n_pairs=25, seed=9)
        b = distortion(table, n_pairs=25, seed=9)
        assert a == b
        assert a.k_est >= 1

    def test_umap_table_distorts_boundedly(self):
        p = graph_params(2, 2)
        tiling = make_tiling(p, height_cube([(0, 5)]), 2)
        table = umap_eval(tiling, 2)
        report = distortion(table, n_pairs=40, seed=11)
        assert report.k_est == Fraction(5, 2)
        assert report.c_est == 0
        # domain and image live in different lattices, so no displacement
        assert report.max_displacement is None

    def test_opposite_shifts_distortion_reported(self):
        p = graph_params(2, 2)
        im = interior_map(p, (shift_map(2, 1), shift_map(2, -1)))
        box = canonical_box(p, height_cube([(0, 4)]))
        table = psi_eval(im, sorted(box_members(p, box), key=dl_key))
        report = distortion(table, n_pairs=40, seed=0)
        assert report.k_est == 3
        assert report.c_est == 0
        assert report.max_displacement == 10

    def test_needs_two_entries(self):
        p = graph_params(2, 2)
        x = dl_vertex(p, (tree_vertex(0), tree_vertex(0)))
        with pytest.raises(ValueError):
            distortion({x: x})
