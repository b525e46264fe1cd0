import csv
import io
import math
from pathlib import Path

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from confmac.ginfo import ChannelParams, PentagonBounds
from confmac.regions import (
    CSV_HEADER,
    PowerSplit,
    RatePair,
    RegionKind,
    ach_bounds,
    build_region,
    cg_bounds,
    contains,
    cooperation_region,
    direction_grid,
    hausdorff,
    pentagon_region,
    sweep_params,
    verify_regions_equal,
    write_csv,
)

from reference import cg_bounds_mp, lattice_membership

DATA = Path(__file__).parent / "data"
CONF = ChannelParams(1.0, 1.0, 1.0, 0.1, 0.1)


@pytest.fixture(scope="module")
def cg_conf():
    return build_region(RegionKind.CG, CONF, 201, 181)


class TestTypes:
    @pytest.mark.parametrize("b", [(-0.1, 0.5), (0.5, 1.1)])
    def test_split_range(self, b):
        with pytest.raises(ValueError):
            PowerSplit(*b)

    @pytest.mark.parametrize("r", [(-1.0, 0.0), (math.nan, 0.0), (0.0, math.inf)])
    def test_rate_pair(self, r):
        with pytest.raises(ValueError):
            RatePair(*r)


class TestBounds:
    def test_classical_pentagon(self):
        b = cg_bounds(ChannelParams(), PowerSplit(1.0, 1.0))
        assert b.as_array() == pytest.approx([0.3465736, 0.3465736, 0.5493061, 0.5493061], abs=1e-7)

    def test_full_cooperation(self):
        b = cg_bounds(ChannelParams(1, 1, 1, 10, 10), PowerSplit(0.0, 0.0))
        assert b.as_array() == pytest.approx([10.0, 10.0, 20.0, 0.5 * math.log(5)])

    def test_conferencing_split_against_high_precision(self):
        b = cg_bounds(CONF, PowerSplit(0.5, 0.5)).as_array()
        want = cg_bounds_mp(1, 1, 1, 0.1, 0.1, 0.5, 0.5)
        assert b == pytest.approx(want, abs=1e-14)
        assert b == pytest.approx([0.3027326, 0.3027326, 0.5465736, 0.6931472], abs=1e-7)

    def test_ach_shared_entries(self):
        a = ach_bounds(CONF, PowerSplit(0.3, 0.7))
        c = cg_bounds(CONF, PowerSplit(0.3, 0.7))
        assert (a.a1, a.a2, a.a12_cond, a.a12) == (c.b1, c.b2, c.b12_cond, c.b12)

    def test_ach_sd_examples(self):
        assert ach_bounds(CONF, PowerSplit(0.5, 0.5)).a1_sd == pytest.approx(0.5493061, abs=1e-7)
        a = ach_bounds(ChannelParams(), PowerSplit(0.0, 0.0))
        assert a.a1_sd == pytest.approx(0.5 * math.log(5), abs=1e-12)
        a = ach_bounds(CONF, PowerSplit(1.0, 1.0))
        assert a.a1_sd == pytest.approx(a.a1 - CONF.c12, abs=1e-15)

    @given(st.floats(0, 1), st.floats(0, 1), st.floats(0.1, 4), st.floats(0.1, 4),
           st.floats(0.1, 2), st.floats(0, 1), st.floats(0, 1))
    def test_ach_sd_is_private_plus_common(self, b1, b2, p1, p2, s2, c12, c21):
        p = ChannelParams(p1, p2, s2, c12, c21)
        a = ach_bounds(p, PowerSplit(b1, b2))
        p0 = (math.sqrt((1 - b1) * p1) + math.sqrt((1 - b2) * p2)) ** 2
        common = 0.5 * math.log1p(p0 / (b1 * p1 + b2 * p2 + s2))
        assert a.a1_sd == pytest.approx(a.a1 - c12 + common, abs=1e-12)
        assert a.a2_sd == pytest.approx(a.a2 - c21 + common, abs=1e-12)


class TestDirections:
    @pytest.mark.parametrize("n", [2, 3, 4, 10, 181])
    def test_contains_key_directions(self, n):
        lam = direction_grid(n)
        for v in (0.0, 0.5, 1.0):
            assert v in lam
        assert np.all(np.diff(lam) > 0)

    def test_too_few(self):
        with pytest.raises(ValueError):
            direction_grid(1)


class TestBuild:
    def test_classical_sum_rate(self):
        r = build_region(RegionKind.CG, ChannelParams(), 201, 181)
        assert r.max_sum_rate == pytest.approx(0.5 * math.log(3), abs=1e-6)

    def test_full_cooperation_sum_rate(self):
        r = build_region(RegionKind.CG, ChannelParams(1, 1, 1, 10, 10), 201, 181)
        assert r.max_sum_rate == pytest.approx(0.5 * math.log(5), abs=1e-4)

    def test_row_count(self, cg_conf):
        assert len(cg_conf.directions) == 181
        assert cg_conf.resolution == (201, 181)

    def test_boundary_convex_and_ccw(self, cg_conf):
        b = cg_conf.boundary
        assert np.allclose(b[0], [0.0, 0.0])
        e = np.diff(np.vstack([b, b[:1]]), axis=0)
        cross = e[:, 0] * np.roll(e[:, 1], -1) - e[:, 1] * np.roll(e[:, 0], -1)
        assert np.all(cross >= -1e-12)

    def test_support_concave(self, cg_conf):
        h = cg_conf.support_values
        lam = cg_conf.directions
        slopes = np.diff(h) / np.diff(lam)
        # support of a convex set is convex in the direction; h(lam) is convex
        assert np.all(np.diff(slopes) >= -1e-6)

    def test_points_attain_support(self, cg_conf):
        lam = cg_conf.directions
        v = lam * cg_conf.points[:, 0] + (1 - lam) * cg_conf.points[:, 1]
        assert np.allclose(v, cg_conf.support_values, atol=1e-12)

    def test_downward_closed(self, cg_conf):
        rng = np.random.default_rng(0)
        for x, y in cg_conf.points:
            a, b = rng.uniform(size=2)
            assert contains(cg_conf, (a * x, b * y))

    def test_deterministic(self):
        a = build_region("cg", CONF, 41, 21)
        b = build_region("cg", CONF, 41, 21)
        assert np.array_equal(a.support_values, b.support_values)
        assert np.array_equal(a.splits, b.splits)

    def test_refinement_beats_grid(self):
        coarse = build_region("cg", CONF, 11, 21, refine=False)
        fine = build_region("cg", CONF, 11, 21, refine=True)
        exact = build_region("cg", CONF, 801, 21)
        assert np.all(fine.support_values >= coarse.support_values)
        assert hausdorff(fine, exact) < hausdorff(coarse, exact)
        assert hausdorff(fine, exact) < 1e-4

    def test_pentagon_corners_inside(self, cg_conf):
        for b1 in np.linspace(0, 1, 11):
            for b2 in np.linspace(0, 1, 11):
                c = cg_bounds(CONF, PowerSplit(b1, b2))
                s = min(c.b12_cond, c.b12)
                for x, y in ((min(c.b1, s), max(0.0, min(c.b2, s - min(c.b1, s)))),
                             (max(0.0, min(c.b1, s - min(c.b2, s))), min(c.b2, s))):
                    assert contains(cg_conf, (x, y), tol=1e-9)

    def test_sandwich(self, cg_conf):
        classical = build_region("cg", ChannelParams(1, 1, 1, 0, 0), 201, 181)
        coop = cooperation_region(CONF, 181)
        assert np.all(classical.support_values <= cg_conf.support_values + 1e-12)
        assert np.all(cg_conf.support_values <= coop.support_values + 1e-12)

    def test_ach_never_exceeds_cg(self):
        for p in sweep_params()[::5]:
            cg = build_region("cg", p, 51, 31)
            ach = build_region("ach", p, 51, 31)
            assert np.all(ach.support_values <= cg.support_values + 1e-9)


class TestLatticeOracle:
    def test_boundary_points_in_union(self, cg_conf):
        inside = lattice_membership(CONF, cg_conf.points * (1 - 1e-3))
        assert inside.all()

    def test_outer_points_not_in_union(self, cg_conf):
        lam = cg_conf.directions
        out = cg_conf.points + 1e-3 * np.column_stack([lam, 1 - lam])
        assert not lattice_membership(CONF, out).any()

    def test_csv_regression_pin(self, cg_conf):
        pinned = list(csv.reader(open(DATA / "cg_p1_p1_s1_c0.1.csv")))
        got = list(csv.reader(io.StringIO(write_csv(cg_conf))))
        assert got[0] == pinned[0] == list(CSV_HEADER)
        a = np.array(got[1:], dtype=float)
        b = np.array(pinned[1:], dtype=float)
        assert a.shape == b.shape == (181, 6)
        # support and rate columns; the achieving split need not be unique
        assert np.allclose(a[:, :2], b[:, :2], rtol=1e-8, atol=1e-12)


class TestQueries:
    def test_origin(self, cg_conf):
        assert contains(cg_conf, RatePair(0.0, 0.0))

    def test_known_point(self, cg_conf):
        assert contains(cg_conf, RatePair(0.3, 0.2))

    def test_far_point(self, cg_conf):
        assert not contains(cg_conf, RatePair(10.0, 10.0))

    def test_hausdorff_identity(self, cg_conf):
        assert hausdorff(cg_conf, cg_conf) == 0.0

    def test_hausdorff_grid_mismatch(self, cg_conf):
        with pytest.raises(ValueError):
            hausdorff(cg_conf, build_region("cg", CONF, 21, 11))

    def test_hausdorff_continuity_in_noise(self):
        a = build_region("cg", ChannelParams(1, 1, 1.0), 201, 181)
        b = build_region("cg", ChannelParams(1, 1, 1.0001), 201, 181)
        assert hausdorff(a, b) < 1e-4

    def test_classical_equals_pentagon(self):
        r = build_region("cg", ChannelParams(), 201, 181)
        pent = pentagon_region(cg_bounds(ChannelParams(), PowerSplit(1, 1)), 181)
        assert hausdorff(r, pent) < 1e-3


class TestVerify:
    def test_conferencing_channel(self):
        rep = verify_regions_equal(CONF, 201, 181, 2e-3)
        assert rep.equal and rep.ach_excess <= 2e-3

    def test_no_conference(self):
        assert verify_regions_equal(ChannelParams(), 51, 31, 2e-3).equal

    def test_coarse_grid_detected_at_tiny_tol(self):
        rep = verify_regions_equal(CONF, 3, 5, 1e-9, refine=False)
        assert not rep.equal and rep.distance > 1e-9

    def test_sweep_has_36_channels(self):
        ps = sweep_params()
        assert len(ps) == 36 and len(set(ps)) == 36


class TestCsv:
    def test_bits(self, cg_conf):
        nats = np.array(list(csv.reader(io.StringIO(write_csv(cg_conf))))[1:], dtype=float)
        bits = np.array(list(csv.reader(io.StringIO(write_csv(cg_conf, units="bits"))))[1:],
                        dtype=float)
        assert np.allclose(bits[:, 1:4] * math.log(2), nats[:, 1:4], rtol=1e-8)
        assert np.array_equal(bits[:, [0, 4, 5]], nats[:, [0, 4, 5]])

    def test_bad_units(self, cg_conf):
        with pytest.raises(ValueError):
            write_csv(cg_conf, units="dB")


@settings(max_examples=25, deadline=None)
@given(st.sampled_from(["p1", "p2", "c12", "c21", "sigma2"]), st.floats(1.05, 3.0))
def test_monotone_in_parameters(name, factor):
    base = dict(p1=1.0, p2=1.0, sigma2=1.0, c12=0.1, c21=0.1)
    bigger = dict(base, **{name: base[name] * factor})
    a = build_region("cg", ChannelParams(**base), 41, 21).support_values
    b = build_region("cg", ChannelParams(**bigger), 41, 21).support_values
    if name == "sigma2":
        assert np.all(b <= a + 1e-9)
    else:
        assert np.all(b >= a - 1e-9)


def test_pentagon_region_matches_bounds():
    b = PentagonBounds(0.3, 0.4, 0.5, 0.6)
    r = pentagon_region(b, 5)
    assert r.support_values[0] == pytest.approx(0.4)
    assert r.support_values[-1] == pytest.approx(0.3)
    assert r.max_sum_rate == pytest.approx(0.5)
