import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hypgraph.errors import DomainError
from hypgraph.geometry import ModelParams, circular_distance, connection_angle_approx
from hypgraph.graph import build_edges_bucketed
from hypgraph.sampler import VertexSample, derive_seed, sample_vertices
from hypgraph.zones import (SeparationZone, assert_separation, brute_force_gaps, build_zone_catalog,
                            catalog_zone_members, decompose_layers, find_zone_right_of, layer_levels, layer_mass,
                            minimal_c, zone_is_empty, zone_mass, zone_mass_bound, zone_members)

P5 = ModelParams(1.5, 1.0, 1e5)


def _graph(t, theta, params=P5):
    s = VertexSample.from_arrays(np.asarray(t, float), np.asarray(theta, float), params)
    return build_edges_bucketed(s)


def _mc_graph(k, n=1e5, tag="zones-test"):
    return build_edges_bucketed(sample_vertices(ModelParams(1.5, 1.0, n, derive_seed(0, tag, k))))


class TestLayers:
    def test_default_constants_degenerate(self):
        levels, t_max, base, _ = layer_levels(14.0, 1.5)
        assert base == 12.0
        assert levels.tolist() == pytest.approx([12 * math.log(14)])
        assert levels[0] == pytest.approx(31.67, abs=0.01) and t_max == pytest.approx(4.6667, abs=1e-4)

    def test_overridden_constants(self):
        levels, t_max, _, _ = layer_levels(14.0, 1.5, base_offset=1.0, spacing=1.0)
        assert len(levels) - 1 == 1
        assert levels == pytest.approx([math.log(14), 2 * math.log(14)])

    def test_alpha_must_exceed_one(self):
        with pytest.raises(DomainError):
            layer_levels(14.0, 1.0)

    def test_buckets(self):
        g = _graph([0.5, 3.0, 6.0, 9.0], [0.1, 0.2, 0.3, 0.4])
        L = decompose_layers(g, 1.0, 1.0)
        assert L.i_max == 2
        # t = 0.5 < t_0 = 3.14 -> layer 0; 3.0 -> 0; 6.0 -> 1; 9.0 -> 2; above t_2 -> excluded
        assert L.layer_of.tolist()[:4] == [0, 0, 1, 2]
        assert sum(len(b) for b in L.buckets) == g.n_vertices - L.n_above
        g2 = _graph([P5.R - 0.01], [0.0])
        L2 = decompose_layers(g2, 1.0, 1.0)
        assert L2.layer_of.tolist() == [-1] and L2.n_above == 1
        assert not L.degenerate
        assert decompose_layers(g).degenerate


class TestLayerMass:
    def test_leading_order_close_to_exact(self):
        for lo, hi in [(0.0, 1.0), (1.0, 3.0), (3.0, 6.0)]:
            assert layer_mass(lo, hi, P5, exact=False) == pytest.approx(layer_mass(lo, hi, P5), rel=1e-2)

    def test_monte_carlo(self):
        p = ModelParams(1.5, 1.0, 1e4)
        bands = [(0.0, 1.0), (1.0, 3.0), (3.0, 6.0)]
        counts = np.zeros((500, 3))
        for k in range(500):
            t = sample_vertices(p, seed=derive_seed(1, "layer-mass", k)).t
            counts[k] = [np.count_nonzero((t >= lo) & (t < hi)) for lo, hi in bands]
        for j, (lo, hi) in enumerate(bands):
            se = counts[:, j].std(ddof=1) / math.sqrt(500)
            assert abs(counts[:, j].mean() - layer_mass(lo, hi, p)) <= 3 * se


class TestZoneMembership:
    def test_empty_graph(self):
        z = SeparationZone(3.0, 1.0, P5.R)
        assert zone_is_empty(z, _graph([], []))

    def test_center_point(self):
        z = SeparationZone(3.0, 1.0, P5.R)
        assert not zone_is_empty(z, _graph([3.0], [1.0]))
        assert zone_is_empty(z, _graph([3.0 + 1e-9], [1.0]))

    def test_height_limit(self):
        with pytest.raises(DomainError):
            zone_members(SeparationZone(P5.R / 2, 0.0, P5.R), _graph([], []))

    def test_against_brute_force(self):
        g = build_edges_bucketed(sample_vertices(ModelParams(1.5, 1.0, 1000.0, seed=2)))
        rng = np.random.default_rng(0)
        for _ in range(200):
            z = SeparationZone(float(rng.uniform(0, g.R / 2 - 1e-6)), float(rng.uniform(0, 2 * math.pi)), g.R)
            brute = np.flatnonzero(z.contains(g.t, g.theta))
            assert zone_members(z, g).tolist() == brute.tolist()

    def test_wrapping_zone(self):
        z = SeparationZone(6.0, 0.0, P5.R)
        w = z.half_width(6.0)
        g = _graph([6.0, 6.0], [2 * math.pi - w / 2, w / 2])
        assert zone_members(z, g).tolist() == [0, 1]


class TestFindZone:
    step = 2 * connection_angle_approx(4.0, 4.0, P5.R)

    def test_empty_graph(self):
        assert find_zone_right_of(4.0, 0.5, self.step, 10, _graph([], [])) == 0

    def test_exhausted(self):
        g = _graph([1.0] * 4, [0.5 + j * self.step for j in range(4)])
        assert find_zone_right_of(4.0, 0.5, self.step, 3, g) is None

    def test_first_free(self):
        g = _graph([1.0] * 3, [0.5, 0.5 + self.step, 0.5 + 3 * self.step])
        assert find_zone_right_of(4.0, 0.5, self.step, 10, g) == 2

    def test_full_turn_cap(self):
        # wide zones, and a ring of points at the top height closer together than the half-width
        R = P5.R
        t0 = R / 2 - 1.0
        w = connection_angle_approx(t0, t0, R)
        g = _graph([t0] * 12, np.linspace(0, 2 * math.pi, 12, endpoint=False))
        assert 2 * math.pi / 12 < w
        assert find_zone_right_of(t0, 0.0, 2 * w, math.inf, g) is None


class TestCatalog:
    def test_empty_graph_anchors(self):
        g = _graph([], [])
        L = decompose_layers(g, 1.0, 1.0)
        cat = build_zone_catalog(g, L, c=10.0)
        lz = cat.layers[0]
        assert all(j == 0 for j in lz.j)
        th = lz.theta_ii
        anchors = 3 * 10.0 * g.R * th * np.arange(lz.k_max)
        assert np.allclose(lz.centers, anchors)
        # interior gaps are 3cR theta - 2 theta, the last closes the circle
        assert np.allclose(lz.gaps[:-1], 3 * 10.0 * g.R * th - 2 * th)
        assert lz.gaps[-1] == pytest.approx(2 * math.pi - anchors[-1] - 2 * th)
        lo, hi = 10.0 * g.R * th, 50.0 * g.R * th
        expected = all(lo <= x <= hi for x in lz.gaps) and all(l.found for l in cat.layers)
        assert cat.E_R == expected

    def test_default_constants_not_evaluable(self):
        g = _mc_graph(0, n=2e4)
        cat = build_zone_catalog(g, decompose_layers(g))
        assert cat.degenerate and not cat.E_R
        assert "zones undefined" in cat.diagnostics[0]["reason"]

    def test_json_schema(self, tmp_path):
        g = _mc_graph(1)
        cat = build_zone_catalog(g, decompose_layers(g, 1.0, 1.0))
        d = json.loads(json.dumps(cat.to_dict()))
        assert {"E_R", "c", "constants", "degenerate", "layers"} <= set(d)
        z = d["layers"][0]["zones"][0]
        assert {"k", "j", "theta_center", "gap_to_next"} <= set(z)

    @pytest.mark.parametrize("k", range(6))
    def test_invariants(self, k):
        g = _mc_graph(k)
        L = decompose_layers(g, 1.0, 1.0)
        cat = build_zone_catalog(g, L)
        assert catalog_zone_members(g, cat) == []
        for lz in cat.layers:
            for kk, j in enumerate(lz.j):
                if j is not None:
                    z = lz.zone(kk, g.R)
                    assert not np.any(z.contains(g.t, g.theta))
        if cat.E_R:
            for row in brute_force_gaps(cat):
                assert row["ok"]
                assert row["gap"] == pytest.approx(row["catalog_gap"], abs=1e-9)
            sep = assert_separation(g, cat, L)
            assert sep["passed"] and not sep["unlocated"]

    @pytest.mark.parametrize("k", range(3))
    def test_regions_tile_circle(self, k):
        g = _mc_graph(k)
        cat = build_zone_catalog(g, decompose_layers(g, 1.0, 1.0))
        theta = np.linspace(0, 2 * math.pi, 20001, endpoint=False)
        for lz in cat.layers:
            if not lz.found:
                continue
            for t in np.linspace(0, lz.t_i, 5):
                tt = np.full_like(theta, t)
                reg = lz.region_of(tt, theta)
                w = connection_angle_approx(t, t, g.R)
                d = np.min([circular_distance(theta, c) for c in np.mod(lz.centers, 2 * math.pi)], axis=0)
                assert np.all((reg >= 0) | (d <= w + 1e-9))
                # region indices follow the zones anticlockwise
                assert set(np.unique(reg[reg >= 0]).tolist()) <= set(range(lz.k_max))


class TestSeparation:
    def test_empty_graph(self):
        g = _graph([], [])
        L = decompose_layers(g, 1.0, 1.0)
        assert assert_separation(g, build_zone_catalog(g, L), L)["passed"]

    def test_straddling_pair(self):
        t, th0 = 4.0, 1.0
        w = connection_angle_approx(t, t, P5.R)
        g = _graph([t, t], [th0 - 1.01 * w, th0 + 1.01 * w])
        assert zone_is_empty(SeparationZone(t, th0, P5.R), g)
        assert g.n_edges == 0

    @pytest.mark.slow
    def test_monte_carlo(self):
        for k in range(20):
            g = _mc_graph(k, tag="separation-mc")
            L = decompose_layers(g, 1.0, 1.0)
            cat = build_zone_catalog(g, L)
            if cat.E_R:
                assert assert_separation(g, cat, L)["passed"]


@settings(max_examples=300, deadline=None)
@given(st.floats(0.5, 11.0), st.floats(0, 1), st.floats(0, 1), st.floats(1.0 + 1e-6, 4.0), st.floats(1.0 + 1e-6, 4.0))
def test_points_across_empty_zone_do_not_connect(t0, f1, f2, s1, s2):
    # both points below t0, outside the zone by factors s1, s2 of their own half-widths, on opposite sides
    R = P5.R
    t1, t2 = f1 * t0, f2 * t0
    a = s1 * connection_angle_approx(t1, t1, R)
    b = s2 * connection_angle_approx(t2, t2, R)
    if a + b >= math.pi:
        return
    assert a + b > connection_angle_approx(t1, t2, R)


def test_zone_mass_and_c():
    assert zone_mass(9.4, P5) < zone_mass_bound(1.5, 1.0)
    assert 0 < zone_mass(1.0, P5) < zone_mass(6.0, P5)
    c1, c2 = minimal_c(P5, 6.0, K=1), minimal_c(P5, 6.0, K=2)
    assert 0 < c1 < c2
    assert minimal_c(P5, 6.0, use_bound=True) > c1
