import json
import math

import numpy as np
import pytest

from hypgraph.components import bfs_reachable, connected_components
from hypgraph.covering import (CoverBuilder, build_C_v, build_cover, check_concentration, check_containment,
                               max_t_roots, theta_neighborhood, write_reports_jsonl)
from hypgraph.errors import ContractError
from hypgraph.geometry import ModelParams
from hypgraph.graph import build_edges_bucketed
from hypgraph.sampler import VertexSample, derive_seed, sample_vertices
from hypgraph.zones import build_zone_catalog, decompose_layers

P5 = ModelParams(1.5, 1.0, 1e5)


def _graph(t, theta, params=P5):
    return build_edges_bucketed(VertexSample.from_arrays(np.asarray(t, float), np.asarray(theta, float), params))


def _mc(k, n=1e5, tag="cover-test"):
    g = build_edges_bucketed(sample_vertices(ModelParams(1.5, 1.0, n, derive_seed(0, tag, k))))
    L = decompose_layers(g, 1.0, 1.0)
    return g, L, build_zone_catalog(g, L)


def _mc_event(m):
    """The m-th instance of the seed stream on which the zone event holds."""
    k = found = 0
    while True:
        g, L, cat = _mc(k)
        if cat.E_R:
            if found == m:
                return g, L, cat
            found += 1
        k += 1


def _brute_neighborhood(g, L, v, i, j):
    h = 2 * L.theta(i, j)
    out = []
    for u in range(g.n_vertices):
        if L.layer_of[u] != j:
            continue
        d = (g.theta[u] - g.theta[v] + math.pi) % (2 * math.pi) - math.pi
        if h >= math.pi or -h <= d < h:
            out.append(u)
    return out


class TestThetaNeighborhood:
    def test_layer_order_contract(self):
        g = _graph([1.0, 4.0], [0.0, 1.0])
        L = decompose_layers(g, 1.0, 1.0)
        with pytest.raises(ContractError):
            theta_neighborhood(1, 1, 1, g, L)
        with pytest.raises(ContractError):
            theta_neighborhood(1, 0, 1, g, L)

    def test_empty_layer(self):
        g = _graph([4.0], [1.0])
        L = decompose_layers(g, 1.0, 1.0)
        assert len(theta_neighborhood(0, 1, 0, g, L)) == 0

    def test_half_open_boundary(self):
        # with theta_v = h both sector ends are exact in floating point
        L0 = decompose_layers(_graph([], []), 1.0, 1.0)
        h = 2 * L0.theta(1, 0)
        g = _graph([1.0, 4.0, 1.0], [0.0, h, 2 * h])
        L = decompose_layers(g, 1.0, 1.0)
        v = int(np.flatnonzero(g.t == 4.0)[0])
        got = theta_neighborhood(v, 1, 0, g, L).tolist()
        assert got == [int(np.flatnonzero(g.theta == 0.0)[0])]

    def test_against_brute_force(self):
        g, L, _ = _mc(0, n=5000)
        b = CoverBuilder(g, L)
        for i in range(1, L.i_max + 1):
            for v in L.buckets[i][:40].tolist():
                for j in range(i):
                    assert sorted(b.theta_neighborhood(v, i, j).tolist()) == _brute_neighborhood(g, L, v, i, j)


class TestCv:
    def test_base_case(self):
        g = _graph([1.0, 4.0], [0.0, 3.0])
        L = decompose_layers(g, 1.0, 1.0)
        v0 = int(np.flatnonzero(g.t == 1.0)[0])
        v1 = int(np.flatnonzero(g.t == 4.0)[0])
        assert build_C_v(v0, g, L) == {v0}
        # the layer-0 vertex is far outside v1's sector
        assert build_C_v(v1, g, L) == {v1}

    def test_above_top_layer(self):
        g = _graph([P5.R - 0.1], [0.0])
        with pytest.raises(ContractError):
            build_C_v(0, g, decompose_layers(g, 1.0, 1.0))

    def test_against_direct_recursion(self):
        g, L, _ = _mc(1, n=5000)

        def direct(v):
            i = int(L.layer_of[v])
            out = {v}
            for j in range(i):
                for u in _brute_neighborhood(g, L, v, i, j):
                    out |= direct(u)
            return out

        b = CoverBuilder(g, L)
        deep = [v for i in range(1, L.i_max + 1) for v in L.buckets[i][:10].tolist()]
        assert deep
        for v in deep:
            assert b.C(v) == direct(v)


class TestCover:
    def test_isolated_vertex(self):
        g = _graph([1.0], [1.0])
        L = decompose_layers(g, 1.0, 1.0)
        cat = build_zone_catalog(g, L)
        assert cat.E_R
        rep = build_cover(0, g, L, cat)
        assert rep.size_cover >= 1 and rep.size_conn == 1 and rep.containment and rep.is_max_t_root

    def test_requires_event(self):
        g = _graph([1.0], [1.0])
        L = decompose_layers(g)
        cat = build_zone_catalog(g, L)
        assert not cat.E_R
        with pytest.raises(ContractError):
            build_cover(0, g, L, cat)
        with pytest.raises(ContractError):
            check_containment(g, L, cat)

    @pytest.mark.parametrize("k", range(5))
    def test_containment_and_report_invariants(self, k, tmp_path):
        g, L, cat = _mc_event(k)
        reports, summary = check_containment(g, L, cat)
        assert summary["containment_fail"] == 0 and not summary["failures"]
        assert summary["upper_chain_holds"]
        comps = connected_components(g)
        assert len(reports) + summary["roots_above_top_layer"] == comps.count
        for r in reports:
            assert r.size_conn >= 1 and r.size_cover >= r.size_C_v >= 1
        # spot-check against the one-vertex path, which runs BFS itself
        b = CoverBuilder(g, L, cat)
        for r in reports[:: max(1, len(reports) // 25)]:
            one = build_cover(r.root, g, L, cat, b)
            assert (one.size_cover, one.size_conn, one.containment) == (r.size_cover, r.size_conn, r.containment)
            assert one.is_max_t_root
            assert b.C(r.root) <= set(np.flatnonzero(b.cover_mask(r.layer, r.region)).tolist())
        write_reports_jsonl(reports, tmp_path / "r.jsonl")
        lines = (tmp_path / "r.jsonl").read_text().splitlines()
        assert len(lines) == len(reports) and json.loads(lines[0])["root"] == reports[0].root

    def test_max_t_roots(self):
        g, _, _ = _mc(2, n=3000)
        comps = connected_components(g)
        roots = max_t_roots(g, comps)
        for label in range(0, comps.count, 50):
            m = comps.members(label)
            assert roots[label] == m[np.argmax(g.t[m])]
            assert set(bfs_reachable(g, int(roots[label])).tolist()) == set(m.tolist())

    def test_size_bound_distribution_reported(self):
        # the cardinality bound is reported, not asserted; see the README
        g, L, cat = _mc_event(0)
        _, s = check_containment(g, L, cat)
        assert len(s["bound_ratio_quantiles"]) == 3 and s["bound_ratio_max"] > 0


class TestConcentration:
    def test_empty_graph(self):
        g = _graph([], [])
        res = check_concentration(g, decompose_layers(g, 1.0, 1.0))
        assert res["passed"] and res["max_ratio"] == 0.0

    def test_relabeling_invariant(self):
        s = sample_vertices(ModelParams(1.5, 1.0, 2e4, seed=4))
        perm = np.random.default_rng(0).permutation(len(s))
        s2 = VertexSample.from_arrays(s.t[perm], s.theta[perm], s.params)
        r1 = check_concentration(build_edges_bucketed(s), decompose_layers(s, 1.0, 1.0))
        r2 = check_concentration(build_edges_bucketed(s2), decompose_layers(s2, 1.0, 1.0))
        assert r1["max_ratio"] == r2["max_ratio"]

    @pytest.mark.slow
    def test_monte_carlo_pass_rate(self):
        passed = 0
        for k in range(100):
            g = build_edges_bucketed(sample_vertices(ModelParams(1.5, 1.0, 1e5, derive_seed(0, "concentration", k))))
            passed += check_concentration(g, decompose_layers(g, 1.0, 1.0))["passed"]
        assert passed >= 90
