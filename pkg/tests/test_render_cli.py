import json
import math
import re

import numpy as np
import pytest

from hypgraph.cli import main
from hypgraph.errors import ResourceError
from hypgraph.geometry import ModelParams
from hypgraph.graph import build_edges_bucketed
from hypgraph.render import render_svg
from hypgraph.sampler import VertexSample, sample_vertices

P = ModelParams(1.1, 1.0, 1000.0)


def _graph(t, theta):
    return build_edges_bucketed(VertexSample.from_arrays(np.asarray(t, float), np.asarray(theta, float), P))


class TestRender:
    def test_empty(self):
        svg = render_svg(_graph([], []))
        assert svg.count("<circle") == 2 and "stroke-dasharray" in svg and "<line" not in svg

    def test_one_edge(self):
        svg = render_svg(_graph([P.R / 2, P.R / 2], [0.0, 2.0]))
        assert svg.count("<line") == 1

    def test_geometry(self):
        # a vertex at t = R/2 lies on the dashed circle
        svg = render_svg(_graph([P.R / 2], [0.0]))
        circles = re.findall(r'<circle cx="([\d.]+)" cy="([\d.]+)" r="([\d.]+)"', svg)
        cx, cy, r_half = map(float, circles[1])
        px, py, _ = map(float, circles[2])
        assert math.hypot(px - cx, py - cy) == pytest.approx(r_half, abs=2e-3)

    def test_largest_component_highlighted(self):
        g = build_edges_bucketed(sample_vertices(ModelParams(1.1, 1.0, 1000.0, seed=1)))
        svg = render_svg(g)
        assert svg.count("<line") == g.n_edges
        assert "#c0392b" in svg

    def test_cap(self):
        s = VertexSample.from_arrays(np.zeros(50_001), np.linspace(0, 6, 50_001), P)
        from hypgraph.graph import GeometricGraph
        with pytest.raises(ResourceError):
            render_svg(GeometricGraph(s, np.empty((0, 2))))


class TestCli:
    def test_generate_components_render(self, tmp_path, capsys):
        v, e = tmp_path / "v.csv", tmp_path / "e.csv"
        assert main(["generate", "--alpha", "1.1", "--n", "1000", "--seed", "3",
                     "--out-vertices", str(v), "--out-edges", str(e)]) == 0
        first = json.loads(capsys.readouterr().out)
        summary = tmp_path / "s.json"
        assert main(["components", "--in-vertices", str(v), "--in-edges", str(e), "--summary", str(summary)]) == 0
        d = json.loads(summary.read_text())
        assert d["n_edges"] == first["n_edges"] and d["size_L1"] >= d["size_L2"]
        fig = tmp_path / "fig.svg"
        assert main(["render", "--in-vertices", str(v), "--in-edges", str(e), "--out", str(fig)]) == 0
        assert fig.read_text().startswith("<svg")

    def test_generate_is_deterministic(self, tmp_path):
        outs = []
        for k in range(2):
            v, e = tmp_path / f"v{k}.csv", tmp_path / f"e{k}.csv"
            main(["generate", "--alpha", "1.5", "--n", "2000", "--seed", "9", "--out-vertices", str(v),
                  "--out-edges", str(e)])
            outs.append((v.read_bytes(), e.read_bytes()))
        assert outs[0] == outs[1]

    def test_zones_and_cover(self, tmp_path):
        cat = tmp_path / "c.json"
        args = ["--alpha", "1.5", "--n", "1e5", "--seed", "1", "--layer-base", "1", "--layer-spacing", "1"]
        assert main(["zones", *args, "--out", str(cat)]) == 0
        d = json.loads(cat.read_text())
        assert {"E_R", "c", "constants", "degenerate", "layers"} <= set(d)
        rep = tmp_path / "r.jsonl"
        rc = main(["cover", *args, "--out", str(rep)])
        if d["E_R"]:
            assert rc == 0 and rep.exists()
        else:
            assert rc == 2

    def test_critical_alpha_refused(self, tmp_path, capsys):
        with pytest.warns(UserWarning):
            rc = main(["zones", "--alpha", "1.0", "--n", "1000", "--out", str(tmp_path / "c.json")])
        assert rc == 2 and "alpha" in capsys.readouterr().err

    def test_scaling(self, tmp_path):
        out = tmp_path / "s.csv"
        assert main(["scaling", "--alphas", "1.5", "--n-grid", "500:4000:x2", "--seeds", "2", "--min-seeds", "1",
                     "--out", str(out)]) == 0
        assert len(out.read_text().splitlines()) == 1 + 4 * 2

    def test_scaling_needs_seeds(self, tmp_path):
        assert main(["scaling", "--alphas", "1.5", "--n-grid", "500:4000:x2", "--seeds", "2",
                     "--out", str(tmp_path / "s.csv")]) == 2

    def test_missing_params(self, tmp_path):
        v, e = tmp_path / "v.csv", tmp_path / "e.csv"
        v.write_text("id,t,theta\n")
        e.write_text("u,v\n")
        assert main(["render", "--in-vertices", str(v), "--in-edges", str(e)]) == 2
        assert main(["render", "--in-vertices", str(v), "--in-edges", str(e), "--alpha", "1.5", "--n", "100",
                     "--out", str(tmp_path / "f.svg")]) == 0
