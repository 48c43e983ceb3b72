"""Oracle and invariant suite behind the ``verify`` subcommand.

Every check draws its randomness from substreams of one master seed and
returns plain JSON data, so the report is byte-identical across reruns and
worker counts. Wall-clock times are deliberately left out of the report.
"""
from __future__ import annotations

import json
import math
from concurrent.futures import ProcessPoolExecutor

import numpy as np

from .components import bfs_components, connected_components
from .covering import check_concentration, check_containment
from .geometry import ModelParams, ball_measure, connection_angle_approx, connection_angle_exact, distance_from_radii, radial_cdf
from .graph import build_edges_bucketed, build_edges_naive
from .sampler import derive_seed, make_rng, sample_vertices
from .zones import assert_separation, brute_force_gaps, build_zone_catalog, catalog_zone_members, decompose_layers


def _p(alpha, nu, n, seed, tag, k):
    return ModelParams(alpha, nu, n, derive_seed(seed, tag, k))


def check_edge_oracle(seed: int, instances: int = 16) -> dict:
    """Bucketed edge set equals the all-pairs oracle."""
    rng = make_rng(seed, "verify/edge-grid")
    mismatches, sizes = [], []
    for k in range(instances):
        alpha = float(rng.choice([1.1, 1.5, 2.0, 3.0]))
        n = float(rng.choice([100, 1000, 3000]))
        s = sample_vertices(_p(alpha, 1.0, n, seed, "verify/edge", k))
        a, b = build_edges_naive(s).edges, build_edges_bucketed(s).edges
        sizes.append(len(a))
        if a.shape != b.shape or not np.array_equal(a, b):
            mismatches.append({"instance": k, "alpha": alpha, "n": n})
    return {"passed": not mismatches, "instances": instances, "total_edges": int(sum(sizes)),
            "mismatches": mismatches}


def check_components_oracle(seed: int, instances: int = 4) -> dict:
    """Union-find labeling equals plain BFS."""
    bad = []
    for k in range(instances):
        alpha = (1.1, 1.5, 2.0, 3.0)[k % 4]
        g = build_edges_bucketed(sample_vertices(_p(alpha, 1.0, 5000.0, seed, "verify/uf", k)))
        a, b = connected_components(g), bfs_components(g.n_vertices, g.edges)
        if not (np.array_equal(a.labels, b.labels) and np.array_equal(a.sizes, b.sizes)):
            bad.append(k)
    return {"passed": not bad, "instances": instances, "mismatches": bad}


def check_radial_law(seed: int, n: float = 1e5) -> dict:
    """Kolmogorov-Smirnov distance of sampled radii from the closed-form CDF."""
    from scipy.stats import kstest

    p = _p(1.5, 1.0, n, seed, "verify/ks", 0)
    s = sample_vertices(p)
    ks = float(kstest(p.R - s.t, lambda r: radial_cdf(r, p)).statistic)
    return {"passed": ks <= 0.01, "ks": ks, "points": len(s)}


def check_ball_fractions(seed: int, replicates: int = 100, n: float = 1e4, alpha: float = 1.1) -> dict:
    """Pooled fraction of points within rho of the origin, against the exact measure."""
    R = ModelParams(alpha, 1.0, n).R
    rhos = [R / 4, R / 2, 3 * R / 4]
    hits = np.zeros(3)
    total = 0
    for k in range(replicates):
        p = _p(alpha, 1.0, n, seed, "verify/ball", k)
        r = p.R - sample_vertices(p).t
        total += len(r)
        hits += [np.count_nonzero(r <= rho) for rho in rhos]
    rows = []
    for rho, h in zip(rhos, hits):
        q = float(ball_measure(rho, ModelParams(alpha, 1.0, n)))
        se = math.sqrt(q * (1 - q) / total)
        rows.append({"rho": rho, "fraction": h / total, "exact": q, "z": (h / total - q) / se if se else 0.0})
    return {"passed": all(abs(r["z"]) <= 3 for r in rows), "points": total, "rows": rows}


def check_angle_approx(seed: int, configs: int = 1000) -> dict:
    """Relative error of 2 e^{-(R - t1 - t2)/2} against the exact angle when R - t1 - t2 >= 10."""
    rng = make_rng(seed, "verify/angle")
    R = rng.uniform(12.0, 60.0, configs)
    room = R - 10.0
    t1 = rng.uniform(0, 1, configs) * room
    t2 = rng.uniform(0, 1, configs) * (room - t1)
    exact = connection_angle_exact(R - t1, R - t2, R)
    approx = connection_angle_approx(t1, t2, R)
    rel = np.abs(approx - exact) / exact
    bound = 8 * np.exp(-(R - t1 - t2) / 2)
    worst = float(np.max(rel / bound))
    return {"passed": worst <= 1.0, "configs": configs, "max_error_over_bound": worst}


def check_distance(seed: int, configs: int = 2000) -> dict:
    """Stable distance formula against direct arccosh, plus symmetry and the triangle inequality."""
    rng = make_rng(seed, "verify/distance")
    r1, r2, r3 = rng.uniform(0.5, 12.0, (3, configs))
    a1, a2, a3 = rng.uniform(0, 2 * math.pi, (3, configs))
    d12 = distance_from_radii(r1, r2, a1 - a2)
    direct = np.arccosh(np.maximum(
        np.cosh(r1) * np.cosh(r2) - np.sinh(r1) * np.sinh(r2) * np.cos(a1 - a2), 1.0))
    ok_direct = direct > 1e-3
    rel = float(np.max(np.abs(d12 - direct)[ok_direct] / direct[ok_direct]))
    d21 = distance_from_radii(r2, r1, a2 - a1)
    d13 = distance_from_radii(r1, r3, a1 - a3)
    d23 = distance_from_radii(r2, r3, a2 - a3)
    tri = float(np.max(d13 - (d12 + d23)))
    sym = float(np.max(np.abs(d12 - d21)))
    return {"passed": rel <= 1e-9 and tri <= 1e-9 and sym <= 1e-12,
            "max_rel_vs_direct": rel, "triangle_excess": tri, "asymmetry": sym}


def check_zones(seed: int, instances: int = 4, n: float = 2e4) -> dict:
    """Zone emptiness, gap bracket by brute force, separation and containment on one layer grid."""
    out = []
    for k in range(instances):
        g = build_edges_bucketed(sample_vertices(_p(1.5, 1.0, n, seed, "verify/zones", k)))
        layers = decompose_layers(g, base_offset=1.0, spacing=1.0)
        cat = build_zone_catalog(g, layers, c=10.0)
        row = {"instance": k, "E_R": cat.E_R, "occupied_zones": len(catalog_zone_members(g, cat))}
        if cat.E_R:
            gaps = brute_force_gaps(cat)
            row["gaps_ok"] = all(x["ok"] for x in gaps)
            row["gap_max_disagreement"] = max((abs(x["gap"] - x["catalog_gap"]) for x in gaps), default=0.0)
            sep = assert_separation(g, cat, layers)
            row["separation_ok"] = sep["passed"]
            _, summ = check_containment(g, layers, cat)
            row["containment_fail"] = summ["containment_fail"]
            row["unlocatable"] = summ["unlocatable"]
            row["ok"] = (row["gaps_ok"] and row["separation_ok"] and row["containment_fail"] == 0
                         and row["occupied_zones"] == 0 and row["gap_max_disagreement"] <= 1e-9)
        else:
            row["ok"] = True
        out.append(row)
    return {"passed": all(r["ok"] for r in out), "instances": out,
            "E_R_frequency": sum(r["E_R"] for r in out) / instances}


def check_concentration_bound(seed: int, n: float = 2e4) -> dict:
    g = build_edges_bucketed(sample_vertices(_p(1.5, 1.0, n, seed, "verify/concentration", 0)))
    res = check_concentration(g, decompose_layers(g, base_offset=1.0, spacing=1.0))
    return {"passed": res["passed"], "max_ratio": res["max_ratio"]}


def check_figure_anchor(seed: int, replicates: int = 60) -> dict:
    """Median largest component at alpha = 1.1, nu = 1, n = 1000."""
    sizes = []
    for k in range(replicates):
        g = build_edges_bucketed(sample_vertices(_p(1.1, 1.0, 1000.0, seed, "verify/figure", k)))
        sizes.append(connected_components(g).size_L1)
    med = float(np.median(sizes))
    return {"passed": 15 <= med <= 160, "median_L1": med, "replicates": replicates}


CHECKS = {
    "edge_oracle": check_edge_oracle,
    "components_oracle": check_components_oracle,
    "radial_law": check_radial_law,
    "ball_fractions": check_ball_fractions,
    "angle_approx": check_angle_approx,
    "distance": check_distance,
    "zones": check_zones,
    "concentration": check_concentration_bound,
    "figure_anchor": check_figure_anchor,
}


def _run(args):
    name, seed = args
    return name, CHECKS[name](seed)


def _clean(x):
    # numpy scalars to plain Python, floats at 17 significant digits
    if isinstance(x, dict):
        return {str(k): _clean(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_clean(v) for v in x]
    if isinstance(x, (bool, np.bool_)):
        return bool(x)
    if isinstance(x, (int, np.integer)):
        return int(x)
    if isinstance(x, (float, np.floating)):
        return float(f"{float(x):.17g}")
    return x


def run_verify(seed: int = 0, workers: int = 1, names=None) -> dict:
    names = list(CHECKS) if names is None else list(names)
    tasks = [(nm, seed) for nm in names]
    if workers <= 1:
        results = [_run(t) for t in tasks]
    else:
        with ProcessPoolExecutor(max_workers=workers) as ex:
            results = list(ex.map(_run, tasks, chunksize=1))
    checks = {nm: _clean(res) for nm, res in results}
    return {"seed": int(seed), "passed": all(c["passed"] for c in checks.values()), "checks": checks}


def dumps_report(report: dict) -> str:
    return json.dumps(report, indent=2, sort_keys=True) + "\n"
