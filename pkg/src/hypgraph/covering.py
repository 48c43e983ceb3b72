"""Covering components built from the layered angular neighbourhoods.

For a vertex v in layer i, ``C_v`` is v together with, for every lower layer
j, the sets ``C_u`` of the layer-j vertices u within angle ``2 theta_{i,j}`` of
v. The covering component of v is the union of ``C_u`` over all layer-i
vertices in v's region between two separation zones.
"""
from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass

import numpy as np

from .components import bfs_reachable, connected_components
from .errors import ContractError
from .geometry import TWO_PI
from .zones import LayerDecomposition, ZoneCatalog, _region_lookup, _window_indices


@dataclass
class CoverReport:
    root: int
    layer: int
    region: int
    size_C_v: int
    size_cover: int
    size_conn: int
    is_max_t_root: bool
    containment: bool
    bound_rhs: float
    unlocatable: bool = False

    @property
    def bound_ratio(self) -> float:
        return self.size_cover / self.bound_rhs


def _signed_gap(theta, ref):
    d = np.asarray(theta, dtype=float) - ref
    d = np.where(d >= math.pi, d - TWO_PI, d)
    return np.where(d < -math.pi, d + TWO_PI, d)


class CoverBuilder:
    """Shared memo of C_u sets over one graph and its layer decomposition."""

    def __init__(self, graph, layers: LayerDecomposition, catalog: ZoneCatalog | None = None):
        self.graph = graph
        self.layers = layers
        self.catalog = catalog
        self.theta = graph.theta
        self.t = graph.t
        self._layer_theta = [self.theta[b] for b in layers.buckets]
        self._memo: dict[int, frozenset] = {}
        self._covers: dict[tuple, np.ndarray] = {}

    def theta_neighborhood(self, v: int, i: int, j: int) -> np.ndarray:
        """Layer-j vertices in the half-open sector [theta_v - 2 theta_ij, theta_v + 2 theta_ij)."""
        if not 0 <= j < i <= self.layers.i_max:
            raise ContractError(f"need 0 <= j < i <= i_max, got i={i}, j={j}")
        ids = self.layers.buckets[j]
        if not len(ids):
            return ids
        h = 2.0 * self.layers.theta(i, j)
        if h >= math.pi:
            return ids
        th = self._layer_theta[j]
        cand = _window_indices(th, self.theta[v], h * (1 + 1e-9) + 1e-15)
        d = _signed_gap(th[cand], self.theta[v])
        return ids[cand[(d >= -h) & (d < h)]]

    def C(self, v: int) -> frozenset:
        v = int(v)
        hit = self._memo.get(v)
        if hit is not None:
            return hit
        i = int(self.layers.layer_of[v])
        if i < 0:
            raise ContractError(f"vertex {v} lies above the top layer")
        out = {v}
        for j in range(i):
            for u in self.theta_neighborhood(v, i, j).tolist():
                out |= self.C(u)
        res = frozenset(out)
        self._memo[v] = res
        return res

    def region_of(self, v: int) -> int:
        i = int(self.layers.layer_of[v])
        lz = self.catalog.layers[i]
        if not lz.found:
            return -1
        return int(_region_lookup(lz.centers, self.catalog.R, lz.t_i, self.t[v:v + 1], self.theta[v:v + 1])[0])

    def cover_mask(self, i: int, k: int) -> np.ndarray:
        """Boolean vertex mask of the covering component rooted at region B_{i,k}."""
        key = (i, k)
        if key in self._covers:
            return self._covers[key]
        lz = self.catalog.layers[i]
        ids = self.layers.buckets[i]
        reg = _region_lookup(lz.centers, self.catalog.R, lz.t_i, self.t[ids], self.theta[ids])
        roots = ids[reg == k]
        mask = np.zeros(len(self.t), dtype=bool)
        if i == 0:
            mask[roots] = True
        else:
            for u in roots.tolist():
                mask[list(self.C(u))] = True
        self._covers[key] = mask
        return mask

    def bound_rhs(self, i: int) -> float:
        return math.exp(2 * self.layers.t_levels[0] + self.layers.t_levels[i] / 2)


def _require_event(catalog):
    if catalog is None or not catalog.E_R:
        raise ContractError("covering components need a catalog on which the zone event holds")


def theta_neighborhood(v: int, i: int, j: int, graph, layers: LayerDecomposition) -> np.ndarray:
    return CoverBuilder(graph, layers).theta_neighborhood(v, i, j)


def build_C_v(v: int, graph, layers: LayerDecomposition, memo: CoverBuilder | None = None) -> frozenset:
    return (memo or CoverBuilder(graph, layers)).C(v)


def max_t_roots(graph, comps) -> np.ndarray:
    """Per component, the vertex of largest t (smallest id on ties), in label order."""
    n = graph.n_vertices
    ids = np.arange(n)
    order = np.lexsort((ids, -graph.t, comps.labels))
    first = np.ones(n, dtype=bool)
    first[1:] = comps.labels[order][1:] != comps.labels[order][:-1]
    return order[first]


def build_cover(v: int, graph, layers: LayerDecomposition, catalog: ZoneCatalog,
                builder: CoverBuilder | None = None) -> CoverReport:
    """Cover report for one vertex; its connected component comes from BFS."""
    _require_event(catalog)
    b = builder or CoverBuilder(graph, layers, catalog)
    i = int(layers.layer_of[v])
    if i < 0:
        raise ContractError(f"vertex {v} lies above the top layer")
    conn = bfs_reachable(graph, v)
    is_root = bool(np.all((graph.t[conn] < graph.t[v]) | ((graph.t[conn] == graph.t[v]) & (conn >= v))))
    k = b.region_of(v)
    size_c = len(b.C(v))
    if k < 0:
        return CoverReport(int(v), i, -1, size_c, size_c, len(conn), is_root, False, b.bound_rhs(i), True)
    mask = b.cover_mask(i, k)
    return CoverReport(int(v), i, k, size_c, int(mask.sum()), len(conn), is_root,
                       bool(mask[conn].all()), b.bound_rhs(i))


def check_containment(graph, layers: LayerDecomposition, catalog: ZoneCatalog, comps=None):
    """Cover every component from its deepest vertex and test containment.

    Returns (reports, summary). Components whose deepest vertex lies above the
    top layer are skipped and counted in the summary.
    """
    _require_event(catalog)
    comps = comps or connected_components(graph)
    b = CoverBuilder(graph, layers, catalog)
    roots = max_t_roots(graph, comps)
    root_layer = layers.layer_of[roots]
    root_region = np.full(len(roots), -1, dtype=np.int64)
    for i, lz in enumerate(catalog.layers):
        sel = np.flatnonzero(root_layer == i)
        if len(sel):
            r = roots[sel]
            root_region[sel] = _region_lookup(lz.centers, catalog.R, lz.t_i, graph.t[r], graph.theta[r])

    labels = comps.labels
    v_layer, v_region = root_layer[labels], root_region[labels]
    inside = np.zeros(graph.n_vertices, dtype=bool)
    cover_size = {}
    for i, k in sorted(set(zip(root_layer.tolist(), root_region.tolist()))):
        if i < 0 or k < 0:
            continue
        mask = b.cover_mask(i, k)
        cover_size[(i, k)] = int(mask.sum())
        sel = (v_layer == i) & (v_region == k)
        inside[sel] = mask[sel]
    n_missing = np.bincount(labels[~inside], minlength=len(roots))

    reports, failures = [], []
    above = 0
    for label, v in enumerate(roots.tolist()):
        i, k = int(root_layer[label]), int(root_region[label])
        if i < 0:
            above += 1
            continue
        size_c = 1 if i == 0 else len(b.C(v))
        size_conn = int(comps.sizes[label])
        if k < 0:
            reports.append(CoverReport(v, i, -1, size_c, 0, size_conn, True, False, b.bound_rhs(i), True))
            continue
        ok = n_missing[label] == 0
        reports.append(CoverReport(v, i, k, size_c, cover_size[(i, k)], size_conn, True, bool(ok), b.bound_rhs(i)))
        if not ok:
            members = comps.members(label)
            missing = members[~inside[members]]
            failures.append({"root": v, "layer": i, "region": k,
                             "missing": [{"v": int(x), "t": float(graph.t[x]), "theta": float(graph.theta[x])}
                                         for x in missing.tolist()]})
    located = [r for r in reports if not r.unlocatable]
    ratios = np.array([r.bound_ratio for r in located])
    max_conn = max((r.size_conn for r in located), default=0)
    max_cover = max((r.size_cover for r in located), default=0)
    summary = {
        "E_R": catalog.E_R,
        "roots": len(reports),
        "roots_above_top_layer": above,
        "unlocatable": sum(r.unlocatable for r in reports),
        "containment_pass": sum(r.containment for r in reports),
        "containment_fail": sum(not r.containment for r in reports),
        "max_conn": max_conn,
        "max_cover": max_cover,
        "upper_chain_holds": max_conn <= max_cover,
        "bound_ratio_max": float(ratios.max()) if len(ratios) else 0.0,
        "bound_ratio_quantiles": [float(q) for q in np.quantile(ratios, [0.5, 0.9, 1.0])] if len(ratios) else [],
        "bound_exceeded": int(np.count_nonzero(ratios > 1)),
        "failures": failures,
    }
    return reports, summary


def expected_neighborhood(i: int, j: int, layers: LayerDecomposition, params) -> float:
    """Expected |Theta_{i,j}| for a layer-i vertex: sector share of the layer-j mass."""
    from .zones import layer_mass

    width = min(4.0 * layers.theta(i, j), TWO_PI)
    return width / TWO_PI * layer_mass(layers.t_lower(j), layers.t_levels[j], params)


def check_concentration(graph, layers: LayerDecomposition) -> dict:
    """Largest |Theta_{i,j}(v)| / (4 max(8R, E|Theta_{i,j}|)) over all layer pairs and vertices."""
    params = graph.vertices.params
    b = CoverBuilder(graph, layers)
    R = layers.R
    worst = {"ratio": 0.0, "i": None, "j": None, "v": None, "count": 0}
    for i in range(1, layers.i_max + 1):
        for j in range(i):
            cap = 4.0 * max(8.0 * R, expected_neighborhood(i, j, layers, params))
            for v in layers.buckets[i].tolist():
                cnt = len(b.theta_neighborhood(v, i, j))
                ratio = cnt / cap
                if ratio > worst["ratio"]:
                    worst = {"ratio": ratio, "i": i, "j": j, "v": v, "count": cnt}
    return {"passed": worst["ratio"] <= 1.0, "max_ratio": worst["ratio"], "worst": worst}


def write_reports_jsonl(reports, path):
    with open(path, "w") as fh:
        for r in reports:
            d = asdict(r)
            d["bound_rhs"] = float(f"{d['bound_rhs']:.17g}")
            fh.write(json.dumps(d, sort_keys=True) + "\n")
