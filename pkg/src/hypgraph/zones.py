"""Layer grid, separation zones and the regions between them.

A separation zone ``A(t0, theta0)`` is the funnel of points with ``t <= t0``
and circular angle to ``theta0`` at most ``theta^R(t, t)``. When a zone holds
no vertex, no edge among vertices below ``t0`` can jump across it; the
catalog places such zones around the circle for every layer and records
whether the resulting configuration has the expected spacing.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError
from .geometry import TWO_PI, ModelParams, annulus_measure, circular_distance, connection_angle_approx


def _coords(graph):
    # accepts a GeometricGraph or a bare VertexSample
    v = getattr(graph, "vertices", graph)
    return v.t, v.theta, v.R


@dataclass
class LayerDecomposition:
    R: float
    alpha: float
    base_offset: float
    spacing: float
    t_levels: np.ndarray
    t_max: float
    i_max: int
    degenerate: bool
    layer_of: np.ndarray  # layer index per vertex, -1 above the top level
    buckets: list = field(default_factory=list)

    def t_lower(self, i: int) -> float:
        return 0.0 if i == 0 else float(self.t_levels[i - 1])

    def theta(self, i: int, j: int) -> float:
        return connection_angle_approx(self.t_levels[i], self.t_levels[j], self.R)

    @property
    def n_above(self) -> int:
        return int(np.count_nonzero(self.layer_of < 0))

    def constants(self) -> dict:
        return {"base_offset": self.base_offset, "spacing": self.spacing}


def layer_levels(R: float, alpha: float, base_offset=None, spacing: float = 3.0):
    """Heights t_i = (base + spacing i) log R up to the first one reaching R/(2 alpha)."""
    if alpha <= 1:
        raise DomainError(f"layers require alpha > 1, got {alpha}")
    if R <= 1:
        raise DomainError(f"layers require log R > 0, got R={R}")
    if base_offset is None:
        base_offset = 4.0 * alpha / (alpha - 1.0)
    if spacing <= 0 or base_offset <= 0:
        raise DomainError("layer base offset and spacing must be positive")
    lr = math.log(R)
    t_max = R / (2.0 * alpha)
    levels = [base_offset * lr]
    while levels[-1] < t_max:
        levels.append((base_offset + spacing * len(levels)) * lr)
    return np.array(levels), t_max, float(base_offset), float(spacing)


def decompose_layers(graph, base_offset=None, spacing: float = 3.0) -> LayerDecomposition:
    t, _, R = _coords(graph)
    params = getattr(graph, "vertices", graph).params
    levels, t_max, base, sp = layer_levels(R, params.alpha, base_offset, spacing)
    i_max = len(levels) - 1
    layer_of = np.searchsorted(levels, t, side="right").astype(np.int64)
    layer_of[layer_of > i_max] = -1
    buckets = [np.flatnonzero(layer_of == i) for i in range(i_max + 1)]
    return LayerDecomposition(R, params.alpha, base, sp, levels, t_max, i_max,
                              bool(levels[0] >= t_max), layer_of, buckets)


def layer_mass(t_lo: float, t_hi: float, params: ModelParams, exact: bool = True) -> float:
    """Expected number of vertices with t_lo <= t < t_hi.

    ``exact=False`` gives the leading-order form nu e^{R/2 - alpha t_lo}(1 - e^{-alpha (t_hi - t_lo)}).
    """
    if exact:
        return params.n * float(annulus_measure(t_lo, t_hi, params))
    a = params.alpha
    return params.nu * math.exp(params.R / 2 - a * t_lo) * (1 - math.exp(-a * (t_hi - t_lo)))


@dataclass(frozen=True)
class SeparationZone:
    t0: float
    theta0: float
    R: float

    def half_width(self, t):
        return connection_angle_approx(t, t, self.R)

    def contains(self, t, theta):
        t = np.asarray(t, dtype=float)
        tt = np.clip(t, 0.0, self.R / 2)
        inside = (t <= self.t0) & (circular_distance(theta, self.theta0) <= self.half_width(tt))
        return inside if inside.ndim else bool(inside)


def _window_indices(theta_sorted, center, half):
    """Indices of sorted angles within circular distance <= half of center (superset-free)."""
    n = len(theta_sorted)
    if half >= math.pi:
        return np.arange(n)
    lo = center - half
    hi = center + half
    parts = []
    for shift in (-TWO_PI, 0.0, TWO_PI):
        a = np.searchsorted(theta_sorted, lo + shift, side="left")
        b = np.searchsorted(theta_sorted, hi + shift, side="right")
        if b > a:
            parts.append(np.arange(a, b))
    if not parts:
        return np.empty(0, dtype=np.int64)
    return np.unique(np.concatenate(parts))


def zone_members(zone: SeparationZone, graph) -> np.ndarray:
    t, theta, R = _coords(graph)
    if not zone.t0 < R / 2:
        raise DomainError(f"zone height {zone.t0} must be below R/2 = {R / 2}")
    # the zone is widest at its top, so that window bounds every member
    cand = _window_indices(theta, zone.theta0, zone.half_width(zone.t0) * (1 + 1e-9))
    if not len(cand):
        return cand
    return cand[zone.contains(t[cand], theta[cand])]


def zone_is_empty(zone: SeparationZone, graph) -> bool:
    return len(zone_members(zone, graph)) == 0


def find_zone_right_of(t0: float, theta_anchor: float, step: float, j_cap, graph):
    """Least j <= j_cap whose zone A(t0, theta_anchor + j*step) is empty, else None.

    The search never wraps past a full turn of the circle.
    """
    _, _, R = _coords(graph)
    full_turn = math.ceil(TWO_PI / step) - 1
    cap = full_turn if j_cap is None or j_cap == math.inf else min(int(j_cap), full_turn)
    for j in range(cap + 1):
        if zone_is_empty(SeparationZone(t0, float(np.mod(theta_anchor + j * step, TWO_PI)), R), graph):
            return j
    return None


@dataclass
class LayerZones:
    i: int
    t_i: float
    theta_ii: float
    k_max: int
    j: list  # j^{i,k}, None when not found
    centers: np.ndarray  # unwrapped centres, nan when not found
    gaps: np.ndarray  # anticlockwise footprint gap from zone k to zone k+1
    R: float = math.nan
    valid: bool = True

    @property
    def single_zone(self) -> bool:
        return self.k_max == 1

    @property
    def found(self) -> bool:
        return self.valid and all(j is not None for j in self.j)

    def zone(self, k: int, R: float) -> SeparationZone:
        return SeparationZone(self.t_i, float(np.mod(self.centers[k], TWO_PI)), R)

    def region_of(self, t, theta):
        """Index k of the region B_{i,k} holding each point, -1 inside a zone footprint.

        Only meaningful for t <= t_i on a layer whose zones were all found.
        """
        t = np.atleast_1d(np.asarray(t, dtype=float))
        theta = np.atleast_1d(np.asarray(theta, dtype=float))
        if not self.found:
            return np.full(len(t), -1, dtype=np.int64)
        return _region_lookup(self.centers, self.R, self.t_i, t, theta)


def _region_lookup(u, R, t_i, t, theta):
    tt = np.clip(t, 0.0, t_i)
    w = connection_angle_approx(tt, tt, R)
    x = u[0] + np.mod(theta - u[0], TWO_PI)
    kp = np.searchsorted(u, x, side="right") - 1
    kp = np.clip(kp, 0, len(u) - 1)
    left = u[kp]
    right = np.where(kp + 1 < len(u), u[np.minimum(kp + 1, len(u) - 1)], u[0] + TWO_PI)
    ok = (x - left > w) & (right - x > w) & (t <= t_i)
    region = np.mod(kp + 1, len(u))
    return np.where(ok, region, -1).astype(np.int64)


@dataclass
class ZoneCatalog:
    c: float
    R: float
    layers: list  # LayerZones per layer index
    constants: dict
    degenerate: bool
    E_R: bool
    diagnostics: list = field(default_factory=list)

    def theta_ij(self, i: int, j: int) -> float:
        return connection_angle_approx(self.layers[i].t_i, self.layers[j].t_i, self.R)

    def to_dict(self) -> dict:
        out = []
        for lz in self.layers:
            zones = []
            for k in range(lz.k_max):
                zones.append({
                    "k": k,
                    "j": lz.j[k],
                    "theta_center": None if lz.j[k] is None else float(np.mod(lz.centers[k], TWO_PI)),
                    "gap_to_next": None if not np.isfinite(lz.gaps[k]) else float(lz.gaps[k]),
                })
            out.append({"i": lz.i, "t_i": lz.t_i, "theta_ii": lz.theta_ii, "k_max": lz.k_max,
                        "valid": lz.valid, "single_zone": lz.single_zone, "zones": zones})
        return {"E_R": self.E_R, "c": self.c, "constants": self.constants,
                "degenerate": self.degenerate, "layers": out, "diagnostics": self.diagnostics}


def _fmt(x):
    return float(f"{x:.17g}")


def write_catalog_json(catalog: ZoneCatalog, path):
    with open(path, "w") as fh:
        json.dump(catalog.to_dict(), fh, indent=2, sort_keys=True)
        fh.write("\n")


def bracket_holds(gap: float, c: float, R: float, theta_ii: float) -> bool:
    return c * R * theta_ii <= gap <= 5 * c * R * theta_ii


def build_zone_catalog(graph, layers: LayerDecomposition, c: float = 10.0) -> ZoneCatalog:
    """Find the separation zones of every layer and evaluate the spacing event.

    Zone k of layer i is the first empty zone at or to the right of the anchor
    3cRk theta_ii, stepping by 2 theta_ii, at most ceil(cR) steps and never
    past a full turn. The event holds when every zone is
    found and every anticlockwise gap between consecutive footprints lies in
    [cR theta_ii, 5cR theta_ii]. A layer whose anchor spacing exceeds the whole
    circle carries a single zone and has no consecutive pair to check.
    """
    R = layers.R
    diags = []
    out = []
    for i, t_i in enumerate(layers.t_levels.tolist()):
        if not 2 * t_i < R:
            diags.append({"layer": i, "k": None, "reason": f"t_i={t_i:.6g} >= R/2, zones undefined"})
            out.append(LayerZones(i, t_i, math.nan, 0, [], np.empty(0), np.empty(0), R, valid=False))
            continue
        th = connection_angle_approx(t_i, t_i, R)
        k_max = math.ceil(TWO_PI / (3 * c * R * th))
        j_cap = math.ceil(c * R)
        js, centers = [], []
        for k in range(k_max):
            anchor = 3 * c * R * k * th
            j = find_zone_right_of(t_i, anchor, 2 * th, j_cap, graph)
            js.append(j)
            centers.append(math.nan if j is None else anchor + 2 * j * th)
            if j is None:
                diags.append({"layer": i, "k": k, "reason": "no empty zone within the search cap"})
        centers = np.array(centers)
        nxt = np.append(centers[1:], centers[0] + TWO_PI)
        gaps = nxt - centers - 2 * th
        lz = LayerZones(i, t_i, th, k_max, js, centers, gaps, R)
        if lz.found and not lz.single_zone:
            for k in range(k_max):
                if not bracket_holds(gaps[k], c, R, th):
                    diags.append({"layer": i, "k": k, "reason": "gap outside bracket",
                                  "gap": _fmt(gaps[k]), "lo": _fmt(c * R * th), "hi": _fmt(5 * c * R * th)})
        out.append(lz)
    return ZoneCatalog(c, R, out, layers.constants(), layers.degenerate, not diags, diags)


def catalog_zone_members(graph, catalog: ZoneCatalog) -> list:
    """(layer, k, vertex ids) for every found zone holding a vertex; empty when all zones are clean."""
    bad = []
    for lz in catalog.layers:
        if not lz.valid:
            continue
        for k, j in enumerate(lz.j):
            if j is None:
                continue
            m = zone_members(lz.zone(k, catalog.R), graph)
            if len(m):
                bad.append((lz.i, k, m))
    return bad


def brute_force_gaps(catalog: ZoneCatalog, heights: int = 64, tol: float = 1e-9) -> list:
    """Recompute zone gaps from sampled member points of each zone.

    Each zone is enumerated as a cloud of points passing SeparationZone.contains
    (its cross-section at several heights, including the top where it is
    widest); the gap to the next zone is the least anticlockwise angle from any
    point of one cloud to any point of the other.
    """
    results = []
    for lz in catalog.layers:
        if not lz.found:
            continue
        ts = np.linspace(0.0, lz.t_i, heights)
        w = connection_angle_approx(ts, ts, catalog.R)
        # pull the extreme samples a hair inside so rounding keeps them members
        frac = np.linspace(-1.0, 1.0, 9) * (1 - 1e-10)
        T = np.repeat(ts, len(frac))
        clouds = []
        for k in range(lz.k_max):
            z = lz.zone(k, catalog.R)
            TH = z.theta0 + np.outer(w, frac).ravel()
            clouds.append(TH[z.contains(T, np.mod(TH, TWO_PI))])
        for k in range(lz.k_max):
            a = clouds[k]
            if lz.single_zone:
                gap = float((a.min() + TWO_PI) - a.max())
                ok = True
            else:
                b = clouds[(k + 1) % lz.k_max]
                gap = float(np.min(np.mod(b[None, :] - a[:, None], TWO_PI)))
                lo = catalog.c * catalog.R * lz.theta_ii
                ok = lo - tol <= gap <= 5 * lo + tol
            results.append({"layer": lz.i, "k": k, "gap": gap, "catalog_gap": float(lz.gaps[k]), "ok": ok})
    return results


def zone_mass(t: float, params: ModelParams, points: int = 2001) -> float:
    """Expected number of vertices in A(t, theta) from the exact radial law."""
    from scipy.integrate import quad

    R, a = params.R, params.alpha

    def integrand(s):
        dens = a * math.exp(a * (R - s) - a * R) * (1 - math.exp(-2 * a * (R - s))) / (1 - math.exp(-a * R)) ** 2
        return dens * 2.0 * connection_angle_approx(s, s, R) / TWO_PI

    val, _ = quad(integrand, 0.0, t, limit=200)
    return params.n * val


def zone_mass_bound(alpha: float, nu: float) -> float:
    """Geometric-series upper bound on the expected number of vertices in a zone."""
    q = math.exp(-(alpha - 1.0))
    return 4.0 * nu * (math.exp(alpha) - 1.0) * q / (1.0 - q)


def minimal_c(params: ModelParams, t: float, K: float = 1.0, use_bound: bool = False) -> float:
    """Smallest c with P(no empty zone among cR + 1 candidates) <= exp(-K R)."""
    lam = zone_mass_bound(params.alpha, params.nu) if use_bound else zone_mass(t, params)
    p_occupied = -math.expm1(-lam)
    if p_occupied <= 0:
        return 0.0
    tries = K * params.R / -math.log(p_occupied)
    return max(tries - 1.0, 0.0) / params.R


def assert_separation(graph, catalog: ZoneCatalog, layers: LayerDecomposition) -> dict:
    """Check on the real edge set that regions between zones are not joined below t_i.

    Returns a verdict dict with edge-level and path-level violation lists.
    """
    from .components import connected_components

    t, theta = graph.t, graph.theta
    edges = graph.edges
    edge_viol, path_viol, unlocated = [], [], []
    for lz in catalog.layers:
        if not lz.found:
            continue
        below = t <= lz.t_i
        idx = np.flatnonzero(below)
        region = np.full(len(t), -2, dtype=np.int64)
        region[idx] = _region_lookup(lz.centers, catalog.R, lz.t_i, t[idx], theta[idx])
        for v in idx[region[idx] < 0].tolist():
            unlocated.append({"layer": lz.i, "v": v, "t": _fmt(t[v]), "theta": _fmt(theta[v])})
        if lz.single_zone:
            continue
        m = below[edges[:, 0]] & below[edges[:, 1]]
        sub = edges[m]
        ru, rv = region[sub[:, 0]], region[sub[:, 1]]
        for (u, v) in sub[ru != rv].tolist():
            edge_viol.append({"layer": lz.i, "u": u, "v": v, "t_u": _fmt(t[u]), "theta_u": _fmt(theta[u]),
                              "t_v": _fmt(t[v]), "theta_v": _fmt(theta[v])})
        # path level: components of the subgraph induced below t_i
        comp = connected_components(len(t), sub)
        lab = comp.labels[idx]
        reg = region[idx]
        order = np.lexsort((reg, lab))
        lab_s, reg_s = lab[order], reg[order]
        mixed = np.unique(lab_s[1:][(lab_s[1:] == lab_s[:-1]) & (reg_s[1:] != reg_s[:-1])])
        for cl in mixed.tolist():
            members = idx[comp.labels[idx] == cl]
            path_viol.append({"layer": lz.i, "component": members.tolist(),
                              "regions": sorted(set(region[members].tolist()))})
    return {"passed": not edge_viol and not path_viol, "edge_violations": edge_viol,
            "path_violations": path_viol, "unlocated": unlocated}
