"""Edge construction: exact all-pairs oracle and the banded angular sweep."""
from __future__ import annotations

import json
import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .errors import ContractError, ResourceError
from .geometry import TWO_PI, connection_angle_exact, within_radius
from .sampler import VertexSample

NAIVE_CAP = 20_000
DEFAULT_BAND_WIDTH = 1.0
_CHUNK = 4_000_000


@dataclass
class GeometricGraph:
    vertices: VertexSample
    edges: np.ndarray  # (E, 2) int64, rows (u, v) with u < v, lexicographic
    _indptr: np.ndarray | None = field(default=None, repr=False)
    _indices: np.ndarray | None = field(default=None, repr=False)

    def __post_init__(self):
        self.edges = np.asarray(self.edges, dtype=np.int64).reshape(-1, 2)

    @property
    def n_vertices(self) -> int:
        return len(self.vertices)

    @property
    def n_edges(self) -> int:
        return len(self.edges)

    @property
    def t(self):
        return self.vertices.t

    @property
    def theta(self):
        return self.vertices.theta

    @property
    def R(self):
        return self.vertices.R

    def _build_csr(self):
        n = self.n_vertices
        src = np.concatenate([self.edges[:, 0], self.edges[:, 1]])
        dst = np.concatenate([self.edges[:, 1], self.edges[:, 0]])
        order = np.lexsort((dst, src))
        self._indices = dst[order]
        self._indptr = np.zeros(n + 1, dtype=np.int64)
        np.cumsum(np.bincount(src, minlength=n), out=self._indptr[1:])

    @property
    def adjacency(self):
        """CSR pair (indptr, indices); neighbours of v are indices[indptr[v]:indptr[v+1]]."""
        if self._indptr is None:
            self._build_csr()
        return self._indptr, self._indices

    def neighbors(self, v: int) -> np.ndarray:
        indptr, indices = self.adjacency
        return indices[indptr[v]:indptr[v + 1]]

    @property
    def degree(self) -> np.ndarray:
        return np.diff(self.adjacency[0])

    def summary(self) -> dict:
        deg = self.degree
        s = self.vertices
        return {
            "n_vertices": self.n_vertices,
            "n_edges": self.n_edges,
            "mean_degree": float(2.0 * self.n_edges / self.n_vertices) if self.n_vertices else 0.0,
            "max_degree": int(deg.max()) if len(deg) else 0,
            "params": s.params.as_dict(),
            "seed": int(s.seed),
        }


def canonical_edges(u, v) -> np.ndarray:
    u = np.asarray(u, dtype=np.int64)
    v = np.asarray(v, dtype=np.int64)
    lo, hi = np.minimum(u, v), np.maximum(u, v)
    e = np.stack([lo, hi], axis=1) if len(lo) else np.empty((0, 2), dtype=np.int64)
    e = np.unique(e, axis=0) if len(e) else e
    return e


def _test_pairs(sample: VertexSample, lo, hi):
    # always evaluated with the smaller id first so both builders round identically
    t, th, R = sample.t, sample.theta, sample.R
    keep = within_radius(t[lo], th[lo], t[hi], th[hi], R)
    return lo[keep], hi[keep]


def build_edges_naive(sample: VertexSample, cap: int = NAIVE_CAP, block: int = 512) -> GeometricGraph:
    """All-pairs construction; the ground truth for the bucketed builder."""
    n = len(sample)
    if n > cap:
        raise ResourceError(f"{n} vertices exceeds the naive cap {cap}; use build_edges_bucketed")
    out_u, out_v = [], []
    idx = np.arange(n, dtype=np.int64)
    for start in range(0, n, block):
        rows = idx[start:start + block]
        cols = idx[start:]
        ii, jj = np.meshgrid(rows, cols, indexing="ij")
        m = jj > ii
        lo, hi = _test_pairs(sample, ii[m], jj[m])
        out_u.append(lo)
        out_v.append(hi)
    if not out_u:
        return GeometricGraph(sample, np.empty((0, 2), dtype=np.int64))
    return GeometricGraph(sample, canonical_edges(np.concatenate(out_u), np.concatenate(out_v)))


def _window_pairs(q_ids, q_theta, b_ids, b_theta, win):
    """Candidate pairs (q, b) with circular angle gap <= win, win < pi."""
    ext_theta = np.concatenate([b_theta - TWO_PI, b_theta, b_theta + TWO_PI])
    ext_ids = np.concatenate([b_ids, b_ids, b_ids])
    lo = np.searchsorted(ext_theta, q_theta - win, side="left")
    hi = np.searchsorted(ext_theta, q_theta + win, side="right")
    counts = hi - lo
    # chunk the query side to bound memory
    csum = np.cumsum(counts)
    start = 0
    while start < len(q_ids):
        base = csum[start - 1] if start else 0
        stop = int(np.searchsorted(csum, base + _CHUNK, side="right"))
        stop = max(stop, start + 1)
        c = counts[start:stop]
        total = int(c.sum())
        if total:
            q = np.repeat(q_ids[start:stop], c)
            offs = np.repeat(lo[start:stop] - (np.cumsum(c) - c), c)
            yield q, ext_ids[np.arange(total) + offs]
        start = stop


def build_edges_bucketed(sample: VertexSample, band_width: float = DEFAULT_BAND_WIDTH) -> GeometricGraph:
    """Edge set via radial bands and angular windows over theta-sorted vertices.

    For bands with upper t-bounds ta, tb every edge has angular gap at most
    connection_angle_exact(R - ta, R - tb, R), so only that window is scanned;
    each candidate is then decided by the exact distance test.
    """
    if not sample.is_sorted:
        raise ContractError("vertices must be sorted by theta")
    n = len(sample)
    if n < 2:
        return GeometricGraph(sample, np.empty((0, 2), dtype=np.int64))
    if band_width <= 0:
        raise ContractError("band_width must be positive")
    R, t, th = sample.R, sample.t, sample.theta
    band = np.floor(t / band_width).astype(np.int64)
    nb = int(band.max()) + 1
    order = np.argsort(band, kind="stable")  # stays theta-sorted inside a band
    bounds = np.searchsorted(band[order], np.arange(nb + 1))
    members = [order[bounds[b]:bounds[b + 1]] for b in range(nb)]

    out_u, out_v = [], []
    for a in range(nb):
        ia = members[a]
        if not len(ia):
            continue
        ta = min((a + 1) * band_width, R)
        for b in range(a, nb):
            ib = members[b]
            if not len(ib):
                continue
            tb = min((b + 1) * band_width, R)
            if ta + tb >= R - 1e-6:
                win = math.pi
            else:
                win = connection_angle_exact(R - ta, R - tb, R) * (1 + 1e-6) + 1e-9
            if win >= math.pi:
                qq, cc = np.meshgrid(ia, ib, indexing="ij")
                pairs = [(qq.ravel(), cc.ravel())]
            else:
                pairs = _window_pairs(ia, th[ia], ib, th[ib], win)
            for q, c in pairs:
                lo, hi = np.minimum(q, c), np.maximum(q, c)
                if a == b:
                    m = lo < hi
                    # each unordered pair shows up from both ends; keep one
                    m &= q < c
                    lo, hi = lo[m], hi[m]
                lo, hi = _test_pairs(sample, lo, hi)
                out_u.append(lo)
                out_v.append(hi)
    if not out_u:
        return GeometricGraph(sample, np.empty((0, 2), dtype=np.int64))
    return GeometricGraph(sample, canonical_edges(np.concatenate(out_u), np.concatenate(out_v)))


build_graph = build_edges_bucketed


def write_edges_csv(graph: GeometricGraph, path):
    with open(path, "w") as fh:
        fh.write("u,v\n")
        if graph.n_edges:
            np.savetxt(fh, graph.edges, fmt="%d", delimiter=",")


def read_edges_csv(path) -> np.ndarray:
    with warnings.catch_warnings():
        # an edgeless graph is a header-only file
        warnings.filterwarnings("ignore", message="loadtxt: input contained no data")
        e = np.loadtxt(path, delimiter=",", skiprows=1, dtype=np.int64, ndmin=2)
    return e.reshape(-1, 2)


def write_summary_json(graph: GeometricGraph, path, extra: dict | None = None):
    s = graph.summary()
    if extra:
        s.update(extra)
    with open(path, "w") as fh:
        json.dump(s, fh, indent=2, sort_keys=True)
        fh.write("\n")
