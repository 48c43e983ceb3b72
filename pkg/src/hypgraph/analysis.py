"""Experiment harness: the largest-component scaling law and deep-vertex statistics."""
from __future__ import annotations

import csv
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .components import connected_components
from .errors import DomainError, ParameterError
from .geometry import ModelParams
from .graph import build_edges_bucketed
from .sampler import derive_seed, sample_vertices

MIN_GRID_POINTS = 4
MIN_SEEDS = 30


@dataclass
class ExperimentRecord:
    """Outcome of one sample -> build -> components run."""

    alpha: float
    nu: float
    n: float
    replicate: int
    seed: int
    n_vertices_realized: int
    n_edges: int
    size_L1: int
    size_L2: int
    max_t: float
    wall_time: dict = field(default_factory=dict)

    def __post_init__(self):
        if not (self.size_L1 >= self.size_L2 >= 0 and self.size_L1 <= self.n_vertices_realized):
            raise ParameterError(f"inconsistent component sizes {self.size_L1}, {self.size_L2}")


@dataclass
class CellStats:
    alpha: float
    n: float
    seeds: int
    median_L1: float
    q25_L1: float
    q75_L1: float


@dataclass
class AlphaFit:
    alpha: float
    slope: float
    intercept: float
    target: float
    residuals: list

    @property
    def deviation(self) -> float:
        return self.slope - self.target


@dataclass
class ScalingFit:
    cells: list  # CellStats, ordered by (alpha, n)
    fits: dict  # alpha -> AlphaFit
    records: list  # ExperimentRecord, ordered by (alpha, n, replicate)

    def cell(self, alpha: float, n: float) -> CellStats:
        for c in self.cells:
            if c.alpha == alpha and c.n == n:
                return c
        raise KeyError((alpha, n))

    def median_ordering_holds(self, lo_alpha: float, hi_alpha: float) -> bool:
        """Median |L_1| at lo_alpha is at least the median at hi_alpha for every n."""
        ns = sorted({c.n for c in self.cells})
        return all(self.cell(lo_alpha, n).median_L1 >= self.cell(hi_alpha, n).median_L1 for n in ns)


def run_cell(params: ModelParams, replicate: int = 0, mode: str = "poisson") -> ExperimentRecord:
    t0 = time.perf_counter()
    sample = sample_vertices(params, mode=mode)
    t1 = time.perf_counter()
    graph = build_edges_bucketed(sample)
    t2 = time.perf_counter()
    comps = connected_components(graph)
    t3 = time.perf_counter()
    return ExperimentRecord(
        alpha=params.alpha, nu=params.nu, n=params.n, replicate=replicate, seed=params.seed,
        n_vertices_realized=graph.n_vertices, n_edges=graph.n_edges,
        size_L1=comps.size_L1, size_L2=comps.size_L2,
        max_t=float(sample.t.max()) if len(sample) else 0.0,
        wall_time={"sample": t1 - t0, "build": t2 - t1, "components": t3 - t2},
    )


def _run_task(task):
    alpha, nu, n, rep, seed = task
    return run_cell(ModelParams(alpha, nu, n, seed), rep)


def seed_schedule(alphas, n_grid, seeds_per_cell: int, base_seed: int = 0) -> list:
    """Tasks (alpha, n, replicate, seed) in canonical order; seeds depend only on the cell and replicate."""
    tasks = []
    for a in alphas:
        for n in n_grid:
            tag = f"scaling/alpha={float(a)!r}/n={float(n)!r}"
            for rep in range(seeds_per_cell):
                tasks.append((float(a), float(n), rep, derive_seed(base_seed, tag, rep)))
    return tasks


def _check_grid(alphas, n_grid, seeds_per_cell, min_seeds):
    for a in alphas:
        if not a > 1:
            raise DomainError(f"alpha = {a}: only the subcritical regime alpha > 1 is supported")
    if len(n_grid) < MIN_GRID_POINTS:
        raise ParameterError(f"need at least {MIN_GRID_POINTS} n values for a fit, got {len(n_grid)}")
    if any(b <= a for a, b in zip(n_grid, n_grid[1:])):
        raise ParameterError("n_grid must be strictly increasing")
    if seeds_per_cell < min_seeds:
        raise ParameterError(f"need at least {min_seeds} seeds per cell, got {seeds_per_cell}")


def fit_scaling(records: list) -> ScalingFit:
    """Medians and quartiles per cell; least-squares slope of log median vs log n per alpha."""
    by_cell: dict = {}
    for r in records:
        by_cell.setdefault((r.alpha, r.n), []).append(r.size_L1)
    cells = []
    for (a, n) in sorted(by_cell):
        s = np.asarray(by_cell[(a, n)], dtype=float)
        q25, med, q75 = np.quantile(s, [0.25, 0.5, 0.75])
        cells.append(CellStats(a, n, len(s), float(med), float(q25), float(q75)))
    fits = {}
    for a in sorted({c.alpha for c in cells}):
        cs = [c for c in cells if c.alpha == a]
        x = np.log([c.n for c in cs])
        y = np.log([max(c.median_L1, 1.0) for c in cs])
        slope, intercept = np.polyfit(x, y, 1)
        resid = (y - (slope * x + intercept)).tolist()
        fits[a] = AlphaFit(a, float(slope), float(intercept), 1.0 / (2.0 * a), resid)
    return ScalingFit(cells, fits, list(records))


def run_scaling_experiment(alphas, n_grid, seeds_per_cell: int, nu: float = 1.0, workers: int = 1,
                           base_seed: int = 0, min_seeds: int = MIN_SEEDS, progress=None) -> ScalingFit:
    """Sample, build and label every (alpha, n, replicate) cell, then fit.

    Seeds come from ``seed_schedule`` so the result does not depend on the
    worker count. ``min_seeds`` may be lowered for smoke runs only.
    """
    alphas = [float(a) for a in alphas]
    n_grid = [float(n) for n in n_grid]
    _check_grid(alphas, n_grid, seeds_per_cell, min_seeds)
    tasks = [(a, float(nu), n, rep, seed) for a, n, rep, seed in seed_schedule(alphas, n_grid, seeds_per_cell, base_seed)]
    records = []
    if workers <= 1:
        for k, task in enumerate(tasks):
            records.append(_run_task(task))
            if progress:
                progress(k + 1, len(tasks))
    else:
        with ProcessPoolExecutor(max_workers=workers) as ex:
            # map preserves task order, so aggregation is independent of scheduling
            for k, rec in enumerate(ex.map(_run_task, tasks, chunksize=1)):
                records.append(rec)
                if progress:
                    progress(k + 1, len(tasks))
    return fit_scaling(records)


def _g(x) -> str:
    return f"{x:.17g}" if isinstance(x, float) else str(x)


RECORD_COLUMNS = ["alpha", "nu", "n", "replicate", "seed", "n_vertices_realized", "n_edges",
                  "size_L1", "size_L2", "max_t"]


def write_records_csv(records, path, timings: bool = False):
    """Per-run CSV; wall times are opt-in because they break byte-identical reruns."""
    cols = RECORD_COLUMNS + (["time_sample", "time_build", "time_components"] if timings else [])
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(cols)
        for r in records:
            row = [_g(getattr(r, c)) for c in RECORD_COLUMNS]
            if timings:
                row += [_g(float(r.wall_time.get(k, 0.0))) for k in ("sample", "build", "components")]
            w.writerow(row)


def write_fit_csv(fit: ScalingFit, path):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["alpha", "n", "seeds", "median_L1", "q25_L1", "q75_L1", "slope", "target", "residual"])
        for a, af in fit.fits.items():
            cs = [c for c in fit.cells if c.alpha == a]
            for c, res in zip(cs, af.residuals):
                w.writerow([_g(c.alpha), _g(c.n), c.seeds, _g(c.median_L1), _g(c.q25_L1), _g(c.q75_L1),
                            _g(af.slope), _g(af.target), _g(float(res))])


def parse_n_grid(spec: str) -> list:
    """``start:stop:xF`` for a geometric grid, ``start:stop:+d`` for arithmetic, or a comma list."""
    spec = spec.strip()
    if ":" not in spec:
        return [float(x) for x in spec.split(",") if x.strip()]
    parts = spec.split(":")
    if len(parts) != 3:
        raise ParameterError(f"bad grid {spec!r}")
    start, stop, step = float(parts[0]), float(parts[1]), parts[2].strip()
    out = []
    if step.startswith("x"):
        f = float(step[1:])
        if f <= 1:
            raise ParameterError("geometric factor must exceed 1")
        v = start
        while v <= stop * (1 + 1e-12):
            out.append(v)
            v *= f
    else:
        d = float(step.lstrip("+"))
        if d <= 0:
            raise ParameterError("arithmetic step must be positive")
        v = start
        while v <= stop * (1 + 1e-12):
            out.append(v)
            v += d
    return out


def deep_vertex_report(graph) -> dict:
    """Deepest vertex, its degree, degree / e^{t/2}, and how max t compares to R/(2 alpha)."""
    params = graph.vertices.params
    t_max = params.R / (2.0 * params.alpha)
    if graph.n_vertices == 0:
        return {"vertex": None, "max_t": None, "degree": 0, "ratio": 0.0, "t_max": t_max, "gap_to_t_max": None}
    v = int(np.argmax(graph.t))
    t = float(graph.t[v])
    deg = int(graph.degree[v])
    return {"vertex": v, "max_t": t, "degree": deg, "ratio": deg / math.exp(t / 2.0),
            "t_max": t_max, "gap_to_t_max": t - t_max}


def deep_degree_samples(graph, threshold: float):
    """(t, degree) of every vertex with t above threshold."""
    sel = np.flatnonzero(graph.t > threshold)
    return graph.t[sel], graph.degree[sel]


def deep_degree_regression(params: ModelParams, seeds: int, threshold: float | None = None,
                           base_seed: int = 0) -> dict:
    """Slope of log(degree) on t over deep vertices pooled across independent graphs.

    At desk scale a single graph holds well under one vertex above 3 log R, so
    the regression pools the deep vertices of ``seeds`` realizations. Vertices
    of degree 0 are dropped since their logarithm is undefined. The per-seed
    ``deep_vertex_report`` of every realization is returned alongside.
    """
    thr = 3.0 * math.log(params.R) if threshold is None else float(threshold)
    ts, ds, reports = [], [], []
    for rep in range(seeds):
        p = ModelParams(params.alpha, params.nu, params.n, derive_seed(base_seed, "deep-degree", rep))
        g = build_edges_bucketed(sample_vertices(p))
        t, d = deep_degree_samples(g, thr)
        ts.append(t)
        ds.append(d)
        reports.append(deep_vertex_report(g))
    t = np.concatenate(ts) if ts else np.empty(0)
    d = np.concatenate(ds) if ds else np.empty(0)
    keep = d > 0
    out = {"threshold": thr, "points": int(len(t)), "zero_degree": int((~keep).sum()), "slope": float("nan"),
           "intercept": float("nan"), "reports": reports}
    if keep.sum() >= 3:
        slope, intercept = np.polyfit(t[keep], np.log(d[keep]), 1)
        out.update(slope=float(slope), intercept=float(intercept))
    return out
