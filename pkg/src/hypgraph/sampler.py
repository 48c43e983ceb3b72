"""Vertex sampling for the Poissonized model and the fixed-size variant."""
from __future__ import annotations

import csv
import math
import warnings
import zlib
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import ParameterError, ResourceError
from .geometry import TWO_PI, ModelParams, PolarPoint, _asinh_exp, log_sinh, reduce_angle

MODES = ("poisson", "fixed")
DEFAULT_MAX_POINTS = 30_000_000


def make_rng(seed: int, tag: str, index: int = 0) -> np.random.Generator:
    """Independent generator for the substream (tag, index) of a master seed.

    Substreams with different tags or indices are statistically independent
    and do not depend on the order in which they are requested.
    """
    key = (zlib.crc32(tag.encode("utf-8")), int(index))
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(int(seed), spawn_key=key)))


def sample_radius(u, params: ModelParams):
    """Inverse CDF of the radial density alpha sinh(alpha r) / (cosh(alpha R) - 1).

    ``arccosh(1 + u (cosh(aR) - 1)) / a`` is rewritten as
    ``2 asinh(sqrt(u) sinh(aR/2)) / a`` and evaluated in the log domain.
    """
    u = np.asarray(u, dtype=float)
    if np.any((u < 0) | (u > 1)):
        raise ParameterError("uniform variates must lie in [0, 1]")
    a = params.alpha
    with np.errstate(divide="ignore"):
        lx = 0.5 * np.log(u) + log_sinh(a * params.R / 2.0)
    r = np.where(u == 0, 0.0, 2.0 * _asinh_exp(lx) / a)
    r = np.where(u == 1, params.R, np.minimum(r, params.R))
    if r.ndim == 0:
        return float(r)
    return r


@dataclass
class VertexSample:
    """Sampled vertex set, sorted by angle; vertex ids are positions in that order."""

    t: np.ndarray
    theta: np.ndarray
    params: ModelParams
    mode: str = "poisson"
    seed: int = 0
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.t = np.ascontiguousarray(self.t, dtype=float)
        self.theta = np.ascontiguousarray(self.theta, dtype=float)
        self.t.setflags(write=False)
        self.theta.setflags(write=False)

    def __len__(self):
        return len(self.t)

    @property
    def R(self) -> float:
        return self.params.R

    @property
    def points(self) -> list[PolarPoint]:
        return [PolarPoint(float(a), float(b)) for a, b in zip(self.t, self.theta)]

    @property
    def is_sorted(self) -> bool:
        return bool(np.all(np.diff(self.theta) >= 0))

    @classmethod
    def from_arrays(cls, t, theta, params: ModelParams, mode="poisson", seed=0):
        """Build a sample from raw coordinates, sorting by angle (stable on ties)."""
        t = np.asarray(t, dtype=float).ravel()
        theta = reduce_angle(np.asarray(theta, dtype=float).ravel())
        if t.shape != theta.shape:
            raise ParameterError("t and theta must have equal length")
        order = np.argsort(theta, kind="stable")
        return cls(t[order], theta[order], params, mode, seed)


def sample_vertices(params: ModelParams, mode: str = "poisson", seed: int | None = None,
                    max_points: int = DEFAULT_MAX_POINTS) -> VertexSample:
    """Draw the vertex set.

    ``poisson`` draws N ~ Poisson(n) points; ``fixed`` draws exactly round(n).
    Each point has a uniform angle and a radius from the inverse CDF.
    """
    if mode not in MODES:
        raise ParameterError(f"mode must be one of {MODES}, got {mode!r}")
    seed = params.seed if seed is None else int(seed)
    if params.n > max_points:
        raise ResourceError(f"expected {params.n:g} points exceeds cap {max_points}")
    rng = make_rng(seed, "vertices")
    count = int(rng.poisson(params.n)) if mode == "poisson" else int(round(params.n))
    if count > max_points:
        raise ResourceError(f"{count} points exceeds cap {max_points}")
    theta = rng.random(count) * TWO_PI
    r = sample_radius(rng.random(count), params)
    # the disk is open at the boundary
    r = np.minimum(r, np.nextafter(params.R, 0.0))
    t = params.R - r
    return VertexSample.from_arrays(t, theta, params, mode, seed)


def write_vertices_csv(sample: VertexSample, path):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["id", "t", "theta"])
        for i, (a, b) in enumerate(zip(sample.t.tolist(), sample.theta.tolist())):
            w.writerow([i, f"{a:.17g}", f"{b:.17g}"])


def read_vertices_csv(path, params: ModelParams) -> VertexSample:
    """Read a vertex CSV; ids must be 0..N-1 in angular order."""
    with warnings.catch_warnings():
        warnings.filterwarnings("ignore", message="loadtxt: input contained no data")
        data = np.loadtxt(Path(path), delimiter=",", skiprows=1, ndmin=2)
    if data.size == 0:
        return VertexSample(np.empty(0), np.empty(0), params)
    ids = data[:, 0].astype(np.int64)
    if not np.array_equal(ids, np.arange(len(ids))):
        raise ParameterError("vertex ids must be 0..N-1 in file order")
    sample = VertexSample(data[:, 1], data[:, 2], params)
    if not sample.is_sorted:
        raise ParameterError("vertex rows must be sorted by theta")
    return sample


def expected_count(params: ModelParams) -> float:
    return params.nu * math.exp(params.R / 2.0)


def derive_seed(base_seed: int, tag: str, index: int = 0) -> int:
    """Deterministic 63-bit seed for replicate `index` of the experiment part `tag`."""
    key = (zlib.crc32(tag.encode("utf-8")), int(index))
    a, b = np.random.SeedSequence(int(base_seed), spawn_key=key).generate_state(2, dtype=np.uint32)
    return int((int(a) << 31) ^ int(b))
