"""Point/dataset model, the Euclidean metric, synthetic data, and CSV ingestion.

Every distance used anywhere in the package flows through the kernels in this
module (`sq_dists`, `cross_sq_dists`, `sqdist`).  They all reduce squared
coordinate differences with the same ``np.einsum`` contraction, which makes the
resulting floats bitwise identical no matter whether a distance was computed
one pair at a time, as a batch against a query, or as a block of a cross
matrix.  That consistency is what lets independently-implemented MST and k-NN
routines agree exactly instead of merely within tolerance.

Ties between equal distances are broken by the normalized id pair, giving a
total order on point pairs (`pair_less`); all neighbor and spanning-tree code
shares it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "ParseError",
    "Point",
    "Dataset",
    "Edge",
    "EdgeList",
    "euclidean_distance",
    "generate_synthetic",
    "load_dataset",
    "write_dataset",
    "sq_dists",
    "cross_sq_dists",
    "sqdist",
    "make_edge",
    "pair_less",
    "fmt17",
]

DISTRIBUTIONS = ("uniform", "gaussian")

# Element budget for one cross-distance diff temporary (~32 MB of float64);
# chunking changes no computed bit since row reductions are batch-independent.
_CROSS_CHUNK_ELEMS = 4_000_000


class ParseError(ValueError):
    """A dataset file could not be parsed; the message names row (and column)."""


# ---------------------------------------------------------------------------
# metric kernels


def sq_dists(points: np.ndarray, q: np.ndarray) -> np.ndarray:
    """Squared Euclidean distances from each row of `points` to `q`."""
    d = points - q
    return np.einsum("ij,ij->i", d, d)


def cross_sq_dists(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """All-pairs squared distances between rows of `a` and rows of `b`."""
    out = np.empty((a.shape[0], b.shape[0]))
    step = max(1, _CROSS_CHUNK_ELEMS // max(1, b.shape[0] * b.shape[1]))
    for lo in range(0, a.shape[0], step):
        hi = min(lo + step, a.shape[0])
        d = a[lo:hi, None, :] - b[None, :, :]
        np.einsum("ijk,ijk->ij", d, d, out=out[lo:hi])
    return out


def sqdist(a: np.ndarray, b: np.ndarray) -> float:
    """Squared distance between two coordinate vectors."""
    return float(sq_dists(a[None, :], b)[0])


def pair_less(w1: float, u1: int, v1: int, w2: float, u2: int, v2: int) -> bool:
    """Total order on weighted id pairs: weight, then min id, then max id."""
    return (w1, u1, v1) < (w2, u2, v2)


def fmt17(x: float) -> str:
    """Format a float with 17 significant digits (lossless for binary64)."""
    return format(x, ".17g")


# ---------------------------------------------------------------------------
# domain types


@dataclass(frozen=True, eq=False)
class Point:
    """A d-dimensional point with a stable non-negative integer id."""

    id: int
    coords: np.ndarray

    def __post_init__(self):
        if self.id < 0:
            raise ValueError(f"point id must be non-negative, got {self.id}")
        coords = np.ascontiguousarray(self.coords, dtype=np.float64)
        if coords.ndim != 1:
            raise ValueError(f"coords must be 1-D, got shape {coords.shape}")
        if not np.isfinite(coords).all():
            raise ValueError(f"point {self.id} has non-finite coordinates")
        object.__setattr__(self, "coords", coords)

    @property
    def dim(self) -> int:
        return self.coords.shape[0]


class Dataset:
    """An immutable set of n points in d dimensions with ids 0..n-1.

    Coordinates are held in one read-only (n, d) float64 array; `Point`
    objects are created on demand as views into it.
    """

    def __init__(self, coords: np.ndarray):
        coords = np.ascontiguousarray(coords, dtype=np.float64)
        if coords.ndim != 2:
            raise ValueError(f"coords must be 2-D (n, d), got shape {coords.shape}")
        if coords.shape[0] < 1 or coords.shape[1] < 1:
            raise ValueError(f"dataset needs n >= 1 and d >= 1, got shape {coords.shape}")
        if not np.isfinite(coords).all():
            raise ValueError("dataset contains non-finite coordinates")
        coords.setflags(write=False)
        self.coords = coords

    @property
    def n(self) -> int:
        return self.coords.shape[0]

    @property
    def d(self) -> int:
        return self.coords.shape[1]

    def point(self, i: int) -> Point:
        return Point(i, self.coords[i])

    @property
    def points(self) -> list[Point]:
        return [self.point(i) for i in range(self.n)]

    def __len__(self) -> int:
        return self.n

    def __repr__(self) -> str:
        return f"Dataset(n={self.n}, d={self.d})"


def _coords_of(p) -> np.ndarray:
    return p.coords if isinstance(p, Point) else np.asarray(p, dtype=np.float64)


def euclidean_distance(a, b) -> float:
    """Euclidean distance between two points (or raw coordinate vectors)."""
    ca, cb = _coords_of(a), _coords_of(b)
    if ca.shape[0] != cb.shape[0]:
        raise ValueError(
            f"dimension mismatch: {ca.shape[0]} vs {cb.shape[0]}"
        )
    return math.sqrt(sqdist(ca, cb))


@dataclass(frozen=True)
class Edge:
    """A weighted edge between point ids, normalized so u < v."""

    u: int
    v: int
    weight: float

    def __post_init__(self):
        if not self.u < self.v:
            raise ValueError(f"edge ids must satisfy u < v, got ({self.u}, {self.v})")

    @property
    def key(self) -> tuple[float, int, int]:
        return (self.weight, self.u, self.v)


def make_edge(coords: np.ndarray, i: int, j: int) -> Edge:
    """Edge between ids i and j with the canonical weight and orientation."""
    if i == j:
        raise ValueError(f"self-edge at id {i}")
    u, v = (i, j) if i < j else (j, i)
    return Edge(u, v, math.sqrt(sqdist(coords[u], coords[v])))


@dataclass
class EdgeList:
    """A list of edges plus their summed weight (fsum for stability)."""

    edges: list[Edge]
    total_weight: float

    @classmethod
    def from_edges(cls, edges: list[Edge]) -> "EdgeList":
        return cls(list(edges), math.fsum(e.weight for e in edges))

    def sorted_edges(self) -> list[Edge]:
        return sorted(self.edges, key=lambda e: e.key)

    def __len__(self) -> int:
        return len(self.edges)


# ---------------------------------------------------------------------------
# synthetic data and CSV ingestion


def generate_synthetic(n: int, d: int, distribution: str = "uniform", seed: int = 0) -> Dataset:
    """Deterministic synthetic dataset of n points in d dimensions.

    `uniform` draws each coordinate from [0, 1); `gaussian` draws from a
    standard normal.  The generator is numpy's PCG64, so equal arguments
    always reproduce the same dataset bit for bit.
    """
    if n < 1 or d < 1:
        raise ValueError(f"need n >= 1 and d >= 1, got n={n}, d={d}")
    if distribution not in DISTRIBUTIONS:
        raise ValueError(f"unknown distribution {distribution!r}, expected one of {DISTRIBUTIONS}")
    rng = np.random.default_rng(seed)
    if distribution == "uniform":
        coords = rng.random((n, d))
    else:
        coords = rng.standard_normal((n, d))
    return Dataset(coords)


def load_dataset(path, format: str = "csv") -> Dataset:
    """Load a dataset from a CSV file: one point per row, comma-separated.

    A single leading non-numeric row is treated as a header and skipped.
    Rows must all have the same number of fields; d is inferred from the
    first data row and ids are assigned in row order.
    """
    if format != "csv":
        raise ValueError(f"unsupported format {format!r}")
    with open(path, "r", encoding="utf-8") as fh:
        lines = fh.read().split("\n")

    rows: list[list[float]] = []
    d = None
    for lineno, line in enumerate(lines, start=1):
        if not line.strip():
            continue
        fields = line.split(",")
        values = []
        bad_col = None
        for col, field in enumerate(fields, start=1):
            try:
                values.append(float(field))
            except ValueError:
                bad_col = col
                break
        if bad_col is not None:
            if not rows and d is None:
                # header row: skipped, but it still pins the field count
                d = len(fields)
                continue
            raise ParseError(f"non-numeric field at row {lineno}, column {bad_col}: {fields[bad_col - 1]!r}")
        if d is None:
            d = len(values)
        elif len(values) != d:
            raise ParseError(f"ragged row {lineno}: expected {d} fields, got {len(values)}")
        rows.append(values)

    if not rows:
        raise ValueError(f"no data rows in {path}")
    return Dataset(np.array(rows, dtype=np.float64))


def write_dataset(ds: Dataset, path, header: list[str] | None = None) -> None:
    """Write a dataset as CSV with 17-significant-digit coordinates."""
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        if header is not None:
            fh.write(",".join(header) + "\n")
        for row in ds.coords:
            fh.write(",".join(fmt17(x) for x in row) + "\n")
