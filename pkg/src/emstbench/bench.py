"""Timing harness: Build / Insertion / Deletion / N-NN Search per structure.

Each (backend, operation, n, d) cell is measured `trials` times on a
monotonic clock after one untimed warmup, and reported as the median.  Every
timed workload (datasets, inserted points, deleted ids, query points) is
derived deterministically from the config seed, so two runs of the same
config time identical work.  End-to-end EMST timing (index build plus
Boruvka) is available as the optional `emst` operation.
"""

from __future__ import annotations

import json
import platform
import statistics
import time
from dataclasses import dataclass, field

import numpy as np

from .core import Point, generate_synthetic
from .emst import BACKENDS, dual_tree_boruvka

__all__ = [
    "OPERATIONS",
    "BenchConfig",
    "TimingRecord",
    "RatioRecord",
    "BenchmarkReport",
    "run_suite",
    "emit_report",
    "parse_report_csv",
]

OPERATIONS = ("build", "insert", "delete", "nn_search", "emst")
CSV_HEADER = "backend,operation,n,d,elapsed_ms,trials,seed"
RATIO_HEADER = "operation,n,d,ball_over_kd"
_LEAF_CAPACITY = 20  # shared by both backends so cells compare structures, not tuning


@dataclass
class BenchConfig:
    """What to measure: sizes x dims x backends x operations, plus workload knobs."""

    sizes: list[int] = field(default_factory=lambda: [1000, 5000, 20000])
    dims: list[int] = field(default_factory=lambda: [15])
    distribution: str = "uniform"
    seed: int = 42
    trials: int = 3
    knn_queries: int = 1000
    knn_k: int = 1
    mutation_count: int | None = None  # None: n // 10 per cell
    operations: list[str] = field(default_factory=lambda: ["build", "insert", "delete", "nn_search"])
    backends: list[str] = field(default_factory=lambda: ["kd", "ball"])

    def validate(self) -> None:
        if not self.sizes or any(n < 1 for n in self.sizes):
            raise ValueError(f"sizes must be non-empty positive ints, got {self.sizes}")
        if not self.dims or any(d < 1 for d in self.dims):
            raise ValueError(f"dims must be non-empty positive ints, got {self.dims}")
        if self.distribution not in ("uniform", "gaussian"):
            raise ValueError(f"unknown distribution {self.distribution!r}")
        if self.trials < 3:
            raise ValueError(f"trials must be >= 3 for a meaningful median, got {self.trials}")
        if self.knn_queries < 1 or self.knn_k < 1:
            raise ValueError("knn_queries and knn_k must be >= 1")
        if self.mutation_count is not None and self.mutation_count < 1:
            raise ValueError(f"mutation_count must be >= 1, got {self.mutation_count}")
        bad_ops = [op for op in self.operations if op not in OPERATIONS]
        if bad_ops or not self.operations:
            raise ValueError(f"operations must be a non-empty subset of {OPERATIONS}, got {self.operations}")
        bad_backends = [b for b in self.backends if b not in BACKENDS]
        if bad_backends or not self.backends:
            raise ValueError(f"backends must be a non-empty subset of {sorted(BACKENDS)}, got {self.backends}")

    @classmethod
    def from_dict(cls, data: dict) -> "BenchConfig":
        unknown = set(data) - set(cls.__dataclass_fields__)
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        return cls(**data)

    @classmethod
    def from_json_file(cls, path) -> "BenchConfig":
        with open(path, "r", encoding="utf-8") as fh:
            return cls.from_dict(json.load(fh))

    def to_dict(self) -> dict:
        return {
            "sizes": list(self.sizes),
            "dims": list(self.dims),
            "distribution": self.distribution,
            "seed": self.seed,
            "trials": self.trials,
            "knn_queries": self.knn_queries,
            "knn_k": self.knn_k,
            "mutation_count": self.mutation_count,
            "operations": list(self.operations),
            "backends": list(self.backends),
        }


@dataclass
class TimingRecord:
    """One measured cell; elapsed_ms is the median of trial_values_ms."""

    backend: str
    operation: str
    n: int
    d: int
    elapsed_ms: float
    trial_values_ms: list[float]
    trials: int
    seed: int


@dataclass
class RatioRecord:
    operation: str
    n: int
    d: int
    ball_over_kd: float


@dataclass
class BenchmarkReport:
    config: dict
    environment: str
    records: list[TimingRecord]
    ratios: list[RatioRecord]


def _workload_rng(seed: int, n: int, d: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence((seed, n, d)))


def _draw(rng: np.random.Generator, count: int, d: int, distribution: str) -> np.ndarray:
    if distribution == "uniform":
        return rng.random((count, d))
    return rng.standard_normal((count, d))


def _time_cell(fn, trials: int) -> list[float]:
    fn()  # warmup, untimed
    values = []
    for _ in range(trials):
        start = time.perf_counter()
        fn()
        values.append((time.perf_counter() - start) * 1000.0)
    return values


def run_suite(cfg: BenchConfig) -> BenchmarkReport:
    """Run every requested cell and assemble records plus ball/kd ratios."""
    cfg.validate()
    records: list[TimingRecord] = []
    for n in cfg.sizes:
        for d in cfg.dims:
            ds = generate_synthetic(n, d, cfg.distribution, cfg.seed)
            rng = _workload_rng(cfg.seed, n, d)
            mutations = cfg.mutation_count if cfg.mutation_count is not None else max(1, n // 10)
            insert_coords = _draw(rng, mutations, d, cfg.distribution)
            delete_ids = rng.choice(n, size=min(mutations, n), replace=False).tolist()
            query_coords = _draw(rng, cfg.knn_queries, d, cfg.distribution)
            for backend in cfg.backends:
                for operation in cfg.operations:
                    try:
                        values = _run_cell(
                            operation, backend, ds, insert_coords, delete_ids, query_coords, cfg
                        )
                    except Exception as exc:
                        raise RuntimeError(
                            f"benchmark cell failed: backend={backend} operation={operation} n={n} d={d}: {exc}"
                        ) from exc
                    records.append(
                        TimingRecord(
                            backend=backend,
                            operation=operation,
                            n=n,
                            d=d,
                            elapsed_ms=float(statistics.median(values)),
                            trial_values_ms=values,
                            trials=len(values),
                            seed=cfg.seed,
                        )
                    )
    environment = (
        f"{platform.platform()} / Python {platform.python_version()} / NumPy {np.__version__}"
    )
    return BenchmarkReport(
        config=cfg.to_dict(),
        environment=environment,
        records=records,
        ratios=_compute_ratios(records),
    )


def _run_cell(operation, backend, ds, insert_coords, delete_ids, query_coords, cfg) -> list[float]:
    tree_cls = BACKENDS[backend]

    if operation == "build":
        return _time_cell(lambda: tree_cls(ds, _LEAF_CAPACITY), cfg.trials)

    if operation == "insert":
        points = [Point(ds.n + j, row) for j, row in enumerate(insert_coords)]

        def run_inserts():
            tree = tree_cls(ds, _LEAF_CAPACITY)  # fresh tree per trial; build untimed
            start = time.perf_counter()
            for p in points:
                tree.insert(p)
            return (time.perf_counter() - start) * 1000.0

        return _timed_values(run_inserts, cfg.trials)

    if operation == "delete":

        def run_deletes():
            tree = tree_cls(ds, _LEAF_CAPACITY)
            start = time.perf_counter()
            for i in delete_ids:
                tree.delete(i)
            return (time.perf_counter() - start) * 1000.0

        return _timed_values(run_deletes, cfg.trials)

    if operation == "nn_search":
        tree = tree_cls(ds, _LEAF_CAPACITY)

        def run_queries():
            start = time.perf_counter()
            for q in query_coords:
                tree.knn(q, cfg.knn_k)
            return (time.perf_counter() - start) * 1000.0

        return _timed_values(run_queries, cfg.trials)

    if operation == "emst":
        return _time_cell(lambda: dual_tree_boruvka(ds, backend, _LEAF_CAPACITY), cfg.trials)

    raise ValueError(f"unknown operation {operation!r}")


def _timed_values(fn, trials: int) -> list[float]:
    fn()  # warmup
    return [fn() for _ in range(trials)]


def _compute_ratios(records: list[TimingRecord]) -> list[RatioRecord]:
    by_cell: dict[tuple[str, int, int], dict[str, float]] = {}
    order: list[tuple[str, int, int]] = []
    for r in records:
        key = (r.operation, r.n, r.d)
        if key not in by_cell:
            by_cell[key] = {}
            order.append(key)
        by_cell[key][r.backend] = r.elapsed_ms
    ratios = []
    for key in order:
        cell = by_cell[key]
        if "kd" in cell and "ball" in cell:
            ratios.append(RatioRecord(key[0], key[1], key[2], cell["ball"] / cell["kd"]))
    return ratios


# ---------------------------------------------------------------------------
# report formats


def emit_report(report: BenchmarkReport, format: str = "csv") -> str:
    """Render a report as CSV (two sections) or JSON (one object).

    CSV: the record header and rows, then a '# ratios' marker, the ratio
    header, and one row per cell where both backends ran.  JSON: one object
    with keys config, environment, records, ratios, in that order.
    """
    if format == "csv":
        lines = [CSV_HEADER]
        for r in report.records:
            lines.append(
                f"{r.backend},{r.operation},{r.n},{r.d},{r.elapsed_ms!r},{r.trials},{r.seed}"
            )
        if report.records:
            lines.append("# ratios")
            lines.append(RATIO_HEADER)
            for rr in report.ratios:
                lines.append(f"{rr.operation},{rr.n},{rr.d},{rr.ball_over_kd!r}")
        return "\n".join(lines) + "\n"
    if format == "json":
        obj = {
            "config": report.config,
            "environment": report.environment,
            "records": [
                {
                    "backend": r.backend,
                    "operation": r.operation,
                    "n": r.n,
                    "d": r.d,
                    "elapsed_ms": r.elapsed_ms,
                    "trial_values_ms": r.trial_values_ms,
                    "trials": r.trials,
                    "seed": r.seed,
                }
                for r in report.records
            ],
            "ratios": [
                {
                    "operation": rr.operation,
                    "n": rr.n,
                    "d": rr.d,
                    "ball_over_kd": rr.ball_over_kd,
                }
                for rr in report.ratios
            ],
        }
        return json.dumps(obj, indent=2) + "\n"
    raise ValueError(f"unknown report format {format!r}")


def parse_report_csv(text: str) -> BenchmarkReport:
    """Parse emit_report CSV output back into a report (timing fields only)."""
    lines = text.splitlines()
    if not lines or lines[0] != CSV_HEADER:
        raise ValueError(f"bad report header: expected {CSV_HEADER!r}")
    records: list[TimingRecord] = []
    ratios: list[RatioRecord] = []
    i = 1
    while i < len(lines) and lines[i] != "# ratios":
        backend, operation, n, d, elapsed, trials, seed = lines[i].split(",")
        records.append(
            TimingRecord(
                backend=backend,
                operation=operation,
                n=int(n),
                d=int(d),
                elapsed_ms=float(elapsed),
                trial_values_ms=[],
                trials=int(trials),
                seed=int(seed),
            )
        )
        i += 1
    if i < len(lines):
        i += 1  # past '# ratios'
        if i >= len(lines) or lines[i] != RATIO_HEADER:
            raise ValueError(f"bad ratio header: expected {RATIO_HEADER!r}")
        i += 1
        while i < len(lines) and lines[i]:
            operation, n, d, value = lines[i].split(",")
            ratios.append(RatioRecord(operation, int(n), int(d), float(value)))
            i += 1
    return BenchmarkReport(config={}, environment="", records=records, ratios=ratios)
