"""Benchmark harness: seeded sweeps over overcompleteness or sparsity,
per-trial records, aggregation, and plot-data emission.

Every trial is identified by deterministic seeds derived from
(base_seed, point_index, matrix_index, vector_index), so reruns produce
byte-identical record files (runtime columns aside) regardless of whether
trials execute serially or in a process pool. Parallelism is capped by the
``SPARSEKIT_THREADS`` environment variable (unset, 0 or 1 means serial).
"""

from __future__ import annotations

import math
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, fields
from typing import Optional

import numpy as np

from .ce import CEConfig, run_ce
from .errors import EmptyGroup, SparsekitError
from .pursuit import PursuitConfig, run_mp, run_omp, run_sp
from .rng import RngStream, derive_seed
from .sce import SCEConfig, run_sce
from .synth import gen_dictionary, gen_instance

ALGORITHMS = ("mp", "omp", "sp", "ce", "sce")

# Benchmark-protocol parameter overlays, applied on top of each solver's own
# defaults. The SCE sparsity penalty is hand-calibrated for the synthetic
# protocol (see the calibration notes in the repo); everything else rides on
# the solver defaults.
PROTOCOL_PARAMS: dict[str, dict] = {
    "mp": {},
    "omp": {},
    "sp": {},
    "ce": {},
    "sce": {"lam": 0.05},
}


@dataclass
class SweepConfig:
    """One benchmark sweep: either m_values with fixed k, or k_values with
    fixed m. ``overrides`` maps algorithm name to solver parameter overrides
    (e.g. {"ce": {"population": 200}}).
    """

    n: int
    k: Optional[int] = None
    m: Optional[int] = None
    m_values: Optional[tuple[int, ...]] = None
    k_values: Optional[tuple[int, ...]] = None
    algorithms: tuple[str, ...] = ALGORITHMS
    matrices_per_point: int = 10
    vectors_per_matrix: int = 10
    base_seed: int = 0
    overrides: dict[str, dict] = field(default_factory=dict)

    def __post_init__(self):
        if (self.m_values is None) == (self.k_values is None):
            raise ValueError("exactly one of m_values / k_values must be given")
        if self.m_values is not None:
            if self.k is None:
                raise ValueError("m-sweep needs the fixed sparsity k")
            self.m_values = tuple(int(v) for v in self.m_values)
        else:
            if self.m is None:
                raise ValueError("k-sweep needs the fixed representation size m")
            self.k_values = tuple(int(v) for v in self.k_values)
        if self.n < 1 or self.matrices_per_point < 1 or self.vectors_per_matrix < 1:
            raise ValueError("dimensions and trial counts must be positive")
        unknown = set(self.algorithms) - set(ALGORITHMS)
        if unknown:
            raise ValueError(f"unknown algorithms: {sorted(unknown)}")
        unknown = set(self.overrides) - set(ALGORITHMS)
        if unknown:
            raise ValueError(f"overrides for unknown algorithms: {sorted(unknown)}")

    @property
    def sweep_param(self) -> str:
        return "m" if self.m_values is not None else "k"

    def points(self) -> list[tuple[int, int, int]]:
        """(point_index, m, k) for every sweep point."""
        if self.m_values is not None:
            return [(i, m, self.k) for i, m in enumerate(self.m_values)]
        return [(i, self.m, k) for i, k in enumerate(self.k_values)]


@dataclass
class BenchRecord:
    """Outcome of one (algorithm, trial) pair."""

    algorithm: str
    n: int
    m: int
    k: int
    matrix_seed: int
    vector_seed: int
    runtime_seconds: float
    exact_recovery: bool
    support_overlap: float
    residual_norm: float
    converged: bool
    bottom_up_transfers: int


RECORD_FIELDS = [f.name for f in fields(BenchRecord)]
RUNTIME_COLUMN = "runtime_seconds"


def _solver_call(algorithm: str, k: int, params: dict):
    """Build (run(D, x, stream) -> solution, eps(x) -> convergence threshold)."""
    merged = dict(PROTOCOL_PARAMS[algorithm])
    merged.update(params)
    if algorithm in ("mp", "omp", "sp"):
        cfg = PursuitConfig(k=k, **merged)
        runner = {"mp": run_mp, "omp": run_omp, "sp": run_sp}[algorithm]
        return (lambda D, x, stream: runner(D, x, cfg)), cfg.effective_tol
    if algorithm == "ce":
        cfg = CEConfig(k=k, **merged)
        return (lambda D, x, stream: run_ce(D, x, cfg, stream)), cfg.effective_eps
    inner_keys = {"population", "elite_ratio", "step_size", "stop_eps", "eps_relative", "lam"}
    unknown = set(merged) - inner_keys - {"inner_iters", "outer_iters"}
    if unknown:
        raise ValueError(f"unknown sce parameters: {sorted(unknown)}")
    inner_params = {key: merged[key] for key in merged if key in inner_keys}
    if "inner_iters" in merged:
        inner_params["max_iters"] = merged["inner_iters"]
    inner_defaults = dict(population=100, elite_ratio=0.05, step_size=0.9, max_iters=6)
    inner_defaults.update(inner_params)
    cfg = SCEConfig(
        k=k,
        outer_iters=merged.get("outer_iters", 20),
        inner=CEConfig(k=k, **inner_defaults),
    )
    return (lambda D, x, stream: run_sce(D, x, cfg, stream)), cfg.inner.effective_eps


def _run_trial_task(task) -> list[BenchRecord]:
    """Run all algorithms on one (point, matrix, vector) trial."""
    n, m, k, matrix_seed, vector_seed, algorithms, overrides = task
    D = gen_dictionary(n, m, matrix_seed)
    inst = gen_instance(D, k, vector_seed)
    x = inst.signal
    true_set = set(int(j) for j in inst.true_support)
    records = []
    for alg_index, algorithm in enumerate(algorithms):
        run, eps_fn = _solver_call(algorithm, k, overrides.get(algorithm, {}))
        stream = RngStream(vector_seed).child(1, alg_index)
        start = time.perf_counter()
        try:
            sol = run(D, x, stream)
            elapsed = time.perf_counter() - start
            found = set(int(j) for j in sol.support)
            records.append(
                BenchRecord(
                    algorithm=algorithm,
                    n=n,
                    m=m,
                    k=k,
                    matrix_seed=matrix_seed,
                    vector_seed=vector_seed,
                    runtime_seconds=elapsed,
                    exact_recovery=found == true_set,
                    support_overlap=len(found & true_set) / k,
                    residual_norm=sol.residual_norm,
                    converged=sol.residual_norm <= eps_fn(x),
                    bottom_up_transfers=sol.bottom_up_transfers,
                )
            )
        except SparsekitError:
            elapsed = time.perf_counter() - start
            records.append(
                BenchRecord(
                    algorithm=algorithm,
                    n=n,
                    m=m,
                    k=k,
                    matrix_seed=matrix_seed,
                    vector_seed=vector_seed,
                    runtime_seconds=elapsed,
                    exact_recovery=False,
                    support_overlap=0.0,
                    residual_norm=float(np.linalg.norm(x)),
                    converged=False,
                    bottom_up_transfers=0,
                )
            )
    return records


def resolve_workers(workers: Optional[int] = None) -> int:
    """Worker count: explicit argument, else SPARSEKIT_THREADS, else serial."""
    if workers is None:
        workers = int(os.environ.get("SPARSEKIT_THREADS", "0") or "0")
    return max(workers, 1)


def run_sweep(cfg: SweepConfig, workers: Optional[int] = None) -> list[BenchRecord]:
    """Execute the sweep and return records in canonical order.

    Records are sorted by (algorithm, m, k, matrix_seed, vector_seed) after
    collection, so serial and parallel schedules produce identical output.
    Per-trial solver failures become non-converged records; they never abort
    the sweep.
    """
    tasks = []
    for point_index, m, k in cfg.points():
        for mat_index in range(cfg.matrices_per_point):
            matrix_seed = derive_seed(cfg.base_seed, point_index, mat_index)
            for vec_index in range(cfg.vectors_per_matrix):
                vector_seed = derive_seed(cfg.base_seed, point_index, mat_index, vec_index)
                tasks.append(
                    (cfg.n, m, k, matrix_seed, vector_seed, cfg.algorithms, cfg.overrides)
                )
    n_workers = resolve_workers(workers)
    records: list[BenchRecord] = []
    if n_workers <= 1:
        for task in tasks:
            records.extend(_run_trial_task(task))
    else:
        with ProcessPoolExecutor(max_workers=n_workers) as pool:
            for result in pool.map(_run_trial_task, tasks, chunksize=4):
                records.extend(result)
    records.sort(key=lambda r: (r.algorithm, r.m, r.k, r.matrix_seed, r.vector_seed))
    return records


def _format_value(value) -> str:
    if isinstance(value, bool):
        return "1" if value else "0"
    if isinstance(value, float):
        return f"{value:.17g}"
    return str(value)


def write_records(records: list[BenchRecord], path) -> None:
    """Comma-separated records, one line per trial, floats at 17 digits."""
    lines = [",".join(RECORD_FIELDS)]
    for rec in records:
        lines.append(",".join(_format_value(getattr(rec, name)) for name in RECORD_FIELDS))
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def read_records(path) -> list[BenchRecord]:
    with open(path) as fh:
        lines = fh.read().splitlines()
    if not lines or lines[0].split(",") != RECORD_FIELDS:
        raise ValueError(f"{path}: not a sparsekit records file")
    records = []
    for line in lines[1:]:
        tok = line.split(",")
        records.append(
            BenchRecord(
                algorithm=tok[0],
                n=int(tok[1]),
                m=int(tok[2]),
                k=int(tok[3]),
                matrix_seed=int(tok[4]),
                vector_seed=int(tok[5]),
                runtime_seconds=float(tok[6]),
                exact_recovery=tok[7] == "1",
                support_overlap=float(tok[8]),
                residual_norm=float(tok[9]),
                converged=tok[10] == "1",
                bottom_up_transfers=int(tok[11]),
            )
        )
    return records


@dataclass
class AggregateRow:
    """Per-(algorithm, sweep point) statistics over all trials."""

    algorithm: str
    sweep_value: int
    mean_runtime: float
    std_runtime: float
    good_solution_ratio: float
    mean_overlap: float
    mean_bottom_up_transfers: float
    sweep_param: str = "m"


AGGREGATE_FIELDS = [
    "algorithm",
    "sweep_value",
    "mean_runtime",
    "std_runtime",
    "good_solution_ratio",
    "mean_overlap",
    "mean_bottom_up_transfers",
]


def aggregate(records: list[BenchRecord], sweep_param: Optional[str] = None) -> list[AggregateRow]:
    """Group records by (algorithm, sweep value) and reduce.

    ``std_runtime`` is the population standard deviation. The sweep axis is
    inferred when not given: the one of m / k that actually varies.
    """
    if not records:
        raise EmptyGroup("no records to aggregate")
    if sweep_param is None:
        sweep_param = "m" if len({r.m for r in records}) > 1 else "k"
    if sweep_param not in ("m", "k"):
        raise ValueError("sweep_param must be 'm' or 'k'")
    groups: dict[tuple[str, int], list[BenchRecord]] = {}
    for rec in records:
        key = (rec.algorithm, rec.m if sweep_param == "m" else rec.k)
        groups.setdefault(key, []).append(rec)
    rows = []
    for (algorithm, value) in sorted(groups):
        recs = groups[(algorithm, value)]
        runtimes = np.array([r.runtime_seconds for r in recs])
        rows.append(
            AggregateRow(
                algorithm=algorithm,
                sweep_value=value,
                mean_runtime=float(runtimes.mean()),
                std_runtime=float(runtimes.std()),
                good_solution_ratio=float(np.mean([r.exact_recovery for r in recs])),
                mean_overlap=float(np.mean([r.support_overlap for r in recs])),
                mean_bottom_up_transfers=float(np.mean([r.bottom_up_transfers for r in recs])),
                sweep_param=sweep_param,
            )
        )
    return rows


def write_aggregates(rows: list[AggregateRow], path) -> None:
    lines = [",".join(AGGREGATE_FIELDS)]
    for row in rows:
        lines.append(",".join(_format_value(getattr(row, name)) for name in AGGREGATE_FIELDS))
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def read_aggregates(path, sweep_param: str = "m") -> list[AggregateRow]:
    with open(path) as fh:
        lines = fh.read().splitlines()
    if not lines or lines[0].split(",") != AGGREGATE_FIELDS:
        raise ValueError(f"{path}: not a sparsekit aggregates file")
    rows = []
    for line in lines[1:]:
        tok = line.split(",")
        rows.append(
            AggregateRow(
                algorithm=tok[0],
                sweep_value=int(tok[1]),
                mean_runtime=float(tok[2]),
                std_runtime=float(tok[3]),
                good_solution_ratio=float(tok[4]),
                mean_overlap=float(tok[5]),
                mean_bottom_up_transfers=float(tok[6]),
                sweep_param=sweep_param,
            )
        )
    return rows


def merge_external_aggregates(rows: list[AggregateRow], path) -> list[AggregateRow]:
    """Merge an aggregates-shaped file of third-party results (e.g. an
    external LP solver) into ``rows``; external entries win on key clashes.
    """
    sweep_param = rows[0].sweep_param if rows else "m"
    external = read_aggregates(path, sweep_param=sweep_param)
    merged = {(r.algorithm, r.sweep_value): r for r in rows}
    merged.update({(r.algorithm, r.sweep_value): r for r in external})
    return [merged[key] for key in sorted(merged)]


def emit_plot_data(rows: list[AggregateRow], out_dir, axes: str = "linear") -> list[str]:
    """One text file per (panel, series): runtime (with y-err), good-solution
    ratio, and mean support overlap. Data is identical for linear and log
    axes; the requested scaling is recorded in the header metadata.
    """
    if not rows:
        raise EmptyGroup("no aggregate rows to emit")
    if axes not in ("linear", "log"):
        raise ValueError("axes must be 'linear' or 'log'")
    os.makedirs(out_dir, exist_ok=True)
    panels = {
        "runtime": ("mean_runtime", "std_runtime"),
        "good_ratio": ("good_solution_ratio", None),
        "overlap": ("mean_overlap", None),
    }
    written = []
    algorithms = sorted({r.algorithm for r in rows})
    for panel, (ycol, errcol) in panels.items():
        for algorithm in algorithms:
            series = sorted(
                (r for r in rows if r.algorithm == algorithm), key=lambda r: r.sweep_value
            )
            sweep_param = series[0].sweep_param
            lines = [
                f"# sparsekit plot data: panel={panel} series={algorithm}",
                f"# x={sweep_param} y={ycol}"
                + (f" yerr={errcol}" if errcol else "")
                + f" axes={axes}",
            ]
            for row in series:
                cells = [str(row.sweep_value), f"{getattr(row, ycol):.17g}"]
                if errcol:
                    cells.append(f"{getattr(row, errcol):.17g}")
                lines.append(" ".join(cells))
            path = os.path.join(out_dir, f"{panel}_{algorithm}.dat")
            with open(path, "w") as fh:
                fh.write("\n".join(lines) + "\n")
            written.append(path)
    return written


def summarize(rows: list[AggregateRow]) -> str:
    """Human-readable summary table of aggregate rows."""
    header = f"{'algorithm':>9} {'point':>6} {'mean_t':>9} {'std_t':>9} {'good':>6} {'overlap':>8} {'transfers':>12}"
    lines = [header]
    for r in rows:
        lines.append(
            f"{r.algorithm:>9} {r.sweep_param}={r.sweep_value:<4} "
            f"{r.mean_runtime:9.4f} {r.std_runtime:9.4f} {r.good_solution_ratio:6.2f} "
            f"{r.mean_overlap:8.2f} {r.mean_bottom_up_transfers:12.0f}"
        )
    return "\n".join(lines)
