import math

import numpy as np
import pytest

from sparsekit.bench import (
    AggregateRow,
    BenchRecord,
    RECORD_FIELDS,
    SweepConfig,
    aggregate,
    emit_plot_data,
    merge_external_aggregates,
    read_records,
    run_sweep,
    write_aggregates,
    write_records,
)
from sparsekit.errors import EmptyGroup


def _strip_runtime(path):
    lines = path.read_text().splitlines()
    idx = RECORD_FIELDS.index("runtime_seconds")
    return [",".join(tok for i, tok in enumerate(line.split(",")) if i != idx) for line in lines]


def _small_cfg(**kw):
    base = dict(
        n=16,
        k=2,
        m_values=(24, 32),
        algorithms=("sp", "omp"),
        matrices_per_point=2,
        vectors_per_matrix=2,
        base_seed=5,
    )
    base.update(kw)
    return SweepConfig(**base)


def test_degenerate_sweep_single_record():
    cfg = _small_cfg(m_values=(24,), algorithms=("sp",), matrices_per_point=1, vectors_per_matrix=1)
    records = run_sweep(cfg)
    assert len(records) == 1
    rec = records[0]
    assert rec.algorithm == "sp" and rec.n == 16 and rec.m == 24 and rec.k == 2


def test_record_count_and_canonical_order():
    cfg = _small_cfg()
    records = run_sweep(cfg)
    assert len(records) == 2 * 2 * 2 * 2  # algorithms * points * matrices * vectors
    keys = [(r.algorithm, r.m, r.k, r.matrix_seed, r.vector_seed) for r in records]
    assert keys == sorted(keys)


def test_rerun_identical_and_parallel_matches_serial(tmp_path):
    cfg = _small_cfg()
    serial = run_sweep(cfg, workers=1)
    again = run_sweep(cfg, workers=1)
    parallel = run_sweep(cfg, workers=2)
    a, b, c = tmp_path / "a.csv", tmp_path / "b.csv", tmp_path / "c.csv"
    write_records(serial, a)
    write_records(again, b)
    write_records(parallel, c)
    # byte-identical apart from the wall-clock runtime column
    assert _strip_runtime(a) == _strip_runtime(b) == _strip_runtime(c)


def test_sweep_invariants():
    records = run_sweep(_small_cfg())
    for rec in records:
        if rec.exact_recovery:
            assert rec.support_overlap == 1.0
        assert 0.0 <= rec.support_overlap <= 1.0
        assert math.isfinite(rec.residual_norm)
        assert math.isfinite(rec.runtime_seconds)


def test_trial_failure_recorded_not_raised():
    # sp needs 2k <= N; with n=6, k=4 every sp trial fails but the sweep runs
    cfg = SweepConfig(
        n=6,
        k=4,
        m_values=(12,),
        algorithms=("sp", "omp"),
        matrices_per_point=1,
        vectors_per_matrix=2,
        base_seed=1,
    )
    records = run_sweep(cfg)
    sp_recs = [r for r in records if r.algorithm == "sp"]
    assert len(sp_recs) == 2
    for rec in sp_recs:
        assert not rec.converged and not rec.exact_recovery
        assert rec.support_overlap == 0.0
        assert math.isfinite(rec.residual_norm)
    # the healthy algorithm still produced normal records
    assert sum(r.algorithm == "omp" for r in records) == 2


def test_records_file_roundtrip(tmp_path):
    records = run_sweep(_small_cfg())
    path = tmp_path / "records.csv"
    write_records(records, path)
    assert path.read_text().splitlines()[0] == ",".join(RECORD_FIELDS)
    loaded = read_records(path)
    assert loaded == records


def _manual_record(algorithm="sp", runtime=1.0, exact=True, overlap=1.0, m=64):
    return BenchRecord(
        algorithm=algorithm,
        n=16,
        m=m,
        k=4,
        matrix_seed=1,
        vector_seed=2,
        runtime_seconds=runtime,
        exact_recovery=exact,
        support_overlap=overlap,
        residual_norm=0.0,
        converged=True,
        bottom_up_transfers=1024,
    )


def test_aggregate_single_record():
    rows = aggregate([_manual_record(runtime=0.25)], sweep_param="m")
    assert len(rows) == 1
    assert rows[0].mean_runtime == 0.25
    assert rows[0].std_runtime == 0.0
    assert rows[0].good_solution_ratio == 1.0


def test_aggregate_population_std():
    rows = aggregate(
        [_manual_record(runtime=1.0), _manual_record(runtime=3.0)], sweep_param="m"
    )
    assert rows[0].mean_runtime == pytest.approx(2.0)
    assert rows[0].std_runtime == pytest.approx(1.0)  # population, not sample, std


def test_aggregate_matches_brute_recomputation(tmp_path):
    records = run_sweep(_small_cfg(matrices_per_point=5, vectors_per_matrix=5))
    path = tmp_path / "records.csv"
    write_records(records, path)
    loaded = read_records(path)
    rows = aggregate(loaded, sweep_param="m")
    for row in rows:
        recs = [r for r in loaded if r.algorithm == row.algorithm and r.m == row.sweep_value]
        assert len(recs) == 25
        assert row.mean_runtime == pytest.approx(math.fsum(r.runtime_seconds for r in recs) / 25, rel=1e-12)
        mean = math.fsum(r.runtime_seconds for r in recs) / 25
        var = math.fsum((r.runtime_seconds - mean) ** 2 for r in recs) / 25
        assert row.std_runtime == pytest.approx(math.sqrt(var), rel=1e-9, abs=1e-15)
        assert row.good_solution_ratio == pytest.approx(
            sum(r.exact_recovery for r in recs) / 25
        )
        assert row.mean_overlap == pytest.approx(math.fsum(r.support_overlap for r in recs) / 25)
        assert row.mean_overlap >= row.good_solution_ratio - 1e-12


def test_aggregate_empty_raises():
    with pytest.raises(EmptyGroup):
        aggregate([])


def test_aggregate_infers_sweep_axis():
    recs = [_manual_record(m=64), _manual_record(m=128)]
    rows = aggregate(recs)
    assert {r.sweep_value for r in rows} == {64, 128}
    assert all(r.sweep_param == "m" for r in rows)


def test_emit_plot_data_schema(tmp_path):
    records = run_sweep(_small_cfg())
    rows = aggregate(records, sweep_param="m")
    written = emit_plot_data(rows, tmp_path / "plots", axes="log")
    names = {p.split("/")[-1] for p in written}
    assert {"runtime_sp.dat", "good_ratio_sp.dat", "overlap_sp.dat"} <= names
    runtime = (tmp_path / "plots" / "runtime_sp.dat").read_text().splitlines()
    assert "axes=log" in runtime[1]
    data_lines = [l for l in runtime if not l.startswith("#")]
    assert len(data_lines) == 2  # one per sweep point
    assert all(len(l.split()) == 3 for l in data_lines)  # x, mean, std
    ratio = (tmp_path / "plots" / "good_ratio_sp.dat").read_text().splitlines()
    assert all(len(l.split()) == 2 for l in ratio if not l.startswith("#"))


def test_merge_external_aggregates(tmp_path):
    records = run_sweep(_small_cfg())
    rows = aggregate(records, sweep_param="m")
    external = [
        AggregateRow(
            algorithm="l1magic",
            sweep_value=24,
            mean_runtime=4.2,
            std_runtime=0.1,
            good_solution_ratio=0.9,
            mean_overlap=0.95,
            mean_bottom_up_transfers=0.0,
        )
    ]
    path = tmp_path / "external.csv"
    write_aggregates(external, path)
    merged = merge_external_aggregates(rows, path)
    added = [r for r in merged if r.algorithm == "l1magic"]
    assert len(added) == 1 and added[0].mean_runtime == 4.2
    assert len(merged) == len(rows) + 1


def test_sweep_config_validation():
    with pytest.raises(ValueError):
        SweepConfig(n=16, m_values=(24,), k_values=(2,), k=2, m=24)
    with pytest.raises(ValueError):
        SweepConfig(n=16, m_values=(24,))  # missing fixed k
    with pytest.raises(ValueError):
        SweepConfig(n=16, k=2, m_values=(24,), algorithms=("nope",))
    with pytest.raises(ValueError):
        SweepConfig(n=16, k=2, m_values=(24,), overrides={"nope": {}})


def _without_runtime(records):
    return [
        tuple(getattr(r, f) for f in RECORD_FIELDS if f != "runtime_seconds") for r in records
    ]


def test_workers_resolved_from_environment(monkeypatch):
    cfg = _small_cfg(m_values=(24,), matrices_per_point=1, vectors_per_matrix=1)
    monkeypatch.setenv("SPARSEKIT_THREADS", "2")
    pooled = run_sweep(cfg)  # exercises the process-pool path
    assert len(pooled) == 2
    monkeypatch.setenv("SPARSEKIT_THREADS", "0")
    serial = run_sweep(cfg)
    assert _without_runtime(pooled) == _without_runtime(serial)
