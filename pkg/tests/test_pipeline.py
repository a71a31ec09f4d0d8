"""Dataset generation: manifests, shards, determinism, resume, corruption."""

import csv
import hashlib
import json
from pathlib import Path

import numpy as np
import pytest

from cubemix import pipeline, stats
from cubemix.errors import CorruptManifestError


def _init(tmp_path, **kwargs):
    defaults = dict(
        root_seed=77, steps=[0, 1, 2, pipeline.INF], samples_per_step=40,
        functionals=["d_o"], mode="corner", shard_size=50,
    )
    defaults.update(kwargs)
    return pipeline.init_dataset(tmp_path / "ds", **defaults)


def test_init_creates_manifest_and_shards(tmp_path):
    m = _init(tmp_path)
    assert m.total_rows == 160
    assert len(m.shards) == 4
    loaded = pipeline.load_manifest(tmp_path / "ds")
    assert loaded.root_seed == 77
    assert [s.status for s in loaded.shards] == ["pending"] * 4


def test_init_refuses_overwrite(tmp_path):
    _init(tmp_path)
    with pytest.raises(FileExistsError):
        _init(tmp_path)


def test_init_validates_arguments(tmp_path):
    with pytest.raises(ValueError):
        _init(tmp_path, mode="quotient")
    with pytest.raises(ValueError):
        _init(tmp_path, functionals=["d_x"])
    with pytest.raises(ValueError):
        _init(tmp_path, steps=[-2])


def test_manifest_rejects_malformed_json(tmp_path):
    d = tmp_path / "ds"
    d.mkdir()
    (d / "manifest.json").write_text("{not json")
    with pytest.raises(CorruptManifestError):
        pipeline.load_manifest(d)
    (d / "manifest.json").write_text(json.dumps({"root_seed": 1}))
    with pytest.raises(CorruptManifestError):
        pipeline.load_manifest(d)
    (d / "manifest.json").write_text(json.dumps({
        "format_version": 99, "root_seed": 1, "steps": [0],
        "samples_per_step": 1, "functionals": ["d_o"], "mode": "corner",
        "shard_size": 1,
    }))
    with pytest.raises(CorruptManifestError):
        pipeline.load_manifest(d)


def test_row_grid_layout(tmp_path):
    m = _init(tmp_path)
    assert m.row_key(0) == (0, 0)
    assert m.row_key(39) == (0, 39)
    assert m.row_key(40) == (1, 0)
    assert m.row_key(159) == (pipeline.INF, 39)


def test_run_and_status(tmp_path, corner_table):
    _init(tmp_path)
    d = tmp_path / "ds"
    pipeline.run_dataset(d, distance_table=corner_table)
    status = pipeline.dataset_status(d)
    assert status["shards_done"] == 4
    assert status["rows_done"] == 160
    assert status["budget_exhausted_rows"] == 0
    groups, dropped = pipeline.read_samples(d, "d_o")
    assert dropped == 0
    assert set(groups) == {0, 1, 2, pipeline.INF}
    assert all(len(v) == 40 for v in groups.values())
    assert np.all(groups[0] == 0)
    assert np.all(groups[1] <= 1)
    assert np.all(groups[2] <= 2)


def test_determinism_across_runs(tmp_path, corner_table):
    for name in ("a", "b"):
        sub = tmp_path / name
        sub.mkdir()
        _init(sub)
        pipeline.run_dataset(sub / "ds", distance_table=corner_table)
    for i in range(4):
        fa = (tmp_path / "a" / "ds" / f"shard_{i:05d}.csv").read_bytes()
        fb = (tmp_path / "b" / "ds" / f"shard_{i:05d}.csv").read_bytes()
        assert fa == fb


def test_resume_is_byte_identical(tmp_path, corner_table):
    # reference: uninterrupted run
    ref = tmp_path / "ref"
    ref.mkdir()
    _init(ref)
    pipeline.run_dataset(ref / "ds", distance_table=corner_table)

    # interrupted: mark shard 2 done by hand, others pending, then resume
    part = tmp_path / "part"
    part.mkdir()
    m = _init(part)
    d = part / "ds"
    computer = pipeline._RowComputer(m, distance_table=corner_table)
    data, ex = pipeline._shard_bytes(m, m.shards[2], computer)
    (d / m.shards[2].file).write_bytes(data)
    m.shards[2].status = "done"
    m.shards[2].rows = 50
    m.shards[2].digest = hashlib.sha256(data).hexdigest()
    pipeline.save_manifest(d, m)

    pipeline.run_dataset(d, distance_table=corner_table)
    for i in range(4):
        assert (d / f"shard_{i:05d}.csv").read_bytes() == (
            ref / "ds" / f"shard_{i:05d}.csv"
        ).read_bytes()


def test_flipped_byte_detected(tmp_path, corner_table):
    _init(tmp_path)
    d = tmp_path / "ds"
    pipeline.run_dataset(d, distance_table=corner_table)
    path = d / "shard_00001.csv"
    raw = bytearray(path.read_bytes())
    raw[25] ^= 1
    path.write_bytes(bytes(raw))
    with pytest.raises(CorruptManifestError):
        pipeline.dataset_status(d)
    with pytest.raises(CorruptManifestError):
        pipeline.run_dataset(d, distance_table=corner_table)


def test_missing_done_shard_detected(tmp_path, corner_table):
    _init(tmp_path)
    d = tmp_path / "ds"
    pipeline.run_dataset(d, distance_table=corner_table)
    (d / "shard_00000.csv").unlink()
    with pytest.raises(CorruptManifestError):
        pipeline.dataset_status(d)


def test_emit_decay_and_thresholds(tmp_path, corner_table):
    _init(tmp_path, steps=[0, 1, pipeline.INF], samples_per_step=200)
    d = tmp_path / "ds"
    pipeline.run_dataset(d, distance_table=corner_table)
    out = tmp_path / "decay.csv"
    curve = pipeline.emit_decay(d, "d_o", out, resamples=100, seed=5)
    assert curve.steps() == [0, 1]
    # point mass at the origin vs deep stationary samples: TV is exactly 1
    assert curve.points[0][1] == 1.0
    back = stats.DecayCurve.from_csv(out)
    assert [p[0] for p in back.points] == [0, 1]
    # CSV roundtrip preserves values to the documented 9 significant digits
    for (n1, t1, s1), (n2, t2, s2) in zip(curve.points, back.points):
        assert abs(t1 - t2) <= 1e-9 * max(1.0, abs(t1))


def test_emit_decay_requires_stationary_rows(tmp_path, corner_table):
    _init(tmp_path, steps=[0, 1])
    d = tmp_path / "ds"
    pipeline.run_dataset(d, distance_table=corner_table)
    with pytest.raises(ValueError):
        pipeline.emit_decay(d, "d_o", None)


def test_flat_zero_curve_when_groups_equal(tmp_path, corner_table):
    """A dataset whose rows at every n equal the stationary rows gives TV 0."""
    _init(tmp_path, steps=[3, pipeline.INF], samples_per_step=50)
    d = tmp_path / "ds"
    pipeline.run_dataset(d, distance_table=corner_table)
    # overwrite the n=3 rows with the stationary distances, keeping digests
    m = pipeline.load_manifest(d)
    groups, _ = pipeline.read_samples(d, "d_o")
    stationary = groups[pipeline.INF]
    for shard in m.shards:
        path = d / shard.file
        with open(path, newline="") as fh:
            rows = list(csv.reader(fh))
        for row in rows[1:]:
            if int(row[0]) == 3:
                row[2] = str(stationary[int(row[1])])
        text = "\n".join(",".join(r) for r in rows) + "\n"
        data = text.replace("\n", "\r\n").encode()
        path.write_bytes(data)
        shard.digest = hashlib.sha256(data).hexdigest()
    pipeline.save_manifest(d, m)
    curve = pipeline.emit_decay(d, "d_o", None, resamples=50, seed=1)
    assert curve.steps() == [3]
    assert curve.points[0][1] == 0.0  # plug-in TV of equal laws is exactly 0


def test_emit_histograms(tmp_path, corner_table):
    _init(tmp_path, steps=[0, pipeline.INF], samples_per_step=100)
    d = tmp_path / "ds"
    pipeline.run_dataset(d, distance_table=corner_table)
    out = tmp_path / "hists"
    result = pipeline.emit_histograms(d, "d_o", None, out)
    assert set(result) == {0, pipeline.INF}
    # n=0 is a point mass at distance zero
    assert result[0].counts[0] == 100
    rows = (out / "hist_000.csv").read_text().splitlines()
    assert rows[0] == "distance,count,probability"
    assert rows[1] == "0,100,1"
    probs = [float(r.split(",")[2]) for r in rows[1:]]
    assert abs(sum(probs) - 1.0) < 1e-9
    assert (out / "hist_inf.csv").exists()


def test_multiprocess_run_matches_serial(tmp_path, corner_table):
    serial = tmp_path / "s"
    parallel = tmp_path / "p"
    for sub in (serial, parallel):
        sub.mkdir()
        _init(sub, samples_per_step=20)
    pipeline.run_dataset(serial / "ds", distance_table=corner_table)
    pipeline.run_dataset(parallel / "ds", threads=2)
    for i in range(2):
        assert (serial / "ds" / f"shard_{i:05d}.csv").read_bytes() == (
            parallel / "ds" / f"shard_{i:05d}.csv"
        ).read_bytes()


def test_full_mode_budget_sentinel(tmp_path, pdbs):
    pipeline.init_dataset(
        tmp_path / "ds", root_seed=5, steps=[10], samples_per_step=3,
        functionals=["d_o"], mode="full", shard_size=10, budget_nodes=10,
    )
    d = tmp_path / "ds"
    pipeline.run_dataset(d, pdbs=pdbs)
    status = pipeline.dataset_status(d)
    assert status["budget_exhausted_rows"] == 3
    groups, dropped = pipeline.read_samples(d, "d_o")
    assert dropped == 3
    assert pipeline.INF not in groups and 10 not in groups  # all rows sentinel


def test_full_mode_matches_corner_lower_bound(tmp_path, pdbs, corner_table):
    pipeline.init_dataset(
        tmp_path / "ds", root_seed=6, steps=[4], samples_per_step=10,
        functionals=["d_o"], mode="full", shard_size=10,
    )
    d = tmp_path / "ds"
    pipeline.run_dataset(d, pdbs=pdbs)
    groups, _ = pipeline.read_samples(d, "d_o")
    # the corner projection is a contraction of the full metric
    m = pipeline.load_manifest(d)
    computer = pipeline._RowComputer(m, pdbs=pdbs)
    for idx, full_d in enumerate(groups[4]):
        state = computer.state_for(4, idx)
        assert corner_table.lookup(state) <= full_d <= 4
