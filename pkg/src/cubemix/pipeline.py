"""Sharded, checkpointed, resumable sample generation and CSV emission.

A dataset is a directory: ``manifest.json`` plus one CSV per shard. Every row
is reproducible from (root_seed, step, sample_index) alone, so any interleaving
of workers and interruptions yields byte-identical shards. Completed shards
are immutable and digest-verified on resume.
"""

from __future__ import annotations

import csv
import hashlib
import json
import os
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import stats
from .cube import CHECKERBOARD, ORIGIN, SUPERFLIP, CubeState, inverse, compose
from .errors import BudgetExhaustedError, CorruptManifestError
from .rng import (
    PURPOSE_STATIONARY,
    PURPOSE_WALK,
    STEP_INF,
    row_stream,
    uniform_state,
    walk,
)

FORMAT_VERSION = 1
INF = -1  # stationary rows carry n = -1 in files
SENTINEL = -1  # budget-exhausted distance value
FUNCTIONALS = ("d_o", "d_s", "d_c")
TARGETS = {"d_o": ORIGIN, "d_s": SUPERFLIP, "d_c": CHECKERBOARD}


@dataclass
class ShardInfo:
    index: int
    file: str
    status: str = "pending"  # "pending" | "done"
    rows: int = 0
    digest: str = ""
    exhausted: int = 0


@dataclass
class DatasetManifest:
    root_seed: int
    steps: list              # walk lengths; INF (-1) for stationary samples
    samples_per_step: int
    functionals: list
    mode: str = "corner"     # "corner" (distance-table) | "full" (solver)
    shard_size: int = 10_000
    budget_nodes: int | None = None
    budget_seconds: float | None = None
    format_version: int = FORMAT_VERSION
    shards: list = field(default_factory=list)

    @property
    def total_rows(self) -> int:
        return len(self.steps) * self.samples_per_step

    def row_key(self, row_index: int) -> tuple[int, int]:
        step = self.steps[row_index // self.samples_per_step]
        return step, row_index % self.samples_per_step

    def shard_rows(self, shard_index: int) -> range:
        lo = shard_index * self.shard_size
        return range(lo, min(lo + self.shard_size, self.total_rows))

    def to_json(self) -> dict:
        return {
            "format_version": self.format_version,
            "root_seed": self.root_seed,
            "steps": self.steps,
            "samples_per_step": self.samples_per_step,
            "functionals": self.functionals,
            "mode": self.mode,
            "shard_size": self.shard_size,
            "budget_nodes": self.budget_nodes,
            "budget_seconds": self.budget_seconds,
            "shards": [vars(s) for s in self.shards],
        }

    @classmethod
    def from_json(cls, data: dict) -> "DatasetManifest":
        try:
            m = cls(
                root_seed=data["root_seed"],
                steps=list(data["steps"]),
                samples_per_step=data["samples_per_step"],
                functionals=list(data["functionals"]),
                mode=data["mode"],
                shard_size=data["shard_size"],
                budget_nodes=data.get("budget_nodes"),
                budget_seconds=data.get("budget_seconds"),
                format_version=data["format_version"],
                shards=[ShardInfo(**s) for s in data.get("shards", [])],
            )
        except (KeyError, TypeError) as exc:
            raise CorruptManifestError(f"malformed manifest: {exc}") from exc
        if m.format_version != FORMAT_VERSION:
            raise CorruptManifestError(
                f"unsupported manifest format_version {m.format_version}"
            )
        return m


def manifest_path(dataset_dir) -> Path:
    return Path(dataset_dir) / "manifest.json"


def init_dataset(
    dataset_dir,
    root_seed: int,
    steps,
    samples_per_step: int,
    functionals=("d_o",),
    mode: str = "corner",
    shard_size: int = 10_000,
    budget_nodes: int | None = None,
    budget_seconds: float | None = None,
) -> DatasetManifest:
    dataset_dir = Path(dataset_dir)
    dataset_dir.mkdir(parents=True, exist_ok=True)
    if manifest_path(dataset_dir).exists():
        raise FileExistsError(f"{manifest_path(dataset_dir)} already exists")
    steps = list(steps)
    if mode not in ("corner", "full"):
        raise ValueError(f"unsupported dataset mode {mode!r}")
    for f in functionals:
        if f not in FUNCTIONALS:
            raise ValueError(f"unknown functional {f!r}")
    for s in steps:
        if s != INF and s < 0:
            raise ValueError(f"bad step {s}")
    m = DatasetManifest(
        root_seed=root_seed,
        steps=steps,
        samples_per_step=samples_per_step,
        functionals=list(functionals),
        mode=mode,
        shard_size=shard_size,
        budget_nodes=budget_nodes,
        budget_seconds=budget_seconds,
    )
    n_shards = (m.total_rows + shard_size - 1) // shard_size
    m.shards = [ShardInfo(i, f"shard_{i:05d}.csv") for i in range(n_shards)]
    save_manifest(dataset_dir, m)
    return m


def save_manifest(dataset_dir, manifest: DatasetManifest) -> None:
    path = manifest_path(dataset_dir)
    tmp = path.with_suffix(".json.tmp")
    tmp.write_text(json.dumps(manifest.to_json(), indent=2))
    os.replace(tmp, path)


def load_manifest(dataset_dir) -> DatasetManifest:
    path = manifest_path(dataset_dir)
    try:
        data = json.loads(path.read_text())
    except FileNotFoundError:
        raise
    except (json.JSONDecodeError, OSError) as exc:
        raise CorruptManifestError(f"unreadable manifest {path}: {exc}") from exc
    return DatasetManifest.from_json(data)


def _digest(path: Path) -> str:
    h = hashlib.sha256()
    h.update(path.read_bytes())
    return h.hexdigest()


def verify_shards(dataset_dir, manifest: DatasetManifest) -> None:
    """Digest-check every completed shard; corrupt data never goes unnoticed."""
    for shard in manifest.shards:
        if shard.status != "done":
            continue
        path = Path(dataset_dir) / shard.file
        if not path.exists():
            raise CorruptManifestError(f"shard marked done but missing: {path}")
        if _digest(path) != shard.digest:
            raise CorruptManifestError(f"shard digest mismatch: {path}")


class _RowComputer:
    """Computes the distance columns of one row deterministically."""

    def __init__(self, manifest: DatasetManifest, pdbs=None, distance_table=None):
        self.manifest = manifest
        self.exhausted = 0
        if manifest.mode == "corner":
            from .corner_chain import corner_bfs

            self.table = (
                distance_table if distance_table is not None else corner_bfs()
            )
            self.inv_targets = {
                f: inverse(TARGETS[f]) for f in manifest.functionals
            }
        else:
            from . import solver

            self.pdbs = pdbs if pdbs is not None else solver.load_or_build_pdbs()
            self.solver = solver

    def state_for(self, step: int, sample_index: int) -> CubeState:
        seed = self.manifest.root_seed
        if step == INF:
            rng = row_stream(seed, PURPOSE_STATIONARY, STEP_INF, sample_index)
            return uniform_state(rng)
        rng = row_stream(seed, PURPOSE_WALK, step, sample_index)
        return walk(ORIGIN, step, rng)

    def row(self, step: int, sample_index: int) -> list:
        state = self.state_for(step, sample_index)
        values = [step, sample_index]
        for f in self.manifest.functionals:
            values.append(self._distance(state, f))
        return values

    def _distance(self, state: CubeState, functional: str) -> int:
        if self.manifest.mode == "corner":
            return self.table.lookup(compose(self.inv_targets[functional], state))
        try:
            return self.solver.distance(
                state,
                TARGETS[functional],
                self.pdbs,
                node_budget=self.manifest.budget_nodes,
                time_budget=self.manifest.budget_seconds,
            )
        except BudgetExhaustedError:
            self.exhausted += 1
            return SENTINEL


def _shard_bytes(manifest: DatasetManifest, shard: ShardInfo, computer: _RowComputer) -> tuple[bytes, int]:
    import io

    before = computer.exhausted
    buf = io.StringIO()
    w = csv.writer(buf)
    w.writerow(["n", "sample_index"] + list(manifest.functionals))
    for row_index in manifest.shard_rows(shard.index):
        step, sample_index = manifest.row_key(row_index)
        w.writerow(computer.row(step, sample_index))
    return buf.getvalue().encode(), computer.exhausted - before


def _compute_shard(args):
    dataset_dir, manifest, shard_index, pdb_dir = args
    if manifest.mode == "full":
        from . import solver

        computer = _RowComputer(manifest, pdbs=solver.load_or_build_pdbs(pdb_dir))
    else:
        computer = _RowComputer(manifest)
    shard = manifest.shards[shard_index]
    data, exhausted = _shard_bytes(manifest, shard, computer)
    path = Path(dataset_dir) / shard.file
    tmp = path.with_suffix(".csv.tmp")
    tmp.write_bytes(data)
    os.replace(tmp, path)
    rows = len(manifest.shard_rows(shard_index))
    return shard_index, rows, hashlib.sha256(data).hexdigest(), exhausted


def run_dataset(dataset_dir, threads: int = 1, pdb_dir=None,
                pdbs=None, distance_table=None, progress=None) -> DatasetManifest:
    """Generate all pending shards (resume-safe; digests verified first)."""
    dataset_dir = Path(dataset_dir)
    manifest = load_manifest(dataset_dir)
    verify_shards(dataset_dir, manifest)
    pending = [s.index for s in manifest.shards if s.status != "done"]
    if not pending:
        return manifest

    def record(shard_index, rows, digest, exhausted):
        shard = manifest.shards[shard_index]
        shard.status = "done"
        shard.rows = rows
        shard.digest = digest
        shard.exhausted = exhausted
        save_manifest(dataset_dir, manifest)
        if progress is not None:
            progress(shard_index, rows)

    if threads <= 1:
        computer = _RowComputer(manifest, pdbs=pdbs, distance_table=distance_table)
        for i in pending:
            shard = manifest.shards[i]
            data, exhausted = _shard_bytes(manifest, shard, computer)
            path = dataset_dir / shard.file
            tmp = path.with_suffix(".csv.tmp")
            tmp.write_bytes(data)
            os.replace(tmp, path)
            record(i, len(manifest.shard_rows(i)), hashlib.sha256(data).hexdigest(), exhausted)
    else:
        import multiprocessing as mp

        with mp.Pool(threads) as pool:
            jobs = [(str(dataset_dir), manifest, i, pdb_dir) for i in pending]
            for result in pool.imap_unordered(_compute_shard, jobs):
                record(*result)
    return manifest


def dataset_status(dataset_dir) -> dict:
    manifest = load_manifest(dataset_dir)
    verify_shards(dataset_dir, manifest)
    done = [s for s in manifest.shards if s.status == "done"]
    return {
        "shards_total": len(manifest.shards),
        "shards_done": len(done),
        "rows_done": sum(s.rows for s in done),
        "rows_total": manifest.total_rows,
        "budget_exhausted_rows": sum(s.exhausted for s in done),
        "mode": manifest.mode,
        "functionals": manifest.functionals,
    }


def read_samples(dataset_dir, functional: str) -> tuple[dict, int]:
    """Distance samples grouped by step; sentinel rows dropped and counted."""
    manifest = load_manifest(dataset_dir)
    verify_shards(dataset_dir, manifest)
    if functional not in manifest.functionals:
        raise ValueError(f"dataset has no functional {functional!r}")
    col = 2 + manifest.functionals.index(functional)
    groups: dict = {}
    dropped = 0
    for shard in manifest.shards:
        if shard.status != "done":
            continue
        with open(Path(dataset_dir) / shard.file, newline="") as fh:
            reader = csv.reader(fh)
            next(reader)
            for row in reader:
                step = int(row[0])
                value = int(row[col])
                if value == SENTINEL:
                    dropped += 1
                    continue
                groups.setdefault(step, []).append(value)
    return {k: np.array(v, dtype=np.int64) for k, v in groups.items()}, dropped


def emit_decay(dataset_dir, functional: str, out_path,
               resamples: int = 1000, seed: int = 0) -> stats.DecayCurve:
    """Bootstrap TV of each step's samples against the stationary samples."""
    groups, _ = read_samples(dataset_dir, functional)
    if INF not in groups:
        raise ValueError("dataset has no stationary (n = -1) rows")
    stationary = groups.pop(INF)
    curve = stats.DecayCurve(source="monte-carlo")
    for n in sorted(groups):
        est = stats.bootstrap_tv(
            groups[n], stationary, resamples=resamples,
            rng=row_stream(seed, 3, n if n >= 0 else STEP_INF, 0),
        )
        curve.append(n, est.point, est.stderr)
    if out_path is not None:
        curve.to_csv(out_path)
    return curve


def emit_histograms(dataset_dir, functional: str, steps=None, out_dir=None) -> dict:
    """Per-step histogram CSVs: distance,count,probability."""
    groups, _ = read_samples(dataset_dir, functional)
    if steps is None:
        steps = sorted(groups)
    result = {}
    for n in steps:
        if n not in groups:
            raise ValueError(f"dataset has no rows at step {n}")
        dist = stats.empirical(groups[n])
        result[n] = dist
        if out_dir is not None:
            out_dir = Path(out_dir)
            out_dir.mkdir(parents=True, exist_ok=True)
            name = "hist_inf.csv" if n == INF else f"hist_{n:03d}.csv"
            with open(out_dir / name, "w", newline="") as fh:
                w = csv.writer(fh)
                w.writerow(["distance", "count", "probability"])
                for d in range(len(dist.counts)):
                    w.writerow([d, int(dist.counts[d]), f"{dist.counts[d] / dist.total:.9g}"])
    return result
