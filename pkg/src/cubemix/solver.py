"""Exact distances in the 18-move metric: shallow BFS oracle, pattern
databases, and IDA* optimal solving.

The BFS table is the exactness oracle at small depth; the three pattern
databases (corners + two disjoint 6-edge groups, max-combined) carry IDA* to
desk-scale depths. Distances to arbitrary targets reduce to distance-to-origin
of the relative state.
"""

from __future__ import annotations

import os
import struct
import time
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import _kernels, coords
from .cube import (
    ALL_MOVES,
    MOVE_STATES,
    CubeState,
    Move,
    ORIGIN,
    relative_state,
)
from .errors import BudgetExhaustedError, DepthGuardError

# cubie move arrays, shared by the kernels
MOVE_CP = np.array([m.corner_perm for m in MOVE_STATES], dtype=np.uint8)
MOVE_CO = np.array([m.corner_ori for m in MOVE_STATES], dtype=np.uint8)
MOVE_EP = np.array([m.edge_perm for m in MOVE_STATES], dtype=np.uint8)
MOVE_EO = np.array([m.edge_ori for m in MOVE_STATES], dtype=np.uint8)

MOVE_EP_INV = np.empty_like(MOVE_EP)
for _m in range(18):
    for _i in range(12):
        MOVE_EP_INV[_m, MOVE_EP[_m, _i]] = _i

STATE_BYTES = 40


def state_to_row(state: CubeState) -> np.ndarray:
    return np.array(
        state.corner_perm + state.corner_ori + state.edge_perm + state.edge_ori,
        dtype=np.uint8,
    )


def row_to_state(row: np.ndarray) -> CubeState:
    vals = [int(v) for v in row]
    return CubeState(
        tuple(vals[0:8]), tuple(vals[8:16]), tuple(vals[16:28]), tuple(vals[28:40])
    )


def _successors(rows: np.ndarray, m: int) -> np.ndarray:
    """Apply move m to every (n, 40) cubie row."""
    out = np.empty_like(rows)
    mcp, mco = MOVE_CP[m], MOVE_CO[m]
    mep, meo = MOVE_EP[m], MOVE_EO[m]
    out[:, 0:8] = rows[:, 0:8][:, mcp]
    out[:, 8:16] = (rows[:, 8:16][:, mcp] + mco) % 3
    out[:, 16:28] = rows[:, 16:28][:, mep]
    out[:, 28:40] = (rows[:, 28:40][:, mep] + meo) % 2
    return out


def _as_void(rows: np.ndarray) -> np.ndarray:
    rows = np.ascontiguousarray(rows)
    return rows.reshape(rows.shape[0], -1).view(
        np.dtype((np.void, rows.shape[1]))
    ).ravel()


BFS_DEPTH_GUARD = 6


@dataclass
class BfsTable:
    """Exact distances for the full ball of a given radius around the origin."""

    max_depth: int
    keys: np.ndarray        # (n, 40) uint8 rows, in void-sorted order
    distances: np.ndarray   # (n,) uint8
    layer_counts: list

    def lookup(self, state: CubeState):
        key = _as_void(state_to_row(state).reshape(1, -1))
        sorted_keys = _as_void(self.keys)
        i = np.searchsorted(sorted_keys, key[0])
        if i < len(sorted_keys) and sorted_keys[i] == key[0]:
            return int(self.distances[i])
        return None

    def states_at_depth(self, d: int) -> np.ndarray:
        return self.keys[self.distances == d]


def bfs_enumerate(max_depth: int, allow_deep: bool = False) -> BfsTable:
    """Exact distance table of the radius-`max_depth` ball (cubie model)."""
    if max_depth > BFS_DEPTH_GUARD and not allow_deep:
        raise DepthGuardError(
            f"bfs_enumerate depth {max_depth} exceeds the guard "
            f"({BFS_DEPTH_GUARD}); pass allow_deep to override"
        )
    frontier = state_to_row(ORIGIN).reshape(1, -1)
    keys = [frontier]
    dists = [np.zeros(1, dtype=np.uint8)]
    visited = _as_void(frontier).copy()
    visited.sort()
    layer_counts = [1]
    for d in range(1, max_depth + 1):
        cand = np.vstack([_successors(frontier, m) for m in range(18)])
        cand_void = _as_void(cand)
        uniq_void, first_idx = np.unique(cand_void, return_index=True)
        pos = np.searchsorted(visited, uniq_void)
        pos[pos >= len(visited)] = len(visited) - 1
        fresh = visited[pos] != uniq_void
        frontier = cand[first_idx[fresh]]
        layer_counts.append(frontier.shape[0])
        keys.append(frontier)
        dists.append(np.full(frontier.shape[0], d, dtype=np.uint8))
        visited = np.concatenate([visited, uniq_void[fresh]])
        visited.sort()
    all_keys = np.vstack(keys)
    all_dists = np.concatenate(dists)
    order = np.argsort(_as_void(all_keys))
    return BfsTable(max_depth, all_keys[order], all_dists[order], layer_counts)


def facelet_bfs_layer_counts(max_depth: int) -> list:
    """Independent oracle: ball layer counts computed in the sticker model."""
    from . import facelets

    perms = np.array(
        [facelets.MOVE_PERMUTATIONS[str(m)] for m in ALL_MOVES], dtype=np.int64
    )
    solved = np.array(
        [facelets.FACE_INDEX[c] for c in facelets.SOLVED], dtype=np.uint8
    )
    frontier = solved.reshape(1, -1)
    visited = _as_void(frontier).copy()
    visited.sort()
    counts = [1]
    for _ in range(max_depth):
        cand = np.vstack([frontier[:, perms[m]] for m in range(18)])
        cand_void = _as_void(cand)
        uniq_void, first_idx = np.unique(cand_void, return_index=True)
        pos = np.searchsorted(visited, uniq_void)
        pos[pos >= len(visited)] = len(visited) - 1
        fresh = visited[pos] != uniq_void
        frontier = cand[first_idx[fresh]]
        counts.append(frontier.shape[0])
        visited = np.concatenate([visited, uniq_void[fresh]])
        visited.sort()
    return counts


# --- pattern databases -------------------------------------------------------

PDB_MAGIC = b"CXPD"
PDB_VERSION = 1
PDB_METRIC_HTM18 = 0
PDB_KINDS = ("Corners", "EdgesA", "EdgesB")
_PDB_SIZES = {
    "Corners": coords.N_CORNER_STATES,
    "EdgesA": coords.N_EDGE_PATTERN,
    "EdgesB": coords.N_EDGE_PATTERN,
}
_HEADER = struct.Struct("<4sHB8sQ")  # magic, version, metric, kind, size


@dataclass
class PatternDatabase:
    kind: str
    table: np.ndarray  # uint8, exact pattern-space distances

    @property
    def size(self) -> int:
        return int(self.table.shape[0])

    @property
    def max_value(self) -> int:
        return int(self.table.max())

    def save(self, path: Path) -> None:
        path = Path(path)
        tmp = path.with_suffix(path.suffix + ".tmp")
        with open(tmp, "wb") as fh:
            fh.write(
                _HEADER.pack(
                    PDB_MAGIC,
                    PDB_VERSION,
                    PDB_METRIC_HTM18,
                    self.kind.encode().ljust(8, b"\0"),
                    self.size,
                )
            )
            self.table.tofile(fh)
        os.replace(tmp, path)

    @classmethod
    def load(cls, path: Path) -> "PatternDatabase":
        path = Path(path)
        with open(path, "rb") as fh:
            header = fh.read(_HEADER.size)
        magic, version, metric, kind_raw, size = _HEADER.unpack(header)
        if magic != PDB_MAGIC:
            raise ValueError(f"{path}: not a pattern database file")
        if version != PDB_VERSION or metric != PDB_METRIC_HTM18:
            raise ValueError(f"{path}: unsupported version/metric")
        kind = kind_raw.rstrip(b"\0").decode()
        if kind not in _PDB_SIZES or size != _PDB_SIZES[kind]:
            raise ValueError(f"{path}: bad kind/size ({kind}, {size})")
        table = np.memmap(path, dtype=np.uint8, mode="r", offset=_HEADER.size, shape=(size,))
        return cls(kind, table)


def build_pdb(kind: str) -> PatternDatabase:
    """Breadth-first fill of one pattern space in the 18-move metric."""
    if kind == "Corners":
        perm_table, ori_table = coords.build_corner_move_tables()
        table = _kernels.product_bfs(perm_table, ori_table)
    elif kind in ("EdgesA", "EdgesB"):
        pieces = coords.EDGE_GROUP_A if kind == "EdgesA" else coords.EDGE_GROUP_B
        start = coords.edge_pattern_coordinate(ORIGIN, pieces)
        table = _kernels.edge_pattern_bfs(
            MOVE_EP_INV.astype(np.int64), MOVE_EO.astype(np.int64), start
        )
    else:
        raise ValueError(f"unknown pattern database kind {kind!r}")
    assert table[_pdb_coordinate(ORIGIN, kind)] == 0
    return PatternDatabase(kind, table)


def _pdb_coordinate(state: CubeState, kind: str) -> int:
    if kind == "Corners":
        return coords.corner_flat(state)
    pieces = coords.EDGE_GROUP_A if kind == "EdgesA" else coords.EDGE_GROUP_B
    return coords.edge_pattern_coordinate(state, pieces)


def default_pdb_dir() -> Path:
    return Path(
        os.environ.get("CUBEMIX_CACHE", Path.home() / ".cache" / "cubemix")
    )


def pdb_path(pdb_dir: Path, kind: str) -> Path:
    return Path(pdb_dir) / f"pdb_{kind.lower()}.bin"


@dataclass
class PdbSet:
    corners: PatternDatabase
    edges_a: PatternDatabase
    edges_b: PatternDatabase

    def as_tables(self):
        return self.corners.table, self.edges_a.table, self.edges_b.table


def load_or_build_pdbs(pdb_dir: Path | None = None, build: bool = True) -> PdbSet:
    pdb_dir = Path(pdb_dir) if pdb_dir is not None else default_pdb_dir()
    pdb_dir.mkdir(parents=True, exist_ok=True)
    dbs = {}
    for kind in PDB_KINDS:
        path = pdb_path(pdb_dir, kind)
        if path.exists():
            dbs[kind] = PatternDatabase.load(path)
        elif build:
            db = build_pdb(kind)
            db.save(path)
            dbs[kind] = PatternDatabase.load(path)
        else:
            raise FileNotFoundError(f"missing pattern database: {path}")
    return PdbSet(dbs["Corners"], dbs["EdgesA"], dbs["EdgesB"])


def heuristic(state: CubeState, pdbs: PdbSet) -> int:
    """Admissible lower bound: max over the three pattern databases."""
    return max(
        int(pdbs.corners.table[_pdb_coordinate(state, "Corners")]),
        int(pdbs.edges_a.table[_pdb_coordinate(state, "EdgesA")]),
        int(pdbs.edges_b.table[_pdb_coordinate(state, "EdgesB")]),
    )


@dataclass
class OptimalResult:
    distance: int
    solution: tuple          # MoveSequence of exactly `distance` moves
    nodes_expanded: int
    elapsed: float


MAX_DISTANCE = 20  # diameter of the group in this metric


def solve_optimal(
    state: CubeState,
    pdbs: PdbSet,
    node_budget: int | None = None,
    time_budget: float | None = None,
    max_depth: int = MAX_DISTANCE,
) -> OptimalResult:
    """Provably minimal solution via IDA* with the max-combined heuristic.

    Successors never repeat a face, and commuting opposite-face pairs are
    canonicalized (U before D, F before B, L before R). Raises
    BudgetExhaustedError carrying the proven lower bound when a budget or the
    depth cap runs out.
    """
    t0 = time.monotonic()
    cp = np.array(state.corner_perm, dtype=np.uint8)
    co = np.array(state.corner_ori, dtype=np.uint8)
    ep = np.array(state.edge_perm, dtype=np.uint8)
    eo = np.array(state.edge_ori, dtype=np.uint8)
    corner_t, edge_a_t, edge_b_t = pdbs.as_tables()
    path = np.zeros(MAX_DISTANCE + 2, dtype=np.int64)
    counters = np.zeros(2, dtype=np.int64)
    budget = -1 if node_budget is None else int(node_budget)
    nodes_per_second = 2_000_000  # rough single-core rate, refined as we go
    bound = heuristic(state, pdbs)
    while True:
        if bound > max_depth:
            raise BudgetExhaustedError(bound, int(counters[0]))
        iter_budget = budget
        if time_budget is not None:
            remaining = time_budget - (time.monotonic() - t0)
            if remaining <= 0:
                raise BudgetExhaustedError(bound, int(counters[0]))
            # a threshold pass cannot be interrupted mid-flight, so convert
            # the remaining time into an approximate node allowance
            time_cap = counters[0] + int(remaining * nodes_per_second) + 1
            iter_budget = time_cap if budget < 0 else min(budget, time_cap)
        r = _kernels.ida_iteration(
            cp, co, ep, eo, bound,
            MOVE_CP, MOVE_CO, MOVE_EP, MOVE_EO,
            corner_t, edge_a_t, edge_b_t, path, counters, iter_budget,
        )
        elapsed = time.monotonic() - t0
        if elapsed > 0.5:
            nodes_per_second = max(100_000, int(counters[0] / elapsed))
        if r == _kernels.FOUND:
            length = int(counters[1])
            solution = tuple(ALL_MOVES[int(path[i])] for i in range(length))
            return OptimalResult(
                length, solution, int(counters[0]), time.monotonic() - t0
            )
        if r == _kernels.EXHAUSTED:
            raise BudgetExhaustedError(bound, int(counters[0]))
        assert r > bound, "IDA* thresholds must strictly increase"
        bound = int(r)


def distance(
    x: CubeState,
    target: CubeState = ORIGIN,
    pdbs: PdbSet | None = None,
    node_budget: int | None = None,
    time_budget: float | None = None,
    max_depth: int = MAX_DISTANCE,
) -> int:
    """Minimal move count from x to target (d_o, d_s, d_c uniformly)."""
    if pdbs is None:
        pdbs = load_or_build_pdbs()
    rel = relative_state(x, target)
    return solve_optimal(
        rel, pdbs, node_budget=node_budget, time_budget=time_budget, max_depth=max_depth
    ).distance
