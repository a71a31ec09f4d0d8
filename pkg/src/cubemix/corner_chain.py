"""Exactly solvable verification chain: the corner projection of the walk.

The corner configuration (8 cubies, permutation x twist) takes 8! * 3^7 =
88,179,840 values, small enough to evolve the walk's distribution exactly.
Two chain variants:

* ``corner``  - centers fixed, the full 88,179,840-state projection.
* ``quotient`` - the physical 2x2x2 puzzle: corner states identified up to
  whole-cube rotation (a free 24-element action, 3,674,160 classes).

Both have the uniform distribution as their stationary law.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import psutil

from . import _kernels, coords
from .cube import CubeState, MOVE_STATES, ORIGIN, compose, parse_moves, apply_sequence
from .errors import MemoryGuardError

N_CORNER_STATES = coords.N_CORNER_STATES       # 88,179,840
N_QUOTIENT_STATES = N_CORNER_STATES // 24      # 3,674,160

TV_EPSILONS = (0.5, 0.4, 0.3, 0.25, 0.2, 0.1)

_MEMORY_NEED_BYTES = int(2.1e9)  # two dense vectors + labels + working slack


def _cache_dir(cache_dir=None) -> Path:
    from .solver import default_pdb_dir

    d = Path(cache_dir) if cache_dir is not None else default_pdb_dir()
    d.mkdir(parents=True, exist_ok=True)
    return d


def corner_move_tables(cache_dir=None) -> tuple[np.ndarray, np.ndarray]:
    """(perm_table, ori_table), built once and cached on disk."""
    path = _cache_dir(cache_dir) / "corner_move_tables.npz"
    if path.exists():
        data = np.load(path)
        return data["perm_table"], data["ori_table"]
    pt, ot = coords.build_corner_move_tables()
    _verify_factorization(pt, ot)
    tmp = path.with_name(path.stem + ".tmp.npz")
    np.savez(tmp, perm_table=pt, ori_table=ot)
    tmp.replace(path)
    return pt, ot


def _verify_factorization(pt: np.ndarray, ot: np.ndarray) -> None:
    """Tables must reproduce cubie-level application; abort on mismatch."""
    rng = np.random.default_rng(0)
    state = ORIGIN
    p, o = coords.corner_coordinate(state)
    for m in rng.integers(0, 18, size=200):
        state = compose(state, MOVE_STATES[int(m)])
        p, o = int(pt[p, m]), int(ot[o, m])
        if (p, o) != coords.corner_coordinate(state):
            raise AssertionError(
                "corner move tables do not factorize the cubie action"
            )
    for m in range(18):
        if len(np.unique(pt[:, m])) != pt.shape[0]:
            raise AssertionError(f"perm table column {m} is not a bijection")
        if len(np.unique(ot[:, m])) != ot.shape[0]:
            raise AssertionError(f"ori table column {m} is not a bijection")


def corner_flat(state: CubeState) -> int:
    return coords.corner_flat(state)


@dataclass
class CornerDistanceTable:
    """Exact distance-to-origin for every corner configuration."""

    distances: np.ndarray  # uint8, length 88,179,840

    @property
    def diameter(self) -> int:
        return int(self.distances.max())

    def layer_counts(self) -> np.ndarray:
        return np.bincount(self.distances, minlength=self.diameter + 1)

    def lookup(self, state: CubeState) -> int:
        return int(self.distances[coords.corner_flat(state)])

    def rebased(self, target: CubeState):
        """Distance-to-target labeling: d(x, t) = d(t^-1 x, origin)."""
        from .cube import inverse, relative_state

        inv_t = inverse(target)

        def label(state: CubeState) -> int:
            return int(self.distances[coords.corner_flat(compose(inv_t, state))])

        return label


def corner_bfs(cache_dir=None) -> CornerDistanceTable:
    """Full BFS of the corner space; shares the corner PDB file on disk."""
    from . import solver

    path = solver.pdb_path(_cache_dir(cache_dir), "Corners")
    if path.exists():
        return CornerDistanceTable(solver.PatternDatabase.load(path).table)
    pt, ot = corner_move_tables(cache_dir)
    dist = _kernels.product_bfs(pt, ot)
    db = solver.PatternDatabase("Corners", dist)
    db.save(path)
    return CornerDistanceTable(solver.PatternDatabase.load(path).table)


@dataclass
class DistributionVector:
    """Dense probability vector over the 88,179,840 corner states."""

    probabilities: np.ndarray  # float64, flat
    step_index: int = 0

    def check(self, tol: float = 1e-9) -> None:
        s = float(self.probabilities.sum())
        if abs(s - 1.0) > tol:
            raise ValueError(f"probabilities sum to {s}, off by more than {tol}")
        if float(self.probabilities.min()) < 0:
            raise ValueError("negative probability entry")


def _guard_memory(need_bytes: int) -> None:
    available = psutil.virtual_memory().available
    if available < need_bytes:
        raise MemoryGuardError(
            f"dense corner-chain evolution needs ~{need_bytes / 1e9:.1f} GB, "
            f"only {available / 1e9:.1f} GB available"
        )


def point_mass_at_origin() -> DistributionVector:
    _guard_memory(_MEMORY_NEED_BYTES)
    p = np.zeros(N_CORNER_STATES, dtype=np.float64)
    p[0] = 1.0
    return DistributionVector(p, 0)


def evolve_step(dist: DistributionVector, tables, out: np.ndarray | None = None) -> DistributionVector:
    """One exact walk step: out[j] = mean of the input over j's 18 neighbors.

    Gathering over forward images equals gathering over preimages because the
    18-move set is closed under inverses.
    """
    pt, ot = tables
    if out is None:
        out = np.empty(N_CORNER_STATES, dtype=np.float64)
    din = dist.probabilities.reshape(coords.N_CORNER_PERM, coords.N_CORNER_ORI)
    dout = out.reshape(coords.N_CORNER_PERM, coords.N_CORNER_ORI)
    _kernels.evolve_step(din, dout, pt, np.ascontiguousarray(ot.T))
    return DistributionVector(out, dist.step_index + 1)


def exact_tv_uniform(dist: DistributionVector | np.ndarray) -> float:
    """TV to uniform, as the sum of probability excess over 1/N."""
    p = dist.probabilities if isinstance(dist, DistributionVector) else dist
    return float(_kernels.tv_to_uniform(p))


def project_distribution(dist: DistributionVector | np.ndarray, labels: np.ndarray, n_labels: int | None = None) -> np.ndarray:
    """Exact law of an integer labeling (e.g. a distance table) under dist."""
    p = dist.probabilities if isinstance(dist, DistributionVector) else dist
    if n_labels is None:
        n_labels = int(labels.max()) + 1
    return _kernels.project_hist(p, labels, n_labels)


@dataclass
class ExactDecayResult:
    mode: str                       # "corner" | "quotient"
    steps: list = field(default_factory=list)
    tv_full: list = field(default_factory=list)
    tv_projected: list = field(default_factory=list)  # corner mode only
    thresholds: dict = field(default_factory=dict)    # epsilon -> step or None

    def first_crossing(self, epsilon: float):
        for n, tv in zip(self.steps, self.tv_full):
            if tv <= epsilon:
                return n
        return None


def exact_decay(max_n: int, mode: str = "corner", cache_dir=None, progress=None) -> ExactDecayResult:
    """Exact TV-to-uniform after each of 0..max_n walk steps from solved.

    In corner mode also tracks the TV of the distance-to-origin projection,
    which must lower-bound the full TV at every step.
    """
    if mode == "corner":
        result = _exact_decay_corner(max_n, cache_dir, progress)
    elif mode == "quotient":
        result = _exact_decay_quotient(max_n, cache_dir, progress)
    else:
        raise ValueError(f"unknown chain mode {mode!r}")
    result.thresholds = {
        eps: result.first_crossing(eps) for eps in TV_EPSILONS
    }
    return result


def _exact_decay_corner(max_n: int, cache_dir, progress) -> ExactDecayResult:
    _guard_memory(_MEMORY_NEED_BYTES)
    pt, ot = corner_move_tables(cache_dir)
    ot_t = np.ascontiguousarray(ot.T)
    labels = corner_bfs(cache_dir).distances
    n_labels = int(labels.max()) + 1
    stationary_proj = np.bincount(labels, minlength=n_labels).astype(np.float64)
    stationary_proj /= stationary_proj.sum()

    cur = np.zeros(N_CORNER_STATES, dtype=np.float64)
    cur[0] = 1.0
    nxt = np.empty(N_CORNER_STATES, dtype=np.float64)
    result = ExactDecayResult(mode="corner")
    for n in range(max_n + 1):
        tv = float(_kernels.tv_to_uniform(cur))
        proj = _kernels.project_hist(cur, labels, n_labels)
        tv_proj = 0.5 * float(np.abs(proj - stationary_proj).sum())
        result.steps.append(n)
        result.tv_full.append(tv)
        result.tv_projected.append(tv_proj)
        if progress is not None:
            progress(n, tv, tv_proj)
        if n < max_n:
            din = cur.reshape(coords.N_CORNER_PERM, coords.N_CORNER_ORI)
            dout = nxt.reshape(coords.N_CORNER_PERM, coords.N_CORNER_ORI)
            _kernels.evolve_step(din, dout, pt, ot_t)
            cur, nxt = nxt, cur
    return result


# --- quotient (physical 2x2x2) mode ------------------------------------------

def _rotation_elements() -> list[tuple]:
    """The 24 whole-cube rotations as (corner_perm, corner_ori) pairs.

    Generated from the two rotations about the U-D and R-L axes, whose corner
    action equals that of turning both parallel layers (U1 D3, R1 L3).
    """
    def corner_part(word: str) -> tuple:
        s = apply_sequence(ORIGIN, parse_moves(word))
        return (s.corner_perm, s.corner_ori)

    def comp(a, b):
        ap, ao = a
        bp, bo = b
        return (
            tuple(ap[bp[i]] for i in range(8)),
            tuple((ao[bp[i]] + bo[i]) % 3 for i in range(8)),
        )

    gens = [corner_part("U1 D3"), corner_part("R1 L3")]
    seen = {(tuple(range(8)), (0,) * 8)}
    frontier = list(seen)
    while frontier:
        nxt = []
        for r in frontier:
            for g in gens:
                rg = comp(r, g)
                if rg not in seen:
                    seen.add(rg)
                    nxt.append(rg)
        frontier = nxt
    assert len(seen) == 24, f"rotation group has {len(seen)} elements"
    return sorted(seen)


def _rotation_rank_tables() -> tuple[np.ndarray, np.ndarray]:
    """Right-multiplication by each rotation, factored to rank tables."""
    rots = _rotation_elements()
    pr = np.empty((24, coords.N_CORNER_PERM), dtype=np.int64)
    orr = np.empty((24, coords.N_CORNER_ORI), dtype=np.int64)
    for k, (rp, ro) in enumerate(rots):
        for rank in range(coords.N_CORNER_PERM):
            perm = coords.perm_unrank(rank, 8)
            pr[k, rank] = coords.perm_rank([perm[rp[i]] for i in range(8)])
        for rank in range(coords.N_CORNER_ORI):
            ori = coords.corner_ori_unrank(rank)
            new = [(ori[rp[i]] + ro[i]) % 3 for i in range(8)]
            orr[k, rank] = coords.corner_ori_rank(new)
    return pr, orr


def _canonicalize(flat: np.ndarray, pr: np.ndarray, orr: np.ndarray) -> np.ndarray:
    """Minimum flat index over the 24-element rotation orbit of each state."""
    p, o = np.divmod(flat, coords.N_CORNER_ORI)
    best = None
    for k in range(24):
        cand = pr[k, p] * coords.N_CORNER_ORI + orr[k, o]
        best = cand if best is None else np.minimum(best, cand)
    return best


def quotient_tables(cache_dir=None) -> tuple[np.ndarray, np.ndarray]:
    """(class_canonical, transitions): sorted canonical indices of the
    3,674,160 rotation classes and the (n_classes, 18) class-id move table."""
    path = _cache_dir(cache_dir) / "quotient_tables.npz"
    if path.exists():
        data = np.load(path)
        return data["canonical"], data["transitions"]
    pr, orr = _rotation_rank_tables()
    seen = np.zeros(N_CORNER_STATES, dtype=bool)
    chunk = 4_000_000
    for lo in range(0, N_CORNER_STATES, chunk):
        flat = np.arange(lo, min(lo + chunk, N_CORNER_STATES), dtype=np.int64)
        seen[_canonicalize(flat, pr, orr)] = True
    canonical = np.flatnonzero(seen)
    assert canonical.shape[0] == N_QUOTIENT_STATES, canonical.shape
    pt, ot = corner_move_tables(cache_dir)
    transitions = np.empty((N_QUOTIENT_STATES, 18), dtype=np.int32)
    p, o = np.divmod(canonical, coords.N_CORNER_ORI)
    for m in range(18):
        nxt = pt[p, m].astype(np.int64) * coords.N_CORNER_ORI + ot[o, m]
        canon = _canonicalize(nxt, pr, orr)
        ids = np.searchsorted(canonical, canon)
        assert np.array_equal(canonical[ids], canon)
        transitions[:, m] = ids
    tmp = path.with_name(path.stem + ".tmp.npz")
    np.savez(tmp, canonical=canonical, transitions=transitions)
    tmp.replace(path)
    return canonical, transitions


def _exact_decay_quotient(max_n: int, cache_dir, progress) -> ExactDecayResult:
    _, transitions = quotient_tables(cache_dir)
    n = N_QUOTIENT_STATES
    cur = np.zeros(n, dtype=np.float64)
    cur[0] = 1.0  # the origin is its own class minimum
    result = ExactDecayResult(mode="quotient")
    for step in range(max_n + 1):
        tv = float(_kernels.tv_to_uniform(cur))
        result.steps.append(step)
        result.tv_full.append(tv)
        if progress is not None:
            progress(step, tv, None)
        if step < max_n:
            out = np.zeros(n, dtype=np.float64)
            for m in range(18):
                out += np.bincount(transitions[:, m], weights=cur, minlength=n)
            cur = out / 18.0
    return result


GROUP_FORMULA_ORDER = (
    math.factorial(8) * math.factorial(12) * 3**7 * 2**11 // 2
)
