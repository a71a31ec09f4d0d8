"""Reproducible random streams, the scrambling walk, and stationary sampling.

Streams are Philox counter-based generators keyed by (root_seed, stream_id),
so any (shard, row) gets the same bits on every machine and worker count.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .cube import ALL_MOVES, CubeState, Move, apply_move

# purpose discriminators baked into stream ids
PURPOSE_WALK = 1
PURPOSE_STATIONARY = 2
PURPOSE_BOOTSTRAP = 3

STEP_INF = 0xFFFF  # symbolic "stationary" step in packed stream ids


@dataclass
class RngStream:
    """A named Philox stream. Equal (root_seed, stream_id) => equal output."""

    root_seed: int
    stream_id: int = 0
    _gen: np.random.Generator = field(init=False, repr=False)

    def __post_init__(self):
        if not 0 <= self.root_seed < 2**64:
            raise ValueError("root_seed must fit in 64 bits")
        if not 0 <= self.stream_id < 2**64:
            raise ValueError("stream_id must fit in 64 bits")
        key = np.array([self.root_seed, self.stream_id], dtype=np.uint64)
        self._gen = np.random.Generator(np.random.Philox(key=key))

    @property
    def generator(self) -> np.random.Generator:
        return self._gen

    def spawn(self, stream_id: int) -> "RngStream":
        return RngStream(self.root_seed, stream_id)


def pack_stream_id(purpose: int, step: int, sample_index: int) -> int:
    """Collision-free stream id for a dataset row: 8|16|40 bit fields."""
    if not 0 <= purpose < 256:
        raise ValueError("purpose out of range")
    if not 0 <= step <= STEP_INF:
        raise ValueError("step out of range")
    if not 0 <= sample_index < 2**40:
        raise ValueError("sample_index out of range")
    return (purpose << 56) | (step << 40) | sample_index


def row_stream(root_seed: int, purpose: int, step: int, sample_index: int) -> RngStream:
    return RngStream(root_seed, pack_stream_id(purpose, step, sample_index))


def random_move(rng: RngStream) -> Move:
    """One of the 18 generators, each with probability exactly 1/18."""
    return ALL_MOVES[int(rng.generator.integers(0, 18))]


def random_moves(rng: RngStream, count: int) -> list[Move]:
    idx = rng.generator.integers(0, 18, size=count)
    return [ALL_MOVES[int(i)] for i in idx]


def walk(start: CubeState, n: int, rng: RngStream) -> CubeState:
    """State after n uniform random moves (raw iid moves, no cancellation)."""
    if n < 0:
        raise ValueError("n must be >= 0")
    state = start
    for m in random_moves(rng, n):
        state = apply_move(state, m)
    return state


def walk_trajectory(start: CubeState, n: int, rng: RngStream) -> list[CubeState]:
    """All of X_0..X_n along one realization."""
    if n < 0:
        raise ValueError("n must be >= 0")
    states = [start]
    for m in random_moves(rng, n):
        states.append(apply_move(states[-1], m))
    return states


def _perm_sign(perm) -> int:
    visited = [False] * len(perm)
    sign = 1
    for i in range(len(perm)):
        if visited[i]:
            continue
        j, length = i, 0
        while not visited[j]:
            visited[j] = True
            j = int(perm[j])
            length += 1
        if length % 2 == 0:
            sign = -sign
    return sign


def uniform_state(rng: RngStream) -> CubeState:
    """Exactly uniform over the reachable group, by direct construction.

    Edge permutation uniform; corner permutation uniform conditioned on
    matching parity (transpose two corners on mismatch); first 7 twists and
    first 11 flips uniform, the last fixed by the sum constraints.
    """
    g = rng.generator
    ep = g.permutation(12)
    cp = g.permutation(8)
    if _perm_sign(cp) != _perm_sign(ep):
        cp[0], cp[1] = cp[1], cp[0]
    co = g.integers(0, 3, size=7)
    eo = g.integers(0, 2, size=11)
    co_last = (-int(co.sum())) % 3
    eo_last = int(eo.sum()) % 2
    return CubeState(
        tuple(int(v) for v in cp),
        tuple(int(v) for v in co) + (co_last,),
        tuple(int(v) for v in ep),
        tuple(int(v) for v in eo) + (eo_last,),
    )


GROUP_ORDER = math.factorial(8) * math.factorial(12) * 3**7 * 2**11 // 2
