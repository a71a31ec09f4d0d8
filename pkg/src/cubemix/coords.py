"""Integer coordinates for cube states and the factored move tables.

Corner coordinate: flat = perm_rank * 2187 + ori_rank with perm_rank the
Lehmer rank of corner_perm (0..40319) and ori_rank the base-3 number
corner_ori[0]..corner_ori[6] (corner_ori[0] most significant; the 8th twist is
determined by the others for reachable states, but the coordinate space keeps
all 3^7 values so it covers the full 8!*3^7 = 88,179,840 pattern space).

The 18-move action factorizes: permutation rank and orientation rank evolve
independently, each through its own table. Tables are derived by applying the
cubie-level moves and re-encoding, then checked against the cubie model.
"""

from __future__ import annotations

import math

import numpy as np

from .cube import ALL_MOVES, MOVE_STATES, CubeState

N_CORNER_PERM = math.factorial(8)        # 40320
N_CORNER_ORI = 3**7                      # 2187
N_CORNER_STATES = N_CORNER_PERM * N_CORNER_ORI  # 88,179,840
N_MOVES = 18


def perm_rank(perm) -> int:
    """Lehmer rank of a permutation of 0..len-1. Identity ranks 0."""
    n = len(perm)
    rank = 0
    for i in range(n):
        smaller = sum(1 for j in range(i + 1, n) if perm[j] < perm[i])
        rank = rank * (n - i) + smaller
    return rank


def perm_unrank(rank: int, n: int) -> list[int]:
    digits = []
    for radix in range(1, n + 1):
        digits.append(rank % radix)
        rank //= radix
    digits.reverse()  # digits[i] in [0, n-i)
    pool = list(range(n))
    out = []
    for d in digits:
        out.append(pool.pop(d))
    return out


def corner_ori_rank(corner_ori) -> int:
    r = 0
    for i in range(7):
        r = r * 3 + corner_ori[i]
    return r


def corner_ori_unrank(rank: int) -> tuple:
    ori = [0] * 8
    for i in range(6, -1, -1):
        ori[i] = rank % 3
        rank //= 3
    ori[7] = (-sum(ori)) % 3
    return tuple(ori)


def corner_coordinate(state: CubeState) -> tuple[int, int]:
    return perm_rank(state.corner_perm), corner_ori_rank(state.corner_ori)


def corner_flat(state: CubeState) -> int:
    p, o = corner_coordinate(state)
    return p * N_CORNER_ORI + o


def corner_decode(flat: int) -> tuple[tuple, tuple]:
    """Corner configuration (perm, ori) for a flat corner coordinate."""
    p, o = divmod(flat, N_CORNER_ORI)
    return tuple(perm_unrank(p, 8)), corner_ori_unrank(o)


def build_corner_move_tables() -> tuple[np.ndarray, np.ndarray]:
    """(perm_table[40320,18], ori_table[2187,18]) of successor ranks."""
    perm_table = np.empty((N_CORNER_PERM, N_MOVES), dtype=np.int32)
    move_cp = [m.corner_perm for m in MOVE_STATES]
    for r in range(N_CORNER_PERM):
        perm = perm_unrank(r, 8)
        for m in range(N_MOVES):
            mcp = move_cp[m]
            perm_table[r, m] = perm_rank([perm[mcp[i]] for i in range(8)])
    ori_table = np.empty((N_CORNER_ORI, N_MOVES), dtype=np.int32)
    move_co = [m.corner_ori for m in MOVE_STATES]
    for r in range(N_CORNER_ORI):
        ori = corner_ori_unrank(r)
        for m in range(N_MOVES):
            mcp, mco = move_cp[m], move_co[m]
            new = [(ori[mcp[i]] + mco[i]) % 3 for i in range(8)]
            ori_table[r, m] = corner_ori_rank(new)
    return perm_table, ori_table


# --- 6-edge pattern coordinate (for the edge pattern databases) --------------

N_EDGE_PATTERN_POS = 12 * 11 * 10 * 9 * 8 * 7   # 665,280 placements
N_EDGE_PATTERN = N_EDGE_PATTERN_POS * 64        # 42,577,920 with flips


def edge_pattern_coordinate(state: CubeState, pieces: tuple) -> int:
    """Coordinate of the placement+flip pattern of six tracked edge pieces.

    Placement rank is the mixed-radix rank of the injection piece->slot;
    flip bits are ordered by tracked-piece index (piece k -> bit k).
    """
    slot_of = [0] * 12
    for slot in range(12):
        slot_of[state.edge_perm[slot]] = slot
    used = []
    rank = 0
    bits = 0
    for k, piece in enumerate(pieces):
        s = slot_of[piece]
        idx = s - sum(1 for u in used if u < s)
        rank = rank * (12 - k) + idx
        used.append(s)
        bits |= state.edge_ori[s] << k
    return rank * 64 + bits


EDGE_GROUP_A = (0, 1, 2, 3, 4, 5)    # UR, UF, UL, UB, DR, DF
EDGE_GROUP_B = (6, 7, 8, 9, 10, 11)  # DL, DB, FR, FL, BL, BR
