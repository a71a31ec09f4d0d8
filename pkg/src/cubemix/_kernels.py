"""Numba kernels for the heavy loops: pattern-space BFS, IDA*, exact evolution.

Everything here takes plain numpy arrays; the move tables and cubie move
arrays are built by the pure-Python layer and passed in.
"""

from __future__ import annotations

import numpy as np
from numba import njit

N_ORI = 2187
UNSET = 255


@njit(cache=True)
def product_bfs(perm_table, ori_table):
    """Exact distances over the product space rank = p * n_ori + o.

    Breadth-first from (0, 0) through the factored move tables. Returns a
    uint8 array; every cell is reachable, so no UNSET survives.
    """
    n_perm = perm_table.shape[0]
    n_ori = ori_table.shape[0]
    n_moves = perm_table.shape[1]
    total = n_perm * n_ori
    dist = np.full(total, UNSET, dtype=np.uint8)
    dist[0] = 0
    d = 0
    while True:
        found = False
        for i in range(total):
            if dist[i] == d:
                p = i // n_ori
                o = i - p * n_ori
                for m in range(n_moves):
                    j = perm_table[p, m] * n_ori + ori_table[o, m]
                    if dist[j] == UNSET:
                        dist[j] = d + 1
                        found = True
        if not found:
            return dist
        d += 1


@njit(cache=True, inline="always")
def _edge_pattern_encode(slots, oris):
    rank = 0
    bits = 0
    for k in range(6):
        s = slots[k]
        idx = s
        for j in range(k):
            if slots[j] < s:
                idx -= 1
        rank = rank * (12 - k) + idx
        bits |= oris[k] << k
    return rank * 64 + bits


@njit(cache=True, inline="always")
def _edge_pattern_decode(code, slots, oris):
    bits = code & 63
    rank = code >> 6
    for k in range(6):
        oris[k] = (bits >> k) & 1
    digits = np.empty(6, dtype=np.int64)
    for k in range(5, -1, -1):
        radix = 12 - k
        digits[k] = rank % radix
        rank //= radix
    used = np.zeros(12, dtype=np.uint8)
    for k in range(6):
        cnt = -1
        s = -1
        for slot in range(12):
            if used[slot] == 0:
                cnt += 1
                if cnt == digits[k]:
                    s = slot
                    break
        slots[k] = s
        used[s] = 1


@njit(cache=True)
def edge_pattern_bfs(move_ep_inv, move_eo, start_code):
    """Exact distances over the 6-edge placement+flip space (42,577,920).

    move_ep_inv[m, s] = destination slot of the piece currently in slot s
    under move m; move_eo[m, i] = flip delta picked up at destination slot i.
    """
    total = 12 * 11 * 10 * 9 * 8 * 7 * 64
    dist = np.full(total, UNSET, dtype=np.uint8)
    dist[start_code] = 0
    slots = np.empty(6, dtype=np.int64)
    oris = np.empty(6, dtype=np.int64)
    nslots = np.empty(6, dtype=np.int64)
    noris = np.empty(6, dtype=np.int64)
    d = 0
    while True:
        found = False
        for code in range(total):
            if dist[code] == d:
                _edge_pattern_decode(code, slots, oris)
                for m in range(18):
                    for k in range(6):
                        ns = move_ep_inv[m, slots[k]]
                        nslots[k] = ns
                        noris[k] = (oris[k] + move_eo[m, ns]) & 1
                    j = _edge_pattern_encode(nslots, noris)
                    if dist[j] == UNSET:
                        dist[j] = d + 1
                        found = True
        if not found:
            return dist
        d += 1


@njit(cache=True, inline="always")
def _corner_flat(cp, co):
    rank = 0
    for i in range(8):
        smaller = 0
        for j in range(i + 1, 8):
            if cp[j] < cp[i]:
                smaller += 1
        rank = rank * (8 - i) + smaller
    ori = 0
    for i in range(7):
        ori = ori * 3 + co[i]
    return rank * N_ORI + ori


@njit(cache=True, inline="always")
def _edge_pattern_code(ep, eo, first_piece):
    """Pattern code of the six pieces first_piece..first_piece+5 of a state."""
    slots = np.empty(6, dtype=np.int64)
    for s in range(12):
        p = ep[s] - first_piece
        if 0 <= p < 6:
            slots[p] = s
    rank = 0
    bits = 0
    for k in range(6):
        s = slots[k]
        idx = s
        for j in range(k):
            if slots[j] < s:
                idx -= 1
        rank = rank * (12 - k) + idx
        bits |= eo[s] << k
    return rank * 64 + bits


@njit(cache=True, inline="always")
def heuristic_value(cp, co, ep, eo, corner_pdb, edge_a_pdb, edge_b_pdb):
    h = corner_pdb[_corner_flat(cp, co)]
    ha = edge_a_pdb[_edge_pattern_code(ep, eo, 0)]
    if ha > h:
        h = ha
    hb = edge_b_pdb[_edge_pattern_code(ep, eo, 6)]
    if hb > h:
        h = hb
    return h


@njit(cache=True)
def heuristic_batch(states, corner_pdb, edge_a_pdb, edge_b_pdb):
    """states: (n, 40) uint8 rows [cp|co|ep|eo]; returns heuristic per row."""
    n = states.shape[0]
    out = np.empty(n, dtype=np.uint8)
    for i in range(n):
        row = states[i]
        out[i] = heuristic_value(
            row[0:8], row[8:16], row[16:28], row[28:40],
            corner_pdb, edge_a_pdb, edge_b_pdb,
        )
    return out


FOUND = -1
EXHAUSTED = -2

# opposite-face canonical order: after D disallow U, after B disallow F,
# after R disallow L (faces indexed U=0,D=1,F=2,B=3,L=4,R=5; moves face*3+a-1)


@njit(cache=True, inline="always")
def _is_solved(cp, co, ep, eo):
    for i in range(8):
        if cp[i] != i or co[i] != 0:
            return False
    for i in range(12):
        if ep[i] != i or eo[i] != 0:
            return False
    return True


@njit(cache=True)
def ida_iteration(cp, co, ep, eo, bound,
                  move_cp, move_co, move_ep, move_eo,
                  corner_pdb, edge_a_pdb, edge_b_pdb, path, counters, node_budget):
    """One depth-first pass at the given threshold (explicit stack).

    Returns FOUND (path[0:counters[1]] holds the solution), EXHAUSTED, or the
    minimal f-value that exceeded the threshold (the next threshold).
    """
    h0 = heuristic_value(cp, co, ep, eo, corner_pdb, edge_a_pdb, edge_b_pdb)
    if h0 > bound:
        return h0
    if _is_solved(cp, co, ep, eo):
        counters[1] = 0
        return FOUND
    maxd = bound + 1
    stack_cp = np.empty((maxd + 1, 8), dtype=np.uint8)
    stack_co = np.empty((maxd + 1, 8), dtype=np.uint8)
    stack_ep = np.empty((maxd + 1, 12), dtype=np.uint8)
    stack_eo = np.empty((maxd + 1, 12), dtype=np.uint8)
    in_face = np.full(maxd + 1, -1, dtype=np.int64)
    next_move = np.zeros(maxd + 1, dtype=np.int64)
    stack_cp[0] = cp
    stack_co[0] = co
    stack_ep[0] = ep
    stack_eo[0] = eo
    min_next = 127
    g = 0
    while g >= 0:
        descended = False
        while next_move[g] < 18:
            m = next_move[g]
            next_move[g] += 1
            face = m // 3
            lf = in_face[g]
            if face == lf:
                continue
            if (face & 1) == 0 and lf == face + 1:
                continue  # commuting opposite pair out of canonical order
            counters[0] += 1
            if node_budget >= 0 and counters[0] > node_budget:
                return EXHAUSTED
            pcp = stack_cp[g]
            pco = stack_co[g]
            pep = stack_ep[g]
            peo = stack_eo[g]
            ccp = stack_cp[g + 1]
            cco = stack_co[g + 1]
            cep = stack_ep[g + 1]
            ceo = stack_eo[g + 1]
            for i in range(8):
                src = move_cp[m, i]
                ccp[i] = pcp[src]
                cco[i] = (pco[src] + move_co[m, i]) % 3
            for i in range(12):
                src = move_ep[m, i]
                cep[i] = pep[src]
                ceo[i] = (peo[src] + move_eo[m, i]) & 1
            h = heuristic_value(ccp, cco, cep, ceo, corner_pdb, edge_a_pdb, edge_b_pdb)
            f = g + 1 + h
            if f > bound:
                if f < min_next:
                    min_next = f
                continue
            if h == 0 and _is_solved(ccp, cco, cep, ceo):
                path[g] = m
                counters[1] = g + 1
                return FOUND
            path[g] = m
            in_face[g + 1] = face
            next_move[g + 1] = 0
            g += 1
            descended = True
            break
        if not descended:
            g -= 1
    return min_next


@njit(cache=True)
def evolve_step(din, dout, perm_table, ori_table_t):
    """One walk step of the exact corner-projection distribution.

    din, dout: (40320, 2187) float64. dout[p, o] = mean over the 18 moves of
    din at the move's image; summing images equals summing preimages because
    the generator set is closed under inverses.
    """
    inv18 = 1.0 / 18.0
    for p in range(din.shape[0]):
        out_row = dout[p]
        for o in range(2187):
            out_row[o] = 0.0
        for m in range(18):
            src = din[perm_table[p, m]]
            col = ori_table_t[m]
            for o in range(2187):
                out_row[o] += src[col[o]]
        for o in range(2187):
            out_row[o] *= inv18
    return dout


@njit(cache=True)
def tv_to_uniform(flat):
    """TV to the uniform distribution: sum of positive parts above 1/N.

    Equals half the L1 distance when the vector sums to one; the positive-part
    form keeps point-mass cases exact in floating point.
    """
    n = flat.shape[0]
    u = 1.0 / n
    acc = 0.0
    for i in range(n):
        d = flat[i] - u
        if d > 0.0:
            acc += d
    return acc


@njit(cache=True)
def tv_weighted(flat, weights):
    """TV to the distribution `weights` (same positive-part form)."""
    acc = 0.0
    for i in range(flat.shape[0]):
        d = flat[i] - weights[i]
        if d > 0.0:
            acc += d
    return acc


@njit(cache=True)
def project_hist(flat, labels, n_labels):
    """Exact law of a label functional under the distribution `flat`."""
    out = np.zeros(n_labels, dtype=np.float64)
    for i in range(flat.shape[0]):
        out[labels[i]] += flat[i]
    return out
