"""Sticker-level cube model, generated from 3D geometry.

This is the ground-truth model: each of the 54 stickers gets a 3D center
position and an outward normal, and a face turn is the rigid rotation of the
21 stickers in that layer. Everything else in the package (the cubie move
tables in particular) is derived from, or verified against, these sticker
permutations.

Facelet order: faces U, R, F, D, L, B, each 9 stickers row-major as seen from
outside the cube with the standard unfolding (U above F, D below F, B to the
right of R).
"""

from __future__ import annotations

FACES = "URFDLB"
FACE_INDEX = {f: i for i, f in enumerate(FACES)}

SOLVED = "".join(f * 9 for f in FACES)

# Axes: x toward R, y toward U, z toward F. For each face: outward normal and
# the position of the (row, col) sticker center, rows/cols in {0,1,2}.
_FACE_NORMALS = {
    "U": (0, 1, 0),
    "R": (1, 0, 0),
    "F": (0, 0, 1),
    "D": (0, -1, 0),
    "L": (-1, 0, 0),
    "B": (0, 0, -1),
}


def _sticker_position(face: str, row: int, col: int) -> tuple[int, int, int]:
    if face == "U":
        return (col - 1, 1, row - 1)
    if face == "R":
        return (1, 1 - row, 1 - col)
    if face == "F":
        return (col - 1, 1 - row, 1)
    if face == "D":
        return (col - 1, -1, 1 - row)
    if face == "L":
        return (-1, 1 - row, col - 1)
    if face == "B":
        return (1 - col, 1 - row, -1)
    raise ValueError(face)


def _cross(a, b):
    return (
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    )


def _dot(a, b):
    return a[0] * b[0] + a[1] * b[1] + a[2] * b[2]


def _rotate_cw(axis, v):
    # 90 degrees clockwise as seen from outside looking along -axis:
    # R v = axis (axis . v) - axis x v
    d = _dot(axis, v)
    c = _cross(axis, v)
    return (axis[0] * d - c[0], axis[1] * d - c[1], axis[2] * d - c[2])


def _build_geometry():
    positions = []
    normals = []
    for face in FACES:
        n = _FACE_NORMALS[face]
        for row in range(3):
            for col in range(3):
                positions.append(_sticker_position(face, row, col))
                normals.append(n)
    locator = {(p, n): i for i, (p, n) in enumerate(zip(positions, normals))}
    return positions, normals, locator


STICKER_POSITIONS, STICKER_NORMALS, _LOCATOR = _build_geometry()


def _quarter_turn_permutation(face: str) -> list[int]:
    """perm such that new[i] = old[perm[i]] after a clockwise quarter turn."""
    axis = _FACE_NORMALS[face]
    perm = list(range(54))
    for src in range(54):
        p, n = STICKER_POSITIONS[src], STICKER_NORMALS[src]
        if _dot(p, axis) == 1:  # sticker is in the turned layer
            dst = _LOCATOR[(_rotate_cw(axis, p), _rotate_cw(axis, n))]
            perm[dst] = src
    return perm


def _compose_perm(a: list[int], b: list[int]) -> list[int]:
    # applying a then b: new[i] = mid[b[i]] = old[a[b[i]]]
    return [a[b[i]] for i in range(54)]


def _build_move_permutations() -> dict[str, list[int]]:
    moves = {}
    for face in FACES:
        q = _quarter_turn_permutation(face)
        moves[face + "1"] = q
        moves[face + "2"] = _compose_perm(q, q)
        moves[face + "3"] = _compose_perm(_compose_perm(q, q), q)
    return moves


MOVE_PERMUTATIONS = _build_move_permutations()

CENTER_INDICES = tuple(9 * f + 4 for f in range(6))


def apply_move(stickers: str, move: str) -> str:
    """Apply a move ("U1".."B3") to a 54-char facelet string."""
    perm = MOVE_PERMUTATIONS[move]
    return "".join(stickers[perm[i]] for i in range(54))


def apply_moves(stickers: str, moves: list[str]) -> str:
    for m in moves:
        stickers = apply_move(stickers, m)
    return stickers


# --- cubie slot geometry, shared with the cubie model -----------------------

# Corner slots in a fixed order; each is a corner position of the cube.
CORNER_SLOT_POSITIONS = (
    (1, 1, 1),    # URF
    (-1, 1, 1),   # UFL
    (-1, 1, -1),  # ULB
    (1, 1, -1),   # UBR
    (1, -1, 1),   # DFR
    (-1, -1, 1),  # DLF
    (-1, -1, -1), # DBL
    (1, -1, -1),  # DRB
)

EDGE_SLOT_POSITIONS = (
    (1, 1, 0),    # UR
    (0, 1, 1),    # UF
    (-1, 1, 0),   # UL
    (0, 1, -1),   # UB
    (1, -1, 0),   # DR
    (0, -1, 1),   # DF
    (-1, -1, 0),  # DL
    (0, -1, -1),  # DB
    (1, 0, 1),    # FR
    (-1, 0, 1),   # FL
    (-1, 0, -1),  # BL
    (1, 0, -1),   # BR
)

CORNER_NAMES = ("URF", "UFL", "ULB", "UBR", "DFR", "DLF", "DBL", "DRB")
EDGE_NAMES = ("UR", "UF", "UL", "UB", "DR", "DF", "DL", "DB", "FR", "FL", "BL", "BR")


def _corner_facelets(pos) -> tuple[int, int, int]:
    """The three sticker indices of a corner, in orientation-reference order.

    First the U/D sticker, then the other two winding consistently around the
    outward corner diagonal (fixed chirality for all eight corners, which is
    what makes the twist sum invariant hold).
    """
    here = [i for i, p in enumerate(STICKER_POSITIONS) if p == pos]
    assert len(here) == 3
    first = next(i for i in here if STICKER_NORMALS[i][1] != 0)
    rest = [i for i in here if i != first]
    n1 = STICKER_NORMALS[first]
    a, b = rest
    if _dot(_cross(n1, STICKER_NORMALS[a]), pos) > 0:
        return (first, a, b)
    return (first, b, a)


def _edge_facelets(pos) -> tuple[int, int]:
    """The two sticker indices of an edge: U/D sticker first, else F/B first."""
    here = [i for i, p in enumerate(STICKER_POSITIONS) if p == pos]
    assert len(here) == 2

    def priority(i):
        n = STICKER_NORMALS[i]
        return (abs(n[1]), abs(n[2]))  # y beats z beats x

    here.sort(key=priority, reverse=True)
    return (here[0], here[1])


CORNER_FACELETS = tuple(_corner_facelets(p) for p in CORNER_SLOT_POSITIONS)
EDGE_FACELETS = tuple(_edge_facelets(p) for p in EDGE_SLOT_POSITIONS)

# Face letters each solved cubie shows, by slot; used to identify cubies.
CORNER_LABELS = tuple(
    tuple(SOLVED[f] for f in facelets) for facelets in CORNER_FACELETS
)
EDGE_LABELS = tuple(tuple(SOLVED[f] for f in facelets) for facelets in EDGE_FACELETS)
