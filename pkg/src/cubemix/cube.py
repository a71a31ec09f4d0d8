"""Cubie-level cube group: states, the 18 generators, notation, named targets.

States are immutable. A state is a group element; applying a move
right-multiplies: apply_move(g, m) == compose(g, MOVE_STATES[m]). The 18
cubie-level move states are derived from the sticker model in
:mod:`cubemix.facelets`, never hand-typed.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Iterable, Iterator

from . import facelets

FACE_LETTERS = "UDFBLR"  # face enumeration order for Move indexing
AMOUNTS = (1, 2, 3)


class MoveParseError(ValueError):
    """Bad move text; carries the offset of the offending character."""

    def __init__(self, message: str, position: int):
        super().__init__(f"{message} (at offset {position})")
        self.position = position


class FaceletError(ValueError):
    """Base class for facelet-string rejection."""


class FaceletLengthError(FaceletError):
    pass


class FaceletMultiplicityError(FaceletError):
    pass


class FaceletCubieError(FaceletError):
    """Sticker pattern does not correspond to any legal cubie assignment."""


class UnreachableStateError(FaceletError):
    """Legal cubies, but the state violates a reachability invariant."""

    def __init__(self, violations: list[str]):
        super().__init__("; ".join(violations))
        self.violations = violations


@dataclass(frozen=True, order=True)
class Move:
    face: str
    amount: int

    def __post_init__(self):
        if self.face not in FACE_LETTERS or self.amount not in AMOUNTS:
            raise ValueError(f"no such move: {self.face}{self.amount}")

    @property
    def index(self) -> int:
        """Position in the fixed 18-move enumeration (face-major)."""
        return FACE_LETTERS.index(self.face) * 3 + (self.amount - 1)

    def inverse(self) -> "Move":
        return Move(self.face, 4 - self.amount if self.amount != 2 else 2)

    def __str__(self) -> str:
        return f"{self.face}{self.amount}"


ALL_MOVES = tuple(Move(f, a) for f in FACE_LETTERS for a in AMOUNTS)

MoveSequence = tuple  # a word in the generators: tuple[Move, ...]


_TOKEN = re.compile(r"([URFDLB])([123']?)")


def parse_moves(text: str) -> tuple[Move, ...]:
    """Parse move text: "R3 U1" or Singmaster "R' U". Whitespace optional."""
    moves = []
    i = 0
    while i < len(text):
        if text[i].isspace():
            i += 1
            continue
        m = _TOKEN.match(text, i)
        if m is None:
            raise MoveParseError(f"unexpected character {text[i]!r}", i)
        face, suffix = m.group(1), m.group(2)
        if suffix == "'":
            amount = 3
        elif suffix == "":
            amount = 1
        else:
            amount = int(suffix)
        # reject digits like "R9" with a position on the digit
        nxt = i + 1
        if nxt < len(text) and text[nxt].isdigit() and suffix == "":
            raise MoveParseError(f"invalid amount {text[nxt]!r}", nxt)
        moves.append(Move(face, amount))
        i = m.end()
    return tuple(moves)


def format_moves(moves: Iterable[Move]) -> str:
    return " ".join(str(m) for m in moves)


@dataclass(frozen=True)
class CubeState:
    """Corner/edge permutations and orientations.

    corner_perm[slot] = which cubie occupies the slot; corner_ori[slot] = its
    twist mod 3 relative to the slot reference; likewise edges mod 2.
    """

    corner_perm: tuple
    corner_ori: tuple
    edge_perm: tuple
    edge_ori: tuple

    def is_identity(self) -> bool:
        return self == ORIGIN


def _perm_sign(perm) -> int:
    seen = [False] * len(perm)
    sign = 1
    for i in range(len(perm)):
        if seen[i]:
            continue
        j, length = i, 0
        while not seen[j]:
            seen[j] = True
            j = perm[j]
            length += 1
        if length % 2 == 0:
            sign = -sign
    return sign


def validate(state: CubeState) -> list[str]:
    """Return the list of violated reachability invariants (empty = ok)."""
    violations = []
    cp, co, ep, eo = state.corner_perm, state.corner_ori, state.edge_perm, state.edge_ori
    corner_perm_ok = sorted(cp) == list(range(8))
    edge_perm_ok = sorted(ep) == list(range(12))
    if not corner_perm_ok:
        violations.append("corner_perm is not a permutation of 0..7")
    if not edge_perm_ok:
        violations.append("edge_perm is not a permutation of 0..11")
    if len(co) != 8 or any(v not in (0, 1, 2) for v in co):
        violations.append("corner_ori values outside {0,1,2}")
    elif sum(co) % 3 != 0:
        violations.append("corner orientation sum not divisible by 3")
    if len(eo) != 12 or any(v not in (0, 1) for v in eo):
        violations.append("edge_ori values outside {0,1}")
    elif sum(eo) % 2 != 0:
        violations.append("edge orientation sum not even")
    if corner_perm_ok and edge_perm_ok and _perm_sign(cp) != _perm_sign(ep):
        violations.append("corner and edge permutation parities differ")
    return violations


def compose(a: CubeState, b: CubeState) -> CubeState:
    """Group product: the state reached by performing a, then b's word."""
    bcp, bco, bep, beo = b.corner_perm, b.corner_ori, b.edge_perm, b.edge_ori
    acp, aco, aep, aeo = a.corner_perm, a.corner_ori, a.edge_perm, a.edge_ori
    return CubeState(
        tuple(acp[bcp[i]] for i in range(8)),
        tuple((aco[bcp[i]] + bco[i]) % 3 for i in range(8)),
        tuple(aep[bep[i]] for i in range(12)),
        tuple((aeo[bep[i]] + beo[i]) % 2 for i in range(12)),
    )


def inverse(state: CubeState) -> CubeState:
    cp, co, ep, eo = state.corner_perm, state.corner_ori, state.edge_perm, state.edge_ori
    icp = [0] * 8
    iep = [0] * 12
    for i in range(8):
        icp[cp[i]] = i
    for i in range(12):
        iep[ep[i]] = i
    ico = tuple((-co[icp[i]]) % 3 for i in range(8))
    ieo = tuple(eo[iep[i]] % 2 for i in range(12))
    return CubeState(tuple(icp), ico, tuple(iep), ieo)


def relative_state(x: CubeState, target: CubeState) -> CubeState:
    """The state whose distance to the origin equals x's distance to target."""
    return compose(inverse(target), x)


ORIGIN = CubeState(
    tuple(range(8)), (0,) * 8, tuple(range(12)), (0,) * 12
)


# --- facelet conversion ------------------------------------------------------

def format_state(state: CubeState) -> str:
    """Render as a 54-char facelet string (faces U,R,F,D,L,B row-major)."""
    stickers = [""] * 54
    for slot in range(8):
        cubie = state.corner_perm[slot]
        ori = state.corner_ori[slot]
        for k in range(3):
            stickers[facelets.CORNER_FACELETS[slot][(k + ori) % 3]] = (
                facelets.CORNER_LABELS[cubie][k]
            )
    for slot in range(12):
        cubie = state.edge_perm[slot]
        ori = state.edge_ori[slot]
        for k in range(2):
            stickers[facelets.EDGE_FACELETS[slot][(k + ori) % 2]] = (
                facelets.EDGE_LABELS[cubie][k]
            )
    for c in facelets.CENTER_INDICES:
        stickers[c] = facelets.SOLVED[c]
    return "".join(stickers)


_CORNER_LOOKUP = {}
for _i, _labels in enumerate(facelets.CORNER_LABELS):
    for _o in range(3):
        key = tuple(_labels[(k - _o) % 3] for k in range(3))
        _CORNER_LOOKUP[key] = (_i, _o)
_EDGE_LOOKUP = {}
for _i, _labels in enumerate(facelets.EDGE_LABELS):
    for _o in range(2):
        key = tuple(_labels[(k - _o) % 2] for k in range(2))
        _EDGE_LOOKUP[key] = (_i, _o)


def parse_state(text: str, check_reachable: bool = True) -> CubeState:
    """Parse a 54-char facelet string into a CubeState.

    Raises FaceletLengthError / FaceletMultiplicityError / FaceletCubieError /
    UnreachableStateError for the distinct failure kinds.
    """
    if len(text) != 54:
        raise FaceletLengthError(f"expected 54 stickers, got {len(text)}")
    for letter in facelets.FACES:
        n = text.count(letter)
        if n != 9:
            raise FaceletMultiplicityError(f"sticker {letter!r} appears {n} times, expected 9")
    if set(text) - set(facelets.FACES):
        raise FaceletMultiplicityError(
            f"unknown sticker letters: {sorted(set(text) - set(facelets.FACES))}"
        )
    for c in facelets.CENTER_INDICES:
        if text[c] != facelets.SOLVED[c]:
            raise FaceletCubieError(f"center sticker {c} is {text[c]!r}, expected {facelets.SOLVED[c]!r}")
    cp, co = [0] * 8, [0] * 8
    for slot in range(8):
        key = tuple(text[f] for f in facelets.CORNER_FACELETS[slot])
        try:
            cp[slot], co[slot] = _CORNER_LOOKUP[key]
        except KeyError:
            raise FaceletCubieError(
                f"corner slot {facelets.CORNER_NAMES[slot]} shows {''.join(key)},"
                " not a legal corner cubie"
            ) from None
    ep, eo = [0] * 12, [0] * 12
    for slot in range(12):
        key = tuple(text[f] for f in facelets.EDGE_FACELETS[slot])
        try:
            ep[slot], eo[slot] = _EDGE_LOOKUP[key]
        except KeyError:
            raise FaceletCubieError(
                f"edge slot {facelets.EDGE_NAMES[slot]} shows {''.join(key)},"
                " not a legal edge cubie"
            ) from None
    if len(set(cp)) != 8:
        raise FaceletCubieError("duplicate corner cubies")
    if len(set(ep)) != 12:
        raise FaceletCubieError("duplicate edge cubies")
    state = CubeState(tuple(cp), tuple(co), tuple(ep), tuple(eo))
    if check_reachable:
        violations = validate(state)
        if violations:
            raise UnreachableStateError(violations)
    return state


# --- the 18 generators, derived from the sticker model -----------------------

def _derive_move_states() -> tuple:
    states = []
    for move in ALL_MOVES:
        stickers = facelets.apply_move(facelets.SOLVED, str(move))
        states.append(parse_state(stickers))
    return tuple(states)


MOVE_STATES = _derive_move_states()


def generator_state(move: Move) -> CubeState:
    """The group element of a single move (the state one move from solved)."""
    return MOVE_STATES[move.index]


def apply_move(state: CubeState, move: Move) -> CubeState:
    return compose(state, MOVE_STATES[move.index])


def apply_sequence(state: CubeState, moves: Iterable[Move]) -> CubeState:
    for m in moves:
        state = compose(state, MOVE_STATES[m.index])
    return state


# --- named targets ------------------------------------------------------------

SUPERFLIP = CubeState(
    tuple(range(8)), (0,) * 8, tuple(range(12)), (1,) * 12
)

CHECKERBOARD = apply_sequence(ORIGIN, parse_moves("U2 D2 F2 B2 L2 R2"))

_NAMED = {"origin": ORIGIN, "superflip": SUPERFLIP, "checkerboard": CHECKERBOARD}


def named_state(name: str) -> CubeState:
    try:
        return _NAMED[name]
    except KeyError:
        raise ValueError(f"unknown named state {name!r}; expected one of {sorted(_NAMED)}") from None


def random_states(rng, count: int) -> Iterator[CubeState]:
    """Helper used by tests: uniform states from an rng (see cubemix.rng)."""
    from .rng import uniform_state

    for _ in range(count):
        yield uniform_state(rng)
