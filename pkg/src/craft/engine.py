"""Board state, move validation, and the canonical board text format.

The world is a 3x3 grid of block stacks capped at height 3. Blocks are
small (one cell) or large (a domino spanning two orthogonally adjacent
cells on the same layer). States are immutable snapshots; ``apply_move``
is a pure function and never mutates its input.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from enum import Enum

GRID_SIZE = 3
MAX_HEIGHT = 3


class Color(str, Enum):
    GREEN = "green"
    BLUE = "blue"
    RED = "red"
    YELLOW = "yellow"
    ORANGE = "orange"


class Size(str, Enum):
    SMALL = "small"
    LARGE = "large"


_COLOR_BY_INITIAL = {c.value[0]: c for c in Color}
_SIZE_BY_INITIAL = {"s": Size.SMALL, "l": Size.LARGE}


@dataclass(frozen=True)
class BlockType:
    """A block kind, encoded as a two-character code (color initial + size initial)."""

    color: Color
    size: Size

    @property
    def code(self) -> str:
        return self.color.value[0] + self.size.value[0]

    @classmethod
    def from_code(cls, code: str) -> BlockType:
        if len(code) != 2 or code[0] not in _COLOR_BY_INITIAL or code[1] not in _SIZE_BY_INITIAL:
            raise ValueError(f"unknown block code {code!r}")
        return cls(_COLOR_BY_INITIAL[code[0]], _SIZE_BY_INITIAL[code[1]])


ALL_BLOCK_TYPES = tuple(BlockType(c, s) for c in Color for s in Size)
ALL_BLOCK_CODES = tuple(b.code for b in ALL_BLOCK_TYPES)


@dataclass(frozen=True)
class Position:
    """A grid coordinate; row i counts away from the front, col j left to right."""

    i: int
    j: int

    def __post_init__(self) -> None:
        if self.i not in (0, 1, 2) or self.j not in (0, 1, 2):
            raise ValueError(f"position ({self.i},{self.j}) outside the 3x3 grid")

    @property
    def index(self) -> int:
        return self.i * GRID_SIZE + self.j

    def neighbors(self) -> tuple[Position, ...]:
        """Orthogonal in-grid neighbors."""
        out = []
        for di, dj in ((-1, 0), (1, 0), (0, -1), (0, 1)):
            ni, nj = self.i + di, self.j + dj
            if 0 <= ni < GRID_SIZE and 0 <= nj < GRID_SIZE:
                out.append(Position(ni, nj))
        return tuple(out)

    def is_adjacent(self, other: Position) -> bool:
        return abs(self.i - other.i) + abs(self.j - other.j) == 1

    def key(self) -> str:
        return f"({self.i},{self.j})"


ALL_POSITIONS = tuple(Position(i, j) for i in range(GRID_SIZE) for j in range(GRID_SIZE))


def parse_position(text: str) -> Position:
    """Parse a "(i,j)" coordinate key."""
    text = text.strip()
    if not (text.startswith("(") and text.endswith(")")):
        raise ValueError(f"bad position {text!r}")
    parts = text[1:-1].split(",")
    if len(parts) != 2 or not all(p.strip().lstrip("-").isdigit() for p in parts):
        raise ValueError(f"bad position {text!r}")
    return Position(int(parts[0]), int(parts[1]))


@dataclass(frozen=True)
class PlacedBlock:
    """A block occupying one cell; both halves of a domino share a domino_id."""

    block: BlockType
    domino_id: int | None = None


Stack = tuple[PlacedBlock, ...]


@dataclass(frozen=True)
class WorldState:
    """Immutable snapshot of the nine stacks, row-major."""

    cells: tuple[Stack, ...]

    @classmethod
    def empty(cls) -> WorldState:
        return cls(tuple(() for _ in range(GRID_SIZE * GRID_SIZE)))

    def stack(self, pos: Position) -> Stack:
        return self.cells[pos.index]

    def codes(self, pos: Position) -> tuple[str, ...]:
        return tuple(pb.block.code for pb in self.cells[pos.index])

    def domino_partner(self, pos: Position, layer: int) -> Position | None:
        """The other cell of the domino at (pos, layer), or None for a small block."""
        pb = self.cells[pos.index][layer]
        if pb.domino_id is None:
            return None
        for other in pos.neighbors():
            stack = self.cells[other.index]
            if layer < len(stack) and stack[layer].domino_id == pb.domino_id:
                return other
        raise InvariantViolationError(f"domino {pb.domino_id} at {pos.key()} has no partner cell")


# Moves ----------------------------------------------------------------------


@dataclass(frozen=True)
class Place:
    block: BlockType
    position: Position
    layer: int
    span_to: Position | None = None

    def __post_init__(self) -> None:
        if self.layer not in (0, 1, 2):
            raise ValueError(f"layer {self.layer} outside 0-2")


@dataclass(frozen=True)
class Remove:
    position: Position
    layer: int
    span_to: Position | None = None

    def __post_init__(self) -> None:
        if self.layer not in (0, 1, 2):
            raise ValueError(f"layer {self.layer} outside 0-2")


@dataclass(frozen=True)
class Clarify:
    question: str


Move = Place | Remove | Clarify


class ErrorCode(str, Enum):
    WRONG_LAYER = "wrong_layer"
    STACK_FULL = "stack_full"
    MISSING_SPAN = "missing_span"
    BAD_SPAN = "bad_span"
    NOT_TOP_BLOCK = "not_top_block"
    EMPTY_CELL = "empty_cell"


@dataclass(frozen=True)
class EngineError:
    code: ErrorCode
    message: str


@dataclass(frozen=True)
class MoveOutcome:
    accepted: bool
    new_state: WorldState
    error: EngineError | None = None


class MalformedBoardError(ValueError):
    pass


class InvariantViolationError(ValueError):
    pass


# Error messages are frozen: downstream failure classification keys on the
# "layer" / "span" substrings, so wording changes are breaking changes.


def _err_wrong_layer(pos: Position, layer: int, height: int) -> EngineError:
    return EngineError(
        ErrorCode.WRONG_LAYER,
        f"Cannot place at layer {layer} at {pos.key()} - next block goes at layer {height}",
    )


def _err_stack_full(pos: Position) -> EngineError:
    return EngineError(ErrorCode.STACK_FULL, f"Stack at {pos.key()} is already full (height {MAX_HEIGHT})")


def _err_missing_span(pos: Position) -> EngineError:
    return EngineError(
        ErrorCode.MISSING_SPAN,
        f"Large block at {pos.key()} requires span_to naming its second cell - it will always fail without one",
    )


def _err_bad_span(message: str) -> EngineError:
    return EngineError(ErrorCode.BAD_SPAN, message)


def _err_not_top(pos: Position, layer: int, top: int) -> EngineError:
    return EngineError(
        ErrorCode.NOT_TOP_BLOCK,
        f"Cannot remove layer {layer} at {pos.key()} - must remove top block first (layer {top})",
    )


def _err_empty_cell(pos: Position) -> EngineError:
    return EngineError(ErrorCode.EMPTY_CELL, f"Cannot remove from empty cell {pos.key()}")


def stack_height(state: WorldState, position: Position) -> int:
    """Number of occupied layers at a position (0-3)."""
    return len(state.cells[position.index])


def _domino_id_for(primary: Position, layer: int) -> int:
    # Unique per live (cell, layer) pair, so no placement counter is needed.
    return primary.index * MAX_HEIGHT + layer


def _reject(state: WorldState, error: EngineError) -> MoveOutcome:
    return MoveOutcome(accepted=False, new_state=state, error=error)


def _apply_place(state: WorldState, move: Place) -> MoveOutcome:
    pos = move.position
    height = len(state.cells[pos.index])

    if move.block.size is Size.SMALL:
        if move.span_to is not None:
            return _reject(state, _err_bad_span(f"Small block at {pos.key()} cannot take a span endpoint"))
        if height >= MAX_HEIGHT:
            return _reject(state, _err_stack_full(pos))
        if move.layer != height:
            return _reject(state, _err_wrong_layer(pos, move.layer, height))
        new_cells = list(state.cells)
        new_cells[pos.index] = state.cells[pos.index] + (PlacedBlock(move.block),)
        return MoveOutcome(accepted=True, new_state=WorldState(tuple(new_cells)))

    span = move.span_to
    if span is None:
        return _reject(state, _err_missing_span(pos))
    if not pos.is_adjacent(span):
        return _reject(
            state,
            _err_bad_span(f"Invalid span {pos.key()} -> {span.key()}: cells are not orthogonal neighbors"),
        )
    span_height = len(state.cells[span.index])
    if span_height != height:
        return _reject(
            state,
            _err_bad_span(
                f"Invalid span {pos.key()} -> {span.key()}: endpoint stacks have unequal heights"
                f" ({height} vs {span_height})"
            ),
        )
    if height >= MAX_HEIGHT:
        return _reject(state, _err_stack_full(pos))
    if move.layer != height:
        return _reject(state, _err_wrong_layer(pos, move.layer, height))
    domino_id = _domino_id_for(min(pos, span, key=lambda p: p.index), move.layer)
    placed = PlacedBlock(move.block, domino_id)
    new_cells = list(state.cells)
    new_cells[pos.index] = state.cells[pos.index] + (placed,)
    new_cells[span.index] = state.cells[span.index] + (placed,)
    return MoveOutcome(accepted=True, new_state=WorldState(tuple(new_cells)))


def _apply_remove(state: WorldState, move: Remove) -> MoveOutcome:
    pos = move.position
    stack = state.cells[pos.index]
    if not stack:
        return _reject(state, _err_empty_cell(pos))
    top = len(stack) - 1
    if move.layer != top:
        return _reject(state, _err_not_top(pos, move.layer, top))

    block = stack[top]
    if block.domino_id is None:
        if move.span_to is not None:
            return _reject(
                state,
                _err_bad_span(f"Top block at {pos.key()} is a small block and has no span partner"),
            )
        new_cells = list(state.cells)
        new_cells[pos.index] = stack[:-1]
        return MoveOutcome(accepted=True, new_state=WorldState(tuple(new_cells)))

    partner = state.domino_partner(pos, top)
    assert partner is not None
    if move.span_to is None:
        return _reject(state, _err_missing_span(pos))
    if move.span_to != partner:
        return _reject(
            state,
            _err_bad_span(
                f"Given span endpoint {move.span_to.key()} does not match the large block partner {partner.key()}"
            ),
        )
    partner_stack = state.cells[partner.index]
    partner_top = len(partner_stack) - 1
    if partner_top != top:
        # The partner cell carries blocks above the domino; removing now would
        # leave them floating.
        return _reject(state, _err_not_top(partner, top, partner_top))
    new_cells = list(state.cells)
    new_cells[pos.index] = stack[:-1]
    new_cells[partner.index] = partner_stack[:-1]
    return MoveOutcome(accepted=True, new_state=WorldState(tuple(new_cells)))


def apply_move(state: WorldState, move: Move) -> MoveOutcome:
    """Validate and apply one move, returning the input state unchanged on rejection.

    Clarify is a no-op pass-through. A Place succeeds only at the current
    stack top (both endpoints for a large block, which must be orthogonal
    neighbors of equal height). A Remove succeeds only for the topmost
    block; removing a large block requires span_to to name the actual
    partner cell, and clears both cells.
    """
    if isinstance(move, Clarify):
        return MoveOutcome(accepted=True, new_state=state)
    if isinstance(move, Place):
        return _apply_place(state, move)
    return _apply_remove(state, move)


# Canonical board text --------------------------------------------------------


def serialize_board(state: WorldState) -> str:
    """Canonical board text: "(i,j)" keys row-major, block codes bottom-to-top.

    Dominoes appear in both of their cells; domino identity is internal and
    is not serialized.
    """
    mapping = {pos.key(): [pb.block.code for pb in state.cells[pos.index]] for pos in ALL_POSITIONS}
    return json.dumps(mapping, indent=2)


def board_mapping(state: WorldState) -> dict[str, list[str]]:
    """The board as a plain key -> code-list mapping (row-major key order)."""
    return {pos.key(): [pb.block.code for pb in state.cells[pos.index]] for pos in ALL_POSITIONS}


def parse_board(text: str) -> WorldState:
    """Parse the canonical board text back into a WorldState.

    Domino identity is reconstructed by pairing equal codes at equal layers,
    scanning row-major and preferring the same-row (horizontal) neighbor.
    Raises MalformedBoardError for unreadable input and
    InvariantViolationError for over-tall stacks or dangling half-dominoes.
    """
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise MalformedBoardError(f"board text is not valid JSON: {exc}") from exc
    if not isinstance(raw, dict):
        raise MalformedBoardError("board text must be an object of position keys")

    expected = {pos.key() for pos in ALL_POSITIONS}
    if set(raw) != expected:
        raise MalformedBoardError(f"board keys {sorted(raw)} do not match the nine grid positions")

    codes: dict[Position, list[str]] = {}
    for pos in ALL_POSITIONS:
        value = raw[pos.key()]
        if not isinstance(value, list) or not all(isinstance(c, str) for c in value):
            raise MalformedBoardError(f"stack at {pos.key()} must be a list of block codes")
        if len(value) > MAX_HEIGHT:
            raise InvariantViolationError(f"stack at {pos.key()} exceeds height {MAX_HEIGHT}")
        for code in value:
            if code not in ALL_BLOCK_CODES:
                raise MalformedBoardError(f"unknown block code {code!r} at {pos.key()}")
        codes[pos] = list(value)

    stacks: dict[Position, list[PlacedBlock]] = {pos: [] for pos in ALL_POSITIONS}
    for layer in range(MAX_HEIGHT):
        paired: set[Position] = set()
        for pos in ALL_POSITIONS:
            if layer >= len(codes[pos]) or pos in paired:
                continue
            block = BlockType.from_code(codes[pos][layer])
            if block.size is Size.SMALL:
                stacks[pos].append(PlacedBlock(block))
                continue
            partner = None
            for cand in (Position(pos.i, pos.j + 1) if pos.j + 1 < GRID_SIZE else None,
                         Position(pos.i + 1, pos.j) if pos.i + 1 < GRID_SIZE else None):
                if cand is None or cand in paired:
                    continue
                if layer < len(codes[cand]) and codes[cand][layer] == block.code and len(stacks[cand]) == layer:
                    partner = cand
                    break
            if partner is None:
                raise InvariantViolationError(
                    f"dangling half-domino {block.code!r} at {pos.key()} layer {layer}"
                )
            placed = PlacedBlock(block, _domino_id_for(pos, layer))
            stacks[pos].append(placed)
            stacks[partner].append(placed)
            paired.add(pos)
            paired.add(partner)

    for pos in ALL_POSITIONS:
        if len(stacks[pos]) != len(codes[pos]):
            raise InvariantViolationError(f"stack at {pos.key()} could not be reconstructed")
    return WorldState(tuple(tuple(stacks[pos]) for pos in ALL_POSITIONS))


def validate_state(state: WorldState) -> list[str]:
    """All invariant violations in a state (empty list when healthy)."""
    problems: list[str] = []
    if len(state.cells) != GRID_SIZE * GRID_SIZE:
        return [f"state has {len(state.cells)} cells, expected {GRID_SIZE * GRID_SIZE}"]
    occurrences: dict[int, list[tuple[Position, int, str]]] = {}
    for pos in ALL_POSITIONS:
        stack = state.cells[pos.index]
        if len(stack) > MAX_HEIGHT:
            problems.append(f"stack at {pos.key()} has height {len(stack)} > {MAX_HEIGHT}")
        for layer, pb in enumerate(stack):
            if pb.block.size is Size.SMALL and pb.domino_id is not None:
                problems.append(f"small block at {pos.key()} layer {layer} carries a domino id")
            if pb.block.size is Size.LARGE:
                if pb.domino_id is None:
                    problems.append(f"large block at {pos.key()} layer {layer} lacks a domino id")
                else:
                    occurrences.setdefault(pb.domino_id, []).append((pos, layer, pb.block.code))
    for domino_id, occ in occurrences.items():
        if len(occ) != 2:
            problems.append(f"domino {domino_id} occupies {len(occ)} cells, expected 2")
            continue
        (p1, l1, c1), (p2, l2, c2) = occ
        if l1 != l2:
            problems.append(f"domino {domino_id} spans layers {l1} and {l2}")
        if not p1.is_adjacent(p2):
            problems.append(f"domino {domino_id} cells {p1.key()} and {p2.key()} are not adjacent")
        if c1 != c2:
            problems.append(f"domino {domino_id} has mismatched codes {c1}/{c2}")
    return problems
