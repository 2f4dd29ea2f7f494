"""Ground-truth candidate moves offered to the builder each turn.

Every grid position is compared against the target stack: shorter stacks
yield the next required placement, deeper stacks yield a removal of the
topmost block, and equal-depth stacks with a wrong block yield a removal
that exposes it. Each candidate is verified by simulating it against a
copy of the state before inclusion.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from enum import Enum

from .engine import (
    ALL_POSITIONS,
    Move,
    MoveOutcome,
    Place,
    Position,
    Remove,
    Size,
    WorldState,
    apply_move,
)

DEFAULT_ORACLE_N = 5


class CandidateCase(str, Enum):
    PLACEMENT = "placement"
    EXCESS_REMOVAL = "excess_removal"
    WRONG_BLOCK_CORRECTION = "wrong_block_correction"


# Dedup keeps the first label in this order when one physical move arises
# from more than one case.
_CASE_PRIORITY = {
    CandidateCase.PLACEMENT: 0,
    CandidateCase.EXCESS_REMOVAL: 1,
    CandidateCase.WRONG_BLOCK_CORRECTION: 2,
}


@dataclass(frozen=True)
class OracleCandidate:
    move: Place | Remove
    case: CandidateCase
    display: str


@dataclass(frozen=True)
class OracleSet:
    turn: int
    candidates: tuple[OracleCandidate, ...]

    @property
    def top(self) -> OracleCandidate | None:
        """The first sampled candidate; the basis for top-move remove rates."""
        return self.candidates[0] if self.candidates else None


def format_candidate(move: Place | Remove) -> str:
    """Candidate display string, embedded verbatim in builder prompts and logs."""
    if isinstance(move, Place):
        text = f"PLACE {move.block.code} @ {move.position.key()} layer {move.layer}"
    else:
        text = f"REMOVE @ {move.position.key()} layer {move.layer}"
    if move.span_to is not None:
        text += f" -> {move.span_to.key()}"
    return text


def _canonical_endpoints(pos: Position, span: Position | None) -> tuple[Position, Position | None]:
    if span is None or pos.index <= span.index:
        return pos, span
    return span, pos


def _move_key(move: Place | Remove) -> tuple:
    pos, span = _canonical_endpoints(move.position, move.span_to)
    if isinstance(move, Place):
        return ("place", move.block.code, pos.index, move.layer, None if span is None else span.index)
    return ("remove", pos.index, move.layer, None if span is None else span.index)


def _remove_top(state: WorldState, pos: Position) -> Remove:
    top = len(state.stack(pos)) - 1
    span = state.domino_partner(pos, top) if state.stack(pos)[top].domino_id is not None else None
    return Remove(pos, top, span_to=span)


def enumerate_candidates(state: WorldState, target: WorldState) -> list[OracleCandidate]:
    """All simulation-verified single moves that make progress toward the target.

    May be empty: a board can reach configurations with no single
    forward-progress move.
    """
    found: dict[tuple, OracleCandidate] = {}

    def offer(move: Place | Remove, case: CandidateCase) -> None:
        outcome: MoveOutcome = apply_move(state, move)
        if not outcome.accepted:
            return
        key = _move_key(move)
        prev = found.get(key)
        if prev is not None and _CASE_PRIORITY[prev.case] <= _CASE_PRIORITY[case]:
            return
        if prev is not None:
            move = prev.move  # keep the first-seen orientation, relabel only
        found[key] = OracleCandidate(move, case, format_candidate(move))

    for pos in ALL_POSITIONS:
        cur = state.stack(pos)
        tgt = target.stack(pos)
        if len(cur) < len(tgt):
            wanted = tgt[len(cur)]
            if wanted.block.size is Size.LARGE:
                partner = target.domino_partner(pos, len(cur))
                p, s = _canonical_endpoints(pos, partner)
                offer(Place(wanted.block, p, len(cur), span_to=s), CandidateCase.PLACEMENT)
            else:
                offer(Place(wanted.block, pos, len(cur)), CandidateCase.PLACEMENT)
        elif len(cur) > len(tgt):
            offer(_remove_top(state, pos), CandidateCase.EXCESS_REMOVAL)
        elif cur and state.codes(pos) != target.codes(pos):
            # Equal depth but a wrong block somewhere in the stack: remove the
            # top (the wrong block itself, or the block burying it).
            offer(_remove_top(state, pos), CandidateCase.WRONG_BLOCK_CORRECTION)

    return list(found.values())


def sample_candidates(
    candidates: list[OracleCandidate],
    structure_index: int,
    turn: int,
    n: int = DEFAULT_ORACLE_N,
) -> OracleSet:
    """Draw up to n candidates with a seed derived from (structure_index, turn).

    The draw is independent of any agent behavior, so the candidate subset
    is stable across runs and models.
    """
    rng = random.Random(f"craft-oracle/{structure_index}/{turn}")
    chosen = rng.sample(candidates, min(n, len(candidates)))
    return OracleSet(turn=turn, candidates=tuple(chosen))


def turn_remove_prescribed(oracle_set: OracleSet) -> bool:
    """True when any sampled candidate is a removal (the oracle remove rate basis)."""
    return any(isinstance(c.move, Remove) for c in oracle_set.candidates)


def moves_match(a: Move, b: Move) -> bool:
    """Physical equality of two moves, ignoring domino endpoint order."""
    if isinstance(a, (Place, Remove)) and isinstance(b, (Place, Remove)):
        return _move_key(a) == _move_key(b) if type(a) is type(b) else False
    return a == b
