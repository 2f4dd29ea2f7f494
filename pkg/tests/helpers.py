"""Shared test fixtures: random states, moves, and reachable (state, target) pairs."""

from __future__ import annotations

import random

from craft.engine import (
    ALL_BLOCK_TYPES,
    ALL_POSITIONS,
    Clarify,
    Move,
    Place,
    Position,
    Remove,
    Size,
    WorldState,
    apply_move,
    stack_height,
)
from craft.oracle import enumerate_candidates
from craft.structgen import GenConfig, StructureSpec, generate


def random_position(rng: random.Random) -> Position:
    return rng.choice(ALL_POSITIONS)


def random_move(rng: random.Random, state: WorldState) -> Move:
    """An arbitrary move: often illegal, sometimes deliberately plausible."""
    roll = rng.random()
    if roll < 0.05:
        return Clarify("which block?")
    if roll < 0.55:
        block = rng.choice(ALL_BLOCK_TYPES)
        pos = random_position(rng)
        layer = rng.randrange(3)
        if rng.random() < 0.5:
            layer = stack_height(state, pos) if stack_height(state, pos) < 3 else layer
        span = None
        if block.size is Size.LARGE or rng.random() < 0.1:
            if rng.random() < 0.85:
                span = rng.choice(pos.neighbors())
            elif rng.random() < 0.5:
                span = random_position(rng)  # may be non-adjacent or equal
        if layer > 2:
            layer = 2
        return Place(block, pos, layer, span_to=span)
    pos = random_position(rng)
    height = stack_height(state, pos)
    layer = rng.randrange(3)
    if rng.random() < 0.6 and height > 0:
        layer = height - 1
    span = None
    if rng.random() < 0.4:
        span = rng.choice(pos.neighbors())
    elif height > 0 and state.stack(pos)[-1].domino_id is not None and rng.random() < 0.8:
        span = state.domino_partner(pos, height - 1)
    return Remove(pos, layer, span_to=span)


def random_legal_move(rng: random.Random, state: WorldState) -> Move | None:
    """A random accepted move, or None when the attempt budget runs out."""
    for _ in range(30):
        move = random_move(rng, state)
        if apply_move(state, move).accepted and not isinstance(move, Clarify):
            return move
    return None


def random_structure(rng: random.Random) -> StructureSpec:
    return generate(rng.randrange(10_000), GenConfig(seed=rng.randrange(10_000)))


def random_reachable_pair(rng: random.Random) -> tuple[WorldState, WorldState]:
    """A state reachable by legal moves, paired with a generated target.

    Mixes oracle-guided progress with legal detours so states sit anywhere
    between empty, on-track, and polluted with wrong blocks.
    """
    target = random_structure(rng).target
    state = WorldState.empty()
    for _ in range(rng.randrange(0, 30)):
        roll = rng.random()
        if roll < 0.6:
            candidates = enumerate_candidates(state, target)
            if candidates:
                state = apply_move(state, rng.choice(candidates).move).new_state
                continue
        move = random_legal_move(rng, state)
        if move is not None:
            state = apply_move(state, move).new_state
    return state, target
