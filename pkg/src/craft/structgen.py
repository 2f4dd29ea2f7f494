"""Procedural target-structure generation.

Two stages: assign stack heights (seven required positions always get
three layers; the two interior positions draw uniformly from {0,1,2}),
then tile each layer independently with small blocks and domino pairs.
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass

from .engine import (
    ALL_POSITIONS,
    BlockType,
    Color,
    Place,
    Position,
    Size,
    WorldState,
    apply_move,
    parse_board,
    serialize_board,
)

OPTIONAL_POSITIONS = (Position(1, 1), Position(2, 1))
REQUIRED_POSITIONS = tuple(p for p in ALL_POSITIONS if p not in OPTIONAL_POSITIONS)
REQUIRED_HEIGHT = 3

SIMPLE_MAX_BLOCKS = 22
MEDIUM_MAX_BLOCKS = 24

# Cells behind every wall projection; a domino may not pair one of these
# with a wall-visible cell, or the visible half would betray the hidden one.
INVISIBLE_POSITIONS = frozenset(OPTIONAL_POSITIONS)

Tier = str
TIERS = ("simple", "medium", "complex")
EVALUATION_TIER_QUOTAS = {"simple": 7, "medium": 8, "complex": 5}


@dataclass(frozen=True)
class GenConfig:
    seed: int = 0
    domino_attempt_probability: float = 0.3
    consecutive_type_retries: int = 3

    def __post_init__(self) -> None:
        if not 0.0 <= self.domino_attempt_probability <= 1.0:
            raise ValueError("domino_attempt_probability must be in [0,1]")
        if self.consecutive_type_retries < 0:
            raise ValueError("consecutive_type_retries must be >= 0")


@dataclass(frozen=True)
class StructureSpec:
    target: WorldState
    heights: dict[Position, int]
    block_count: int
    tier: Tier
    structure_index: int
    seed: int

    def board_text(self) -> str:
        return serialize_board(self.target)


def assign_heights(rng: random.Random) -> dict[Position, int]:
    """Required positions get height 3; optional ones draw uniformly from {0,1,2}."""
    heights = {pos: REQUIRED_HEIGHT for pos in REQUIRED_POSITIONS}
    for pos in OPTIONAL_POSITIONS:
        heights[pos] = rng.randrange(3)
    return heights


def _pair_allowed(a: Position, b: Position) -> bool:
    return (a in INVISIBLE_POSITIONS) == (b in INVISIBLE_POSITIONS)


def _draw_color(rng: random.Random, size: Size, below_codes: tuple[str, ...], retries: int) -> BlockType:
    # Redraw a bounded number of times to avoid repeating the block type of
    # the layer below; accept the repeat once retries run out.
    colors = list(Color)
    for _ in range(retries + 1):
        block = BlockType(rng.choice(colors), size)
        if block.code not in below_codes:
            return block
    return block


def tile_layer(
    layer: int,
    need: set[Position],
    rng: random.Random,
    config: GenConfig,
    below: dict[Position, str],
) -> dict[Position, tuple[BlockType, Position | None]]:
    """Fill every needed cell at one layer with a small block or half of a domino.

    Returns position -> (block, span partner or None). Dominoes only pair
    orthogonal neighbors that are both in need, and never pair a
    wall-visible cell with an invisible one.
    """
    assignment: dict[Position, tuple[BlockType, Position | None]] = {}
    for pos in sorted(need, key=lambda p: p.index):
        if pos in assignment:
            continue
        partner = None
        if rng.random() < config.domino_attempt_probability:
            candidates = [
                n
                for n in pos.neighbors()
                if n in need and n not in assignment and _pair_allowed(pos, n)
            ]
            if candidates:
                partner = rng.choice(sorted(candidates, key=lambda p: p.index))
        if partner is not None:
            below_codes = tuple(c for c in (below.get(pos), below.get(partner)) if c)
            block = _draw_color(rng, Size.LARGE, below_codes, config.consecutive_type_retries)
            assignment[pos] = (block, partner)
            assignment[partner] = (block, pos)
        else:
            below_codes = tuple(c for c in (below.get(pos),) if c)
            block = _draw_color(rng, Size.SMALL, below_codes, config.consecutive_type_retries)
            assignment[pos] = (block, None)
    return assignment


def count_blocks(heights: dict[Position, int]) -> int:
    """Filled-cell count; each half of a domino counts once."""
    return sum(heights.values())


def classify_complexity(count: int) -> Tier:
    if count <= SIMPLE_MAX_BLOCKS:
        return "simple"
    if count <= MEDIUM_MAX_BLOCKS:
        return "medium"
    return "complex"


def generate(structure_index: int, config: GenConfig) -> StructureSpec:
    """Deterministically generate one target for (structure_index, config.seed)."""
    rng = random.Random(f"craft-structure/{config.seed}/{structure_index}")
    heights = assign_heights(rng)

    state = WorldState.empty()
    below: dict[Position, str] = {}
    for layer in range(REQUIRED_HEIGHT):
        need = {pos for pos, h in heights.items() if h > layer}
        assignment = tile_layer(layer, need, rng, config, below)
        placed: set[Position] = set()
        for pos in sorted(need, key=lambda p: p.index):
            if pos in placed:
                continue
            block, partner = assignment[pos]
            outcome = apply_move(state, Place(block, pos, layer, span_to=partner))
            if not outcome.accepted:  # pragma: no cover - generation is layer-ordered
                raise RuntimeError(f"generator produced an illegal placement: {outcome.error}")
            state = outcome.new_state
            placed.add(pos)
            if partner is not None:
                placed.add(partner)
        below = {pos: assignment[pos][0].code for pos in need}

    total = count_blocks(heights)
    return StructureSpec(
        target=state,
        heights=heights,
        block_count=total,
        tier=classify_complexity(total),
        structure_index=structure_index,
        seed=config.seed,
    )


def placement_sequence(target: WorldState) -> list[Place]:
    """A legal bottom-up build order for a valid target (dominoes placed once)."""
    moves: list[Place] = []
    for layer in range(REQUIRED_HEIGHT):
        seen: set[Position] = set()
        for pos in ALL_POSITIONS:
            stack = target.stack(pos)
            if layer >= len(stack) or pos in seen:
                continue
            pb = stack[layer]
            if pb.domino_id is None:
                moves.append(Place(pb.block, pos, layer))
            else:
                partner = target.domino_partner(pos, layer)
                assert partner is not None
                moves.append(Place(pb.block, pos, layer, span_to=partner))
                seen.add(partner)
            seen.add(pos)
    return moves


def build_evaluation_set(
    config: GenConfig,
    quotas: dict[Tier, int] | None = None,
    max_attempts: int = 10_000,
) -> list[StructureSpec]:
    """Rejection-sample generated structures until the tier quotas fill.

    Structures keep the candidate index they were generated with, so each
    entry stays reproducible from (structure_index, seed) alone.
    """
    quotas = dict(EVALUATION_TIER_QUOTAS if quotas is None else quotas)
    remaining = dict(quotas)
    chosen: list[StructureSpec] = []
    for index in range(max_attempts):
        if all(v == 0 for v in remaining.values()):
            break
        spec = generate(index, config)
        if remaining.get(spec.tier, 0) > 0:
            remaining[spec.tier] -= 1
            chosen.append(spec)
    if any(v > 0 for v in remaining.values()):
        raise RuntimeError(f"tier quotas unfilled after {max_attempts} attempts: {remaining}")
    return chosen


# Structure set files ----------------------------------------------------------


def dump_structure_set(specs: list[StructureSpec]) -> str:
    records = [
        {
            "structure_index": s.structure_index,
            "seed": s.seed,
            "tier": s.tier,
            "block_count": s.block_count,
            "target": s.board_text(),
        }
        for s in specs
    ]
    return json.dumps({"format": "craft-structures", "version": 1, "structures": records}, indent=2)


def load_structure_set(text: str) -> list[StructureSpec]:
    data = json.loads(text)
    if data.get("format") != "craft-structures" or data.get("version") != 1:
        raise ValueError("not a craft structure set file")
    specs = []
    for rec in data["structures"]:
        target = parse_board(rec["target"])
        heights = {pos: len(target.stack(pos)) for pos in ALL_POSITIONS}
        specs.append(
            StructureSpec(
                target=target,
                heights=heights,
                block_count=rec["block_count"],
                tier=rec["tier"],
                structure_index=rec["structure_index"],
                seed=rec["seed"],
            )
        )
    return specs
