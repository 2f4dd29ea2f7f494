"""CRAFT: a deterministic simulator and evaluation harness for collaborative
block construction with partially observing director agents and a builder."""

from .engine import (
    ALL_BLOCK_CODES,
    ALL_POSITIONS,
    BlockType,
    Clarify,
    Move,
    MoveOutcome,
    Place,
    Position,
    Remove,
    WorldState,
    apply_move,
    parse_board,
    serialize_board,
    stack_height,
)
from .metrics import ProgressReport, compute_progress, is_complete
from .oracle import OracleSet, enumerate_candidates, format_candidate, sample_candidates
from .structgen import GenConfig, StructureSpec, build_evaluation_set, generate
from .views import DirectorId, project_view, render_view, visible_cells

__version__ = "0.1.0"

__all__ = [
    "ALL_BLOCK_CODES",
    "ALL_POSITIONS",
    "BlockType",
    "Clarify",
    "DirectorId",
    "GenConfig",
    "Move",
    "MoveOutcome",
    "OracleSet",
    "Place",
    "Position",
    "ProgressReport",
    "Remove",
    "StructureSpec",
    "WorldState",
    "apply_move",
    "build_evaluation_set",
    "compute_progress",
    "enumerate_candidates",
    "format_candidate",
    "generate",
    "is_complete",
    "parse_board",
    "project_view",
    "render_view",
    "sample_candidates",
    "serialize_board",
    "stack_height",
    "visible_cells",
]
