"""Per-director wall projections of a structure.

Each director observes a fixed three-cell wall across all vertical
layers. A large block appears as size 2 only when both of its cells fall
inside the observing director's wall; otherwise it shows as size 1.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from enum import Enum

from .engine import Position, WorldState


class DirectorId(str, Enum):
    D1 = "D1"
    D2 = "D2"
    D3 = "D3"


_WALL_CELLS: dict[DirectorId, tuple[Position, ...]] = {
    # Ordered left to right in each director's own frame.
    DirectorId.D1: (Position(0, 0), Position(1, 0), Position(2, 0)),
    DirectorId.D2: (Position(0, 0), Position(0, 1), Position(0, 2)),
    DirectorId.D3: (Position(0, 2), Position(1, 2), Position(2, 2)),
}

WALL_NAMES = {DirectorId.D1: "left wall", DirectorId.D2: "far wall", DirectorId.D3: "right wall"}

NONE_COLOR = "none"
ROW_KEYS = ("row_0", "row_1", "row_2")


@dataclass(frozen=True)
class ViewEntry:
    color: str  # a block color, or "none" for an empty cell
    size: int  # 1 for small or single-cell-visible, 2 for a fully visible domino


@dataclass(frozen=True)
class DirectorView:
    director: DirectorId
    # rows[k] is layer k, entries left to right in the director's frame
    rows: tuple[tuple[ViewEntry, ViewEntry, ViewEntry], ...]


def visible_cells(director: DirectorId) -> tuple[Position, ...]:
    """The director's three wall cells, left to right in their frame."""
    return _WALL_CELLS[director]


def project_view(state: WorldState, director: DirectorId) -> DirectorView:
    """Project a state onto one director's wall."""
    wall = _WALL_CELLS[director]
    wall_set = set(wall)
    rows = []
    for layer in range(3):
        entries = []
        for pos in wall:
            stack = state.stack(pos)
            if layer >= len(stack):
                entries.append(ViewEntry(NONE_COLOR, 1))
                continue
            pb = stack[layer]
            size = 1
            if pb.domino_id is not None:
                partner = state.domino_partner(pos, layer)
                if partner in wall_set:
                    size = 2
            entries.append(ViewEntry(pb.block.color.value, size))
        rows.append(tuple(entries))
    return DirectorView(director, tuple(rows))


def render_view(view: DirectorView) -> str:
    """Canonical view text embedded verbatim in director prompts.

    Keys row_0/row_1/row_2 mean layers 0/1/2, not grid rows; each entry is
    one cell left to right in the director's frame.
    """
    lines = ["{", f'  "{view.director.value}": {{']
    for k, key in enumerate(ROW_KEYS):
        entries = ",\n".join(
            f'      {{ "color": "{e.color}", "size": {e.size} }}' for e in view.rows[k]
        )
        closer = "," if k < len(ROW_KEYS) - 1 else ""
        lines.append(f'    "{key}": [\n{entries}\n    ]{closer}')
    lines.append("  }")
    lines.append("}")
    return "\n".join(lines)


def parse_view(text: str) -> DirectorView:
    """Inverse of render_view (used to check the rendering is lossless)."""
    data = json.loads(text)
    if not isinstance(data, dict) or len(data) != 1:
        raise ValueError("view text must hold exactly one director")
    name, body = next(iter(data.items()))
    director = DirectorId(name)
    rows = []
    for key in ROW_KEYS:
        entries = body[key]
        if len(entries) != 3:
            raise ValueError(f"{key} must hold three entries")
        rows.append(tuple(ViewEntry(e["color"], e["size"]) for e in entries))
    return DirectorView(director, tuple(rows))


def perspective_description(director: DirectorId) -> str:
    """One-line wall summary used inside prompts."""
    cells = ", ".join(p.key() for p in visible_cells(director))
    return (
        f"{director.value}: From left to right, sees cells {cells} across all layers"
        f" (the {WALL_NAMES[director]} of the structure)."
    )
