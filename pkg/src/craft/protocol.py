"""Prompt rendering and free-text response parsing for both agent roles.

Directors answer with a private <analysis> block and a public <message>;
the builder answers in a colon-delimited move grammar. Parsing is strict
on field counts but lenient about surrounding prose: the first
grammatically valid action line wins.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass
from importlib import resources
from string import Template

from .engine import (
    ALL_BLOCK_CODES,
    BlockType,
    Clarify,
    Move,
    Place,
    Position,
    Remove,
    Size,
)
from .oracle import OracleSet
from .views import DirectorId, DirectorView, render_view, visible_cells, WALL_NAMES


# Responses -------------------------------------------------------------------


@dataclass(frozen=True)
class DirectorResponse:
    analysis: str
    message: str
    raw: str


@dataclass(frozen=True)
class BuilderResponse:
    parsed: Move
    confirm: str
    raw: str


@dataclass(frozen=True)
class Archetype:
    name: str
    description: str


ARCHETYPES = (
    Archetype(
        "Assertive",
        "Confident and direct; forms hypotheses quickly and shares them, "
        "updates when others provide compelling evidence.",
    ),
    Archetype(
        "Cautious",
        "Methodical and verification-focused; synthesizes others' "
        "observations before adding interpretation.",
    ),
    Archetype(
        "Observant",
        "Notices patterns and anomalies; flags inconsistencies and "
        "connects information across directors.",
    ),
    Archetype(
        "Skeptical",
        "Questions assumptions including its own; probes claims to "
        "ensure group correctness, comfortable with uncertainty.",
    ),
    Archetype(
        "Synthesizer",
        "Integrates all directors' observations into a coherent picture; "
        "reconciles contradictions and drives shared understanding.",
    ),
)

ARCHETYPES_BY_NAME = {a.name: a for a in ARCHETYPES}


class ProtocolError(ValueError):
    pass


class MissingMessageError(ProtocolError):
    """Director response carried no usable <message>; the turn counts as silent."""


class MalformedMoveError(ProtocolError):
    """No grammatically valid action line found; logged as a no-move turn."""


class RemoveWithBlockCodeError(MalformedMoveError):
    """REMOVE never includes a block code."""


# Prompt templates ------------------------------------------------------------


def _load_template(name: str) -> Template:
    text = resources.files("craft.prompts").joinpath(name).read_text(encoding="utf-8")
    return Template(text)


_DIRECTOR_TEMPLATE = _load_template("director.txt")
_BUILDER_TEMPLATE = _load_template("builder.txt")
_BUILDER_TOOL_MODE_TEMPLATE = _load_template("builder_tool_mode.txt")  # shipped, unused

EXAMPLE_UTTERANCES = (
    "Put a large orange block across the middle and the right side of my bottom layer.",
    "Place a small green block on the left side of my middle layer.",
    "Remove the blue block from the top of my right stack.",
)

_BLOCK_REFERENCE = "\n".join(
    f"{b.code} = {b.color.value} {b.size.value}" + (" (domino, two cells)" if b.size is Size.LARGE else "")
    for b in (BlockType.from_code(c) for c in ALL_BLOCK_CODES)
)

_COORDINATE_REFERENCE = (
    "(0,0) (0,1) (0,2)   <- far / back row\n"
    "(1,0) (1,1) (1,2)\n"
    "(2,0) (2,1) (2,2)   <- near / front row"
)

NO_CANDIDATES_TEXT = (
    "(none available this turn - no verified forward-progress move exists; "
    "infer the move from the director instructions alone)"
)


def render_history(history: list[tuple[str, str]]) -> str:
    """Conversation history as a JSON list of \"speaker: message\" lines."""
    return json.dumps([f"{speaker}: {message}" for speaker, message in history], indent=2)


def director_perspective_line(director: DirectorId) -> str:
    cells = ", ".join(p.key() for p in visible_cells(director))
    return f"Cells {cells} (the {WALL_NAMES[director]} of the structure)."


def render_director_prompt(
    director: DirectorId,
    archetype: Archetype,
    target_view: DirectorView,
    board_text: str,
    history: list[tuple[str, str]],
) -> str:
    """Assemble the full director prompt; byte-stable for identical inputs."""
    return _DIRECTOR_TEMPLATE.substitute(
        director=director.value,
        archetype=archetype.name.upper(),
        personality=archetype.description,
        perspective_description=director_perspective_line(director),
        examples="\n".join(f"- {u}" for u in EXAMPLE_UTTERANCES),
        current_board_state=board_text,
        target_view=render_view(target_view),
        conversation_history=render_history(history),
    )


def render_builder_prompt(
    board_text: str,
    oracle_set: OracleSet,
    discussion: list[tuple[str, str]],
) -> str:
    """Assemble the full builder prompt from the current turn's context only."""
    if oracle_set.candidates:
        oracle_section = "\n".join(f"{i + 1}. {c.display}" for i, c in enumerate(oracle_set.candidates))
    else:
        oracle_section = NO_CANDIDATES_TEXT
    if discussion:
        discussion_text = "\n".join(f"[{speaker}]: {message}" for speaker, message in discussion)
    else:
        discussion_text = "(no director messages this turn)"
    return _BUILDER_TEMPLATE.substitute(
        current_board_state=board_text,
        available_blocks=", ".join(ALL_BLOCK_CODES),
        block_reference=_BLOCK_REFERENCE,
        coordinate_reference=_COORDINATE_REFERENCE,
        oracle_section=oracle_section,
        director_discussion=discussion_text,
    )


def render_builder_tool_mode_prompt(max_simulations: int = 5) -> str:
    """The move-exploration prompt block; provided for completeness, not wired in."""
    return _BUILDER_TOOL_MODE_TEMPLATE.substitute(max_simulations=max_simulations)


# Director response parsing ----------------------------------------------------

# Both tag names are accepted for the private block; <analysis> is canonical.
_ANALYSIS_RE = re.compile(r"<(analysis|think)>(.*?)</\1>", re.DOTALL)
_MESSAGE_RE = re.compile(r"<message>(.*?)</message>", re.DOTALL)
_OPEN_MESSAGE_RE = re.compile(r"<message>(.*)\Z", re.DOTALL)
_OPEN_ANALYSIS_RE = re.compile(r"<(analysis|think)>(.*?)(?=<message>|\Z)", re.DOTALL)


def parse_director_response(text: str) -> DirectorResponse:
    """Extract the private analysis and public message from a director reply.

    An unclosed <message> tag is salvaged (token budgets can truncate the
    closing tag); a reply with no message at all raises MissingMessageError.
    """
    analysis_match = _ANALYSIS_RE.search(text) or _OPEN_ANALYSIS_RE.search(text)
    analysis = analysis_match.group(2).strip() if analysis_match else ""
    message_match = _MESSAGE_RE.search(text)
    if message_match:
        message = message_match.group(1).strip()
    else:
        open_match = _OPEN_MESSAGE_RE.search(text)
        message = open_match.group(1).strip() if open_match else ""
    if not message:
        raise MissingMessageError("director response has no <message> content")
    return DirectorResponse(analysis=analysis, message=message, raw=text)


# Builder move grammar ---------------------------------------------------------

_POSITION_RE = re.compile(r"^\((\d),(\d)\)$")


def _parse_position_field(field: str) -> Position | None:
    m = _POSITION_RE.match(field.strip())
    if not m:
        return None
    i, j = int(m.group(1)), int(m.group(2))
    if i > 2 or j > 2:
        return None
    return Position(i, j)


def _parse_layer_field(field: str) -> int | None:
    field = field.strip()
    if field not in ("0", "1", "2"):
        return None
    return int(field)


def _try_parse_action_line(line: str) -> tuple[Move, str] | None:
    line = line.strip()
    # LLMs often bracket the action; strip one matched layer of wrapping.
    if line.startswith("[") and line.endswith("]"):
        line = line[1:-1].strip()
    if line.startswith("CLARIFY:"):
        question = line[len("CLARIFY:"):].strip()
        if not question:
            return None
        return Clarify(question), ""

    if line.startswith("PLACE:"):
        body = line[len("PLACE:"):]
        head, sep, confirm = body.partition(":CONFIRM:")
        if not sep:
            return None
        fields = head.split(":")
        if len(fields) not in (3, 4):
            return None
        code = fields[0].strip()
        if code not in ALL_BLOCK_CODES:
            return None
        position = _parse_position_field(fields[1])
        layer = _parse_layer_field(fields[2])
        if position is None or layer is None:
            return None
        span_to = None
        if len(fields) == 4:
            span_to = _parse_position_field(fields[3])
            if span_to is None:
                return None
        # A span-less large place parses fine; the engine rejects it with a
        # span error, which is the failure the logs need to see.
        return Place(BlockType.from_code(code), position, layer, span_to), confirm.strip()

    if line.startswith("REMOVE:"):
        body = line[len("REMOVE:"):]
        head, sep, confirm = body.partition(":CONFIRM:")
        if not sep:
            return None
        fields = head.split(":")
        if fields and fields[0].strip() in ALL_BLOCK_CODES:
            raise RemoveWithBlockCodeError(f"REMOVE never includes a block code: {line!r}")
        if len(fields) not in (2, 3):
            return None
        position = _parse_position_field(fields[0])
        layer = _parse_layer_field(fields[1])
        if position is None or layer is None:
            return None
        span_to = None
        if len(fields) == 3:
            span_to = _parse_position_field(fields[2])
            if span_to is None:
                return None
        return Remove(position, layer, span_to), confirm.strip()

    return None


def parse_builder_move(text: str) -> BuilderResponse:
    """Parse a builder reply into a Move via the colon-delimited grammar.

    Takes the first grammatically valid action line in the reply; raises
    MalformedMoveError when none exists and RemoveWithBlockCodeError for
    the forbidden REMOVE:<code>:... form (unless a valid line came first).
    """
    first_error: RemoveWithBlockCodeError | None = None
    for line in text.splitlines():
        try:
            parsed = _try_parse_action_line(line)
        except RemoveWithBlockCodeError as exc:
            if first_error is None:
                first_error = exc
            continue
        if parsed is not None:
            move, confirm = parsed
            return BuilderResponse(parsed=move, confirm=confirm, raw=text)
    if first_error is not None:
        raise first_error
    raise MalformedMoveError("no valid PLACE/REMOVE/CLARIFY line in builder response")


def format_builder_move(move: Move, confirm: str = "") -> str:
    """Emit the grammar string for a move (inverse of parse_builder_move)."""
    if isinstance(move, Clarify):
        return f"CLARIFY:{move.question}"
    if isinstance(move, Place):
        fields = ["PLACE", move.block.code, move.position.key(), str(move.layer)]
    else:
        fields = ["REMOVE", move.position.key(), str(move.layer)]
    if move.span_to is not None:
        fields.append(move.span_to.key())
    fields.append("CONFIRM")
    fields.append(confirm)
    return ":".join(fields)
