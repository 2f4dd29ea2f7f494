"""The game loop: speaker sampling, turn execution, logging, and replay.

A game runs a fixed number of turns against one target structure. Each
turn, a random subset of directors speaks in random order (later speakers
see earlier same-turn messages), the builder picks one move conditioned
on this turn's messages plus the sampled oracle candidates, and the
engine validates it. Per-turn failures are recorded, never raised; a
game always completes its full turn budget.

Logs are line-delimited JSON, schema-versioned, and replayable: re-running
the engine and oracle over a log must reproduce every recorded state.
"""

from __future__ import annotations

import hashlib
import json
import random
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable

from .backends import AgentBackend, backend_to_spec
from .engine import (
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
    parse_position,
    serialize_board,
)
from .metrics import ProgressReport, compute_progress
from .oracle import (
    OracleSet,
    enumerate_candidates,
    sample_candidates,
    turn_remove_prescribed,
)
from .protocol import (
    ARCHETYPES,
    Archetype,
    ARCHETYPES_BY_NAME,
    BuilderResponse,
    DirectorResponse,
    ProtocolError,
    parse_builder_move,
    parse_director_response,
    render_builder_prompt,
    render_director_prompt,
)
from .structgen import StructureSpec
from .views import DirectorId, project_view, render_view

SCHEMA_VERSION = 1

Clock = Callable[[], float]

HistoryEntry = tuple[str, str]  # (speaker, message)


@dataclass
class GameConfig:
    structure_index: int
    run: int = 0
    turns: int = 20
    seed: int = 0
    oracle_n: int = 5
    history_trigger: int = 50
    history_keep: int = 40
    director_max_tokens: int = 512
    builder_max_tokens: int = 512
    director_backends: dict[DirectorId, AgentBackend] = field(default_factory=dict)
    builder_backend: AgentBackend | None = None

    def __post_init__(self) -> None:
        if self.turns < 1:
            raise ValueError("turns must be >= 1")
        if self.history_keep > self.history_trigger:
            raise ValueError("history_keep must not exceed history_trigger")


@dataclass
class TurnRecord:
    turn: int
    speakers: list[DirectorId]
    responses: dict[DirectorId, DirectorResponse | None]
    oracle_pool_size: int
    oracle_set: OracleSet
    builder: BuilderResponse | None
    parse_error: str | None
    outcome: MoveOutcome | None
    board_after: WorldState
    progress: ProgressReport
    wall_clock_ms: float
    token_usage: dict[str, int]


@dataclass
class TrajectoryLog:
    config: GameConfig
    structure: StructureSpec
    archetypes: dict[DirectorId, Archetype]
    turns: list[TurnRecord]
    final_progress: ProgressReport


# Deterministic assignment and sampling ----------------------------------------


def assign_archetype(structure_index: int, run: int, director: DirectorId) -> Archetype:
    """Seeded-hash archetype assignment, stable across models and processes."""
    digest = hashlib.sha256(
        f"craft-archetype/{structure_index}/{run}/{director.value}".encode()
    ).digest()
    return ARCHETYPES[int.from_bytes(digest[:8], "big") % len(ARCHETYPES)]


def speaker_rng(seed: int, structure_index: int, run: int, turn: int) -> random.Random:
    return random.Random(f"craft-speakers/{seed}/{structure_index}/{run}/{turn}")


def select_speakers(turn: int, rng: random.Random) -> list[DirectorId]:
    """One to three unique directors, in randomized speaking order."""
    size = rng.randint(1, 3)
    return rng.sample(list(DirectorId), size)


def truncate_history(
    history: list[HistoryEntry], trigger: int = 50, keep: int = 40
) -> list[HistoryEntry]:
    """Keep only the most recent ``keep`` messages once ``trigger`` is exceeded."""
    if len(history) > trigger:
        return history[-keep:]
    return list(history)


def _estimate_tokens(text: str) -> int:
    return len(text) // 4


# Turn execution ----------------------------------------------------------------


def run_turn(
    config: GameConfig,
    structure: StructureSpec,
    archetypes: dict[DirectorId, Archetype],
    board: WorldState,
    history: list[HistoryEntry],
    turn: int,
    clock: Clock,
) -> TurnRecord:
    """Execute one full turn. Appends public messages to ``history`` in place."""
    started = clock()
    prompt_tokens = 0
    completion_tokens = 0

    speakers = select_speakers(turn, speaker_rng(config.seed, config.structure_index, config.run, turn))
    board_text = serialize_board(board)
    responses: dict[DirectorId, DirectorResponse | None] = {}
    turn_messages: list[HistoryEntry] = []

    for director in speakers:
        prompt = render_director_prompt(
            director,
            archetypes[director],
            project_view(structure.target, director),
            board_text,
            truncate_history(history + turn_messages, config.history_trigger, config.history_keep),
        )
        prompt_tokens += _estimate_tokens(prompt)
        try:
            raw = config.director_backends[director].generate(prompt, config.director_max_tokens)
            completion_tokens += _estimate_tokens(raw)
            response = parse_director_response(raw)
        except Exception:  # noqa: BLE001 - failed/malformed speakers go silent
            responses[director] = None
            continue
        responses[director] = response
        turn_messages.append((director.value, response.message))

    pool = enumerate_candidates(board, structure.target)
    oracle_set = sample_candidates(pool, config.structure_index, turn, config.oracle_n)

    builder_prompt = render_builder_prompt(board_text, oracle_set, turn_messages)
    prompt_tokens += _estimate_tokens(builder_prompt)
    builder_response: BuilderResponse | None = None
    parse_error: str | None = None
    outcome: MoveOutcome | None = None
    new_board = board
    try:
        raw = config.builder_backend.generate(builder_prompt, config.builder_max_tokens)
        completion_tokens += _estimate_tokens(raw)
    except Exception as exc:  # noqa: BLE001
        parse_error = f"builder backend failure: {exc}"
    else:
        try:
            builder_response = parse_builder_move(raw)
        except ProtocolError as exc:
            parse_error = f"{type(exc).__name__}: {exc}"
        else:
            outcome = apply_move(board, builder_response.parsed)
            new_board = outcome.new_state

    history.extend(turn_messages)
    progress = compute_progress(new_board, structure.target)
    return TurnRecord(
        turn=turn,
        speakers=speakers,
        responses=responses,
        oracle_pool_size=len(pool),
        oracle_set=oracle_set,
        builder=builder_response,
        parse_error=parse_error,
        outcome=outcome,
        board_after=new_board,
        progress=progress,
        wall_clock_ms=(clock() - started) * 1000.0,
        token_usage={"prompt": prompt_tokens, "completion": completion_tokens},
    )


def run_game(config: GameConfig, structure: StructureSpec, clock: Clock | None = None) -> TrajectoryLog:
    """Play exactly ``config.turns`` turns from an empty board.

    Per-turn failures (silent directors, unparseable builder output,
    rejected moves) are recorded in the log and never abort the game.
    There is no early stop: completion is measured at the final turn.
    """
    if config.builder_backend is None or len(config.director_backends) != 3:
        raise ValueError("config needs three director backends and a builder backend")
    clock = clock or time.perf_counter
    archetypes = {
        d: assign_archetype(structure.structure_index, config.run, d) for d in DirectorId
    }
    board = WorldState.empty()
    history: list[HistoryEntry] = []
    records: list[TurnRecord] = []
    for turn in range(config.turns):
        record = run_turn(config, structure, archetypes, board, history, turn, clock)
        records.append(record)
        board = record.board_after
    return TrajectoryLog(
        config=config,
        structure=structure,
        archetypes=archetypes,
        turns=records,
        final_progress=records[-1].progress,
    )


# Serialization -----------------------------------------------------------------


def move_to_dict(move: Move) -> dict:
    if isinstance(move, Clarify):
        return {"action": "clarify", "question": move.question}
    base = {
        "position": move.position.key(),
        "layer": move.layer,
        "span_to": move.span_to.key() if move.span_to else None,
    }
    if isinstance(move, Place):
        return {"action": "place", "block": move.block.code, **base}
    return {"action": "remove", **base}


def move_from_dict(data: dict) -> Move:
    action = data["action"]
    if action == "clarify":
        return Clarify(data["question"])
    position = parse_position(data["position"])
    span = parse_position(data["span_to"]) if data.get("span_to") else None
    if action == "place":
        return Place(BlockType.from_code(data["block"]), position, data["layer"], span)
    if action == "remove":
        return Remove(position, data["layer"], span)
    raise ValueError(f"unknown move action {action!r}")


def _turn_to_dict(record: TurnRecord) -> dict:
    return {
        "record": "turn",
        "turn": record.turn,
        "speakers": [d.value for d in record.speakers],
        "responses": {
            d.value: (
                None
                if r is None
                else {"analysis": r.analysis, "message": r.message, "raw": r.raw}
            )
            for d, r in record.responses.items()
        },
        "oracle": {
            "pool_size": record.oracle_pool_size,
            "candidates": [
                {"display": c.display, "case": c.case.value, "move": move_to_dict(c.move)}
                for c in record.oracle_set.candidates
            ],
            "remove_prescribed": turn_remove_prescribed(record.oracle_set),
        },
        "builder": {
            "raw": record.builder.raw if record.builder else None,
            "confirm": record.builder.confirm if record.builder else None,
            "move": move_to_dict(record.builder.parsed) if record.builder else None,
            "parse_error": record.parse_error,
        },
        "outcome": (
            None
            if record.outcome is None
            else {
                "accepted": record.outcome.accepted,
                "error_code": record.outcome.error.code.value if record.outcome.error else None,
                "error": record.outcome.error.message if record.outcome.error else None,
            }
        ),
        "board_after": serialize_board(record.board_after),
        "progress": record.progress.as_dict(),
        "wall_clock_ms": record.wall_clock_ms,
        "token_usage": record.token_usage,
    }


def log_to_lines(log: TrajectoryLog) -> list[str]:
    """Serialize a trajectory to JSONL lines (header, one line per turn, final)."""
    header = {
        "record": "header",
        "schema_version": SCHEMA_VERSION,
        "game": {
            "structure_index": log.config.structure_index,
            "run": log.config.run,
            "turns": log.config.turns,
            "seed": log.config.seed,
            "oracle_n": log.config.oracle_n,
            "history_trigger": log.config.history_trigger,
            "history_keep": log.config.history_keep,
            "director_max_tokens": log.config.director_max_tokens,
            "builder_max_tokens": log.config.builder_max_tokens,
        },
        "backends": {
            **{
                d.value: backend_to_spec(b) for d, b in log.config.director_backends.items()
            },
            "builder": backend_to_spec(log.config.builder_backend),
        },
        "archetypes": {d.value: a.name for d, a in log.archetypes.items()},
        "structure": {
            "structure_index": log.structure.structure_index,
            "seed": log.structure.seed,
            "tier": log.structure.tier,
            "block_count": log.structure.block_count,
            "target": log.structure.board_text(),
        },
    }
    lines = [json.dumps(header)]
    lines.extend(json.dumps(_turn_to_dict(t)) for t in log.turns)
    lines.append(
        json.dumps(
            {
                "record": "final",
                "turns": len(log.turns),
                "progress": log.final_progress.as_dict(),
            }
        )
    )
    return lines


def write_log(log: TrajectoryLog, path: str | Path) -> None:
    Path(path).write_text("\n".join(log_to_lines(log)) + "\n", encoding="utf-8")


# Replay ------------------------------------------------------------------------


class ReplayError(ValueError):
    """A logged value could not be reproduced by re-running the engine."""


@dataclass
class ReplayedTurn:
    """One verified turn, rehydrated with live objects for analysis."""

    turn: int
    speakers: list[str]
    responses: dict[str, DirectorResponse | None]
    board_before: WorldState
    board_after: WorldState
    oracle_set: OracleSet
    oracle_pool_size: int
    move: Move | None
    parse_error: str | None
    outcome: MoveOutcome | None
    progress: ProgressReport
    builder_confirm: str | None
    builder_raw: str | None


@dataclass
class ReplayedGame:
    header: dict
    structure_index: int
    run: int
    target: WorldState
    archetypes: dict[str, Archetype]
    turns: list[ReplayedTurn]
    final_progress: ProgressReport


def parse_log_lines(lines: list[str]) -> tuple[dict, list[dict], dict]:
    records = [json.loads(line) for line in lines if line.strip()]
    if not records or records[0].get("record") != "header":
        raise ReplayError("log does not start with a header record")
    header = records[0]
    if header.get("schema_version") != SCHEMA_VERSION:
        raise ReplayError(f"unsupported log schema version {header.get('schema_version')!r}")
    if records[-1].get("record") != "final":
        raise ReplayError("log does not end with a final record")
    turns = [r for r in records[1:-1] if r.get("record") == "turn"]
    if len(turns) != len(records) - 2:
        raise ReplayError("unexpected record types between header and final")
    return header, turns, records[-1]


def replay_log(lines: list[str], verify_oracle: bool = True) -> ReplayedGame:
    """Re-run the engine (and oracle) over a log, verifying every recorded value.

    Raises ReplayError on the first discrepancy. The returned turns carry
    the pre-move board and rehydrated oracle sets, which is exactly the
    context the failure taxonomy needs.
    """
    header, turn_dicts, final = parse_log_lines(lines)
    target = parse_board(header["structure"]["target"])
    structure_index = header["game"]["structure_index"]
    oracle_n = header["game"]["oracle_n"]

    board = WorldState.empty()
    replayed: list[ReplayedTurn] = []
    for td in turn_dicts:
        turn = td["turn"]
        pool = enumerate_candidates(board, target)
        oracle_set = sample_candidates(pool, structure_index, turn, oracle_n)
        if verify_oracle:
            logged = [c["display"] for c in td["oracle"]["candidates"]]
            live = [c.display for c in oracle_set.candidates]
            if logged != live:
                raise ReplayError(f"turn {turn}: oracle candidates diverge: {logged} vs {live}")
            if td["oracle"]["pool_size"] != len(pool):
                raise ReplayError(f"turn {turn}: oracle pool size diverges")

        move = move_from_dict(td["builder"]["move"]) if td["builder"]["move"] else None
        outcome: MoveOutcome | None = None
        new_board = board
        if move is not None:
            outcome = apply_move(board, move)
            new_board = outcome.new_state
            logged_outcome = td["outcome"]
            if logged_outcome is None:
                raise ReplayError(f"turn {turn}: move logged without an outcome")
            if logged_outcome["accepted"] != outcome.accepted:
                raise ReplayError(f"turn {turn}: outcome acceptance diverges")
            logged_error = logged_outcome["error"]
            live_error = outcome.error.message if outcome.error else None
            if logged_error != live_error:
                raise ReplayError(f"turn {turn}: engine error diverges: {logged_error!r} vs {live_error!r}")

        if serialize_board(new_board) != td["board_after"]:
            raise ReplayError(f"turn {turn}: board state diverges after move")
        progress = compute_progress(new_board, target)
        if progress.as_dict() != td["progress"]:
            raise ReplayError(f"turn {turn}: progress diverges")

        responses = {
            name: (
                None
                if body is None
                else DirectorResponse(body["analysis"], body["message"], body["raw"])
            )
            for name, body in td["responses"].items()
        }
        replayed.append(
            ReplayedTurn(
                turn=turn,
                speakers=td["speakers"],
                responses=responses,
                board_before=board,
                board_after=new_board,
                oracle_set=oracle_set,
                oracle_pool_size=len(pool),
                move=move,
                parse_error=td["builder"]["parse_error"],
                outcome=outcome,
                progress=progress,
                builder_confirm=td["builder"]["confirm"],
                builder_raw=td["builder"]["raw"],
            )
        )
        board = new_board

    final_progress = replayed[-1].progress if replayed else compute_progress(board, target)
    if final["progress"] != final_progress.as_dict():
        raise ReplayError("final progress diverges")
    archetypes = {
        name: ARCHETYPES_BY_NAME[arch] for name, arch in header["archetypes"].items()
    }
    for name, arch in archetypes.items():
        expected = assign_archetype(structure_index, header["game"]["run"], DirectorId(name))
        if expected.name != arch.name:
            raise ReplayError(f"archetype for {name} diverges from the deterministic assignment")
    return ReplayedGame(
        header=header,
        structure_index=structure_index,
        run=header["game"]["run"],
        target=target,
        archetypes=archetypes,
        turns=replayed,
        final_progress=final_progress,
    )


def read_log(path: str | Path) -> list[str]:
    return Path(path).read_text(encoding="utf-8").splitlines()


# Information-asymmetry audit ----------------------------------------------------


def audit_information_asymmetry(game: ReplayedGame) -> list[str]:
    """Regenerate every prompt of a replayed game and check privacy boundaries.

    No director prompt may contain another director's target view or any
    analysis text; no builder prompt may contain a target view or any
    analysis text.
    """
    problems: list[str] = []
    views = {d: project_view(game.target, d) for d in DirectorId}
    view_texts = {d: render_view(v) for d, v in views.items()}
    history: list[HistoryEntry] = []
    trigger = game.header["game"]["history_trigger"]
    keep = game.header["game"]["history_keep"]

    for rt in game.turns:
        board_text = serialize_board(rt.board_before)
        turn_messages: list[HistoryEntry] = []
        analyses = {
            name: r.analysis for name, r in rt.responses.items() if r is not None and r.analysis
        }
        for name in rt.speakers:
            director = DirectorId(name)
            prompt = render_director_prompt(
                director,
                game.archetypes[name],
                views[director],
                board_text,
                truncate_history(history + turn_messages, trigger, keep),
            )
            for other, text in view_texts.items():
                if other != director and text in prompt:
                    problems.append(f"turn {rt.turn}: {name} prompt leaks {other.value} view")
            for owner, analysis in analyses.items():
                if owner != name and analysis in prompt:
                    problems.append(f"turn {rt.turn}: {name} prompt leaks {owner} analysis")
            response = rt.responses.get(name)
            if response is not None:
                turn_messages.append((name, response.message))
        builder_prompt = render_builder_prompt(board_text, rt.oracle_set, turn_messages)
        for d, text in view_texts.items():
            if text in builder_prompt:
                problems.append(f"turn {rt.turn}: builder prompt leaks {d.value} view")
        for owner, analysis in analyses.items():
            if analysis in builder_prompt:
                problems.append(f"turn {rt.turn}: builder prompt leaks {owner} analysis")
        history.extend(turn_messages)
    return problems
