"""Post-hoc analysis: failure taxonomy, remove gap, and the judge pipeline.

Everything here operates on replayed games, so each verdict is grounded
in re-verified engine state rather than trusting the raw logs.
"""

from __future__ import annotations

import csv
import json
import re
import statistics
from dataclasses import dataclass, field
from enum import Enum
from importlib import resources
from pathlib import Path
from string import Template

from .backends import AgentBackend
from .engine import Clarify, Move, Place, Position, Remove, serialize_board
from .oracle import OracleSet, moves_match, turn_remove_prescribed
from .orchestrator import ReplayedGame, ReplayedTurn
from .views import DirectorId, project_view, render_view, visible_cells

EXPORT_SCHEMA_VERSION = 1


class FailureLabel(str, Enum):
    CORRECT = "correct"
    ENGINE_LAYER = "engine-layer"
    ENGINE_SPAN = "engine-span"
    ENGINE_OTHER = "engine-other"
    WRONG_POSITION = "wrong-position"
    WRONG_COLOR = "wrong-color"
    WRONG_SPAN = "wrong-span"
    NO_ORACLE = "no-oracle"
    NO_MOVE = "no-move"


def _footprint(move: Place | Remove) -> set[Position]:
    cells = {move.position}
    if move.span_to is not None:
        cells.add(move.span_to)
    return cells


def _same_action(move: Move, candidate: Place | Remove) -> bool:
    return (isinstance(move, Place) and isinstance(candidate, Place)) or (
        isinstance(move, Remove) and isinstance(candidate, Remove)
    )


def classify_engine_error(message: str) -> FailureLabel:
    """Substring rule over engine rejection text."""
    if "layer" in message:
        return FailureLabel.ENGINE_LAYER
    if "span" in message:
        return FailureLabel.ENGINE_SPAN
    return FailureLabel.ENGINE_OTHER


def classify_failure(rt: ReplayedTurn) -> FailureLabel:
    """Assign exactly one outcome label to a replayed turn.

    Engine rejections classify by the layer/span substrings of the error
    text; engine-clean moves are compared against the sampled candidates
    at three levels of strictness (position, then color, then block+span).
    A clarification with candidates on offer counts as an action mismatch.
    """
    candidates = rt.oracle_set.candidates
    if not candidates:
        return FailureLabel.NO_ORACLE
    if rt.move is None:
        return FailureLabel.NO_MOVE
    if rt.outcome is not None and rt.outcome.error is not None:
        return classify_engine_error(rt.outcome.error.message)

    move = rt.move
    if any(moves_match(move, c.move) for c in candidates):
        return FailureLabel.CORRECT
    if isinstance(move, Clarify):
        return FailureLabel.WRONG_POSITION
    positional = [
        c for c in candidates if _same_action(move, c.move) and _footprint(move) & _footprint(c.move)
    ]
    if not positional:
        return FailureLabel.WRONG_POSITION
    if isinstance(move, Place):
        color_matched = [
            c
            for c in positional
            if isinstance(c.move, Place) and c.move.block.color is move.block.color
        ]
        if not color_matched:
            return FailureLabel.WRONG_COLOR
    return FailureLabel.WRONG_SPAN


def detect_communication_failure(rt: ReplayedTurn) -> bool:
    """Candidates were on offer but the builder selected none of them."""
    if not rt.oracle_set.candidates:
        return False
    if rt.move is None:
        return True
    return not any(moves_match(rt.move, c.move) for c in rt.oracle_set.candidates)


# Remove gap ----------------------------------------------------------------------


@dataclass(frozen=True)
class RemoveGapReport:
    attempted: tuple[int, ...]  # 1 when the builder's move was a Remove
    prescribed: tuple[int, ...]  # 1 when any sampled candidate was a Remove
    attempted_top: tuple[int, ...]  # 1 when the first sampled candidate was a Remove

    @property
    def attempted_rate(self) -> float:
        return sum(self.attempted) / len(self.attempted) if self.attempted else 0.0

    @property
    def prescribed_rate(self) -> float:
        return sum(self.prescribed) / len(self.prescribed) if self.prescribed else 0.0

    @property
    def gap(self) -> float:
        """Mean over turns of attempted minus prescribed; positive = over-removal."""
        if not self.attempted:
            return 0.0
        return sum(a - p for a, p in zip(self.attempted, self.prescribed)) / len(self.attempted)


def compute_remove_gap(turns: list[ReplayedTurn]) -> RemoveGapReport:
    attempted = tuple(1 if isinstance(rt.move, Remove) else 0 for rt in turns)
    prescribed = tuple(1 if turn_remove_prescribed(rt.oracle_set) else 0 for rt in turns)
    top = tuple(
        1 if (rt.oracle_set.top is not None and isinstance(rt.oracle_set.top.move, Remove)) else 0
        for rt in turns
    )
    return RemoveGapReport(attempted, prescribed, top)


# Judges --------------------------------------------------------------------------


class JudgeKind(str, Enum):
    SG = "SG"
    MM = "MM"
    PS = "PS"


JUDGE_QUESTIONS: dict[JudgeKind, tuple[str, ...]] = {
    JudgeKind.SG: tuple(f"SG{i}" for i in range(1, 8)),
    JudgeKind.MM: tuple(f"MM{i}" for i in range(1, 9)),
    JudgeKind.PS: tuple(f"PS{i}" for i in range(1, 7)),
}

ANSWER_VALUES = ("Yes", "No", "Unclear", "N/A")
_ANSWER_SCORES = {"Yes": 1.0, "No": 0.0, "Unclear": 0.5}


def _load_template(name: str) -> Template:
    return Template(resources.files("craft.prompts").joinpath(name).read_text(encoding="utf-8"))


_JUDGE_TEMPLATES = {
    JudgeKind.SG: _load_template("judge_sg.txt"),
    JudgeKind.MM: _load_template("judge_mm.txt"),
    JudgeKind.PS: _load_template("judge_ps.txt"),
}

_RECENT_HISTORY_MESSAGES = 10


def _oracle_text(oracle_set: OracleSet) -> str:
    if not oracle_set.candidates:
        return "(no oracle candidates this turn)"
    return "\n".join(c.display for c in oracle_set.candidates)


def _messages_text(messages: list[tuple[str, str]]) -> str:
    if not messages:
        return "(none)"
    return "\n".join(f"[{speaker}]: {text}" for speaker, text in messages)


def render_judge_prompt(
    kind: JudgeKind,
    game: ReplayedGame,
    rt: ReplayedTurn,
    director: str | None = None,
    history: list[tuple[str, str]] | None = None,
) -> str:
    """Build one battery prompt with exactly the context its judge may see.

    SG never receives the public message; MM never receives oracle moves
    or board truth; PS receives the collective turn without per-director
    target views.
    """
    turn_messages = [
        (name, rt.responses[name].message)
        for name in rt.speakers
        if rt.responses.get(name) is not None
    ]
    if kind is JudgeKind.SG:
        response = rt.responses[director]
        view = project_view(game.target, DirectorId(director))
        return _JUDGE_TEMPLATES[kind].substitute(
            director=director,
            target_view=render_view(view),
            board_state=serialize_board(rt.board_before),
            oracle_moves=_oracle_text(rt.oracle_set),
            analysis=response.analysis or "(empty)",
        )
    if kind is JudgeKind.MM:
        response = rt.responses[director]
        others = [(n, m) for n, m in turn_messages if n != director]
        recent = (history or [])[-_RECENT_HISTORY_MESSAGES:]
        return _JUDGE_TEMPLATES[kind].substitute(
            director=director,
            analysis=response.analysis or "(empty)",
            message=response.message,
            other_messages=_messages_text(others),
            history=_messages_text(recent),
        )
    return _JUDGE_TEMPLATES[kind].substitute(
        board_state=serialize_board(rt.board_before),
        oracle_moves=_oracle_text(rt.oracle_set),
        messages=_messages_text(turn_messages),
        builder_confirmation=rt.builder_confirm or "(none)",
    )


@dataclass
class JudgeScoreSheet:
    kind: JudgeKind
    model: str
    structure_index: int
    run: int
    judge_run: int
    turn: int
    director: str | None
    answers: dict[str, str]
    reasons: dict[str, str] = field(default_factory=dict)
    unparseable: list[str] = field(default_factory=list)

    def overall(self) -> float:
        return score_judgment(self)


def score_judgment(sheet: JudgeScoreSheet) -> float:
    """Yes=1, No=0, Unclear=0.5, averaged over applicable (non-N/A) questions."""
    scores = [
        _ANSWER_SCORES[a] for a in sheet.answers.values() if a != "N/A"
    ]
    if not scores:
        return 0.0
    return sum(scores) / len(scores)


def parse_judge_response(kind: JudgeKind, text: str) -> tuple[dict[str, str], dict[str, str], list[str]]:
    """Extract per-question answers from a judge reply.

    Unparseable or missing answers degrade to Unclear and are flagged, so
    score denominators stay stable.
    """
    answers: dict[str, str] = {}
    reasons: dict[str, str] = {}
    flagged: list[str] = []
    data: dict = {}
    start, end = text.find("{"), text.rfind("}")
    if start != -1 and end > start:
        try:
            parsed = json.loads(text[start : end + 1])
            if isinstance(parsed, dict):
                data = parsed
        except json.JSONDecodeError:
            data = {}
    for question in JUDGE_QUESTIONS[kind]:
        entry = data.get(question)
        answer = None
        reason = ""
        if isinstance(entry, dict):
            raw_answer = str(entry.get("answer", "")).strip()
            reason = str(entry.get("reason", "")).strip()
            normalized = raw_answer.capitalize() if raw_answer.lower() != "n/a" else "N/A"
            if normalized in ANSWER_VALUES:
                answer = normalized
        elif isinstance(entry, str):
            normalized = entry.strip().capitalize() if entry.strip().lower() != "n/a" else "N/A"
            if normalized in ANSWER_VALUES:
                answer = normalized
        if answer is None:
            answer = "Unclear"
            flagged.append(question)
        answers[question] = answer
        reasons[question] = reason
    return answers, reasons, flagged


DEFAULT_JUDGE_RUNS = {JudgeKind.SG: 3, JudgeKind.MM: 3, JudgeKind.PS: 2}


def judge_game(
    game: ReplayedGame,
    backend: AgentBackend,
    model: str,
    kinds: tuple[JudgeKind, ...] = (JudgeKind.SG, JudgeKind.MM, JudgeKind.PS),
    runs: dict[JudgeKind, int] | None = None,
    max_output_tokens: int = 1024,
) -> list[JudgeScoreSheet]:
    """Run the requested batteries over every turn of one replayed game.

    SG and MM are scored once per speaking director per turn; PS once per
    turn over the collective messages.
    """
    runs = {**DEFAULT_JUDGE_RUNS, **(runs or {})}
    sheets: list[JudgeScoreSheet] = []
    history: list[tuple[str, str]] = []
    for rt in game.turns:
        turn_messages = [
            (name, rt.responses[name].message)
            for name in rt.speakers
            if rt.responses.get(name) is not None
        ]
        for kind in kinds:
            targets: list[str | None]
            if kind is JudgeKind.PS:
                targets = [None]
            else:
                targets = [n for n in rt.speakers if rt.responses.get(n) is not None]
            for director in targets:
                prompt = render_judge_prompt(kind, game, rt, director, history)
                for judge_run in range(runs[kind]):
                    raw = backend.generate(prompt, max_output_tokens)
                    answers, reasons, flagged = parse_judge_response(kind, raw)
                    sheets.append(
                        JudgeScoreSheet(
                            kind=kind,
                            model=model,
                            structure_index=game.structure_index,
                            run=game.run,
                            judge_run=judge_run,
                            turn=rt.turn,
                            director=director,
                            answers=answers,
                            reasons=reasons,
                            unparseable=flagged,
                        )
                    )
        history.extend(turn_messages)
    return sheets


@dataclass(frozen=True)
class AggregateScore:
    mean: float
    sem: float
    n: int


def _mean_sem(values: list[float]) -> AggregateScore:
    if not values:
        return AggregateScore(0.0, 0.0, 0)
    mean = statistics.fmean(values)
    sem = statistics.stdev(values) / len(values) ** 0.5 if len(values) > 1 else 0.0
    return AggregateScore(mean, sem, len(values))


def aggregate_scores(
    sheets: list[JudgeScoreSheet],
) -> dict[tuple[str, JudgeKind, str], AggregateScore]:
    """Per-question and overall means with SEM, keyed by (model, kind, question).

    Each structure-run-turn-director observation is first averaged over
    its independent judge runs; the SEM is taken across observations.
    The overall battery score aggregates under question name "overall".
    """
    per_question: dict[tuple, dict[tuple, list[float]]] = {}
    per_overall: dict[tuple, dict[tuple, list[float]]] = {}
    for sheet in sheets:
        obs_key = (sheet.structure_index, sheet.run, sheet.turn, sheet.director)
        for question, answer in sheet.answers.items():
            if answer == "N/A":
                continue
            key = (sheet.model, sheet.kind, question)
            per_question.setdefault(key, {}).setdefault(obs_key, []).append(
                _ANSWER_SCORES[answer]
            )
        okey = (sheet.model, sheet.kind)
        per_overall.setdefault(okey, {}).setdefault(obs_key, []).append(score_judgment(sheet))

    out: dict[tuple[str, JudgeKind, str], AggregateScore] = {}
    for (model, kind, question), observations in per_question.items():
        values = [statistics.fmean(v) for v in observations.values()]
        out[(model, kind, question)] = _mean_sem(values)
    for (model, kind), observations in per_overall.items():
        values = [statistics.fmean(v) for v in observations.values()]
        out[(model, kind, "overall")] = _mean_sem(values)
    return out


# Deterministic mock judge ---------------------------------------------------------

_COLOR_WORDS = ("green", "blue", "red", "yellow", "orange")
_ACTION_WORDS = ("place", "put", "add", "remove", "take", "stack")
_POSITION_KEY_RE = re.compile(r"\((\d),(\d)\)")


def _section(prompt: str, marker: str, stop_markers: tuple[str, ...]) -> str:
    if marker not in prompt:
        return ""
    body = prompt.split(marker, 1)[1]
    cut = len(body)
    for stop in stop_markers:
        idx = body.find(stop)
        if idx != -1:
            cut = min(cut, idx)
    return body[:cut].strip()


@dataclass
class MockJudgeBackend:
    """Rule-based judge for CI: deterministic answers derived from the prompt.

    Stands in for an LLM grader so the whole evaluation pipeline runs
    offline; the rules are shallow text checks, not a validated grader.
    """

    label: str = "mock-judge"

    def generate(self, prompt: str, max_output_tokens: int) -> str:
        if "keys SG1-SG7" in prompt:
            answers = self._answer_sg(prompt)
        elif "keys MM1-MM8" in prompt:
            answers = self._answer_mm(prompt)
        elif "keys PS1-PS6" in prompt:
            answers = self._answer_ps(prompt)
        else:
            raise ValueError("prompt does not look like a judge battery")
        return json.dumps(
            {q: {"answer": a, "reason": "rule-based mock answer"} for q, a in answers.items()}
        )

    def _answer_sg(self, prompt: str) -> dict[str, str]:
        analysis = _section(prompt, "INTERNAL REASONING:", ("QUESTIONS:",)).lower()
        oracle = _section(prompt, "ORACLE CORRECT MOVES:", ("INTERNAL REASONING:",))
        view = _section(prompt, "PRIVATE TARGET VIEW:", ("CURRENT BOARD STATE:",)).lower()
        director = _section(prompt, "DIRECTOR:", ("PRIVATE TARGET VIEW:",)).strip()
        view_colors = [c for c in _COLOR_WORDS if c in view]
        oracle_color_words = set()
        for m in re.finditer(r"(PLACE|REMOVE)( ([a-z]{2}))? @", oracle):
            code = m.group(3)
            if code:
                for color in _COLOR_WORDS:
                    if code[0] == color[0]:
                        oracle_color_words.add(color)
        wall = {p.key() for p in visible_cells(DirectorId(director))} if director in ("D1", "D2", "D3") else set()
        mentioned = {f"({i},{j})" for i, j in _POSITION_KEY_RE.findall(analysis)}
        return {
            "SG1": "Yes" if any(c in analysis for c in view_colors) else "No",
            "SG2": "Yes" if analysis else "Unclear",
            "SG3": "Yes" if "layer" in analysis else "No",
            "SG4": "Yes" if any(c in analysis for c in oracle_color_words) else "No",
            "SG5": "Yes" if oracle.strip() and not oracle.startswith("(no") else "No",
            "SG6": "Yes" if ("small" in analysis or "large" in analysis) else "Unclear",
            "SG7": "Yes" if mentioned <= wall else "No",
        }

    def _answer_mm(self, prompt: str) -> dict[str, str]:
        analysis = _section(prompt, "INTERNAL REASONING:", ("PUBLIC MESSAGE:",)).lower()
        message = _section(prompt, "PUBLIC MESSAGE:", ("OTHER DIRECTORS' MESSAGES THIS TURN:",))
        others = _section(prompt, "OTHER DIRECTORS' MESSAGES THIS TURN:", ("RECENT CONVERSATION HISTORY:",))
        history = _section(prompt, "RECENT CONVERSATION HISTORY:", ("QUESTIONS:",))
        msg_lower = message.lower()
        analysis_colors = [c for c in _COLOR_WORDS if c in analysis]
        has_conflict_context = others.strip() not in ("", "(none)")
        return {
            "MM1": "No" if message and message in others else "Yes",
            "MM2": "No" if message and message in history else "Yes",
            "MM3": "Unclear",
            "MM4": "Yes" if any(c in msg_lower for c in analysis_colors) else "No",
            "MM5": "Yes" if "my " in msg_lower else "Unclear",
            "MM6": (
                "Yes"
                if any(c in msg_lower for c in _COLOR_WORDS)
                and any(a in msg_lower for a in _ACTION_WORDS)
                else "No"
            ),
            "MM7": "No" if has_conflict_context else "Unclear",
            "MM8": "Yes" if ("my " in msg_lower or "i can see" in msg_lower) else "No",
        }

    def _answer_ps(self, prompt: str) -> dict[str, str]:
        oracle = _section(prompt, "ORACLE CORRECT MOVES:", ("DIRECTOR MESSAGES THIS TURN:",))
        messages = _section(prompt, "DIRECTOR MESSAGES THIS TURN:", ("BUILDER CONFIRMATION:",)).lower()
        confirmation = _section(prompt, "BUILDER CONFIRMATION:", ("QUESTIONS:",))
        location_words = ("left", "right", "middle", "corner", "layer", "top", "bottom")
        oracle_pairs = []
        for m in re.finditer(r"PLACE ([a-z]{2}) @", oracle):
            code = m.group(1)
            color = next((c for c in _COLOR_WORDS if c[0] == code[0]), None)
            size = "small" if code[1] == "s" else "large"
            if color:
                oracle_pairs.append((color, size))
        type_specified = any(color in messages and size in messages for color, size in oracle_pairs)
        acted = "candidate" in confirmation.lower()
        return {
            "PS1": "Yes" if any(w in messages for w in location_words) else "No",
            "PS2": "Yes" if type_specified else "No",
            "PS3": (
                "Yes"
                if type_specified and any(a in messages for a in _ACTION_WORDS)
                else "No"
            ),
            "PS4": "Yes" if "layer" in messages else "No",
            "PS5": "Yes" if confirmation.strip() not in ("", "(none)") else "No",
            "PS6": "N/A" if acted else "Unclear",
        }


# CSV export -----------------------------------------------------------------------

SUMMARY_COLUMNS = [
    "model",
    "games",
    "turns",
    "final_overall_mean",
    "final_completion_mean",
    "final_position_accuracy_mean",
    "final_iou_mean",
    "failed_move_rate",
    "no_move_rate",
    "no_oracle_rate",
    "oracle_remove_rate",
    "attempted_remove_rate",
    "remove_gap",
    "communication_failure_rate",
    "sg_mean",
    "sg_sem",
    "mm_mean",
    "mm_sem",
    "ps_mean",
    "ps_sem",
]

JUDGE_COLUMNS = ["model", "judge", "question", "mean", "sem", "n"]

EVOLUTION_COLUMNS = [
    "model",
    "turn",
    "oracle_remove_rate",
    "attempted_remove_rate",
    "gap",
    "mean_overall_progress",
    "n_games",
]

TURN_LABEL_COLUMNS = [
    "model",
    "structure_index",
    "run",
    "turn",
    "label",
    "communication_failure",
]

EXPORT_FILES = {
    "summary.csv": SUMMARY_COLUMNS,
    "judge_questions.csv": JUDGE_COLUMNS,
    "evolution.csv": EVOLUTION_COLUMNS,
    "turn_labels.csv": TURN_LABEL_COLUMNS,
}


def model_label(header: dict) -> str:
    spec = header.get("backends", {}).get("D1", {})
    return spec.get("model") or spec.get("label") or "unknown"


def export_analysis(
    games: list[tuple[str, ReplayedGame]],
    sheets: list[JudgeScoreSheet],
    out_dir: str | Path,
) -> dict[str, Path]:
    """Write the frozen CSV schema (plus a manifest) for downstream analysis."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)

    by_model: dict[str, list[ReplayedGame]] = {}
    for label, game in games:
        by_model.setdefault(label, []).append(game)
    judge_aggregates = aggregate_scores(sheets)

    summary_rows = []
    evolution_rows = []
    label_rows = []
    for label in sorted(by_model):
        model_games = by_model[label]
        finals = [g.final_progress for g in model_games]
        all_turns = [rt for g in model_games for rt in g.turns]
        gap_report = compute_remove_gap(all_turns)
        labels = [classify_failure(rt) for rt in all_turns]
        comm_failures = [detect_communication_failure(rt) for rt in all_turns]
        n_turns = len(all_turns)
        failed = sum(
            1 for rt in all_turns if rt.outcome is not None and not rt.outcome.accepted
        )

        def judge_stat(kind: JudgeKind, field_name: str) -> float:
            agg = judge_aggregates.get((label, kind, "overall"))
            if agg is None:
                return 0.0
            return agg.mean if field_name == "mean" else agg.sem

        summary_rows.append(
            {
                "model": label,
                "games": len(model_games),
                "turns": n_turns,
                "final_overall_mean": statistics.fmean(p.overall for p in finals),
                "final_completion_mean": statistics.fmean(p.completion for p in finals),
                "final_position_accuracy_mean": statistics.fmean(
                    p.position_accuracy for p in finals
                ),
                "final_iou_mean": statistics.fmean(p.iou for p in finals),
                "failed_move_rate": failed / n_turns if n_turns else 0.0,
                "no_move_rate": labels.count(FailureLabel.NO_MOVE) / n_turns if n_turns else 0.0,
                "no_oracle_rate": labels.count(FailureLabel.NO_ORACLE) / n_turns if n_turns else 0.0,
                "oracle_remove_rate": gap_report.prescribed_rate,
                "attempted_remove_rate": gap_report.attempted_rate,
                "remove_gap": gap_report.gap,
                "communication_failure_rate": (
                    sum(comm_failures) / n_turns if n_turns else 0.0
                ),
                "sg_mean": judge_stat(JudgeKind.SG, "mean"),
                "sg_sem": judge_stat(JudgeKind.SG, "sem"),
                "mm_mean": judge_stat(JudgeKind.MM, "mean"),
                "mm_sem": judge_stat(JudgeKind.MM, "sem"),
                "ps_mean": judge_stat(JudgeKind.PS, "mean"),
                "ps_sem": judge_stat(JudgeKind.PS, "sem"),
            }
        )

        turn_indices = sorted({rt.turn for rt in all_turns})
        for turn in turn_indices:
            turn_slice = [rt for rt in all_turns if rt.turn == turn]
            slice_gap = compute_remove_gap(turn_slice)
            evolution_rows.append(
                {
                    "model": label,
                    "turn": turn,
                    "oracle_remove_rate": slice_gap.prescribed_rate,
                    "attempted_remove_rate": slice_gap.attempted_rate,
                    "gap": slice_gap.gap,
                    "mean_overall_progress": statistics.fmean(
                        rt.progress.overall for rt in turn_slice
                    ),
                    "n_games": len(turn_slice),
                }
            )

        for game in model_games:
            for rt in game.turns:
                label_rows.append(
                    {
                        "model": label,
                        "structure_index": game.structure_index,
                        "run": game.run,
                        "turn": rt.turn,
                        "label": classify_failure(rt).value,
                        "communication_failure": int(detect_communication_failure(rt)),
                    }
                )

    judge_rows = [
        {
            "model": model,
            "judge": kind.value,
            "question": question,
            "mean": agg.mean,
            "sem": agg.sem,
            "n": agg.n,
        }
        for (model, kind, question), agg in sorted(
            judge_aggregates.items(), key=lambda kv: (kv[0][0], kv[0][1].value, kv[0][2])
        )
    ]

    paths: dict[str, Path] = {}
    for name, columns, rows in (
        ("summary.csv", SUMMARY_COLUMNS, summary_rows),
        ("judge_questions.csv", JUDGE_COLUMNS, judge_rows),
        ("evolution.csv", EVOLUTION_COLUMNS, evolution_rows),
        ("turn_labels.csv", TURN_LABEL_COLUMNS, label_rows),
    ):
        path = out / name
        with path.open("w", newline="", encoding="utf-8") as handle:
            writer = csv.DictWriter(handle, fieldnames=columns)
            writer.writeheader()
            writer.writerows(rows)
        paths[name] = path

    manifest = {
        "schema_version": EXPORT_SCHEMA_VERSION,
        "files": {name: columns for name, columns in EXPORT_FILES.items()},
    }
    manifest_path = out / "manifest.json"
    manifest_path.write_text(json.dumps(manifest, indent=2) + "\n", encoding="utf-8")
    paths["manifest.json"] = manifest_path
    return paths
