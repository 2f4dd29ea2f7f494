from __future__ import annotations

import csv
import json
import statistics

from craft.backends import ScriptedBuilderBackend, ScriptedDirectorBackend
from craft.engine import ALL_POSITIONS, Position, WorldState, parse_board
from craft.evaluation import (
    FailureLabel,
    JudgeKind,
    JudgeScoreSheet,
    MockJudgeBackend,
    RemoveGapReport,
    aggregate_scores,
    classify_failure,
    compute_remove_gap,
    detect_communication_failure,
    export_analysis,
    judge_game,
    model_label,
    parse_judge_response,
    render_judge_prompt,
    score_judgment,
)
from craft.orchestrator import GameConfig, log_to_lines, replay_log, run_game
from craft.structgen import GenConfig, StructureSpec, generate
from craft.views import DirectorId


class SequenceBuilderBackend:
    """Test double: replays a fixed list of builder responses."""

    label = "sequence-builder"

    def __init__(self, responses):
        self.responses = list(responses)
        self.calls = 0

    def generate(self, prompt: str, max_output_tokens: int) -> str:
        response = self.responses[self.calls]
        self.calls += 1
        return response


def synthetic_structure(board_text: str, structure_index: int = 900) -> StructureSpec:
    target = parse_board(board_text)
    heights = {pos: len(target.stack(pos)) for pos in ALL_POSITIONS}
    return StructureSpec(
        target=target,
        heights=heights,
        block_count=sum(heights.values()),
        tier="simple",
        structure_index=structure_index,
        seed=0,
    )


def play_scripted(structure, responses, turns, structure_index=900):
    config = GameConfig(
        structure_index=structure_index,
        turns=turns,
        seed=0,
        director_backends={d: ScriptedDirectorBackend() for d in DirectorId},
        builder_backend=SequenceBuilderBackend(responses),
    )
    log = run_game(config, structure, clock=lambda: 0.0)
    return replay_log(log_to_lines(log))


TAXONOMY_BOARD = json.dumps(
    {
        "(0,0)": ["gs"],
        "(0,1)": ["bs"],
        "(0,2)": [],
        "(1,0)": ["rl"],
        "(1,1)": [],
        "(1,2)": [],
        "(2,0)": ["rl"],
        "(2,1)": [],
        "(2,2)": [],
    },
    indent=2,
)

TAXONOMY_SCRIPT = [
    "PLACE:gs:(0,0):0:CONFIRM:correct placement",
    "PLACE:os:(0,1):0:CONFIRM:wrong color at a candidate cell",
    "PLACE:rs:(1,0):0:CONFIRM:right color, wrong size for the domino",
    "PLACE:ys:(2,2):0:CONFIRM:no candidate mentions this cell",
    "REMOVE:(1,0):1:CONFIRM:nothing at layer 1",
    "PLACE:yl:(0,2):0:CONFIRM:span omitted",
    "REMOVE:(1,2):0:CONFIRM:empty cell",
    "mumbling, not a move",
    "REMOVE:(2,2):0:CONFIRM:undo the stray block",
    "REMOVE:(0,1):0:CONFIRM:undo the wrong color",
    "REMOVE:(1,0):0:CONFIRM:undo the wrong size",
    "PLACE:bs:(0,1):0:CONFIRM:back on track",
    "PLACE:rl:(1,0):0:(2,0):CONFIRM:finish the domino",
    "CLARIFY:anything left?",
]

HAND_LABELS = [
    FailureLabel.CORRECT,
    FailureLabel.WRONG_COLOR,
    FailureLabel.WRONG_SPAN,
    FailureLabel.WRONG_POSITION,
    FailureLabel.ENGINE_LAYER,
    FailureLabel.ENGINE_SPAN,
    FailureLabel.ENGINE_OTHER,
    FailureLabel.NO_MOVE,
    FailureLabel.CORRECT,
    FailureLabel.CORRECT,
    FailureLabel.CORRECT,
    FailureLabel.CORRECT,
    FailureLabel.CORRECT,
    FailureLabel.NO_ORACLE,
]


def taxonomy_game():
    structure = synthetic_structure(TAXONOMY_BOARD)
    return play_scripted(structure, TAXONOMY_SCRIPT, turns=len(TAXONOMY_SCRIPT))


def test_synthetic_log_covers_all_nine_labels():
    game = taxonomy_game()
    labels = [classify_failure(rt) for rt in game.turns]
    assert labels == HAND_LABELS
    assert set(labels) == set(FailureLabel)


def test_every_turn_gets_exactly_one_label():
    game = taxonomy_game()
    for rt in game.turns:
        label = classify_failure(rt)
        assert isinstance(label, FailureLabel)


def test_communication_failure_definition():
    game = taxonomy_game()
    flags = [detect_communication_failure(rt) for rt in game.turns]
    labels = [classify_failure(rt) for rt in game.turns]
    for label, flag in zip(labels, flags):
        if label is FailureLabel.CORRECT:
            assert not flag
        elif label is FailureLabel.NO_ORACLE:
            assert not flag  # vacuous when nothing was on offer
        else:
            assert flag


def test_correction_spiral_trace_replays_as_engine_layer():
    # Identical wrong-layer remove across consecutive turns: the engine
    # rejects each with the same frozen message and the board never moves.
    board = json.dumps(
        {
            "(0,0)": ["ys", "ol", "gs"],
            "(0,1)": [],
            "(0,2)": [],
            "(1,0)": ["bl", "ol"],
            "(1,1)": [],
            "(1,2)": [],
            "(2,0)": ["bl", "gs"],
            "(2,1)": [],
            "(2,2)": [],
        },
        indent=2,
    )
    script = [
        "PLACE:ys:(0,0):0:CONFIRM:build",
        "PLACE:bl:(1,0):0:(2,0):CONFIRM:build",
        "PLACE:ol:(0,0):1:(1,0):CONFIRM:build",
        "PLACE:gs:(2,0):1:CONFIRM:build",
        "REMOVE:(1,0):0:(2,0):CONFIRM:remove the orange from the bottom layer",
        "REMOVE:(1,0):0:(2,0):CONFIRM:remove the orange from the bottom layer",
        "REMOVE:(1,0):0:(2,0):CONFIRM:remove the orange from the bottom layer",
    ]
    game = play_scripted(synthetic_structure(board, 901), script, turns=len(script), structure_index=901)
    spiral = game.turns[4:]
    boards = {t.board_after for t in spiral}
    for rt in spiral:
        assert classify_failure(rt) is FailureLabel.ENGINE_LAYER
        assert rt.outcome is not None and not rt.outcome.accepted
        assert rt.outcome.error.message == (
            "Cannot remove layer 0 at (1,0) - must remove top block first (layer 1)"
        )
        assert rt.board_after == rt.board_before
    assert len(boards) == 1


def test_remove_gap_worked_example():
    report = RemoveGapReport(attempted=(1, 1, 0, 0), prescribed=(0, 0, 0, 1), attempted_top=(0, 0, 0, 0))
    assert report.gap == 0.25
    balanced = RemoveGapReport(attempted=(1, 0), prescribed=(1, 0), attempted_top=(0, 0))
    assert balanced.gap == 0.0
    extreme = RemoveGapReport(attempted=(1, 1), prescribed=(0, 0), attempted_top=(0, 0))
    assert extreme.gap == 1.0


def test_remove_gap_from_replayed_turns():
    game = taxonomy_game()
    report = compute_remove_gap(game.turns)
    attempted = [1 if rt.move is not None and type(rt.move).__name__ == "Remove" else 0 for rt in game.turns]
    assert list(report.attempted) == attempted
    assert len(report.prescribed) == len(game.turns)


# Judges ---------------------------------------------------------------------------


def test_judge_prompts_have_all_questions():
    game = taxonomy_game()
    rt = next(t for t in game.turns if any(r is not None for r in t.responses.values()))
    speaker = next(n for n in rt.speakers if rt.responses[n] is not None)
    sg = render_judge_prompt(JudgeKind.SG, game, rt, speaker, [])
    mm = render_judge_prompt(JudgeKind.MM, game, rt, speaker, [])
    ps = render_judge_prompt(JudgeKind.PS, game, rt)
    for i in range(1, 8):
        assert f"SG{i}." in sg
    for i in range(1, 9):
        assert f"MM{i}." in mm
    for i in range(1, 7):
        assert f"PS{i}." in ps
    assert "correctly identify at least one block missing" in sg
    assert "add information not already communicated" in mm
    assert "without independent spatial reasoning" in ps


def test_judge_context_independence():
    game = taxonomy_game()
    for rt in game.turns:
        messages = [r.message for r in rt.responses.values() if r is not None]
        oracle_displays = [c.display for c in rt.oracle_set.candidates]
        for speaker in rt.speakers:
            if rt.responses.get(speaker) is None:
                continue
            sg = render_judge_prompt(JudgeKind.SG, game, rt, speaker, [])
            mm = render_judge_prompt(JudgeKind.MM, game, rt, speaker, [])
            for message in messages:
                assert message not in sg  # SG never sees public messages
            for display in oracle_displays:
                assert display not in mm  # MM never sees oracle strings
            assert "CURRENT BOARD STATE" not in mm  # nor board truth


def test_score_judgment_mapping():
    def sheet(kind, answers):
        return JudgeScoreSheet(
            kind=kind, model="m", structure_index=0, run=0, judge_run=0, turn=0,
            director="D1", answers=answers,
        )

    all_yes = sheet(JudgeKind.SG, {f"SG{i}": "Yes" for i in range(1, 8)})
    assert score_judgment(all_yes) == 1.0
    mixed = sheet(
        JudgeKind.SG,
        {
            "SG1": "Yes", "SG2": "Yes", "SG3": "Yes",
            "SG4": "No", "SG5": "No",
            "SG6": "Unclear", "SG7": "Unclear",
        },
    )
    assert abs(score_judgment(mixed) - 4 / 7) < 1e-12
    ps = sheet(
        JudgeKind.PS,
        {"PS1": "Yes", "PS2": "Yes", "PS3": "Yes", "PS4": "Yes", "PS5": "Yes", "PS6": "N/A"},
    )
    assert score_judgment(ps) == 1.0


def test_parse_judge_response_degrades_to_unclear():
    text = json.dumps({"SG1": {"answer": "Yes", "reason": "ok"}, "SG2": {"answer": "banana"}})
    answers, reasons, flagged = parse_judge_response(JudgeKind.SG, text)
    assert answers["SG1"] == "Yes"
    assert answers["SG2"] == "Unclear" and "SG2" in flagged
    assert answers["SG7"] == "Unclear" and "SG7" in flagged
    garbage_answers, _, garbage_flags = parse_judge_response(JudgeKind.PS, "not json at all")
    assert all(a == "Unclear" for a in garbage_answers.values())
    assert len(garbage_flags) == 6


def test_mock_judge_is_deterministic_and_parseable():
    game = taxonomy_game()
    backend = MockJudgeBackend()
    sheets_a = judge_game(game, backend, "model-a")
    sheets_b = judge_game(game, backend, "model-a")
    assert [s.answers for s in sheets_a] == [s.answers for s in sheets_b]
    assert all(not s.unparseable for s in sheets_a)
    kinds = {s.kind for s in sheets_a}
    assert kinds == {JudgeKind.SG, JudgeKind.MM, JudgeKind.PS}
    for sheet in sheets_a:
        assert set(sheet.answers) == set(
            {"SG": [f"SG{i}" for i in range(1, 8)],
             "MM": [f"MM{i}" for i in range(1, 9)],
             "PS": [f"PS{i}" for i in range(1, 7)]}[sheet.kind.value]
        )


def test_judge_run_counts():
    game = taxonomy_game()
    sheets = judge_game(game, MockJudgeBackend(), "model-a")
    per_kind_runs = {
        kind: {s.judge_run for s in sheets if s.kind is kind} for kind in JudgeKind
    }
    assert per_kind_runs[JudgeKind.SG] == {0, 1, 2}
    assert per_kind_runs[JudgeKind.MM] == {0, 1, 2}
    assert per_kind_runs[JudgeKind.PS] == {0, 1}


def test_aggregate_scores_against_spreadsheet_oracle():
    # Two observations, two runs each, known answers: verify the mean/SEM
    # pipeline (average runs per observation, SEM across observations).
    def sheet(turn, judge_run, a1, a2):
        return JudgeScoreSheet(
            kind=JudgeKind.PS, model="m", structure_index=1, run=0, judge_run=judge_run,
            turn=turn, director=None,
            answers={"PS1": a1, "PS2": a2, "PS3": "No", "PS4": "No", "PS5": "No", "PS6": "N/A"},
        )

    sheets = [
        sheet(0, 0, "Yes", "No"),
        sheet(0, 1, "No", "No"),
        sheet(1, 0, "Yes", "Unclear"),
        sheet(1, 1, "Yes", "Unclear"),
    ]
    aggregates = aggregate_scores(sheets)
    ps1 = aggregates[("m", JudgeKind.PS, "PS1")]
    # observation means: turn0 = (1+0)/2 = 0.5, turn1 = (1+1)/2 = 1.0
    assert ps1.mean == statistics.fmean([0.5, 1.0])
    assert ps1.sem == statistics.stdev([0.5, 1.0]) / 2**0.5
    assert ps1.n == 2
    ps2 = aggregates[("m", JudgeKind.PS, "PS2")]
    assert ps2.mean == statistics.fmean([0.0, 0.5])
    ps6_missing = ("m", JudgeKind.PS, "PS6") not in aggregates
    assert ps6_missing  # every answer was N/A, so no denominator exists
    overall = aggregates[("m", JudgeKind.PS, "overall")]
    # per-sheet overalls over 5 applicable questions
    expected_overalls = [
        statistics.fmean([statistics.fmean([1, 0, 0, 0, 0]), statistics.fmean([0, 0, 0, 0, 0])]),
        statistics.fmean([statistics.fmean([1, 0.5, 0, 0, 0]), statistics.fmean([1, 0.5, 0, 0, 0])]),
    ]
    assert abs(overall.mean - statistics.fmean(expected_overalls)) < 1e-12


def test_identical_sheets_across_runs_have_zero_sem():
    game = taxonomy_game()
    sheets = judge_game(game, MockJudgeBackend(), "model-a", kinds=(JudgeKind.PS,))
    aggregates = aggregate_scores(sheets)
    # mock judge is deterministic, so run-to-run variance is zero, but SEM
    # across observations may be nonzero; instead check a single-observation slice
    single = [s for s in sheets if s.turn == 0]
    single_agg = aggregate_scores(single)
    for key, agg in single_agg.items():
        assert agg.n == 1
        assert agg.sem == 0.0
    assert aggregates  # aggregation over the full corpus still works


# Export ---------------------------------------------------------------------------


def test_export_analysis_round_trip(tmp_path):
    spec = generate(0, GenConfig(seed=31))
    config = GameConfig(
        structure_index=0,
        turns=8,
        seed=1,
        director_backends={d: ScriptedDirectorBackend() for d in DirectorId},
        builder_backend=ScriptedBuilderBackend(),
    )
    game = replay_log(log_to_lines(run_game(config, spec, clock=lambda: 0.0)))
    label = model_label(game.header)
    sheets = judge_game(game, MockJudgeBackend(), label)
    paths = export_analysis([(label, game)], sheets, tmp_path)

    manifest = json.loads((tmp_path / "manifest.json").read_text())
    assert manifest["schema_version"] == 1

    with (tmp_path / "summary.csv").open() as handle:
        rows = list(csv.DictReader(handle))
    assert len(rows) == 1
    row = rows[0]
    assert row["model"] == label
    assert float(row["remove_gap"]) == compute_remove_gap(game.turns).gap
    assert float(row["final_completion_mean"]) == game.final_progress.completion

    with (tmp_path / "evolution.csv").open() as handle:
        evolution = list(csv.DictReader(handle))
    assert len(evolution) == 8
    assert [int(r["turn"]) for r in evolution] == list(range(8))

    with (tmp_path / "turn_labels.csv").open() as handle:
        labels = list(csv.DictReader(handle))
    assert len(labels) == 8
    recomputed = [classify_failure(rt).value for rt in game.turns]
    assert [r["label"] for r in labels] == recomputed


def test_export_empty_run_set_is_header_only(tmp_path):
    paths = export_analysis([], [], tmp_path)
    for name in ("summary.csv", "evolution.csv", "turn_labels.csv", "judge_questions.csv"):
        lines = (tmp_path / name).read_text().strip().splitlines()
        assert len(lines) == 1  # header only


def test_perfect_scripted_game_has_zero_gap_columns(tmp_path):
    spec = generate(5, GenConfig(seed=41))
    config = GameConfig(
        structure_index=5,
        turns=20,
        seed=2,
        director_backends={d: ScriptedDirectorBackend() for d in DirectorId},
        builder_backend=ScriptedBuilderBackend(),
    )
    game = replay_log(log_to_lines(run_game(config, spec, clock=lambda: 0.0)))
    export_analysis([("scripted", game)], [], tmp_path)
    with (tmp_path / "evolution.csv").open() as handle:
        for row in csv.DictReader(handle):
            assert float(row["gap"]) == 0.0


def test_wrong_span_when_right_block_takes_the_wrong_partner():
    # Candidate wants a domino spanning (1,0)->(2,0); the builder places the
    # right block at the right cell but spans to (1,1) instead. The engine
    # accepts it (heights match), so the mismatch surfaces as wrong-span.
    board = json.dumps(
        {
            "(0,0)": [],
            "(0,1)": [],
            "(0,2)": [],
            "(1,0)": ["yl"],
            "(1,1)": [],
            "(1,2)": [],
            "(2,0)": ["yl"],
            "(2,1)": [],
            "(2,2)": [],
        },
        indent=2,
    )
    script = ["PLACE:yl:(1,0):0:(1,1):CONFIRM:spanning toward the middle instead"]
    game = play_scripted(synthetic_structure(board, 902), script, turns=1, structure_index=902)
    rt = game.turns[0]
    assert rt.outcome is not None and rt.outcome.accepted
    assert classify_failure(rt) is FailureLabel.WRONG_SPAN
    assert detect_communication_failure(rt)
