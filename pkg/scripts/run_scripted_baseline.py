#!/usr/bin/env python3
"""Offline baseline experiment: scripted agents over the full evaluation set.

Generates the structure set, plays every structure with deterministic
scripted agents (optionally a noisy builder), judges with the mock judge,
and exports the analysis CSVs. Needs no network and finishes in seconds.

Usage:
    python3 scripts/run_scripted_baseline.py --out-dir out/baseline
    python3 scripts/run_scripted_baseline.py --out-dir out/noisy --noise 0.35 --runs 2
"""

from __future__ import annotations

import argparse
import hashlib
import random
from pathlib import Path

from craft.backends import ScriptedBuilderBackend, ScriptedDirectorBackend
from craft.engine import ALL_POSITIONS, Remove, parse_board, stack_height
from craft.evaluation import export_analysis, judge_game, MockJudgeBackend
from craft.orchestrator import GameConfig, log_to_lines, replay_log, run_game, write_log
from craft.protocol import format_builder_move
from craft.structgen import GenConfig, build_evaluation_set, dump_structure_set
from craft.views import DirectorId


class NoisyBuilderBackend:
    """First-candidate builder that sometimes acts on its own (bad) judgment.

    Noise draws are seeded from the prompt text, so runs stay deterministic.
    """

    def __init__(self, noise: float, label: str = "noisy-builder"):
        self.noise = noise
        self.label = label
        self._scripted = ScriptedBuilderBackend()

    def generate(self, prompt: str, max_output_tokens: int) -> str:
        rng = random.Random(hashlib.sha256(prompt.encode()).hexdigest())
        if rng.random() >= self.noise:
            return self._scripted.generate(prompt, max_output_tokens)
        marker = "CURRENT BOARD STATE:"
        start = prompt.index(marker)
        brace = prompt.index("{", start)
        depth, end = 0, brace
        for idx in range(brace, len(prompt)):
            if prompt[idx] == "{":
                depth += 1
            elif prompt[idx] == "}":
                depth -= 1
                if depth == 0:
                    end = idx + 1
                    break
        board = parse_board(prompt[brace:end])
        occupied = [p for p in ALL_POSITIONS if stack_height(board, p) > 0]
        if occupied:
            pos = rng.choice(occupied)
            top = stack_height(board, pos) - 1
            layer = rng.choice([0, top])  # sometimes the classic wrong-layer remove
            block = board.stack(pos)[top]
            span = board.domino_partner(pos, top) if block.domino_id is not None else None
            return format_builder_move(Remove(pos, layer, span_to=span), "Removing a block that looks wrong.")
        return self._scripted.generate(prompt, max_output_tokens)


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out-dir", required=True)
    parser.add_argument("--seed", type=int, default=20260809)
    parser.add_argument("--runs", type=int, default=1)
    parser.add_argument("--turns", type=int, default=20)
    parser.add_argument("--noise", type=float, default=0.0, help="probability of a self-directed builder move")
    parser.add_argument("--label", default=None, help="model label recorded in the logs")
    args = parser.parse_args()

    out = Path(args.out_dir)
    runs_dir = out / "runs"
    runs_dir.mkdir(parents=True, exist_ok=True)

    specs = build_evaluation_set(GenConfig(seed=args.seed))
    (out / "structures.json").write_text(dump_structure_set(specs) + "\n", encoding="utf-8")

    if args.noise > 0:
        builder = NoisyBuilderBackend(args.noise, label=args.label or f"noisy-{args.noise:.2f}")
    else:
        builder = ScriptedBuilderBackend(label=args.label or "scripted-builder")

    games = []
    for run in range(args.runs):
        for spec in specs:
            config = GameConfig(
                structure_index=spec.structure_index,
                run=run,
                turns=args.turns,
                seed=args.seed,
                director_backends={d: ScriptedDirectorBackend() for d in DirectorId},
                builder_backend=builder,
            )
            log = run_game(config, spec, clock=lambda: 0.0)
            path = runs_dir / f"game_s{spec.structure_index:03d}_r{run}.jsonl"
            write_log(log, path)
            games.append(replay_log(log_to_lines(log)))
            print(
                f"structure {spec.structure_index:3d} run {run}: "
                f"completion={log.final_progress.completion:.3f}"
            )

    judge = MockJudgeBackend()
    sheets = []
    label = args.label or builder.label
    for game in games:
        sheets.extend(judge_game(game, judge, label))

    paths = export_analysis([(label, g) for g in games], sheets, out / "csv")
    for name in sorted(paths):
        print(f"wrote {paths[name]}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
