"""Command-line entry points: generate, play, replay, judge, analyze."""

from __future__ import annotations

import argparse
import json
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

from .backends import build_backend
from .evaluation import (
    DEFAULT_JUDGE_RUNS,
    JudgeKind,
    JudgeScoreSheet,
    export_analysis,
    judge_game,
    model_label,
)
from .orchestrator import (
    GameConfig,
    audit_information_asymmetry,
    read_log,
    replay_log,
    run_game,
    write_log,
)
from .structgen import (
    EVALUATION_TIER_QUOTAS,
    GenConfig,
    build_evaluation_set,
    dump_structure_set,
    load_structure_set,
)
from .views import DirectorId


def _cmd_generate(args: argparse.Namespace) -> int:
    quotas = dict(EVALUATION_TIER_QUOTAS)
    if args.count != sum(quotas.values()):
        # Scale quotas to the requested count, keeping the 7/8/5 shape.
        base = sum(quotas.values())
        quotas = {tier: max(1, round(args.count * q / base)) for tier, q in quotas.items()}
        while sum(quotas.values()) > args.count:
            quotas[max(quotas, key=quotas.get)] -= 1
        while sum(quotas.values()) < args.count:
            quotas[min(quotas, key=quotas.get)] += 1
    config = GenConfig(seed=args.seed, domino_attempt_probability=args.domino_probability)
    specs = build_evaluation_set(config, quotas)
    Path(args.out).write_text(dump_structure_set(specs) + "\n", encoding="utf-8")
    tiers = {tier: sum(1 for s in specs if s.tier == tier) for tier in ("simple", "medium", "complex")}
    print(f"wrote {len(specs)} structures to {args.out} (tiers: {tiers})")
    return 0


def _load_config_file(path: str) -> dict:
    return json.loads(Path(path).read_text(encoding="utf-8"))


def _cmd_play(args: argparse.Namespace) -> int:
    config_data = _load_config_file(args.config)
    structures = load_structure_set(Path(config_data["structure_set"]).read_text(encoding="utf-8"))
    wanted = config_data.get("structure_indices")
    if wanted is not None:
        structures = [s for s in structures if s.structure_index in set(wanted)]
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    backends = config_data["backends"]
    director_backends = {
        DirectorId(name): build_backend(spec) for name, spec in backends["directors"].items()
    }
    builder_backend = build_backend(backends["builder"])

    def play_one(structure, run: int) -> str:
        game_config = GameConfig(
            structure_index=structure.structure_index,
            run=run,
            turns=config_data.get("turns", 20),
            seed=config_data.get("seed", 0),
            oracle_n=config_data.get("oracle_n", 5),
            history_trigger=config_data.get("history_trigger", 50),
            history_keep=config_data.get("history_keep", 40),
            director_max_tokens=config_data.get("director_max_tokens", 512),
            builder_max_tokens=config_data.get("builder_max_tokens", 512),
            director_backends=director_backends,
            builder_backend=builder_backend,
        )
        log = run_game(game_config, structure)
        path = out_dir / f"game_s{structure.structure_index:03d}_r{run}.jsonl"
        write_log(log, path)
        return (
            f"structure {structure.structure_index} run {run}: "
            f"overall={log.final_progress.overall:.3f} "
            f"completion={log.final_progress.completion:.3f} -> {path}"
        )

    jobs = [
        (structure, run)
        for run in range(config_data.get("runs", 1))
        for structure in structures
    ]
    # Games are independent; turns within a game stay strictly sequential.
    # Each game writes its own log file, so parallelism never shares a writer.
    if args.workers > 1:
        with ThreadPoolExecutor(max_workers=args.workers) as pool:
            for line in pool.map(lambda job: play_one(*job), jobs):
                print(line)
    else:
        for job in jobs:
            print(play_one(*job))
    return 0


def _iter_log_paths(args: argparse.Namespace) -> list[Path]:
    paths: list[Path] = []
    for entry in args.logs:
        p = Path(entry)
        if p.is_dir():
            paths.extend(sorted(p.glob("*.jsonl")))
        else:
            paths.append(p)
    return paths


def _cmd_replay(args: argparse.Namespace) -> int:
    failures = 0
    for path in _iter_log_paths(args):
        try:
            game = replay_log(read_log(path))
            problems = audit_information_asymmetry(game) if args.audit else []
        except Exception as exc:  # noqa: BLE001
            print(f"FAIL {path}: {exc}")
            failures += 1
            continue
        if problems:
            print(f"FAIL {path}: {len(problems)} privacy violations, first: {problems[0]}")
            failures += 1
        else:
            print(
                f"ok {path}: {len(game.turns)} turns verified, "
                f"final overall={game.final_progress.overall:.3f}"
            )
    return 1 if failures else 0


def _cmd_judge(args: argparse.Namespace) -> int:
    backend = build_backend(
        _load_config_file(args.backend) if args.backend else {"kind": "mock-judge"}
    )
    kinds = tuple(JudgeKind(k.upper()) for k in args.kinds.split(","))
    runs = dict(DEFAULT_JUDGE_RUNS)
    if args.runs is not None:
        runs = {kind: args.runs for kind in JudgeKind}
    all_sheets: list[JudgeScoreSheet] = []
    for path in _iter_log_paths(args):
        game = replay_log(read_log(path))
        label = model_label(game.header)
        all_sheets.extend(judge_game(game, backend, label, kinds=kinds, runs=runs))
        print(f"judged {path}")
    with Path(args.out).open("w", encoding="utf-8") as handle:
        for sheet in all_sheets:
            handle.write(
                json.dumps(
                    {
                        "kind": sheet.kind.value,
                        "model": sheet.model,
                        "structure_index": sheet.structure_index,
                        "run": sheet.run,
                        "judge_run": sheet.judge_run,
                        "turn": sheet.turn,
                        "director": sheet.director,
                        "answers": sheet.answers,
                        "reasons": sheet.reasons,
                        "unparseable": sheet.unparseable,
                        "overall": sheet.overall(),
                    }
                )
                + "\n"
            )
    print(f"wrote {len(all_sheets)} score sheets to {args.out}")
    return 0


def load_sheets(path: str | Path) -> list[JudgeScoreSheet]:
    sheets = []
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        if not line.strip():
            continue
        data = json.loads(line)
        sheets.append(
            JudgeScoreSheet(
                kind=JudgeKind(data["kind"]),
                model=data["model"],
                structure_index=data["structure_index"],
                run=data["run"],
                judge_run=data["judge_run"],
                turn=data["turn"],
                director=data["director"],
                answers=data["answers"],
                reasons=data.get("reasons", {}),
                unparseable=data.get("unparseable", []),
            )
        )
    return sheets


def _cmd_analyze(args: argparse.Namespace) -> int:
    games = []
    for path in _iter_log_paths(args):
        game = replay_log(read_log(path))
        games.append((model_label(game.header), game))
    sheets = load_sheets(args.sheets) if args.sheets else []
    paths = export_analysis(games, sheets, args.out_dir)
    for name, path in sorted(paths.items()):
        print(f"wrote {path}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="craft",
        description="Collaborative block-construction games: generate, play, replay, judge, analyze.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate", help="emit a tier-quota structure evaluation set")
    p.add_argument("--out", required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--count", type=int, default=20)
    p.add_argument("--domino-probability", type=float, default=0.3)
    p.set_defaults(func=_cmd_generate)

    p = sub.add_parser("play", help="run games from a config file")
    p.add_argument("--config", required=True, help="JSON config: structure set, backends, seeds")
    p.add_argument("--out-dir", required=True)
    p.add_argument("--workers", type=int, default=1, help="parallel games (turns stay sequential)")
    p.set_defaults(func=_cmd_play)

    p = sub.add_parser("replay", help="verify trajectory logs by re-running the engine")
    p.add_argument("logs", nargs="+", help="log files or directories")
    p.add_argument("--audit", action="store_true", help="also audit prompt privacy boundaries")
    p.set_defaults(func=_cmd_replay)

    p = sub.add_parser("judge", help="run judge batteries over logs")
    p.add_argument("logs", nargs="+")
    p.add_argument("--out", required=True, help="output JSONL of score sheets")
    p.add_argument("--kinds", default="sg,mm,ps")
    p.add_argument("--runs", type=int, default=None, help="override per-battery run counts")
    p.add_argument("--backend", default=None, help="JSON backend spec file (default: mock judge)")
    p.set_defaults(func=_cmd_judge)

    p = sub.add_parser("analyze", help="taxonomy, remove gap, and CSV export")
    p.add_argument("logs", nargs="+")
    p.add_argument("--sheets", default=None, help="JSONL score sheets from the judge command")
    p.add_argument("--out-dir", required=True)
    p.set_defaults(func=_cmd_analyze)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
