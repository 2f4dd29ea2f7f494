// Loader for the game harness CSV exports. The column sets are frozen; any
// drift is a hard error rather than a silently mangled frame.

import * as fs from "fs";
import * as path from "path";
import Papa from "papaparse";

export const EXPORT_SCHEMA_VERSION = 1;

export const EXPORT_COLUMNS: Record<string, string[]> = {
  "summary.csv": [
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
  ],
  "judge_questions.csv": ["model", "judge", "question", "mean", "sem", "n"],
  "evolution.csv": [
    "model",
    "turn",
    "oracle_remove_rate",
    "attempted_remove_rate",
    "gap",
    "mean_overall_progress",
    "n_games",
  ],
  "turn_labels.csv": ["model", "structure_index", "run", "turn", "label", "communication_failure"],
};

export interface SummaryRow {
  model: string;
  games: number;
  turns: number;
  final_overall_mean: number;
  final_completion_mean: number;
  final_position_accuracy_mean: number;
  final_iou_mean: number;
  failed_move_rate: number;
  no_move_rate: number;
  no_oracle_rate: number;
  oracle_remove_rate: number;
  attempted_remove_rate: number;
  remove_gap: number;
  communication_failure_rate: number;
  sg_mean: number;
  sg_sem: number;
  mm_mean: number;
  mm_sem: number;
  ps_mean: number;
  ps_sem: number;
}

export interface JudgeQuestionRow {
  model: string;
  judge: "SG" | "MM" | "PS";
  question: string;
  mean: number;
  sem: number;
  n: number;
}

export interface EvolutionRow {
  model: string;
  turn: number;
  oracle_remove_rate: number;
  attempted_remove_rate: number;
  gap: number;
  mean_overall_progress: number;
  n_games: number;
}

export interface TurnLabelRow {
  model: string;
  structure_index: number;
  run: number;
  turn: number;
  label: string;
  communication_failure: number;
}

export interface ResultsFrame {
  schemaVersion: number;
  summary: SummaryRow[];
  judgeQuestions: JudgeQuestionRow[];
  evolution: EvolutionRow[];
  turnLabels: TurnLabelRow[];
}

export const FAILURE_LABELS = [
  "correct",
  "engine-layer",
  "engine-span",
  "engine-other",
  "wrong-position",
  "wrong-color",
  "wrong-span",
  "no-oracle",
  "no-move",
] as const;

function parseCsv(filePath: string, expectedColumns: string[]): Record<string, string>[] {
  const text = fs.readFileSync(filePath, "utf-8");
  const parsed = Papa.parse<Record<string, string>>(text.trim(), {
    header: true,
    skipEmptyLines: true,
  });
  if (parsed.errors.length > 0) {
    throw new Error(`${filePath}: ${parsed.errors[0].message} (row ${parsed.errors[0].row})`);
  }
  const fields = parsed.meta.fields ?? [];
  if (JSON.stringify(fields) !== JSON.stringify(expectedColumns)) {
    throw new Error(
      `${filePath}: columns [${fields.join(",")}] do not match the frozen schema [${expectedColumns.join(",")}]`,
    );
  }
  return parsed.data;
}

function toNumber(value: string, column: string, file: string): number {
  if (value === undefined || value.trim() === "") {
    throw new Error(`${file}: missing numeric value in column ${column}`);
  }
  const num = Number(value);
  if (!Number.isFinite(num)) {
    throw new Error(`${file}: non-numeric value ${JSON.stringify(value)} in column ${column}`);
  }
  return num;
}

function convertRows<T>(
  rows: Record<string, string>[],
  numericColumns: string[],
  file: string,
): T[] {
  return rows.map((row) => {
    const out: Record<string, string | number> = { ...row };
    for (const column of numericColumns) {
      out[column] = toNumber(row[column], column, file);
    }
    return out as T;
  });
}

/** Load one export directory (manifest plus four CSVs) into a typed frame. */
export function loadResults(dir: string): ResultsFrame {
  const manifestPath = path.join(dir, "manifest.json");
  if (!fs.existsSync(manifestPath)) {
    throw new Error(`missing manifest.json in ${dir}`);
  }
  const manifest = JSON.parse(fs.readFileSync(manifestPath, "utf-8"));
  if (manifest.schema_version !== EXPORT_SCHEMA_VERSION) {
    throw new Error(
      `unsupported export schema version ${manifest.schema_version} (expected ${EXPORT_SCHEMA_VERSION})`,
    );
  }

  const summaryRaw = parseCsv(path.join(dir, "summary.csv"), EXPORT_COLUMNS["summary.csv"]);
  const judgeRaw = parseCsv(path.join(dir, "judge_questions.csv"), EXPORT_COLUMNS["judge_questions.csv"]);
  const evolutionRaw = parseCsv(path.join(dir, "evolution.csv"), EXPORT_COLUMNS["evolution.csv"]);
  const labelsRaw = parseCsv(path.join(dir, "turn_labels.csv"), EXPORT_COLUMNS["turn_labels.csv"]);

  const summary = convertRows<SummaryRow>(
    summaryRaw,
    EXPORT_COLUMNS["summary.csv"].filter((c) => c !== "model"),
    "summary.csv",
  );
  const judgeQuestions = convertRows<JudgeQuestionRow>(
    judgeRaw,
    ["mean", "sem", "n"],
    "judge_questions.csv",
  );
  const evolution = convertRows<EvolutionRow>(
    evolutionRaw,
    EXPORT_COLUMNS["evolution.csv"].filter((c) => c !== "model"),
    "evolution.csv",
  );
  const turnLabels = convertRows<TurnLabelRow>(
    labelsRaw,
    ["structure_index", "run", "turn", "communication_failure"],
    "turn_labels.csv",
  );
  for (const row of turnLabels) {
    if (!FAILURE_LABELS.includes(row.label as (typeof FAILURE_LABELS)[number])) {
      throw new Error(`turn_labels.csv: unknown failure label ${JSON.stringify(row.label)}`);
    }
  }
  return { schemaVersion: manifest.schema_version, summary, judgeQuestions, evolution, turnLabels };
}

export interface ReferenceModelRow {
  model: string;
  mm5_unique_perspective: number;
  remove_gap: number;
  progress: number;
}

/** Load a per-model feature table (e.g. the shipped reference benchmark table). */
export function loadModelTable(filePath: string): Record<string, number | string>[] {
  const text = fs.readFileSync(filePath, "utf-8");
  const parsed = Papa.parse<Record<string, string>>(text.trim(), {
    header: true,
    skipEmptyLines: true,
  });
  if (parsed.errors.length > 0) {
    throw new Error(`${filePath}: ${parsed.errors[0].message}`);
  }
  const fields = parsed.meta.fields ?? [];
  return parsed.data.map((row) => {
    const out: Record<string, number | string> = {};
    for (const field of fields) {
      out[field] = field === "model" ? row[field] : toNumber(row[field], field, filePath);
    }
    return out;
  });
}
