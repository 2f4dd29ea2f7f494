#!/usr/bin/env node
// CLI: render figures from an export directory, or run correlation /
// mediation analysis over a per-model feature table.

import * as fs from "fs";
import * as path from "path";
import { renderEvolutionFigure, renderJudgeFigure, renderTaxonomyFigure } from "./figures";
import { loadModelTable, loadResults } from "./schema";
import { correlationTable, mediationAnalysis } from "./stats";

interface Flags {
  [key: string]: string;
}

function parseFlags(argv: string[]): { command: string; flags: Flags } {
  const [command, ...rest] = argv;
  const flags: Flags = {};
  for (let i = 0; i < rest.length; i += 2) {
    const key = rest[i];
    if (!key.startsWith("--") || i + 1 >= rest.length) {
      throw new Error(`malformed flag ${key}`);
    }
    flags[key.slice(2)] = rest[i + 1];
  }
  return { command: command ?? "", flags };
}

function require_(flags: Flags, name: string): string {
  const value = flags[name];
  if (!value) throw new Error(`missing required flag --${name}`);
  return value;
}

function cmdFigures(flags: Flags): void {
  const input = require_(flags, "input");
  const out = require_(flags, "out");
  const format = flags["format"] ?? "svg";
  if (format !== "svg") {
    throw new Error(`unsupported figure format ${format} (only svg is implemented)`);
  }
  const frame = loadResults(input);
  fs.mkdirSync(out, { recursive: true });

  const evolution = renderEvolutionFigure(frame.evolution);
  const taxonomy = renderTaxonomyFigure(frame.turnLabels);
  const judges = renderJudgeFigure(frame.judgeQuestions);
  const files: [string, string][] = [
    ["remove_evolution.svg", evolution.svg],
    ["failure_taxonomy.svg", taxonomy.svg],
    ["judge_questions.svg", judges.svg],
  ];
  for (const [name, svg] of files) {
    const target = path.join(out, name);
    fs.writeFileSync(target, svg + "\n", "utf-8");
    console.log(`wrote ${target}`);
  }
}

function cmdCorrelate(flags: Flags): void {
  const table = loadModelTable(require_(flags, "table"));
  const outcome = require_(flags, "outcome");
  const featureList = flags["features"]
    ? flags["features"].split(",")
    : Object.keys(table[0]).filter((k) => k !== "model" && k !== outcome);
  const rows = table as Record<string, number>[];
  const results = correlationTable(rows, featureList, outcome);
  console.log(`correlations with ${outcome} (n=${table.length}), ordered by |r|`);
  for (const row of results) {
    const p = row.pearson
      ? `r=${row.pearson.r.toFixed(3)} p=${row.pearson.p.toFixed(4)}`
      : "r undefined (degenerate variance)";
    const s = row.spearman
      ? `rho=${row.spearman.r.toFixed(3)} p=${row.spearman.p.toFixed(4)}`
      : "rho undefined";
    console.log(`  ${row.feature.padEnd(28)} ${p}  ${s}`);
  }
}

function cmdMediate(flags: Flags): void {
  const table = loadModelTable(require_(flags, "table")) as Record<string, number>[];
  const predictor = require_(flags, "predictor");
  const mediator = require_(flags, "mediator");
  const outcome = require_(flags, "outcome");
  const result = mediationAnalysis(
    table.map((r) => r[predictor]),
    table.map((r) => r[mediator]),
    table.map((r) => r[outcome]),
  );
  console.log(`mediation: ${predictor} -> ${mediator} -> ${outcome} (n=${result.n})`);
  console.log(`  R2 ${predictor} alone:          ${result.r2Predictor.toFixed(3)}`);
  console.log(`  R2 ${mediator} alone:           ${result.r2Mediator.toFixed(3)}`);
  console.log(`  R2 joint:                       ${result.r2Joint.toFixed(3)} (delta ${result.deltaR2.toFixed(3)})`);
  console.log(
    `  partial r (${predictor} | ${mediator}): ${result.partialR.toFixed(3)}, p=${result.partialP.toFixed(3)}, ` +
      `95% CI [${result.partialCI95[0].toFixed(3)}, ${result.partialCI95[1].toFixed(3)}]`,
  );
}

export function main(argv: string[]): number {
  const { command, flags } = parseFlags(argv);
  switch (command) {
    case "figures":
      cmdFigures(flags);
      return 0;
    case "correlate":
      cmdCorrelate(flags);
      return 0;
    case "mediate":
      cmdMediate(flags);
      return 0;
    default:
      console.error(
        "usage: craft-analytics figures --input <csv dir> --out <dir> [--format svg]\n" +
          "       craft-analytics correlate --table <csv> --outcome <col> [--features a,b]\n" +
          "       craft-analytics mediate --table <csv> --predictor <col> --mediator <col> --outcome <col>",
      );
      return command === "" || command === "help" ? 0 : 2;
  }
}

if (require.main === module) {
  try {
    process.exit(main(process.argv.slice(2)));
  } catch (error) {
    console.error(String(error instanceof Error ? error.message : error));
    process.exit(1);
  }
}
