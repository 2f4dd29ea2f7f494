// Deterministic SVG figure emitters (no DOM, no timestamps): remove-rate
// evolution with shaded gap, stacked failure-taxonomy bars, and per-question
// judge bars with SEM whiskers.

import { EvolutionRow, FAILURE_LABELS, JudgeQuestionRow, TurnLabelRow } from "./schema";

const MODEL_COLORS = [
  "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd",
  "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf",
];

const LABEL_COLORS: Record<string, string> = {
  correct: "#2ca02c",
  "engine-layer": "#d62728",
  "engine-span": "#ff7f0e",
  "engine-other": "#8c564b",
  "wrong-position": "#1f77b4",
  "wrong-color": "#9467bd",
  "wrong-span": "#e377c2",
  "no-oracle": "#7f7f7f",
  "no-move": "#bcbd22",
};

function fmt(x: number): string {
  return x.toFixed(4);
}

function esc(text: string): string {
  return text.replace(/&/g, "&amp;").replace(/</g, "&lt;").replace(/>/g, "&gt;").replace(/"/g, "&quot;");
}

function svgDocument(width: number, height: number, body: string): string {
  return [
    `<svg xmlns="http://www.w3.org/2000/svg" width="${width}" height="${height}" viewBox="0 0 ${width} ${height}" font-family="Helvetica, Arial, sans-serif">`,
    `<rect width="${width}" height="${height}" fill="white"/>`,
    body,
    "</svg>",
  ].join("\n");
}

function groupBy<T>(rows: T[], key: (row: T) => string): Map<string, T[]> {
  const out = new Map<string, T[]>();
  for (const row of rows) {
    const k = key(row);
    const bucket = out.get(k);
    if (bucket) bucket.push(row);
    else out.set(k, [row]);
  }
  return out;
}

export interface EvolutionFigure {
  svg: string;
  meanGapByModel: Record<string, number>;
}

/** Oracle-prescribed vs attempted remove rate per turn, one panel per model,
 *  with the area between the lines shaded. */
export function renderEvolutionFigure(rows: EvolutionRow[]): EvolutionFigure {
  if (rows.length === 0) throw new Error("evolution figure: no rows (missing column data?)");
  const byModel = groupBy(rows, (r) => r.model);
  const models = [...byModel.keys()].sort();
  const panelW = 320;
  const panelH = 200;
  const margin = { left: 46, right: 12, top: 30, bottom: 30 };
  const cols = Math.min(3, models.length);
  const gridRows = Math.ceil(models.length / cols);
  const width = cols * panelW + 20;
  const height = gridRows * panelH + 40;

  const meanGapByModel: Record<string, number> = {};
  const parts: string[] = [];
  models.forEach((model, index) => {
    const data = [...byModel.get(model)!].sort((a, b) => a.turn - b.turn);
    const gapMean = data.reduce((s, r) => s + r.gap, 0) / data.length;
    meanGapByModel[model] = gapMean;

    const px = (index % cols) * panelW + 10;
    const py = Math.floor(index / cols) * panelH + 10;
    const plotW = panelW - margin.left - margin.right;
    const plotH = panelH - margin.top - margin.bottom;
    const maxTurn = Math.max(1, ...data.map((r) => r.turn));
    const x = (turn: number) => px + margin.left + (turn / maxTurn) * plotW;
    const y = (rate: number) => py + margin.top + (1 - rate) * plotH;

    const oracle = data.map((r) => `${fmt(x(r.turn))},${fmt(y(r.oracle_remove_rate))}`);
    const attempted = data.map((r) => `${fmt(x(r.turn))},${fmt(y(r.attempted_remove_rate))}`);
    const band = [...oracle, ...[...attempted].reverse()].join(" ");
    const bandArea = data.reduce(
      (s, r) => s + Math.abs(r.attempted_remove_rate - r.oracle_remove_rate), 0,
    );

    parts.push(`<g data-model="${esc(model)}" data-gap-area="${fmt(bandArea)}">`);
    parts.push(
      `<rect x="${px + margin.left}" y="${py + margin.top}" width="${plotW}" height="${plotH}" fill="none" stroke="#cccccc"/>`,
    );
    parts.push(
      `<text x="${px + margin.left}" y="${py + 18}" font-size="12">${esc(model)} (mean gap ${gapMean >= 0 ? "+" : ""}${gapMean.toFixed(3)})</text>`,
    );
    if (bandArea > 0) {
      parts.push(`<polygon points="${band}" fill="#ff7f0e" fill-opacity="0.25" stroke="none"/>`);
    }
    parts.push(
      `<polyline points="${oracle.join(" ")}" fill="none" stroke="#2ca02c" stroke-width="1.5"/>`,
    );
    parts.push(
      `<polyline points="${attempted.join(" ")}" fill="none" stroke="#d62728" stroke-width="1.5"/>`,
    );
    for (const tick of [0, 0.5, 1]) {
      parts.push(
        `<text x="${px + margin.left - 6}" y="${fmt(y(tick) + 3)}" font-size="9" text-anchor="end">${tick.toFixed(1)}</text>`,
      );
    }
    parts.push(
      `<text x="${px + margin.left + plotW / 2}" y="${py + panelH - 8}" font-size="9" text-anchor="middle">turn</text>`,
    );
    parts.push("</g>");
  });
  parts.push(
    `<g font-size="10"><rect x="12" y="${height - 18}" width="12" height="3" fill="#2ca02c"/>` +
      `<text x="28" y="${height - 13}">oracle remove rate</text>` +
      `<rect x="140" y="${height - 18}" width="12" height="3" fill="#d62728"/>` +
      `<text x="156" y="${height - 13}">attempted remove rate</text></g>`,
  );
  return { svg: svgDocument(width, height, parts.join("\n")), meanGapByModel };
}

export interface TaxonomyFigure {
  svg: string;
  fractionsByModel: Record<string, Record<string, number>>;
}

/** Stacked per-model bars of failure-label fractions. */
export function renderTaxonomyFigure(rows: TurnLabelRow[]): TaxonomyFigure {
  if (rows.length === 0) throw new Error("taxonomy figure: no rows (missing column data?)");
  const byModel = groupBy(rows, (r) => r.model);
  const models = [...byModel.keys()].sort();
  const barW = 64;
  const gap = 28;
  const plotH = 260;
  const marginTop = 24;
  const width = Math.max(560, models.length * (barW + gap) + 220);
  const height = plotH + 100;

  const fractionsByModel: Record<string, Record<string, number>> = {};
  const parts: string[] = [];
  models.forEach((model, index) => {
    const data = byModel.get(model)!;
    const total = data.length;
    const fractions: Record<string, number> = {};
    for (const label of FAILURE_LABELS) {
      fractions[label] = data.filter((r) => r.label === label).length / total;
    }
    fractionsByModel[model] = fractions;

    const x0 = 60 + index * (barW + gap);
    let yCursor = marginTop;
    parts.push(`<g data-model="${esc(model)}">`);
    for (const label of FAILURE_LABELS) {
      const h = fractions[label] * plotH;
      if (h > 0) {
        parts.push(
          `<rect x="${x0}" y="${fmt(yCursor)}" width="${barW}" height="${fmt(h)}" fill="${LABEL_COLORS[label]}" data-label="${label}" data-fraction="${fmt(fractions[label])}"/>`,
        );
      }
      yCursor += h;
    }
    parts.push(
      `<text x="${x0 + barW / 2}" y="${plotH + marginTop + 14}" font-size="10" text-anchor="middle">${esc(model)}</text>`,
    );
    parts.push("</g>");
  });

  const legendX = 60 + models.length * (barW + gap) + 10;
  FAILURE_LABELS.forEach((label, i) => {
    parts.push(
      `<rect x="${legendX}" y="${marginTop + i * 18}" width="12" height="12" fill="${LABEL_COLORS[label]}"/>`,
    );
    parts.push(
      `<text x="${legendX + 18}" y="${marginTop + i * 18 + 10}" font-size="10">${label}</text>`,
    );
  });
  parts.push(`<text x="60" y="14" font-size="12">Turn outcome taxonomy (fraction of turns)</text>`);
  return { svg: svgDocument(width, height, parts.join("\n")), fractionsByModel };
}

export interface JudgeFigure {
  svg: string;
  panels: string[];
}

/** Three panels (SG, MM, PS): per-question bars per model with +/-1 SEM whiskers. */
export function renderJudgeFigure(rows: JudgeQuestionRow[]): JudgeFigure {
  const questionRows = rows.filter((r) => r.question !== "overall");
  if (questionRows.length === 0) {
    throw new Error("judge figure: no per-question rows (missing column data?)");
  }
  const kinds = ["SG", "MM", "PS"].filter((k) => questionRows.some((r) => r.judge === k));
  const models = [...new Set(questionRows.map((r) => r.model))].sort();
  const panelH = 220;
  const width = 980;
  const height = kinds.length * panelH + 40;
  const margin = { left: 50, right: 20, top: 28, bottom: 26 };

  const parts: string[] = [];
  kinds.forEach((kind, panelIndex) => {
    const panelRows = questionRows.filter((r) => r.judge === kind);
    const questions = [...new Set(panelRows.map((r) => r.question))].sort();
    const py = panelIndex * panelH + 10;
    const plotW = width - margin.left - margin.right;
    const plotH = panelH - margin.top - margin.bottom;
    const groupW = plotW / questions.length;
    const barW = Math.min(18, (groupW - 8) / models.length);
    const y = (v: number) => py + margin.top + (1 - v) * plotH;

    parts.push(`<g data-panel="${kind}">`);
    parts.push(`<text x="${margin.left}" y="${py + 16}" font-size="12">${kind} judge (mean with +/-1 SEM)</text>`);
    parts.push(
      `<rect x="${margin.left}" y="${py + margin.top}" width="${plotW}" height="${plotH}" fill="none" stroke="#cccccc"/>`,
    );
    questions.forEach((question, qi) => {
      const x0 = margin.left + qi * groupW + 4;
      models.forEach((model, mi) => {
        const row = panelRows.find((r) => r.question === question && r.model === model);
        if (!row) return;
        const bx = x0 + mi * barW;
        const color = MODEL_COLORS[mi % MODEL_COLORS.length];
        parts.push(
          `<rect x="${fmt(bx)}" y="${fmt(y(row.mean))}" width="${fmt(barW - 2)}" height="${fmt(Math.max(0, y(0) - y(row.mean)))}" fill="${color}" data-question="${question}" data-model="${esc(model)}" data-mean="${fmt(row.mean)}"/>`,
        );
        const cx = bx + (barW - 2) / 2;
        const top = y(Math.min(1, row.mean + row.sem));
        const bottom = y(Math.max(0, row.mean - row.sem));
        parts.push(
          `<line x1="${fmt(cx)}" y1="${fmt(top)}" x2="${fmt(cx)}" y2="${fmt(bottom)}" stroke="#333333" stroke-width="1"/>`,
        );
      });
      parts.push(
        `<text x="${fmt(x0 + (models.length * barW) / 2)}" y="${py + panelH - 8}" font-size="9" text-anchor="middle">${question}</text>`,
      );
    });
    for (const tick of [0, 0.5, 1]) {
      parts.push(
        `<text x="${margin.left - 6}" y="${fmt(y(tick) + 3)}" font-size="9" text-anchor="end">${tick.toFixed(1)}</text>`,
      );
    }
    parts.push("</g>");
  });
  models.forEach((model, mi) => {
    const lx = margin.left + mi * 180;
    parts.push(
      `<rect x="${lx}" y="${height - 16}" width="10" height="10" fill="${MODEL_COLORS[mi % MODEL_COLORS.length]}"/>`,
    );
    parts.push(`<text x="${lx + 14}" y="${height - 7}" font-size="10">${esc(model)}</text>`);
  });
  return { svg: svgDocument(width, height, parts.join("\n")), panels: kinds };
}
