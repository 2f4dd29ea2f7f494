// Correlation, regression, and mediation analysis over small per-model tables.

export interface Correlation {
  r: number;
  p: number;
  n: number;
}

export interface CorrelationRow {
  feature: string;
  pearson: Correlation | null; // null when a variance is degenerate
  spearman: Correlation | null;
}

export interface MediationResult {
  n: number;
  r2Predictor: number;
  r2Mediator: number;
  r2Joint: number;
  deltaR2: number; // joint minus mediator-only
  partialR: number; // predictor vs outcome, controlling for the mediator
  partialP: number;
  partialCI95: [number, number];
}

function mean(xs: number[]): number {
  let s = 0;
  for (const x of xs) s += x;
  return s / xs.length;
}

function centered(xs: number[]): number[] {
  const m = mean(xs);
  return xs.map((x) => x - m);
}

function dot(a: number[], b: number[]): number {
  let s = 0;
  for (let i = 0; i < a.length; i++) s += a[i] * b[i];
  return s;
}

/** Log gamma (Lanczos), enough precision for beta-function tail probabilities. */
function logGamma(x: number): number {
  const g = [
    76.18009172947146, -86.50532032941677, 24.01409824083091,
    -1.231739572450155, 0.1208650973866179e-2, -0.5395239384953e-5,
  ];
  let y = x;
  const tmp = x + 5.5 - (x + 0.5) * Math.log(x + 5.5);
  let ser = 1.000000000190015;
  for (const c of g) ser += c / ++y;
  return -tmp + Math.log((2.5066282746310005 * ser) / x);
}

/** Regularized incomplete beta via the standard continued fraction. */
function incompleteBeta(a: number, b: number, x: number): number {
  if (x <= 0) return 0;
  if (x >= 1) return 1;
  const lbeta = logGamma(a + b) - logGamma(a) - logGamma(b) + a * Math.log(x) + b * Math.log(1 - x);
  const front = Math.exp(lbeta);
  const useDirect = x < (a + 1) / (a + b + 2);
  const [aa, bb, xx] = useDirect ? [a, b, x] : [b, a, 1 - x];

  const tiny = 1e-30;
  let c = 1;
  let d = 1 - ((aa + bb) * xx) / (aa + 1);
  if (Math.abs(d) < tiny) d = tiny;
  d = 1 / d;
  let h = d;
  for (let m = 1; m <= 200; m++) {
    const m2 = 2 * m;
    let num = (m * (bb - m) * xx) / ((aa + m2 - 1) * (aa + m2));
    d = 1 + num * d;
    if (Math.abs(d) < tiny) d = tiny;
    c = 1 + num / c;
    if (Math.abs(c) < tiny) c = tiny;
    d = 1 / d;
    h *= d * c;
    num = (-(aa + m) * (aa + bb + m) * xx) / ((aa + m2) * (aa + m2 + 1));
    d = 1 + num * d;
    if (Math.abs(d) < tiny) d = tiny;
    c = 1 + num / c;
    if (Math.abs(c) < tiny) c = tiny;
    d = 1 / d;
    const del = d * c;
    h *= del;
    if (Math.abs(del - 1) < 3e-14) break;
  }
  const value = (front * h) / aa;
  return useDirect ? value : 1 - value;
}

/** Two-sided p for a t statistic with df degrees of freedom. */
export function tTestPValue(t: number, df: number): number {
  if (!Number.isFinite(t)) return 0;
  return incompleteBeta(df / 2, 0.5, df / (df + t * t));
}

function pFromR(r: number, n: number): number {
  if (Math.abs(r) >= 1) return 0;
  const t = r * Math.sqrt((n - 2) / (1 - r * r));
  return tTestPValue(t, n - 2);
}

/** Pearson correlation with a t-approximation p-value; null when degenerate. */
export function pearson(x: number[], y: number[]): Correlation | null {
  if (x.length !== y.length || x.length < 3) {
    throw new Error(`pearson needs two equal-length samples of n >= 3, got ${x.length}/${y.length}`);
  }
  const cx = centered(x);
  const cy = centered(y);
  const ssx = dot(cx, cx);
  const ssy = dot(cy, cy);
  if (ssx === 0 || ssy === 0) return null;
  const r = Math.max(-1, Math.min(1, dot(cx, cy) / Math.sqrt(ssx * ssy)));
  return { r, p: pFromR(r, x.length), n: x.length };
}

/** Average ranks with exact tie correction (ties share the mean rank). */
export function rank(xs: number[]): number[] {
  const order = xs.map((v, i) => [v, i] as const).sort((a, b) => a[0] - b[0]);
  const ranks = new Array<number>(xs.length);
  let i = 0;
  while (i < order.length) {
    let j = i;
    while (j + 1 < order.length && order[j + 1][0] === order[i][0]) j++;
    const shared = (i + j) / 2 + 1;
    for (let k = i; k <= j; k++) ranks[order[k][1]] = shared;
    i = j + 1;
  }
  return ranks;
}

/** Spearman rho: Pearson over tie-corrected ranks, same t-approximation. */
export function spearman(x: number[], y: number[]): Correlation | null {
  return pearson(rank(x), rank(y));
}

/** Solve the normal equations (X'X) b = X'y with partial pivoting. */
function olsSolve(X: number[][], y: number[]): number[] | null {
  const n = X.length;
  const p = X[0].length;
  const a: number[][] = Array.from({ length: p }, () => new Array(p).fill(0));
  const b = new Array<number>(p).fill(0);
  for (let i = 0; i < n; i++) {
    for (let j = 0; j < p; j++) {
      b[j] += X[i][j] * y[i];
      for (let k = j; k < p; k++) a[j][k] += X[i][j] * X[i][k];
    }
  }
  for (let j = 0; j < p; j++) for (let k = 0; k < j; k++) a[j][k] = a[k][j];

  for (let col = 0; col < p; col++) {
    let pivot = col;
    for (let row = col + 1; row < p; row++) {
      if (Math.abs(a[row][col]) > Math.abs(a[pivot][col])) pivot = row;
    }
    if (Math.abs(a[pivot][col]) < 1e-12) return null;
    [a[col], a[pivot]] = [a[pivot], a[col]];
    [b[col], b[pivot]] = [b[pivot], b[col]];
    for (let row = col + 1; row < p; row++) {
      const f = a[row][col] / a[col][col];
      for (let k = col; k < p; k++) a[row][k] -= f * a[col][k];
      b[row] -= f * b[col];
    }
  }
  const beta = new Array<number>(p).fill(0);
  for (let row = p - 1; row >= 0; row--) {
    let s = b[row];
    for (let k = row + 1; k < p; k++) s -= a[row][k] * beta[k];
    beta[row] = s / a[row][row];
  }
  return beta;
}

/** R-squared of least-squares y ~ 1 + columns. */
export function olsR2(columns: number[][], y: number[]): number {
  const n = y.length;
  const X = Array.from({ length: n }, (_, i) => [1, ...columns.map((c) => c[i])]);
  const beta = olsSolve(X, y);
  if (beta === null) {
    throw new Error("rank-deficient design matrix; R-squared is undefined");
  }
  const my = mean(y);
  let ssRes = 0;
  let ssTot = 0;
  for (let i = 0; i < n; i++) {
    let pred = 0;
    for (let j = 0; j < X[i].length; j++) pred += X[i][j] * beta[j];
    ssRes += (y[i] - pred) ** 2;
    ssTot += (y[i] - my) ** 2;
  }
  if (ssTot === 0) throw new Error("outcome has zero variance; R-squared is undefined");
  return 1 - ssRes / ssTot;
}

/** Partial correlation of x and y controlling for one variable m. */
export function partialCorrelation(x: number[], y: number[], m: number[]): Correlation & {
  ci95: [number, number];
} {
  const rxy = pearson(x, y);
  const rxm = pearson(x, m);
  const rym = pearson(y, m);
  if (!rxy || !rxm || !rym) {
    throw new Error("degenerate variance makes the partial correlation undefined");
  }
  const r =
    (rxy.r - rxm.r * rym.r) / Math.sqrt((1 - rxm.r ** 2) * (1 - rym.r ** 2));
  const n = x.length;
  const df = n - 3; // one controlled variable
  const t = r * Math.sqrt(df / (1 - r * r));
  const p = tTestPValue(t, df);
  const z = Math.atanh(r);
  const se = 1 / Math.sqrt(n - 1 - 3); // Fisher z with k=1 control
  const ci: [number, number] = [Math.tanh(z - 1.959963984540054 * se), Math.tanh(z + 1.959963984540054 * se)];
  return { r, p, n, ci95: ci };
}

/** Single-mediator analysis: three fits plus the partial correlation. */
export function mediationAnalysis(
  predictor: number[],
  mediator: number[],
  outcome: number[],
): MediationResult {
  const n = outcome.length;
  if (n < 4) throw new Error(`mediation needs n >= 4, got ${n}`);
  const r2Predictor = olsR2([predictor], outcome);
  const r2Mediator = olsR2([mediator], outcome);
  const r2Joint = olsR2([predictor, mediator], outcome);
  const partial = partialCorrelation(predictor, outcome, mediator);
  return {
    n,
    r2Predictor,
    r2Mediator,
    r2Joint,
    deltaR2: r2Joint - r2Mediator,
    partialR: partial.r,
    partialP: partial.p,
    partialCI95: partial.ci95,
  };
}

/** Per-feature correlation table against one outcome, ordered by |Pearson r|. */
export function correlationTable(
  rows: Record<string, number>[],
  features: string[],
  outcome: string,
): CorrelationRow[] {
  if (rows.length < 3) throw new Error(`correlation table needs n >= 3 rows, got ${rows.length}`);
  const y = rows.map((r) => r[outcome]);
  const out: CorrelationRow[] = features.map((feature) => {
    const x = rows.map((r) => r[feature]);
    return { feature, pearson: pearson(x, y), spearman: spearman(x, y) };
  });
  out.sort((a, b) => Math.abs(b.pearson?.r ?? 0) - Math.abs(a.pearson?.r ?? 0));
  return out;
}
