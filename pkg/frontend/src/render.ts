/**
 * Four figure kinds over the harness's CSVs:
 *
 *   heatmap          <- sweep CSV        cooperation over the b x c_a grid,
 *                                        with the b-1=c_a reference diagonal
 *   timeseries       <- timeseries or    strategy frequencies over turns,
 *                       trajectory CSV   one panel per benefit value
 *   fixation-matrix  <- fixation CSV     annotated invader x resident grids
 *   reputation-hist  <- reputation CSV   binned mean reputations per strategy
 *                                        with markers at eps, 1-eps, 0 and 1
 *
 * The renderer only bins and averages; every scientific number comes from the
 * CSVs themselves.  Output is deterministic for identical inputs.
 */

import { readFileSync, writeFileSync, mkdirSync } from "fs";
import * as path from "path";

import { Table, columnIndex, numbers, readCsv } from "./csv";
import { COLOR_SCALES, STRATEGY_COLORS, Svg, fmt, linearScale, niceTicks } from "./svg";

export type FigureKind = "heatmap" | "timeseries" | "fixation-matrix" | "reputation-hist";

export interface FigureSpec {
  kind: FigureKind;
  input: string | string[];
  output: string;
  /** perception error for histogram prediction markers */
  epsilon?: number;
  /** regime label echoed into the figure subtitle */
  regime?: string;
  /** histogram bin count; fixed in the spec so figures stay comparable */
  bins?: number;
  /** one of the named ramps in COLOR_SCALES */
  colorScale?: string;
  title?: string;
}

const EXPECTED_SCHEMA: Record<FigureKind, string[]> = {
  "heatmap": ["sweep"],
  "timeseries": ["timeseries", "trajectory"],
  "fixation-matrix": ["fixation"],
  "reputation-hist": ["reputation"],
};

export function loadSpec(specPath: string): FigureSpec {
  const raw = JSON.parse(readFileSync(specPath, "utf-8"));
  if (!raw || typeof raw !== "object") {
    throw new Error(`${specPath}: figure spec must be a JSON object`);
  }
  const kind = raw.kind as FigureKind;
  if (!(kind in EXPECTED_SCHEMA)) {
    throw new Error(`${specPath}: unknown figure kind '${raw.kind}'`);
  }
  if (!raw.input || !raw.output) {
    throw new Error(`${specPath}: spec needs 'input' and 'output' paths`);
  }
  const dir = path.dirname(specPath);
  const resolve = (p: string) => (path.isAbsolute(p) ? p : path.join(dir, p));
  return {
    ...raw,
    kind,
    input: Array.isArray(raw.input) ? raw.input.map(resolve) : resolve(raw.input),
    output: resolve(raw.output),
  };
}

export function render(spec: FigureSpec): string {
  const inputs = Array.isArray(spec.input) ? spec.input : [spec.input];
  const tables = inputs.map((p) => readCsv(p));
  for (const t of tables) {
    if (!EXPECTED_SCHEMA[spec.kind].includes(t.schema)) {
      throw new Error(
        `figure kind '${spec.kind}' expects ${EXPECTED_SCHEMA[spec.kind].join("/")} ` +
          `CSV data, got schema '${t.schema}'`
      );
    }
  }
  let svg: string;
  switch (spec.kind) {
    case "heatmap":
      svg = renderHeatmap(tables[0], spec);
      break;
    case "timeseries":
      svg = renderTimeseries(tables[0], spec);
      break;
    case "fixation-matrix":
      svg = renderFixationMatrix(tables[0], spec);
      break;
    case "reputation-hist":
      svg = renderReputationHist(tables[0], spec);
      break;
  }
  mkdirSync(path.dirname(spec.output), { recursive: true });
  writeFileSync(spec.output, svg);
  return spec.output;
}

// ---------------------------------------------------------------------------
// heatmap (cooperation over b x c_a)
// ---------------------------------------------------------------------------

function renderHeatmap(table: Table, spec: FigureSpec): string {
  const bs = uniqueSorted(numbers(table, "b"));
  const cas = uniqueSorted(numbers(table, "c_a"));
  const ib = columnIndex(table, "b");
  const ica = columnIndex(table, "c_a");
  const icoop = columnIndex(table, "mean_cooperation");
  const value = new Map<string, number>();
  for (const row of table.rows) {
    value.set(`${Number(row[ib])}|${Number(row[ica])}`, Number(row[icoop]));
  }
  const ramp = COLOR_SCALES[spec.colorScale ?? "viridis"];
  if (!ramp) throw new Error(`unknown color scale '${spec.colorScale}'`);

  const M = { l: 60, r: 90, t: 40, b: 50 };
  const cell = 44;
  const W = M.l + cell * bs.length + M.r;
  const H = M.t + cell * cas.length + M.b;
  const svg = new Svg(W, H);
  svg.text(M.l, 22, spec.title ?? "Cooperation frequency", 14, "start", "#111");

  // cell centers in data coordinates; c_a grows downward-to-upward
  const xOf = (b: number) => M.l + (bs.indexOf(b) + 0.5) * cell;
  const yOf = (ca: number) => M.t + (cas.length - cas.indexOf(ca) - 0.5) * cell;
  for (const b of bs) {
    for (const ca of cas) {
      const v = value.get(`${b}|${ca}`);
      if (v === undefined) continue;
      svg.rect(xOf(b) - cell / 2, yOf(ca) - cell / 2, cell, cell, ramp(v));
      svg.text(xOf(b), yOf(ca) + 4, v.toFixed(2), 10, "middle",
               v > 0.55 ? "#111" : "#eee");
    }
    svg.text(xOf(b), M.t + cell * cas.length + 16, String(b), 11, "middle");
  }
  for (const ca of cas) {
    svg.text(M.l - 8, yOf(ca) + 4, String(ca), 11, "end");
  }
  svg.text(M.l + (cell * bs.length) / 2, H - 14, "benefit b", 12, "middle");
  svg.text(14, M.t + (cell * cas.length) / 2, "arrangement cost c_a", 12, "middle",
           "#222", ` transform="rotate(-90 14 ${fmt(M.t + (cell * cas.length) / 2)})"`);

  // reference diagonal b - 1 = c_a, drawn through data space
  const bAt = (ca: number) => ca + 1;
  const spanB = bs[bs.length - 1] - bs[0] || 1;
  const spanC = cas[cas.length - 1] - cas[0] || 1;
  const px = (b: number) => M.l + ((b - bs[0]) / spanB) * (cell * (bs.length - 1)) + cell / 2;
  const py = (ca: number) =>
    M.t + (1 - (ca - cas[0]) / spanC) * (cell * (cas.length - 1)) + cell / 2;
  svg.line(px(bAt(cas[0])), py(cas[0]), px(bAt(cas[cas.length - 1])),
           py(cas[cas.length - 1]), "white", 2.5, "", ` class="refline"`);

  // color bar
  const barX = M.l + cell * bs.length + 24;
  for (let i = 0; i < 50; i++) {
    const t = i / 49;
    svg.rect(barX, M.t + (1 - t) * cell * cas.length - 2, 14,
             (cell * cas.length) / 50 + 2, ramp(t));
  }
  svg.text(barX + 20, M.t + 8, "1.0", 10);
  svg.text(barX + 20, M.t + cell * cas.length, "0.0", 10);
  return svg.toString();
}

// ---------------------------------------------------------------------------
// timeseries (strategy frequencies over turns, one panel per benefit)
// ---------------------------------------------------------------------------

function renderTimeseries(table: Table, spec: FigureSpec): string {
  const freqCols = table.columns.filter((c) => c.startsWith("f_") || c.startsWith("n_"));
  if (freqCols.length === 0) {
    throw new Error("timeseries CSV has no f_*/n_* strategy columns");
  }
  const counted = freqCols[0].startsWith("n_");
  const ib = columnIndex(table, "b");
  const iturn = columnIndex(table, "turn");
  const iseed = table.columns.indexOf("seed");
  const bs = uniqueSorted(numbers(table, "b"));

  const panelW = 300;
  const panelH = 190;
  const M = { l: 54, r: 16, t: 46, b: 42 };
  const W = M.l + bs.length * (panelW + 24) + M.r;
  const H = M.t + panelH + M.b + 14;
  const svg = new Svg(W, H);
  svg.text(M.l, 22, spec.title ?? "Strategy frequencies over time", 14);

  bs.forEach((b, pi) => {
    const x0 = M.l + pi * (panelW + 24);
    const rows = table.rows.filter((r) => Number(r[ib]) === b);
    // single-run trajectory CSVs may hold several seeds; plot the first
    const seed = iseed >= 0 ? rows[0][iseed] : null;
    const panelRows = seed === null ? rows
      : rows.filter((r) => r[iseed] === seed);
    const turns = panelRows.map((r) => Number(r[iturn]));
    const tx = linearScale(Math.min(...turns), Math.max(...turns), x0, x0 + panelW);
    const ty = linearScale(0, 1, M.t + panelH, M.t);
    svg.rect(x0, M.t, panelW, panelH, "none", ` stroke="#999"`);
    svg.text(x0 + panelW / 2, M.t - 8, `b = ${b}`, 12, "middle");
    const total = counted
      ? freqCols.reduce((acc, c) => acc + Number(panelRows[0][columnIndex(table, c)]), 0)
      : 1;
    for (const colName of freqCols) {
      const ci = columnIndex(table, colName);
      const strategy = colName.slice(2);
      const pts: Array<[number, number]> = panelRows.map((r) => [
        tx(Number(r[iturn])),
        ty(Number(r[ci]) / total),
      ]);
      svg.path(pts, STRATEGY_COLORS[strategy] ?? "#888", 1.4);
    }
    for (const tick of [0, 0.5, 1]) {
      svg.line(x0 - 3, ty(tick), x0, ty(tick), "#555");
      if (pi === 0) svg.text(x0 - 6, ty(tick) + 4, tick.toFixed(1), 10, "end");
    }
    svg.text(x0 + panelW / 2, M.t + panelH + 16, "turn", 11, "middle");
  });

  // legend
  let lx = M.l;
  const ly = H - 10;
  for (const [name, color] of Object.entries(STRATEGY_COLORS)) {
    svg.line(lx, ly - 4, lx + 14, ly - 4, color, 2.5);
    svg.text(lx + 18, ly, name, 10);
    lx += 56;
  }
  return svg.toString();
}

// ---------------------------------------------------------------------------
// fixation matrix (invader x resident, annotated)
// ---------------------------------------------------------------------------

const MATRIX_ORDER = ["1-", "R-", "0-", "1A", "RA", "0A", "1+", "R+", "0+"];

function renderFixationMatrix(table: Table, spec: FigureSpec): string {
  const ib = columnIndex(table, "b");
  const iinv = columnIndex(table, "invader");
  const ires = columnIndex(table, "resident");
  const irho = columnIndex(table, "rho");
  const bs = uniqueSorted(numbers(table, "b"));
  const ramp = COLOR_SCALES[spec.colorScale ?? "blues"];
  if (!ramp) throw new Error(`unknown color scale '${spec.colorScale}'`);

  const cell = 34;
  const grid = cell * MATRIX_ORDER.length;
  const M = { l: 70, r: 20, t: 58, b: 26 };
  const W = M.l + bs.length * (grid + 46) + M.r;
  const H = M.t + grid + M.b;
  const svg = new Svg(W, H);
  svg.text(M.l, 22, spec.title ?? "Fixation probability of invader vs resident (%)", 14);

  bs.forEach((b, pi) => {
    const x0 = M.l + pi * (grid + 46);
    svg.text(x0 + grid / 2, M.t - 26, `b = ${b}`, 12, "middle");
    const rho = new Map<string, number>();
    for (const row of table.rows) {
      if (Number(row[ib]) !== b) continue;
      rho.set(`${row[iinv]}|${row[ires]}`, Number(row[irho]));
    }
    MATRIX_ORDER.forEach((res, j) => {
      svg.text(x0 + (j + 0.5) * cell, M.t - 6, res, 9, "middle");
    });
    MATRIX_ORDER.forEach((inv, i) => {
      if (pi === 0) svg.text(x0 - 8, M.t + (i + 0.7) * cell, inv, 9, "end");
      MATRIX_ORDER.forEach((res, j) => {
        const x = x0 + j * cell;
        const y = M.t + i * cell;
        if (inv === res) {
          svg.rect(x, y, cell - 1, cell - 1, "#eee");
          return;
        }
        const v = rho.get(`${inv}|${res}`);
        if (v === undefined) return;
        svg.rect(x, y, cell - 1, cell - 1, ramp(v));
        svg.text(x + cell / 2, y + cell / 2 + 3, (100 * v).toFixed(v >= 0.1 ? 0 : 1),
                 8, "middle", v > 0.5 ? "#fff" : "#123");
      });
    });
  });
  svg.text(M.l, H - 8, "rows: invader, columns: resident; grey diagonal undefined", 10);
  return svg.toString();
}

// ---------------------------------------------------------------------------
// reputation histograms with prediction markers
// ---------------------------------------------------------------------------

const JUDGED = ["1-", "R-", "1A", "RA", "1+", "R+"];

function renderReputationHist(table: Table, spec: FigureSpec): string {
  const bins = spec.bins ?? 20;
  if (bins < 2) throw new Error("reputation-hist needs at least 2 bins");
  const eps = spec.epsilon;
  if (eps === undefined) {
    throw new Error("reputation-hist needs 'epsilon' in the figure spec for markers");
  }
  const istrat = columnIndex(table, "strategy");
  const imean = columnIndex(table, "mean_reputation");
  const strategies = JUDGED.filter((s) => table.rows.some((r) => r[istrat] === s));
  if (strategies.length === 0) {
    throw new Error("reputation CSV holds no judged strategies");
  }

  const panelW = 240;
  const panelH = 130;
  const perRow = 3;
  const rowsOfPanels = Math.ceil(strategies.length / perRow);
  const M = { l: 50, r: 20, t: 50, b: 30 };
  const W = M.l + perRow * (panelW + 30) + M.r;
  const H = M.t + rowsOfPanels * (panelH + 44) + M.b;
  const svg = new Svg(W, H);
  svg.text(M.l, 22,
           spec.title ?? `Simulated mean reputations (eps = ${eps}${spec.regime ? ", " + spec.regime : ""})`,
           14);

  strategies.forEach((strategy, si) => {
    const x0 = M.l + (si % perRow) * (panelW + 30);
    const y0 = M.t + Math.floor(si / perRow) * (panelH + 44);
    const values = table.rows
      .filter((r) => r[istrat] === strategy)
      .map((r) => Number(r[imean]))
      .filter((v) => Number.isFinite(v));
    const counts = new Array(bins).fill(0);
    for (const v of values) {
      const k = Math.min(bins - 1, Math.max(0, Math.floor(v * bins)));
      counts[k] += 1;
    }
    const peak = Math.max(...counts, 1);
    const tx = linearScale(0, 1, x0, x0 + panelW);
    const ty = linearScale(0, peak, y0 + panelH, y0);
    svg.rect(x0, y0, panelW, panelH, "none", ` stroke="#999"`);
    svg.text(x0 + 6, y0 + 14, `${strategy}  (n=${values.length})`, 11, "start",
             STRATEGY_COLORS[strategy] ?? "#333");
    counts.forEach((c, k) => {
      if (c === 0) return;
      const bx = tx(k / bins);
      svg.rect(bx, ty(c), panelW / bins - 1, y0 + panelH - ty(c),
               STRATEGY_COLORS[strategy] ?? "#888");
    });
    // prediction markers: the two error-driven levels plus the absorbing ends
    for (const m of [0, eps, 1 - eps, 1]) {
      svg.line(tx(m), y0, tx(m), y0 + panelH, "#e6399b", 1.2, "4,3",
               ` class="marker" data-at="${fmt(m)}"`);
    }
    for (const tick of [0, 0.5, 1]) {
      svg.text(tx(tick), y0 + panelH + 14, tick.toFixed(1), 9, "middle");
    }
  });
  return svg.toString();
}

// ---------------------------------------------------------------------------

function uniqueSorted(values: number[]): number[] {
  return [...new Set(values)].sort((a, b) => a - b);
}
