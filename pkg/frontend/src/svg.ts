/**
 * Minimal deterministic SVG assembly: fixed canvas, no timestamps, no
 * randomness, so identical inputs give byte-identical files.
 */

export function esc(s: string): string {
  return s.replace(/&/g, "&amp;").replace(/</g, "&lt;").replace(/>/g, "&gt;");
}

export function fmt(v: number): string {
  // fixed short form keeps output stable across runs
  return Number.isInteger(v) ? String(v) : v.toPrecision(6).replace(/\.?0+$/, "");
}

export interface Scale {
  (v: number): number;
  domain: [number, number];
}

export function linearScale(d0: number, d1: number, r0: number, r1: number): Scale {
  const span = d1 - d0 || 1;
  const f = ((v: number) => r0 + ((v - d0) / span) * (r1 - r0)) as Scale;
  f.domain = [d0, d1];
  return f;
}

export function niceTicks(min: number, max: number, count: number): number[] {
  const range = max - min || 1;
  const rough = range / count;
  const mag = Math.pow(10, Math.floor(Math.log10(rough)));
  const step = [1, 2, 5, 10].map((m) => m * mag).find((n) => n >= rough) ?? rough;
  const ticks: number[] = [];
  for (let v = Math.ceil(min / step) * step; v <= max + step * 0.01; v += step) {
    ticks.push(Number(v.toPrecision(10)));
  }
  return ticks;
}

export class Svg {
  private parts: string[] = [];

  constructor(readonly width: number, readonly height: number) {
    this.parts.push(
      `<svg xmlns="http://www.w3.org/2000/svg" width="${width}" height="${height}" ` +
        `viewBox="0 0 ${width} ${height}" font-family="Helvetica, Arial, sans-serif">`
    );
    this.parts.push(`<rect width="${width}" height="${height}" fill="white"/>`);
  }

  raw(fragment: string): void {
    this.parts.push(fragment);
  }

  rect(x: number, y: number, w: number, h: number, fill: string, extra = ""): void {
    this.parts.push(
      `<rect x="${fmt(x)}" y="${fmt(y)}" width="${fmt(w)}" height="${fmt(h)}" fill="${fill}"${extra}/>`
    );
  }

  line(x1: number, y1: number, x2: number, y2: number, stroke: string,
       width = 1, dash = "", extra = ""): void {
    const d = dash ? ` stroke-dasharray="${dash}"` : "";
    this.parts.push(
      `<line x1="${fmt(x1)}" y1="${fmt(y1)}" x2="${fmt(x2)}" y2="${fmt(y2)}" ` +
        `stroke="${stroke}" stroke-width="${width}"${d}${extra}/>`
    );
  }

  path(points: Array<[number, number]>, stroke: string, width = 1.2): void {
    if (points.length === 0) return;
    const d = points
      .map(([x, y], i) => `${i === 0 ? "M" : "L"}${fmt(x)},${fmt(y)}`)
      .join(" ");
    this.parts.push(`<path d="${d}" fill="none" stroke="${stroke}" stroke-width="${width}"/>`);
  }

  text(x: number, y: number, content: string, size = 11, anchor = "start",
       fill = "#222", extra = ""): void {
    this.parts.push(
      `<text x="${fmt(x)}" y="${fmt(y)}" font-size="${size}" text-anchor="${anchor}" ` +
        `fill="${fill}"${extra}>${esc(content)}</text>`
    );
  }

  toString(): string {
    return this.parts.join("\n") + "\n</svg>\n";
  }
}

/** Perceptually ordered ramps; picked per figure in the spec file. */
export const COLOR_SCALES: Record<string, (t: number) => string> = {
  viridis: (t) => rampHex(t, ["#440154", "#414487", "#2a788e", "#22a884", "#7ad151", "#fde725"]),
  heat: (t) => rampHex(t, ["#ffffcc", "#fd8d3c", "#bd0026"]),
  blues: (t) => rampHex(t, ["#f7fbff", "#6baed6", "#08306b"]),
};

function rampHex(t: number, stops: string[]): string {
  const clamped = Math.min(1, Math.max(0, t));
  const pos = clamped * (stops.length - 1);
  const i = Math.min(stops.length - 2, Math.floor(pos));
  const frac = pos - i;
  const a = hex(stops[i]);
  const b = hex(stops[i + 1]);
  const mix = a.map((c, k) => Math.round(c + (b[k] - c) * frac));
  return `#${mix.map((c) => c.toString(16).padStart(2, "0")).join("")}`;
}

function hex(color: string): number[] {
  return [1, 3, 5].map((i) => parseInt(color.slice(i, i + 2), 16));
}

export const STRATEGY_COLORS: Record<string, string> = {
  "RA": "#1f77b4",
  "1A": "#2ca02c",
  "1+": "#98df8a",
  "R+": "#17becf",
  "0+": "#bcbd22",
  "R-": "#d62728",
  "1-": "#ff9896",
  "0A": "#7f7f7f",
  "0-": "#333333",
};
