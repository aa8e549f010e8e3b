/** Deterministic SVG scene assembly: fixed canvas, fixed styling, numbers
 * formatted with fixed precision so identical inputs give identical bytes. */

export const WIDTH = 720;
export const HEIGHT = 480;
export const MARGIN = { top: 40, right: 30, bottom: 50, left: 70 };

export type Scale = (v: number) => number;

export function linearScale(lo: number, hi: number, outLo: number, outHi: number): Scale {
  const span = hi - lo || 1;
  return (v) => outLo + ((v - lo) / span) * (outHi - outLo);
}

export function logScale(lo: number, hi: number, outLo: number, outHi: number): Scale {
  const llo = Math.log10(lo);
  const span = Math.log10(hi) - llo || 1;
  return (v) => outLo + ((Math.log10(v) - llo) / span) * (outHi - outLo);
}

const fmt = (v: number): string => v.toFixed(2);

export function polyline(
  xs: number[],
  ys: number[],
  sx: Scale,
  sy: Scale,
  stroke: string,
  dashed = false,
): string {
  const pts: string[] = [];
  for (let i = 0; i < xs.length; i++) {
    const x = sx(xs[i]);
    const y = sy(ys[i]);
    if (Number.isFinite(x) && Number.isFinite(y)) {
      pts.push(`${fmt(x)},${fmt(y)}`);
    }
  }
  const dash = dashed ? ' stroke-dasharray="6,4"' : "";
  return `<polyline fill="none" stroke="${stroke}" stroke-width="1.5"${dash} points="${pts.join(" ")}"/>`;
}

export function horizontalRule(y: number, sy: Scale, stroke: string): string {
  const yy = fmt(sy(y));
  return `<line x1="${MARGIN.left}" y1="${yy}" x2="${WIDTH - MARGIN.right}" y2="${yy}" stroke="${stroke}" stroke-width="1" stroke-dasharray="2,3"/>`;
}

export function text(x: number, y: number, content: string, anchor = "start"): string {
  return `<text x="${fmt(x)}" y="${fmt(y)}" font-family="sans-serif" font-size="12" text-anchor="${anchor}">${content}</text>`;
}

export function frame(title: string, xLabel: string, yLabel: string): string {
  const x0 = MARGIN.left;
  const x1 = WIDTH - MARGIN.right;
  const y0 = HEIGHT - MARGIN.bottom;
  const y1 = MARGIN.top;
  return [
    `<rect x="${x0}" y="${y1}" width="${x1 - x0}" height="${y0 - y1}" fill="none" stroke="#333" stroke-width="1"/>`,
    text((x0 + x1) / 2, y1 - 14, title, "middle"),
    text((x0 + x1) / 2, y0 + 36, xLabel, "middle"),
    `<text x="18" y="${fmt((y0 + y1) / 2)}" font-family="sans-serif" font-size="12" text-anchor="middle" transform="rotate(-90 18 ${fmt((y0 + y1) / 2)})">${yLabel}</text>`,
  ].join("\n");
}

export function legend(entries: Array<[string, string, boolean]>): string {
  const parts: string[] = [];
  let y = MARGIN.top + 16;
  for (const [label, color, dashed] of entries) {
    const dash = dashed ? ' stroke-dasharray="6,4"' : "";
    const x = WIDTH - MARGIN.right - 150;
    parts.push(
      `<line x1="${x}" y1="${y - 4}" x2="${x + 26}" y2="${y - 4}" stroke="${color}" stroke-width="1.5"${dash}/>`,
      text(x + 32, y, label),
    );
    y += 16;
  }
  return parts.join("\n");
}

export function document(body: string[]): string {
  return [
    `<svg xmlns="http://www.w3.org/2000/svg" width="${WIDTH}" height="${HEIGHT}" viewBox="0 0 ${WIDTH} ${HEIGHT}">`,
    `<rect width="${WIDTH}" height="${HEIGHT}" fill="white"/>`,
    ...body,
    "</svg>",
    "",
  ].join("\n");
}

export const PALETTE = ["#1f6fb4", "#d9552a", "#3a8f3d", "#7b4fa6", "#b3871f"];
