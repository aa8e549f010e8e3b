/** Figure rendering from the simulator CLI's documented CSV schemas.
 *
 * Three kinds:
 *  - convergence: reconstruction trace (K, mod_A1, mod_A2, phi, se_*)
 *    with optional ground-truth horizontal rules;
 *  - density-overlay: predicted vs exact reading densities at one or more
 *    accuracies (delta_f, f, rho_exact, rho_predicted);
 *  - sweep: conditioning diagnostics vs delta_f on log axes, with a
 *    configurable choice of y columns.
 */

import { readFileSync } from "node:fs";

import { parseCsv, requireColumns, Table } from "./csv.js";
import * as svg from "./svg.js";

export type FigureKind = "convergence" | "density-overlay" | "sweep";

export interface FigureSpec {
  kind: FigureKind;
  /** CSV inputs, keyed by role ("trace", "predicted", "sweep"). */
  inputs: Record<string, string>;
  output: string;
  title?: string;
  /** convergence only: exact values drawn as horizontal rules. */
  truth?: { mod_A1?: number; mod_A2?: number; phi?: number };
  /** sweep only: which columns to plot (default abs_det + recon_error). */
  columns?: string[];
}

export function validateSpec(raw: unknown): FigureSpec {
  const spec = raw as Partial<FigureSpec>;
  if (
    spec.kind !== "convergence" &&
    spec.kind !== "density-overlay" &&
    spec.kind !== "sweep"
  ) {
    throw new Error(`figure kind must be convergence, density-overlay or sweep, got ${String(spec.kind)}`);
  }
  if (typeof spec.inputs !== "object" || spec.inputs === null) {
    throw new Error("spec.inputs must map roles to CSV paths");
  }
  if (typeof spec.output !== "string" || spec.output.length === 0) {
    throw new Error("spec.output must be a file path");
  }
  return spec as FigureSpec;
}

function loadTable(spec: FigureSpec, role: string): Table {
  const path = spec.inputs[role];
  if (path === undefined) {
    throw new Error(`spec.inputs is missing the '${role}' CSV`);
  }
  return parseCsv(readFileSync(path, "utf8"), path);
}

function finiteExtent(values: number[]): [number, number] {
  let lo = Infinity;
  let hi = -Infinity;
  for (const v of values) {
    if (Number.isFinite(v)) {
      lo = Math.min(lo, v);
      hi = Math.max(hi, v);
    }
  }
  return [lo, hi];
}

const plotArea = () => ({
  x0: svg.MARGIN.left,
  x1: svg.WIDTH - svg.MARGIN.right,
  y0: svg.HEIGHT - svg.MARGIN.bottom,
  y1: svg.MARGIN.top,
});

function renderConvergence(spec: FigureSpec): string {
  const table = loadTable(spec, "trace");
  const [k, m1, m2, phi] = requireColumns(table, ["K", "mod_A1", "mod_A2", "phi"]);
  const { x0, x1, y0, y1 } = plotArea();
  const [kLo, kHi] = finiteExtent(k);
  const all = [...m1, ...m2, ...phi].filter(Number.isFinite);
  if (spec.truth) {
    for (const v of Object.values(spec.truth)) {
      if (v !== undefined) all.push(v);
    }
  }
  const [vLo, vHi] = finiteExtent(all);
  const pad = 0.1 * (vHi - vLo || 1);
  const sx = svg.logScale(kLo, kHi, x0, x1);
  const sy = svg.linearScale(vLo - pad, vHi + pad, y0, y1);
  const body = [
    svg.frame(spec.title ?? "amplitude reconstruction vs trials", "K (log)", "recovered value"),
    svg.polyline(k, m1, sx, sy, svg.PALETTE[0]),
    svg.polyline(k, m2, sx, sy, svg.PALETTE[1]),
    svg.polyline(k, phi, sx, sy, svg.PALETTE[2]),
    svg.legend([
      ["|A1|", svg.PALETTE[0], false],
      ["|A2|", svg.PALETTE[1], false],
      ["phi", svg.PALETTE[2], false],
    ]),
  ];
  if (spec.truth) {
    const rules: Array<[number | undefined, string]> = [
      [spec.truth.mod_A1, svg.PALETTE[0]],
      [spec.truth.mod_A2, svg.PALETTE[1]],
      [spec.truth.phi, svg.PALETTE[2]],
    ];
    for (const [v, color] of rules) {
      if (v !== undefined) body.push(svg.horizontalRule(v, sy, color));
    }
  }
  return svg.document(body);
}

function renderDensityOverlay(spec: FigureSpec): string {
  const table = loadTable(spec, "predicted");
  const [df, f, exact, predicted] = requireColumns(table, [
    "delta_f",
    "f",
    "rho_exact",
    "rho_predicted",
  ]);
  const { x0, x1, y0, y1 } = plotArea();
  const [fLo, fHi] = finiteExtent(f);
  const [, rHi] = finiteExtent([...exact, ...predicted]);
  const sx = svg.linearScale(fLo, fHi, x0, x1);
  const sy = svg.linearScale(0, 1.1 * (rHi || 1), y0, y1);
  const groups = [...new Set(df)];
  const body = [
    svg.frame(spec.title ?? "predicted vs exact reading densities", "f", "rho(f)"),
  ];
  const entries: Array<[string, string, boolean]> = [];
  groups.forEach((g, i) => {
    const color = svg.PALETTE[i % svg.PALETTE.length];
    const idx = df.map((v, j) => (v === g ? j : -1)).filter((j) => j >= 0);
    const fx = idx.map((j) => f[j]);
    body.push(svg.polyline(fx, idx.map((j) => exact[j]), sx, sy, color, true));
    body.push(svg.polyline(fx, idx.map((j) => predicted[j]), sx, sy, color, false));
    entries.push([`df=${g} predicted`, color, false]);
    entries.push([`df=${g} exact`, color, true]);
  });
  body.push(svg.legend(entries));
  return svg.document(body);
}

function renderSweep(spec: FigureSpec): string {
  const table = loadTable(spec, "sweep");
  const wanted = spec.columns ?? ["abs_det", "recon_error"];
  const [df, ...series] = requireColumns(table, ["delta_f", ...wanted]);
  const { x0, x1, y0, y1 } = plotArea();
  const [dLo, dHi] = finiteExtent(df);
  const positive = series.flat().filter((v) => Number.isFinite(v) && v > 0);
  const [vLo, vHi] = finiteExtent(positive);
  const sx = svg.logScale(dLo, dHi, x0, x1);
  const sy = svg.logScale(vLo, vHi, y0, y1);
  const body = [
    svg.frame(spec.title ?? "conditioning sweep", "delta_f (log)", "value (log)"),
  ];
  const entries: Array<[string, string, boolean]> = [];
  wanted.forEach((name, i) => {
    const color = svg.PALETTE[i % svg.PALETTE.length];
    body.push(svg.polyline(df, series[i], sx, sy, color));
    entries.push([name, color, false]);
  });
  body.push(svg.legend(entries));
  return svg.document(body);
}

export function renderToString(spec: FigureSpec): string {
  switch (spec.kind) {
    case "convergence":
      return renderConvergence(spec);
    case "density-overlay":
      return renderDensityOverlay(spec);
    case "sweep":
      return renderSweep(spec);
  }
}
