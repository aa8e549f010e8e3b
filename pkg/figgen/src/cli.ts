#!/usr/bin/env node
/** figgen <spec.json> [...more specs]
 *
 * Each spec JSON names a figure kind, its input CSVs and the SVG output path;
 * relative paths in a spec resolve against the spec file's directory.
 */

import { mkdirSync, readFileSync, writeFileSync } from "node:fs";
import { dirname, resolve } from "node:path";

import { FigureSpec, renderToString, validateSpec } from "./render.js";

function resolveSpecPaths(spec: FigureSpec, base: string): FigureSpec {
  const inputs: Record<string, string> = {};
  for (const [role, path] of Object.entries(spec.inputs)) {
    inputs[role] = resolve(base, path);
  }
  return { ...spec, inputs, output: resolve(base, spec.output) };
}

export function runSpecFile(specPath: string): string {
  const raw = JSON.parse(readFileSync(specPath, "utf8"));
  const spec = resolveSpecPaths(validateSpec(raw), dirname(resolve(specPath)));
  mkdirSync(dirname(spec.output), { recursive: true });
  writeFileSync(spec.output, renderToString(spec), "utf8");
  return spec.output;
}

export function main(argv: string[]): number {
  if (argv.length === 0) {
    process.stderr.write("usage: figgen <spec.json> [...more specs]\n");
    return 2;
  }
  for (const specPath of argv) {
    try {
      const out = runSpecFile(specPath);
      process.stdout.write(`${out}\n`);
    } catch (err) {
      process.stderr.write(`figgen: ${specPath}: ${(err as Error).message}\n`);
      return 1;
    }
  }
  return 0;
}

if (process.argv[1] && resolve(process.argv[1]) === resolve(new URL(import.meta.url).pathname)) {
  process.exit(main(process.argv.slice(2)));
}
