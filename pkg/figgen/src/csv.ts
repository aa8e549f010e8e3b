/** Minimal CSV reader for the simulator's tidy outputs (no quoting needed). */

export class MissingColumnError extends Error {
  readonly column: string;

  constructor(column: string, path: string) {
    super(`missing required column '${column}' in ${path}`);
    this.column = column;
  }
}

export interface Table {
  readonly path: string;
  readonly header: string[];
  readonly columns: Map<string, number[]>;
  readonly rows: number;
}

export function parseCsv(text: string, path: string): Table {
  const lines = text.split(/\r?\n/).filter((l) => l.trim().length > 0);
  if (lines.length === 0) {
    return { path, header: [], columns: new Map(), rows: 0 };
  }
  const header = lines[0].split(",").map((h) => h.trim());
  const columns = new Map<string, number[]>(header.map((h) => [h, []]));
  for (const line of lines.slice(1)) {
    const cells = line.split(",");
    header.forEach((h, i) => {
      columns.get(h)!.push(Number(cells[i]));
    });
  }
  return { path, header, columns, rows: lines.length - 1 };
}

/** Return the named columns, throwing a named error for any that is absent. */
export function requireColumns(table: Table, names: string[]): number[][] {
  return names.map((name) => {
    const col = table.columns.get(name);
    if (col === undefined) {
      throw new MissingColumnError(name, table.path);
    }
    return col;
  });
}
