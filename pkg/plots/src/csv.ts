import { readFileSync } from "node:fs";

export interface Table {
  header: string[];
  rows: string[][];
}

export function parseCsv(text: string): Table {
  const lines = text.split(/\r?\n/).filter((l) => l.length > 0);
  if (lines.length === 0) throw new Error("file is empty");
  const header = lines[0].split(",").map((s) => s.trim());
  const rows: string[][] = [];
  for (let i = 1; i < lines.length; i++) {
    const cells = lines[i].split(",");
    if (cells.length !== header.length) {
      throw new Error(`row ${i} has ${cells.length} fields, expected ${header.length}`);
    }
    rows.push(cells);
  }
  return { header, rows };
}

export function readTable(path: string): Table {
  return parseCsv(readFileSync(path, "utf8"));
}

/** Fails naming the first absent column, per the renderer's schema contract. */
export function requireColumns(t: Table, cols: string[], kind: string): void {
  for (const c of cols) {
    if (!t.header.includes(c)) {
      throw new Error(`${kind} input is missing column '${c}'`);
    }
  }
}

export function column(t: Table, name: string): number[] {
  const k = t.header.indexOf(name);
  if (k < 0) throw new Error(`no column '${name}'`);
  return t.rows.map((r, i) => {
    const v = Number(r[k]);
    if (Number.isNaN(v)) throw new Error(`column '${name}' row ${i + 1} is not numeric`);
    return v;
  });
}
