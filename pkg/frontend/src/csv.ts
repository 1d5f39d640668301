import { readFileSync } from "fs";

export interface Table {
  file: string;
  header: string[];
  rows: number[][];
}

/** Parse a plain comma-separated file with a header row and float fields. */
export function parseCsv(path: string): Table {
  const text = readFileSync(path, "utf-8").trim();
  const lines = text.split("\n");
  const header = lines[0].split(",").map((s) => s.trim());
  const rows: number[][] = [];
  for (let i = 1; i < lines.length; i++) {
    if (!lines[i]) continue;
    rows.push(lines[i].split(",").map(Number));
  }
  return { file: path, header, rows };
}

/** Column values by name; throws a diagnostic naming the column and file. */
export function column(table: Table, name: string): number[] {
  const idx = table.header.indexOf(name);
  if (idx < 0) {
    throw new Error(`missing column '${name}' in ${table.file} (have: ${table.header.join(", ")})`);
  }
  return table.rows.map((r) => r[idx]);
}

/** Reject tables with no data rows, naming the offending file. */
export function requireRows(table: Table): Table {
  if (table.rows.length === 0) {
    throw new Error(`empty series: ${table.file} has a header but no data rows`);
  }
  return table;
}
