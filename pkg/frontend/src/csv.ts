import * as fs from "fs";
import * as path from "path";
import Papa from "papaparse";

/** A parsed CSV artifact: column-name -> numeric column. */
export interface Table {
  file: string;
  columns: Record<string, number[]>;
  rowCount: number;
}

export class InputError extends Error {}

/**
 * Load one of the producer CLI's CSV artifacts.
 *
 * `producedBy` names the command that writes this file so error messages
 * tell the user exactly what to re-run.
 */
export function loadCsv(dir: string, file: string, producedBy: string): Table {
  const full = path.join(dir, file);
  if (!fs.existsSync(full)) {
    throw new InputError(
      `missing input ${file}: run '${producedBy}' to produce it`
    );
  }
  const text = fs.readFileSync(full, "utf-8");
  const parsed = Papa.parse<Record<string, number>>(text.trim(), {
    header: true,
    dynamicTyping: true,
    skipEmptyLines: true,
  });
  if (parsed.errors.length > 0) {
    throw new InputError(`${file}: ${parsed.errors[0].message}`);
  }
  const rows = parsed.data;
  if (rows.length === 0) {
    throw new InputError(
      `${file} is empty: re-run '${producedBy}' with a nonempty grid`
    );
  }
  const columns: Record<string, number[]> = {};
  for (const name of parsed.meta.fields ?? []) {
    columns[name] = rows.map((r) => r[name]);
  }
  return { file, columns, rowCount: rows.length };
}

/** Fetch a column, naming the producing command when it is absent. */
export function column(t: Table, name: string, producedBy: string): number[] {
  const col = t.columns[name];
  if (col === undefined) {
    throw new InputError(
      `${t.file} is missing column '${name}' (produced by '${producedBy}'; ` +
        `available: ${Object.keys(t.columns).join(", ")})`
    );
  }
  return col;
}

export function hasColumn(t: Table, name: string): boolean {
  return t.columns[name] !== undefined;
}

/** Load a JSON artifact (run manifest or summary) if present. */
export function loadJson(dir: string, file: string): any | undefined {
  const full = path.join(dir, file);
  if (!fs.existsSync(full)) return undefined;
  return JSON.parse(fs.readFileSync(full, "utf-8"));
}

/** Parameter echo from the CSV's run manifest, for legend labels. */
export function manifestParams(dir: string, csvFile: string): any {
  const manifest = loadJson(dir, csvFile.replace(/\.csv$/, ".manifest.json"));
  return manifest?.params ?? {};
}
