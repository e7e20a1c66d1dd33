import { readFileSync } from "fs";
import Papa from "papaparse";

export type Row = Record<string, string>;

/** Parse a CSV file with a header row into string records. */
export function readCsv(path: string): Row[] {
  const text = readFileSync(path, "utf8");
  const parsed = Papa.parse<Row>(text.trim(), { header: true, skipEmptyLines: true });
  if (parsed.errors.length > 0) {
    const first = parsed.errors[0];
    throw new Error(`failed to parse ${path}: ${first.message} (row ${first.row})`);
  }
  return parsed.data;
}

/** Fail with the available column names when a required one is missing. */
export function requireColumns(rows: Row[], columns: string[], path: string): void {
  if (rows.length === 0) {
    throw new Error(`${path} has no data rows`);
  }
  const present = Object.keys(rows[0]);
  const missing = columns.filter((c) => !present.includes(c));
  if (missing.length > 0) {
    throw new Error(
      `${path} is missing column(s) ${missing.join(", ")}; available: ${present.join(", ")}`,
    );
  }
}

export function numbers(rows: Row[], column: string): number[] {
  return rows.map((r) => {
    const v = Number(r[column]);
    if (!Number.isFinite(v)) {
      throw new Error(`non-numeric value ${JSON.stringify(r[column])} in column ${column}`);
    }
    return v;
  });
}

/** Minimal --csv/--out argument reader shared by every figure script. */
export function parseArgs(argv: string[]): { csv: string; out: string } {
  let csv = "";
  let out = "";
  for (let i = 0; i < argv.length; i++) {
    if (argv[i] === "--csv") csv = argv[++i] ?? "";
    else if (argv[i] === "--out") out = argv[++i] ?? "";
  }
  if (!csv || !out) {
    console.error("usage: <script> --csv <path> --out <image.png>");
    process.exit(2);
  }
  return { csv, out };
}
