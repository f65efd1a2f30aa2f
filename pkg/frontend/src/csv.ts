/**
 * Reader for the harness's versioned CSV files.
 *
 * Every file starts with `# jointcommit-csv <schema> v<version>`; anything
 * with an unknown schema or a version we do not support is refused so stale
 * renderers never silently misread new columns.
 */

import { readFileSync } from "fs";

export const SUPPORTED_VERSIONS: Record<string, number> = {
  trajectory: 1,
  timeseries: 1,
  sweep: 1,
  fixation: 1,
  reputation: 1,
  compositions: 1,
};

const HEADER_PREFIX = "# jointcommit-csv";

export interface Table {
  schema: string;
  version: number;
  columns: string[];
  rows: string[][];
}

export function parseCsvText(text: string, source = "<csv>"): Table {
  const lines = text.split(/\r?\n/).filter((l) => l.length > 0);
  if (lines.length === 0 || !lines[0].startsWith(HEADER_PREFIX)) {
    throw new Error(`${source}: missing '${HEADER_PREFIX}' schema line`);
  }
  const tag = lines[0].slice(HEADER_PREFIX.length).trim().split(/\s+/);
  const schema = tag[0];
  const version = Number((tag[1] ?? "").replace(/^v/, ""));
  if (!Number.isInteger(version)) {
    throw new Error(`${source}: malformed schema line '${lines[0]}'`);
  }
  const supported = SUPPORTED_VERSIONS[schema];
  if (supported === undefined) {
    throw new Error(`${source}: unknown schema '${schema}'`);
  }
  if (supported !== version) {
    throw new Error(
      `${source}: schema ${schema} v${version} not supported (this renderer reads v${supported})`
    );
  }
  if (lines.length < 2) {
    throw new Error(`${source}: no header row`);
  }
  const columns = lines[1].split(",");
  const rows = lines.slice(2).map((l) => l.split(","));
  if (rows.length === 0) {
    throw new Error(`${source}: no data rows`);
  }
  return { schema, version, columns, rows };
}

export function readCsv(path: string): Table {
  return parseCsvText(readFileSync(path, "utf-8"), path);
}

export function columnIndex(table: Table, name: string): number {
  const i = table.columns.indexOf(name);
  if (i < 0) {
    throw new Error(`column '${name}' missing from ${table.schema} CSV`);
  }
  return i;
}

export function numbers(table: Table, name: string): number[] {
  const i = columnIndex(table, name);
  return table.rows.map((r) => Number(r[i]));
}
