/**
 * Performance-profile CSV parsing and validation.
 *
 * Expected schema (produced by `bench run` / `bench profile`):
 *
 *     tau,<label 1>,<label 2>,...
 *     0.0,1.0,0.5
 *     ...
 *
 * tau must be non-decreasing down the file; each solver column holds the
 * cumulative fraction pi in [0, 1] and should be non-decreasing (a
 * violation is reported as a warning, not an error).
 */

import Papa from "papaparse";

export interface ProfileTable {
  taus: number[];
  labels: string[];
  /** columns[j][i] = pi value of solver j at taus[i], exactly as parsed. */
  columns: number[][];
  warnings: string[];
}

export class ProfileSchemaError extends Error {}

export function parseProfileCsv(text: string): ProfileTable {
  const parsed = Papa.parse<string[]>(text.trim(), { skipEmptyLines: true });
  if (parsed.errors.length > 0) {
    const e = parsed.errors[0];
    throw new ProfileSchemaError(`malformed CSV: ${e.message} (row ${e.row})`);
  }
  const rows = parsed.data;
  if (rows.length === 0) {
    throw new ProfileSchemaError("empty file: no header row");
  }
  const header = rows[0].map((h) => h.trim());
  if (header[0] !== "tau") {
    throw new ProfileSchemaError(
      `first column must be "tau", got "${header[0]}"`
    );
  }
  const labels = header.slice(1);
  if (labels.length === 0) {
    throw new ProfileSchemaError("no solver columns after tau");
  }
  if (rows.length === 1) {
    throw new ProfileSchemaError("no data rows");
  }

  const taus: number[] = [];
  const columns: number[][] = labels.map(() => []);
  for (let r = 1; r < rows.length; r++) {
    const cells = rows[r];
    if (cells.length !== header.length) {
      throw new ProfileSchemaError(
        `row ${r + 1} has ${cells.length} cells, expected ${header.length}`
      );
    }
    const tau = Number(cells[0]);
    if (!Number.isFinite(tau)) {
      throw new ProfileSchemaError(`row ${r + 1}: non-numeric tau "${cells[0]}"`);
    }
    taus.push(tau);
    for (let j = 0; j < labels.length; j++) {
      const v = Number(cells[j + 1]);
      if (!Number.isFinite(v)) {
        throw new ProfileSchemaError(
          `row ${r + 1}, column "${labels[j]}": non-numeric value "${cells[j + 1]}"`
        );
      }
      columns[j].push(v);
    }
  }

  const warnings: string[] = [];
  for (let i = 1; i < taus.length; i++) {
    if (taus[i] < taus[i - 1]) {
      throw new ProfileSchemaError(`tau decreases at row ${i + 2}`);
    }
  }
  for (let j = 0; j < labels.length; j++) {
    const col = columns[j];
    if (col.some((v) => v < 0 || v > 1)) {
      warnings.push(`column "${labels[j]}" has values outside [0, 1]`);
    }
    for (let i = 1; i < col.length; i++) {
      if (col[i] < col[i - 1]) {
        warnings.push(`column "${labels[j]}" is not non-decreasing (row ${i + 2})`);
        break;
      }
    }
  }
  return { taus, labels, columns, warnings };
}

export interface StepSeries {
  label: string;
  /** knot points (tau, pi) exactly as in the CSV, in file order. */
  points: Array<[number, number]>;
}

/** One step series per solver column; values are passed through untouched. */
export function buildStepSeries(table: ProfileTable): StepSeries[] {
  return table.labels.map((label, j) => ({
    label,
    points: table.taus.map((t, i) => [t, table.columns[j][i]] as [number, number]),
  }));
}
