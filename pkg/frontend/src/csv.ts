/** Parsing for the benchmark-runner CSV schema. */

export interface BenchRow {
  method: string;
  option: string;
  model: string;
  k: number;
  level: number;
  mse: number;
  cost: number;
}

export const REQUIRED_COLUMNS = [
  "method",
  "option",
  "model",
  "k",
  "level_or_L",
  "mse",
  "cost_steps",
] as const;

export class CsvError extends Error {}

/** Parse benchmark CSV text; fields never contain commas or quoting. */
export function parseBenchCsv(text: string): BenchRow[] {
  const lines = text.split(/\r?\n/).filter((line) => line.length > 0);
  if (lines.length === 0) {
    throw new CsvError("empty CSV");
  }
  const header = lines[0].split(",");
  for (const column of REQUIRED_COLUMNS) {
    if (!header.includes(column)) {
      throw new CsvError(`missing column: ${column}`);
    }
  }
  const at = (fields: string[], name: string) => fields[header.indexOf(name)];
  return lines.slice(1).map((line, i) => {
    const fields = line.split(",");
    if (fields.length !== header.length) {
      throw new CsvError(`row ${i + 1}: expected ${header.length} fields, got ${fields.length}`);
    }
    return {
      method: at(fields, "method"),
      option: at(fields, "option"),
      model: at(fields, "model"),
      k: Number(at(fields, "k")),
      level: Number(at(fields, "level_or_L")),
      mse: Number(at(fields, "mse")),
      cost: Number(at(fields, "cost_steps")),
    };
  });
}
