/** CLI: render a log-log MSE-versus-cost figure from a benchmark CSV.
 *
 * Usage:
 *   node dist/plot.js --csv results.csv --option barrier --model gbm \
 *        --k 50 --out figure.svg
 */

import { readFileSync, writeFileSync } from "node:fs";

import { CsvError, parseBenchCsv } from "./csv";
import { buildSeries, PlotFilter, RenderError, renderSvg } from "./render";

interface CliArgs {
  csv: string;
  out: string;
  filter: PlotFilter;
}

function parseArgs(argv: string[]): CliArgs {
  const values = new Map<string, string>();
  for (let i = 0; i < argv.length; i += 2) {
    const flag = argv[i];
    const value = argv[i + 1];
    if (!flag.startsWith("--") || value === undefined) {
      throw new Error(`bad argument ${flag}`);
    }
    values.set(flag.slice(2), value);
  }
  for (const required of ["csv", "option", "model", "k", "out"]) {
    if (!values.has(required)) {
      throw new Error(`missing --${required}`);
    }
  }
  const k = Number(values.get("k"));
  if (!Number.isInteger(k) || k < 1) {
    throw new Error(`--k must be a positive integer, got ${values.get("k")}`);
  }
  return {
    csv: values.get("csv")!,
    out: values.get("out")!,
    filter: { option: values.get("option")!, model: values.get("model")!, k },
  };
}

export function run(argv: string[]): number {
  let args: CliArgs;
  try {
    args = parseArgs(argv);
  } catch (e) {
    process.stderr.write(`usage error: ${(e as Error).message}\n`);
    return 2;
  }
  let text: string;
  try {
    text = readFileSync(args.csv, "utf8");
  } catch (e) {
    process.stderr.write(`cannot read ${args.csv}: ${(e as Error).message}\n`);
    return 2;
  }
  try {
    const rows = parseBenchCsv(text);
    const { series, warnings } = buildSeries(rows, args.filter);
    for (const warning of warnings) {
      process.stderr.write(`warning: ${warning}\n`);
    }
    writeFileSync(args.out, renderSvg(series, args.filter));
    process.stdout.write(
      `wrote ${args.out}: ${series.map((s) => `${s.method}(${s.points.length})`).join(", ")}\n`
    );
    return 0;
  } catch (e) {
    if (e instanceof CsvError || e instanceof RenderError) {
      process.stderr.write(`error: ${e.message}\n`);
      return 2;
    }
    throw e;
  }
}

if (require.main === module) {
  process.exit(run(process.argv.slice(2)));
}
