#!/usr/bin/env node
/**
 * Render a performance-profile CSV (from `bench run` / `bench profile`) to
 * an SVG step plot.
 *
 * Usage:
 *   node dist/plot_profiles.js <profile.csv> -o <figure.svg> [--title T]
 */

import { readFileSync, writeFileSync } from "fs";

import { buildStepSeries, parseProfileCsv, ProfileSchemaError } from "./profile_data";
import { renderSvg } from "./svg";

export interface CliArgs {
  input: string;
  output: string;
  title?: string;
}

export function parseArgs(argv: string[]): CliArgs {
  let input: string | undefined;
  let output: string | undefined;
  let title: string | undefined;
  for (let i = 0; i < argv.length; i++) {
    const a = argv[i];
    if (a === "-o" || a === "--output") {
      output = argv[++i];
    } else if (a === "--title") {
      title = argv[++i];
    } else if (a.startsWith("-")) {
      throw new Error(`unknown flag ${a}`);
    } else if (input === undefined) {
      input = a;
    } else {
      throw new Error(`unexpected argument ${a}`);
    }
  }
  if (!input) throw new Error("missing input CSV path");
  if (!output) throw new Error("missing -o <figure.svg>");
  return { input, output, title };
}

export function run(args: CliArgs, log: (msg: string) => void = console.error): string {
  const table = parseProfileCsv(readFileSync(args.input, "utf-8"));
  for (const w of table.warnings) {
    log(`warning: ${w}`);
  }
  const svg = renderSvg(buildStepSeries(table), { title: args.title });
  writeFileSync(args.output, svg);
  return svg;
}

export function main(argv: string[]): number {
  let args: CliArgs;
  try {
    args = parseArgs(argv);
  } catch (err) {
    console.error(`usage error: ${(err as Error).message}`);
    console.error("usage: plot_profiles <profile.csv> -o <figure.svg> [--title T]");
    return 2;
  }
  try {
    run(args);
  } catch (err) {
    if (err instanceof ProfileSchemaError) {
      console.error(`profile schema error: ${err.message}`);
      return 2;
    }
    console.error(`${(err as Error).message}`);
    return 1;
  }
  console.error(`wrote ${args.output}`);
  return 0;
}

if (require.main === module) {
  process.exit(main(process.argv.slice(2)));
}
