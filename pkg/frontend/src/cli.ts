#!/usr/bin/env node
/**
 * Figure renderer for benchmark outputs.
 *
 * Usage:
 *   commstress-figures render --results DIR [--out DIR]
 *       [--figures curves,heatmap,ranks,aurc,radar]
 *       [--tasks cp,nav,search] [--impairments latency,...]
 *
 * Exit codes: 0 success, 1 usage or schema error.
 */

import { FIGURE_KINDS, FigureKind } from "./figures.js";
import { render } from "./render.js";
import { SchemaError } from "./schema.js";

const USAGE =
  "usage: commstress-figures render --results DIR [--out DIR] " +
  "[--figures curves,heatmap,ranks,aurc,radar] [--tasks LIST] [--impairments LIST]";

function parseArgs(argv: string[]): Record<string, string> {
  const options: Record<string, string> = {};
  for (let i = 0; i < argv.length; i += 2) {
    const flag = argv[i];
    const value = argv[i + 1];
    if (!flag.startsWith("--") || value === undefined) {
      throw new SchemaError(`bad argument "${flag}"\n${USAGE}`);
    }
    options[flag.slice(2)] = value;
  }
  const known = new Set(["results", "out", "figures", "tasks", "impairments"]);
  for (const key of Object.keys(options)) {
    if (!known.has(key)) throw new SchemaError(`unknown flag "--${key}"\n${USAGE}`);
  }
  return options;
}

export function main(argv: string[]): number {
  try {
    if (argv[0] !== "render") {
      throw new SchemaError(`unknown command "${argv[0] ?? ""}"\n${USAGE}`);
    }
    const options = parseArgs(argv.slice(1));
    if (!options.results) throw new SchemaError(`--results is required\n${USAGE}`);
    const figures = (options.figures ? options.figures.split(",") : [...FIGURE_KINDS]).map(
      (kind) => kind.trim() as FigureKind,
    );
    const written = render({
      resultsDir: options.results,
      outDir: options.out ?? options.results,
      figures,
      tasks: options.tasks?.split(","),
      impairments: options.impairments?.split(","),
    });
    for (const figure of written) {
      console.log(`wrote ${figure.imagePath} and ${figure.dataPath}`);
    }
    return 0;
  } catch (err) {
    if (err instanceof SchemaError) {
      console.error(`error: ${err.message}`);
      return 1;
    }
    throw err;
  }
}

if (process.argv[1] && process.argv[1].endsWith("cli.js")) {
  process.exit(main(process.argv.slice(2)));
}
