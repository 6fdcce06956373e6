/** Orchestration: load benchmark outputs, filter, render figures to files. */

import * as fs from "node:fs";
import * as path from "node:path";

import { FIGURE_BUILDERS, FIGURE_KINDS, FigureKind } from "./figures.js";
import {
  Condition,
  SchemaError,
  impairmentsOf,
  parseSummary,
  tasksOf,
  validateResultsCsv,
} from "./schema.js";

export interface RenderSpec {
  resultsDir: string;
  outDir: string;
  figures: FigureKind[];
  tasks?: string[];
  impairments?: string[];
}

export interface RenderedFigure {
  kind: FigureKind;
  imagePath: string;
  dataPath: string;
}

function loadConditions(resultsDir: string): Condition[] {
  const summaryPath = path.join(resultsDir, "summary.json");
  const resultsPath = path.join(resultsDir, "results.csv");
  for (const file of [summaryPath, resultsPath]) {
    if (!fs.existsSync(file)) {
      throw new SchemaError(`missing input file: ${file}`);
    }
  }
  validateResultsCsv(fs.readFileSync(resultsPath, "utf-8"));
  return parseSummary(fs.readFileSync(summaryPath, "utf-8")).conditions;
}

function applyFilters(conditions: Condition[], spec: RenderSpec): Condition[] {
  let filtered = conditions;
  if (spec.tasks && spec.tasks.length > 0) {
    const wanted = new Set(spec.tasks);
    filtered = filtered.filter((c) => wanted.has(c.task));
  }
  if (spec.impairments && spec.impairments.length > 0) {
    const wanted = new Set(spec.impairments);
    filtered = filtered.filter((c) => wanted.has(c.impairment));
  }
  if (filtered.length === 0) {
    throw new SchemaError(
      `no conditions match the requested filters; available tasks: ` +
        `${tasksOf(conditions).join(", ")}; available impairments: ` +
        `${impairmentsOf(conditions).join(", ")}`,
    );
  }
  return filtered;
}

export function render(spec: RenderSpec): RenderedFigure[] {
  for (const kind of spec.figures) {
    if (!FIGURE_KINDS.includes(kind)) {
      throw new SchemaError(
        `unknown figure kind "${kind}"; available: ${FIGURE_KINDS.join(", ")}`,
      );
    }
  }
  const conditions = applyFilters(loadConditions(spec.resultsDir), spec);
  fs.mkdirSync(spec.outDir, { recursive: true });
  const written: RenderedFigure[] = [];
  for (const kind of spec.figures) {
    const figure = FIGURE_BUILDERS[kind](conditions);
    const imagePath = path.join(spec.outDir, `${kind}.svg`);
    const dataPath = path.join(spec.outDir, `${kind}.data.csv`);
    fs.writeFileSync(imagePath, figure.svg, "utf-8");
    fs.writeFileSync(dataPath, figure.data, "utf-8");
    written.push({ kind, imagePath, dataPath });
  }
  return written;
}
