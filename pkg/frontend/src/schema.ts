/**
 * Input contracts for the benchmark's output files.
 *
 * The renderer consumes summary.json (the single source of metric truth) and
 * validates results.csv against its documented schema; it never recomputes a
 * metric, only displays values carried by the summary.
 */

export class SchemaError extends Error {}

export interface CurvePoint {
  severity: number;
  mean: number;
  std: number;
  n: number;
}

export interface Condition {
  task: string;
  impairment: string;
  method: string;
  curve: CurvePoint[];
  clean_mean: number | null;
  npd_max: number | null;
  aurc: number | null;
  clean_rank: number | null;
  worst_rank: number | null;
  rank_delta: number | null;
  failure_modes: Record<string, number>;
}

export interface Summary {
  meta: Record<string, unknown>;
  conditions: Condition[];
}

export const RESULTS_COLUMNS = [
  "method",
  "task",
  "impairment",
  "severity",
  "episode",
  "seed",
  "score",
  "precision",
  "recall",
  "bits_per_step",
  "msgs_per_step",
  "failure_mode",
];

const CONDITION_KEYS = [
  "task",
  "impairment",
  "method",
  "curve",
  "clean_mean",
  "npd_max",
  "aurc",
  "clean_rank",
  "worst_rank",
  "rank_delta",
  "failure_modes",
];

const POINT_KEYS = ["severity", "mean", "std", "n"];

export function parseSummary(text: string): Summary {
  let data: unknown;
  try {
    data = JSON.parse(text);
  } catch (err) {
    throw new SchemaError(`summary.json is not valid JSON: ${(err as Error).message}`);
  }
  const root = data as Record<string, unknown>;
  for (const key of ["meta", "conditions"]) {
    if (!(key in root)) throw new SchemaError(`summary.json: missing top-level key "${key}"`);
  }
  const conditions = root.conditions;
  if (!Array.isArray(conditions)) {
    throw new SchemaError('summary.json: "conditions" must be an array');
  }
  conditions.forEach((cond, index) => {
    const record = cond as Record<string, unknown>;
    for (const key of CONDITION_KEYS) {
      if (!(key in record)) {
        throw new SchemaError(`summary.json: conditions[${index}] missing key "${key}"`);
      }
    }
    const curve = record.curve;
    if (!Array.isArray(curve) || curve.length === 0) {
      throw new SchemaError(`summary.json: conditions[${index}].curve must be a non-empty array`);
    }
    curve.forEach((point, pi) => {
      for (const key of POINT_KEYS) {
        if (!(key in (point as Record<string, unknown>))) {
          throw new SchemaError(
            `summary.json: conditions[${index}].curve[${pi}] missing key "${key}"`,
          );
        }
      }
    });
  });
  return root as unknown as Summary;
}

/** Header check plus a row-shape scan; returns the data row count. */
export function validateResultsCsv(text: string): number {
  const lines = text.split("\n").filter((line) => line.length > 0);
  if (lines.length === 0) throw new SchemaError("results.csv is empty");
  const header = lines[0].split(",");
  for (let i = 0; i < RESULTS_COLUMNS.length; i++) {
    if (header[i] !== RESULTS_COLUMNS[i]) {
      throw new SchemaError(
        `results.csv: expected column ${i + 1} to be "${RESULTS_COLUMNS[i]}", found "${header[i] ?? ""}"`,
      );
    }
  }
  if (header.length !== RESULTS_COLUMNS.length) {
    throw new SchemaError(`results.csv: unexpected extra column "${header[RESULTS_COLUMNS.length]}"`);
  }
  for (let i = 1; i < lines.length; i++) {
    if (lines[i].split(",").length !== RESULTS_COLUMNS.length) {
      throw new SchemaError(`results.csv: row ${i} has the wrong number of fields`);
    }
  }
  return lines.length - 1;
}

/** Canonical display order; labels outside the known set sort after it. */
const METHOD_ORDER = ["no_comm", "full_comm", "compressed", "event_triggered", "redundant"];
const TASK_ORDER = ["cp", "nav", "search"];
const IMPAIRMENT_ORDER = ["latency", "packet_loss", "bandwidth", "async", "stale", "conflict"];

function orderedUnique(values: string[], canonical: string[]): string[] {
  const present = new Set(values);
  const known = canonical.filter((value) => present.has(value));
  const extra = [...present].filter((value) => !canonical.includes(value)).sort();
  return [...known, ...extra];
}

export function tasksOf(conditions: Condition[]): string[] {
  return orderedUnique(conditions.map((c) => c.task), TASK_ORDER);
}

export function impairmentsOf(conditions: Condition[]): string[] {
  return orderedUnique(conditions.map((c) => c.impairment), IMPAIRMENT_ORDER);
}

export function methodsOf(conditions: Condition[]): string[] {
  return orderedUnique(conditions.map((c) => c.method), METHOD_ORDER);
}
