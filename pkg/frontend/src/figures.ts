/**
 * The five figure kinds, each produced as a deterministic SVG plus the
 * intermediate data table it was drawn from. Every plotted number is taken
 * verbatim from summary.json; panels only lay the values out.
 */

import {
  Condition,
  impairmentsOf,
  methodsOf,
  tasksOf,
} from "./schema.js";
import {
  el,
  fmt,
  methodColor,
  npdColor,
  polylinePoints,
  px,
  svgDocument,
  text,
} from "./svg.js";

export interface Figure {
  svg: string;
  data: string;
}

export const FIGURE_KINDS = ["curves", "heatmap", "ranks", "aurc", "radar"] as const;
export type FigureKind = (typeof FIGURE_KINDS)[number];

/** Exact serialization for data tables: what JSON.parse produced, verbatim. */
function cell(value: number | null): string {
  return value === null ? "" : String(value);
}

function conditionAt(
  conditions: Condition[],
  task: string,
  impairment: string,
  method: string,
): Condition | undefined {
  return conditions.find(
    (c) => c.task === task && c.impairment === impairment && c.method === method,
  );
}

// --- robustness curves -------------------------------------------------------

const PANEL_W = 190;
const PANEL_H = 140;
const PANEL_PAD = 34;
const MARGIN = 60;

export function curvesFigure(conditions: Condition[]): Figure {
  const tasks = tasksOf(conditions);
  const impairments = impairmentsOf(conditions);
  const methods = methodsOf(conditions);

  const rows: string[] = ["task,impairment,method,severity,mean,std,n"];
  const parts: string[] = [];

  tasks.forEach((task, ti) => {
    impairments.forEach((impairment, ii) => {
      const x0 = MARGIN + ii * (PANEL_W + PANEL_PAD);
      const y0 = MARGIN + ti * (PANEL_H + PANEL_PAD);
      const panelConditions = methods
        .map((m) => conditionAt(conditions, task, impairment, m))
        .filter((c): c is Condition => c !== undefined);
      if (panelConditions.length === 0) return;

      const severities = panelConditions[0].curve.map((p) => p.severity);
      const sMax = Math.max(...severities, 1);
      let yMax = 0;
      for (const cond of panelConditions) {
        for (const p of cond.curve) yMax = Math.max(yMax, p.mean + p.std);
      }
      if (yMax <= 0) yMax = 1;

      const sx = (s: number) => x0 + (s / sMax) * PANEL_W;
      const sy = (v: number) => y0 + PANEL_H - (v / yMax) * PANEL_H;

      const panel: string[] = [
        el("rect", {
          x: px(x0), y: px(y0), width: PANEL_W, height: PANEL_H,
          fill: "none", stroke: "#cccccc",
        }),
        text(`${task} / ${impairment}`, {
          x: px(x0), y: px(y0 - 6), "font-size": 11, fill: "#333333",
        }),
        text("0", { x: px(x0), y: px(y0 + PANEL_H + 12), "font-size": 9, fill: "#666666" }),
        text(fmt(sMax, 0), {
          x: px(x0 + PANEL_W - 14), y: px(y0 + PANEL_H + 12), "font-size": 9, fill: "#666666",
        }),
        text(fmt(yMax, yMax <= 1 ? 2 : 0), {
          x: px(x0 - 28), y: px(y0 + 8), "font-size": 9, fill: "#666666",
        }),
      ];

      panelConditions.forEach((cond) => {
        const color = methodColor(cond.method, methods.indexOf(cond.method));
        const upper = cond.curve.map((p): [number, number] => [sx(p.severity), sy(p.mean + p.std)]);
        const lower = cond.curve
          .slice()
          .reverse()
          .map((p): [number, number] => [sx(p.severity), sy(Math.max(0, p.mean - p.std))]);
        panel.push(
          el("polygon", {
            points: polylinePoints([...upper, ...lower]),
            fill: color, "fill-opacity": "0.12", stroke: "none",
          }),
        );
        panel.push(
          el("polyline", {
            points: polylinePoints(
              cond.curve.map((p): [number, number] => [sx(p.severity), sy(p.mean)]),
            ),
            fill: "none", stroke: color, "stroke-width": "1.5",
          }),
        );
        for (const p of cond.curve) {
          rows.push(
            `${task},${impairment},${cond.method},${cell(p.severity)},${cell(p.mean)},${cell(p.std)},${p.n}`,
          );
        }
      });
      parts.push(el("g", { class: "panel", "data-task": task, "data-impairment": impairment }, panel));
    });
  });

  parts.push(...legend(methods, MARGIN, MARGIN + tasks.length * (PANEL_H + PANEL_PAD) + 4));
  const width = MARGIN * 2 + impairments.length * (PANEL_W + PANEL_PAD);
  const height = MARGIN * 2 + tasks.length * (PANEL_H + PANEL_PAD) + 24;
  return { svg: svgDocument(width, height, parts), data: rows.join("\n") + "\n" };
}

function legend(methods: string[], x: number, y: number): string[] {
  const parts: string[] = [];
  let offset = 0;
  methods.forEach((method, index) => {
    const color = methodColor(method, index);
    parts.push(el("rect", { x: px(x + offset), y: px(y), width: 12, height: 12, fill: color }));
    parts.push(text(method, { x: px(x + offset + 16), y: px(y + 10), "font-size": 10, fill: "#333333" }));
    offset += 16 + method.length * 6 + 24;
  });
  return parts;
}

// --- NPD heatmap ----------------------------------------------------------------

const CELL_W = 86;
const CELL_H = 26;

export function heatmapFigure(conditions: Condition[]): Figure {
  const tasks = tasksOf(conditions);
  const impairments = impairmentsOf(conditions);
  const methods = methodsOf(conditions);
  const columns: Array<[string, string]> = [];
  for (const task of tasks) {
    for (const impairment of impairments) columns.push([task, impairment]);
  }

  const rows: string[] = ["task,impairment,method,npd_max"];
  const left = 140;
  const top = 70;
  const parts: string[] = [];

  columns.forEach(([task, impairment], ci) => {
    parts.push(
      el("g", {
        transform: `translate(${px(left + ci * CELL_W + CELL_W / 2)} ${px(top - 8)}) rotate(-40)`,
      }, [text(`${task}/${impairment}`, { x: 0, y: 0, "font-size": 9, fill: "#333333" })]),
    );
  });

  methods.forEach((method, mi) => {
    const y = top + mi * CELL_H;
    parts.push(text(method, { x: 8, y: px(y + CELL_H / 2 + 4), "font-size": 10, fill: "#333333" }));
    columns.forEach(([task, impairment], ci) => {
      const x = left + ci * CELL_W;
      const cond = conditionAt(conditions, task, impairment, method);
      const npd = cond?.npd_max ?? null;
      rows.push(`${task},${impairment},${method},${cell(npd)}`);
      const fill = npd === null ? "#eeeeee" : npdColor(npd);
      parts.push(
        el("rect", {
          x: px(x), y: px(y), width: CELL_W - 1, height: CELL_H - 1, fill,
          stroke: "#ffffff",
          "data-task": task, "data-impairment": impairment, "data-method": method,
          "data-npd": npd === null ? "" : String(npd),
        }),
      );
      parts.push(
        text(npd === null ? "n/a" : fmt(npd, 1), {
          x: px(x + 6), y: px(y + CELL_H / 2 + 4), "font-size": 10, fill: "#111111",
        }),
      );
    });
  });

  const width = left + columns.length * CELL_W + 20;
  const height = top + methods.length * CELL_H + 20;
  return { svg: svgDocument(width, height, parts), data: rows.join("\n") + "\n" };
}

// --- rank tables --------------------------------------------------------------------

export function ranksFigure(conditions: Condition[]): Figure {
  const tasks = tasksOf(conditions);
  const impairments = impairmentsOf(conditions);
  const methods = methodsOf(conditions);
  const columns: Array<[string, string]> = [];
  for (const task of tasks) {
    for (const impairment of impairments) columns.push([task, impairment]);
  }

  const rows: string[] = ["task,impairment,method,clean_rank,worst_rank,rank_delta"];
  const left = 140;
  const top = 70;
  const parts: string[] = [];

  columns.forEach(([task, impairment], ci) => {
    parts.push(
      el("g", {
        transform: `translate(${px(left + ci * CELL_W + CELL_W / 2)} ${px(top - 8)}) rotate(-40)`,
      }, [text(`${task}/${impairment}`, { x: 0, y: 0, "font-size": 9, fill: "#333333" })]),
    );
  });

  methods.forEach((method, mi) => {
    const y = top + mi * CELL_H;
    parts.push(text(method, { x: 8, y: px(y + CELL_H / 2 + 4), "font-size": 10, fill: "#333333" }));
    columns.forEach(([task, impairment], ci) => {
      const x = left + ci * CELL_W;
      const cond = conditionAt(conditions, task, impairment, method);
      const clean = cond?.clean_rank ?? null;
      const worst = cond?.worst_rank ?? null;
      const delta = cond?.rank_delta ?? null;
      rows.push(
        `${task},${impairment},${method},${cell(clean)},${cell(worst)},${cell(delta)}`,
      );
      const moved = delta !== null && delta !== 0;
      parts.push(
        el("rect", {
          x: px(x), y: px(y), width: CELL_W - 1, height: CELL_H - 1,
          fill: moved ? (delta! > 0 ? "#fde4e1" : "#e2f2e4") : "#f7f7f7",
          stroke: "#ffffff",
        }),
      );
      const label = clean === null || worst === null ? "n/a" : `${clean} to ${worst}`;
      parts.push(
        text(label, { x: px(x + 6), y: px(y + CELL_H / 2 + 4), "font-size": 10, fill: "#111111" }),
      );
    });
  });

  const width = left + columns.length * CELL_W + 20;
  const height = top + methods.length * CELL_H + 20;
  return { svg: svgDocument(width, height, parts), data: rows.join("\n") + "\n" };
}

// --- AURC bars -------------------------------------------------------------------------

export function aurcFigure(conditions: Condition[]): Figure {
  const tasks = tasksOf(conditions);
  const impairments = impairmentsOf(conditions);
  const methods = methodsOf(conditions);

  const rows: string[] = ["task,impairment,method,aurc"];
  const parts: string[] = [];
  const barW = 9;
  const groupW = methods.length * (barW + 2) + 16;
  const panelH = 150;
  const panelW = impairments.length * groupW + 30;
  const top = 40;

  let maxValue = 100;
  for (const cond of conditions) {
    if (cond.aurc !== null) maxValue = Math.max(maxValue, cond.aurc);
  }

  tasks.forEach((task, ti) => {
    const x0 = 50;
    const y0 = top + ti * (panelH + 60);
    parts.push(text(task, { x: px(x0), y: px(y0 - 8), "font-size": 12, fill: "#333333" }));
    parts.push(
      el("line", {
        x1: px(x0), y1: px(y0 + panelH), x2: px(x0 + panelW), y2: px(y0 + panelH),
        stroke: "#999999",
      }),
    );
    impairments.forEach((impairment, ii) => {
      const gx = x0 + ii * groupW;
      parts.push(
        text(impairment, {
          x: px(gx), y: px(y0 + panelH + 14), "font-size": 8, fill: "#666666",
        }),
      );
      methods.forEach((method, mi) => {
        const cond = conditionAt(conditions, task, impairment, method);
        const value = cond?.aurc ?? null;
        rows.push(`${task},${impairment},${method},${cell(value)}`);
        if (value === null) return;
        const h = (Math.max(0, value) / maxValue) * panelH;
        parts.push(
          el("rect", {
            x: px(gx + mi * (barW + 2)), y: px(y0 + panelH - h),
            width: barW, height: px(h),
            fill: methodColor(method, mi),
            "data-aurc": String(value),
          }),
        );
      });
    });
  });

  parts.push(...legend(methods, 50, top + tasks.length * (panelH + 60)));
  const width = 50 + panelW + 40;
  const height = top + tasks.length * (panelH + 60) + 30;
  return { svg: svgDocument(width, height, parts), data: rows.join("\n") + "\n" };
}

// --- sensitivity radar ------------------------------------------------------------------

export function radarFigure(conditions: Condition[]): Figure {
  const tasks = tasksOf(conditions);
  const impairments = impairmentsOf(conditions);
  const methods = methodsOf(conditions);

  const rows: string[] = ["task,method,impairment,npd_max"];
  const parts: string[] = [];
  const radius = 90;
  const size = radius * 2 + 90;

  tasks.forEach((task, ti) => {
    const cx = 60 + radius + ti * size;
    const cy = 70 + radius;
    parts.push(text(task, { x: px(cx - radius), y: 30, "font-size": 12, fill: "#333333" }));

    const angle = (index: number) =>
      -Math.PI / 2 + (2 * Math.PI * index) / Math.max(impairments.length, 1);
    const point = (index: number, value: number): [number, number] => {
      const r = (Math.max(0, Math.min(100, value)) / 100) * radius;
      return [cx + r * Math.cos(angle(index)), cy + r * Math.sin(angle(index))];
    };

    // axis spokes and labels
    impairments.forEach((impairment, ii) => {
      const [ex, ey] = [
        cx + radius * Math.cos(angle(ii)),
        cy + radius * Math.sin(angle(ii)),
      ];
      parts.push(el("line", { x1: px(cx), y1: px(cy), x2: px(ex), y2: px(ey), stroke: "#dddddd" }));
      parts.push(
        text(impairment, {
          x: px(cx + (radius + 8) * Math.cos(angle(ii)) - 20),
          y: px(cy + (radius + 14) * Math.sin(angle(ii)) + 4),
          "font-size": 8, fill: "#666666",
        }),
      );
    });
    for (const ring of [0.25, 0.5, 0.75, 1.0]) {
      parts.push(
        el("circle", {
          cx: px(cx), cy: px(cy), r: px(radius * ring), fill: "none", stroke: "#eeeeee",
        }),
      );
    }

    methods.forEach((method, mi) => {
      const values: Array<number | null> = impairments.map(
        (impairment) => conditionAt(conditions, task, impairment, method)?.npd_max ?? null,
      );
      impairments.forEach((impairment, ii) => {
        rows.push(`${task},${method},${impairment},${cell(values[ii])}`);
      });
      if (values.some((v) => v === null)) return;
      parts.push(
        el("polygon", {
          points: polylinePoints(values.map((v, ii) => point(ii, v as number))),
          fill: methodColor(method, mi), "fill-opacity": "0.08",
          stroke: methodColor(method, mi), "stroke-width": "1.2",
        }),
      );
    });
  });

  parts.push(...legend(methods, 40, 70 + radius * 2 + 40));
  return {
    svg: svgDocument(60 + tasks.length * size, 70 + radius * 2 + 80, parts),
    data: rows.join("\n") + "\n",
  };
}

export const FIGURE_BUILDERS: Record<FigureKind, (conditions: Condition[]) => Figure> = {
  curves: curvesFigure,
  heatmap: heatmapFigure,
  ranks: ranksFigure,
  aurc: aurcFigure,
  radar: radarFigure,
};
