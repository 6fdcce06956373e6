import * as fs from "node:fs";
import * as os from "node:os";
import * as path from "node:path";
import { describe, expect, it } from "vitest";

import { FIGURE_KINDS } from "../src/figures.js";
import { render } from "../src/render.js";
import { SchemaError, parseSummary, validateResultsCsv } from "../src/schema.js";
import { main } from "../src/cli.js";

const FIXTURES = path.join(__dirname, "..", "fixtures", "full-default");

function tmpDir(label: string): string {
  return fs.mkdtempSync(path.join(os.tmpdir(), `figures-${label}-`));
}

function renderAll(outDir: string) {
  return render({ resultsDir: FIXTURES, outDir, figures: [...FIGURE_KINDS] });
}

describe("rendering the full default result set", () => {
  it("produces all five figure kinds without error", () => {
    const out = tmpDir("all");
    const written = renderAll(out);
    expect(written.map((f) => f.kind)).toEqual([...FIGURE_KINDS]);
    for (const figure of written) {
      const svg = fs.readFileSync(figure.imagePath, "utf-8");
      expect(svg.startsWith("<svg ")).toBe(true);
      expect(svg.length).toBeGreaterThan(500);
      expect(fs.readFileSync(figure.dataPath, "utf-8").length).toBeGreaterThan(50);
    }
  });

  it("draws 18 curve panels for the 3x6 task-impairment grid", () => {
    const out = tmpDir("panels");
    renderAll(out);
    const svg = fs.readFileSync(path.join(out, "curves.svg"), "utf-8");
    expect(svg.match(/class="panel"/g)?.length).toBe(18);
  });

  it("heatmap cells carry npd values that match summary.json exactly", () => {
    const out = tmpDir("heatmap");
    renderAll(out);
    const svg = fs.readFileSync(path.join(out, "heatmap.svg"), "utf-8");
    const summary = parseSummary(
      fs.readFileSync(path.join(FIXTURES, "summary.json"), "utf-8"),
    );
    const cells = new Map<string, string>();
    const pattern =
      /data-task="([^"]+)" data-impairment="([^"]+)" data-method="([^"]+)" data-npd="([^"]*)"/g;
    for (const match of svg.matchAll(pattern)) {
      cells.set(`${match[1]}|${match[2]}|${match[3]}`, match[4]);
    }
    expect(cells.size).toBe(summary.conditions.length);
    for (const cond of summary.conditions) {
      const value = cells.get(`${cond.task}|${cond.impairment}|${cond.method}`);
      expect(value).toBe(cond.npd_max === null ? "" : String(cond.npd_max));
    }
  });

  it("data tables and images are byte-stable across reruns", () => {
    const first = tmpDir("stable-a");
    const second = tmpDir("stable-b");
    renderAll(first);
    renderAll(second);
    for (const kind of FIGURE_KINDS) {
      for (const suffix of [".svg", ".data.csv"]) {
        const a = fs.readFileSync(path.join(first, `${kind}${suffix}`));
        const b = fs.readFileSync(path.join(second, `${kind}${suffix}`));
        expect(a.equals(b), `${kind}${suffix}`).toBe(true);
      }
    }
  });

  it("radar data table lists one npd per (task, method, impairment)", () => {
    const out = tmpDir("radar");
    renderAll(out);
    const lines = fs.readFileSync(path.join(out, "radar.data.csv"), "utf-8").trimEnd().split("\n");
    expect(lines[0]).toBe("task,method,impairment,npd_max");
    expect(lines.length).toBe(1 + 3 * 5 * 6);
  });
});

describe("filters", () => {
  it("restricts panels to the requested tasks and impairments", () => {
    const out = tmpDir("filter");
    render({
      resultsDir: FIXTURES,
      outDir: out,
      figures: ["curves"],
      tasks: ["nav"],
      impairments: ["packet_loss", "stale"],
    });
    const svg = fs.readFileSync(path.join(out, "curves.svg"), "utf-8");
    expect(svg.match(/class="panel"/g)?.length).toBe(2);
  });

  it("an empty filter match fails and lists the available keys", () => {
    expect(() =>
      render({
        resultsDir: FIXTURES,
        outDir: tmpDir("empty"),
        figures: ["curves"],
        tasks: ["chess"],
      }),
    ).toThrowError(/available tasks: cp, nav, search/);
  });
});

describe("schema validation", () => {
  it("accepts the fixture files", () => {
    const rows = validateResultsCsv(
      fs.readFileSync(path.join(FIXTURES, "results.csv"), "utf-8"),
    );
    expect(rows).toBe(29_700);
  });

  it("names the offending results.csv column", () => {
    const bad = "method,task,impairment,severity,episode,seed,points\nx,y,z,0,0,0,1\n";
    expect(() => validateResultsCsv(bad)).toThrowError(/column 7.*score.*points/);
  });

  it("names the missing summary key", () => {
    const summary = JSON.parse(fs.readFileSync(path.join(FIXTURES, "summary.json"), "utf-8"));
    delete summary.conditions[0].npd_max;
    expect(() => parseSummary(JSON.stringify(summary))).toThrowError(/conditions\[0\].*npd_max/);
  });

  it("rejects a directory without inputs", () => {
    expect(() =>
      render({ resultsDir: tmpDir("void"), outDir: tmpDir("void-out"), figures: ["curves"] }),
    ).toThrowError(SchemaError);
  });
});

describe("cli", () => {
  it("renders everything and exits 0", () => {
    const out = tmpDir("cli");
    const code = main(["render", "--results", FIXTURES, "--out", out]);
    expect(code).toBe(0);
    for (const kind of FIGURE_KINDS) {
      expect(fs.existsSync(path.join(out, `${kind}.svg`))).toBe(true);
      expect(fs.existsSync(path.join(out, `${kind}.data.csv`))).toBe(true);
    }
  });

  it("exits 1 on unknown flags, commands, and figure kinds", () => {
    expect(main(["render", "--warp", "9"])).toBe(1);
    expect(main(["paint"])).toBe(1);
    expect(main(["render", "--results", FIXTURES, "--figures", "hologram"])).toBe(1);
  });

  it("exits 1 when inputs are missing", () => {
    expect(main(["render", "--results", tmpDir("missing")])).toBe(1);
  });
});
