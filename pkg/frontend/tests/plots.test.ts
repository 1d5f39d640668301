import { mkdtempSync, readFileSync, writeFileSync } from "fs";
import { tmpdir } from "os";
import { join } from "path";
import { describe, expect, it } from "vitest";
import { parseCsv, column, requireRows } from "../src/csv.js";
import { renderPlot, PlotSpec } from "../src/plots.js";
import { parseArgs } from "../src/main.js";
import { linearScale, logScale, extent } from "../src/svg.js";

const FIX = join(__dirname, "fixtures");
const RUN3 = join(FIX, "run3");
const RUN9 = join(FIX, "run9");

function tmpOut(name: string): string {
  return join(mkdtempSync(join(tmpdir(), "plotviz-")), name);
}

function snapshots(): string[] {
  const names: string[] = [];
  for (let i = 0; i <= 10; i++) names.push(join(RUN3, `profile_${String(i).padStart(4, "0")}.csv`));
  names.push(join(RUN3, "profile_final.csv"));
  return names;
}

function leaves(): string[] {
  const names: string[] = [];
  for (let i = 0; i < 8; i++) names.push(join(RUN9, `leaf_final_${String(i).padStart(2, "0")}.csv`));
  return names;
}

describe("csv parsing", () => {
  it("reads solver profile files", () => {
    const t = parseCsv(join(RUN3, "profile_final.csv"));
    expect(t.header).toEqual(["theta", "psi", "dpsi", "lambda", "abs_sigma"]);
    expect(t.rows.length).toBe(401);
    expect(column(t, "psi")[0]).toBe(0);
  });

  it("names the missing column and the file", () => {
    const t = parseCsv(join(RUN3, "monitors.csv"));
    expect(() => column(t, "nonexistent")).toThrowError(/nonexistent.*monitors\.csv/s);
  });

  it("rejects empty series naming the file", () => {
    const p = tmpOut("empty.csv");
    writeFileSync(p, "t,sup_sigma\n");
    expect(() => requireRows(parseCsv(p))).toThrowError(/empty series.*empty\.csv/s);
  });
});

describe("scales", () => {
  it("linear scale maps the domain to the range", () => {
    const s = linearScale([0, 2], [100, 300]);
    expect(s(0)).toBe(100);
    expect(s(1)).toBe(200);
    expect(s.ticks().length).toBeGreaterThan(2);
  });

  it("log scale rejects nonpositive domains", () => {
    expect(() => logScale([0, 1], [0, 1])).toThrowError(/positive domain/);
  });

  it("extent rejects empty input", () => {
    expect(() => extent([])).toThrowError(/empty/);
  });
});

describe("renderers on real run outputs", () => {
  const cases: Array<[string, PlotSpec]> = [
    [
      "profiles-overlay",
      {
        kind: "profiles-overlay",
        inputs: snapshots(),
        limit: join(RUN3, "limit_profile.csv"),
        out: "",
      },
    ],
    ["shear-decay-loglog", { kind: "shear-decay-loglog", inputs: [join(RUN3, "monitors.csv")], out: "" }],
    ["monitor-envelopes", { kind: "monitor-envelopes", inputs: [join(RUN3, "monitors.csv")], out: "" }],
    ["leaf-fan", { kind: "leaf-fan", inputs: leaves(), out: "" }],
  ];

  for (const [name, spec] of cases) {
    it(`renders ${name} to a nonempty SVG`, () => {
      const out = tmpOut(`${name}.svg`);
      const svg = renderPlot({ ...spec, out });
      expect(svg.startsWith("<svg")).toBe(true);
      expect(readFileSync(out, "utf-8").length).toBeGreaterThan(500);
      expect(svg).toContain("polyline");
    });

    it(`renders ${name} byte-identically twice`, () => {
      const o1 = tmpOut("a.svg");
      const o2 = tmpOut("b.svg");
      renderPlot({ ...spec, out: o1 });
      renderPlot({ ...spec, out: o2 });
      expect(readFileSync(o1)).toEqual(readFileSync(o2));
    });
  }

  it("rejects unknown kinds", () => {
    expect(() =>
      renderPlot({ kind: "pie" as never, inputs: ["x.csv"], out: tmpOut("x.svg") }),
    ).toThrowError(/unknown plot kind/);
  });

  it("rejects an empty input list", () => {
    expect(() =>
      renderPlot({ kind: "leaf-fan", inputs: [], out: tmpOut("x.svg") }),
    ).toThrowError(/no input/);
  });

  it("profile files lack monitor columns: named diagnostic", () => {
    expect(() =>
      renderPlot({
        kind: "monitor-envelopes",
        inputs: [join(RUN3, "profile_final.csv")],
        out: tmpOut("x.svg"),
      }),
    ).toThrowError(/missing column 't'.*profile_final\.csv/s);
  });
});

describe("argv parsing", () => {
  it("collects inputs, limit and out", () => {
    const spec = parseArgs([
      "profiles-overlay",
      "a.csv",
      "b.csv",
      "--limit",
      "lim.csv",
      "--out",
      "fig.svg",
    ]);
    expect(spec.inputs).toEqual(["a.csv", "b.csv"]);
    expect(spec.limit).toBe("lim.csv");
    expect(spec.out).toBe("fig.svg");
  });

  it("requires --out", () => {
    expect(() => parseArgs(["leaf-fan", "a.csv"])).toThrowError(/--out/);
  });
});
