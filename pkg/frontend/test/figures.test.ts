import * as path from "path";
import { describe, expect, it } from "vitest";

import { FIGURES, figureById } from "../src/figures";

const GOLDEN = path.join(__dirname, "..", "testdata", "golden");

// series budget per figure for the golden artifact set: analytic lines,
// plus marker + error-bar series wherever the golden CSVs carry MC columns
const EXPECTED_SERIES: Record<string, number> = {
  stationary: 4,  // blue line + blue MC markers + blue error bars + green line
  moments: 10,    // 3 panels x (mean, msd) + MC markers/bars on panel (a)
  logmoments: 4,  // log-mean, log-msd + two dashed asymptotes
  boundary: 2,
  mfpt: 5,        // three alpha scans + optima markers + locus panel line
  speedup: 3,     // ratio + break-even line + alpha_c marker
  fpt: 8,         // 3 free + 3 open lines + MC markers/bars on one open curve
};

describe("figure specifications", () => {
  it("defines exactly the seven figures", () => {
    expect(FIGURES.map((f) => f.id)).toEqual([
      "stationary", "moments", "logmoments", "boundary", "mfpt", "speedup",
      "fpt",
    ]);
  });

  it("rejects unknown figure ids", () => {
    expect(() => figureById("nope")).toThrow(/unknown figure/);
  });

  for (const spec of FIGURES) {
    it(`builds '${spec.id}' with the declared series count`, () => {
      const built = spec.build(GOLDEN);
      expect(built.seriesCount).toBe(EXPECTED_SERIES[spec.id]);
      expect(built.option.series).toHaveLength(built.seriesCount);
    });
  }

  it("labels stationary curves from the manifest parameter echo", () => {
    const built = figureById("stationary").build(GOLDEN);
    const names = built.option.series.map((s: any) => s.name);
    expect(names[0]).toContain("mu=0.0200");
    expect(names.some((n: string) => n && n.includes("MC"))).toBe(true);
  });

  it("uses log axes for the stationary figure and linear t for moments", () => {
    const st = figureById("stationary").build(GOLDEN);
    expect(st.option.xAxis[0].type).toBe("log");
    expect(st.option.yAxis[0].type).toBe("log");
    const mo = figureById("moments").build(GOLDEN);
    expect(mo.option.xAxis[0].type).toBe("value");
    expect(mo.option.yAxis[1].type).toBe("log"); // exponential-regime panel
  });

  it("drops nonpositive values from log-scaled series data", () => {
    const st = figureById("stationary").build(GOLDEN);
    for (const s of st.option.series) {
      if (s.type === "line" || s.type === "scatter") {
        for (const [, y] of s.data) expect(y).toBeGreaterThan(0);
      }
    }
  });

  it("places the speedup break-even line at 1", () => {
    const sp = figureById("speedup").build(GOLDEN);
    const breakEven = sp.option.series.find((s: any) => s.name === "break-even");
    expect(breakEven.data.every(([, y]: number[]) => y === 1.0)).toBe(true);
  });
});
