import * as fs from "fs";
import * as os from "os";
import * as path from "path";
import { describe, expect, it } from "vitest";

import { FIGURES, figureById } from "../src/figures";
import { renderFigure, renderSvg } from "../src/render";

const GOLDEN = path.join(__dirname, "..", "testdata", "golden");

function normalizeIds(svg: string): string {
  // zrender assigns style-class ids from a process-global counter
  return svg.replace(/zr\d+-c(?:ls-)?\d+/g, "zr-id");
}

describe("rendering", () => {
  it("writes all seven figures from the golden artifacts", () => {
    const out = fs.mkdtempSync(path.join(os.tmpdir(), "figuregen-out-"));
    for (const spec of FIGURES) {
      const res = renderFigure(spec, GOLDEN, out);
      const svg = fs.readFileSync(res.path, "utf-8");
      expect(svg.startsWith("<svg")).toBe(true);
      expect(svg.length).toBeGreaterThan(2000);
    }
    expect(fs.readdirSync(out)).toHaveLength(7);
  });

  it("is a pure function of its inputs (identical SVG modulo class ids)", () => {
    const spec = figureById("boundary");
    const a = renderSvg(spec.build(GOLDEN));
    const b = renderSvg(spec.build(GOLDEN));
    expect(normalizeIds(a)).toBe(normalizeIds(b));
  });

  it("renders without non-finite coordinates", () => {
    for (const spec of FIGURES) {
      const svg = renderSvg(spec.build(GOLDEN));
      expect(svg).not.toContain("Infinity");
      expect(svg).not.toContain("NaN");
    }
  });

  it("draws error-bar whiskers for Monte Carlo columns", () => {
    const built = figureById("stationary").build(GOLDEN);
    const custom = built.option.series.find((s: any) => s.type === "custom");
    expect(custom.data.length).toBeGreaterThan(5);
    const api = {
      value: (i: number) => [2.0, 0.5, 0.1][i],
      coord: ([x, y]: number[]) => [x * 10, 100 - y * 10],
      visual: () => "#123456",
    };
    const group = custom.renderItem({}, api);
    expect(group.type).toBe("group");
    expect(group.children).toHaveLength(3); // stem and two caps
    expect(group.children.every((c: any) => c.type === "line")).toBe(true);
  });
});
