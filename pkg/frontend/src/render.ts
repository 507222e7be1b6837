import * as fs from "fs";
import * as path from "path";
import * as echarts from "echarts";

import { BuiltFigure, FigureSpec } from "./figures";

export const WIDTH = 960;
export const HEIGHT = 560;

/** Render a built figure option to an SVG string (headless, no DOM). */
export function renderSvg(built: BuiltFigure): string {
  const chart = echarts.init(null as any, null, {
    renderer: "svg",
    ssr: true,
    width: WIDTH,
    height: HEIGHT,
  });
  try {
    chart.setOption(built.option);
    return chart.renderToSVGString();
  } finally {
    chart.dispose();
  }
}

export interface RenderResult {
  id: string;
  path: string;
  seriesCount: number;
}

/** Build and write one figure; returns what was written. */
export function renderFigure(
  spec: FigureSpec, inDir: string, outDir: string
): RenderResult {
  const built = spec.build(inDir);
  const svg = renderSvg(built);
  fs.mkdirSync(outDir, { recursive: true });
  const file = path.join(outDir, `${spec.id}.svg`);
  fs.writeFileSync(file, svg, "utf-8");
  return { id: spec.id, path: file, seriesCount: built.seriesCount };
}
