/**
 * The seven figure specifications: which CLI artifacts feed each figure,
 * how axes are scaled, and how the echarts option is assembled.
 *
 * Analytic data renders as lines, Monte Carlo data as markers with error
 * bars; the plotter never computes model quantities, it only reshapes the
 * producer's numbers (log filtering and error-bar geometry aside).
 */

import { Table, column, hasColumn, loadCsv, loadJson, manifestParams } from "./csv";

export interface InputSpec {
  file: string;
  producedBy: string;
}

export interface BuiltFigure {
  option: any;
  seriesCount: number;
}

export interface FigureSpec {
  id: string;
  title: string;
  inputs: InputSpec[];
  build(dir: string): BuiltFigure;
}

const PALETTE = ["#3366cc", "#2a9d3f", "#d62f2f", "#9141ac", "#e8871e", "#15a3a3"];

function pts(xs: number[], ys: number[], logSafe: boolean): [number, number][] {
  // on log axes, drop nonpositive values and cap the dynamic range at 8
  // decades below the series peak: deeper tails carry no visual information
  // and ranges beyond ~12 decades break echarts' log tick generation
  const floor = logSafe ? Math.max(...ys.filter(Number.isFinite)) * 1e-8 : -Infinity;
  const out: [number, number][] = [];
  for (let i = 0; i < xs.length; i++) {
    const ok = Number.isFinite(xs[i]) && Number.isFinite(ys[i]) &&
      (!logSafe || ys[i] > floor);
    if (ok) out.push([xs[i], ys[i]]);
  }
  return out;
}

function line(
  name: string, xs: number[], ys: number[],
  opts: { color?: string; dashed?: boolean; axis?: number; logSafe?: boolean } = {}
): any {
  return {
    name,
    type: "line",
    showSymbol: false,
    xAxisIndex: opts.axis ?? 0,
    yAxisIndex: opts.axis ?? 0,
    lineStyle: { width: 2, type: opts.dashed ? "dashed" : "solid" },
    color: opts.color,
    data: pts(xs, ys, opts.logSafe ?? false),
  };
}

function markers(
  name: string, xs: number[], ys: number[],
  opts: { color?: string; axis?: number; logSafe?: boolean; symbol?: string } = {}
): any {
  return {
    name,
    type: "scatter",
    symbol: opts.symbol ?? "circle",
    symbolSize: opts.symbol === "pin" ? 14 : 7,
    xAxisIndex: opts.axis ?? 0,
    yAxisIndex: opts.axis ?? 0,
    color: opts.color,
    data: pts(xs, ys, opts.logSafe ?? false),
  };
}

/** Vertical error bars: one custom series per marker series. */
function errorBars(
  xs: number[], ys: number[], se: number[],
  opts: { color?: string; axis?: number; logY?: boolean } = {}
): any {
  const rows: [number, number, number][] = [];
  for (let i = 0; i < xs.length; i++) {
    if (Number.isFinite(ys[i]) && se[i] > 0 && (!opts.logY || ys[i] > 0)) {
      rows.push([xs[i], ys[i], se[i]]);
    }
  }
  const logY = opts.logY ?? false;
  return {
    type: "custom",
    silent: true,
    xAxisIndex: opts.axis ?? 0,
    yAxisIndex: opts.axis ?? 0,
    itemStyle: { color: opts.color ?? "#555" },
    renderItem: (_params: any, api: any) => {
      const x = api.value(0) as number;
      const y = api.value(1) as number;
      const s = api.value(2) as number;
      const lo = logY ? Math.max(y - s, y * 0.05) : y - s;
      const top = api.coord([x, y + s]);
      const bot = api.coord([x, lo]);
      const style = { stroke: api.visual("color"), fill: undefined as any, lineWidth: 1 };
      const w = 3;
      return {
        type: "group",
        children: [
          { type: "line", shape: { x1: top[0], y1: top[1], x2: bot[0], y2: bot[1] }, style },
          { type: "line", shape: { x1: top[0] - w, y1: top[1], x2: top[0] + w, y2: top[1] }, style },
          { type: "line", shape: { x1: bot[0] - w, y1: bot[1], x2: bot[0] + w, y2: bot[1] }, style },
        ],
      };
    },
    data: rows,
  };
}

function axis(type: "value" | "log", name: string, gridIndex = 0): any {
  return { type, name, gridIndex, nameLocation: "middle", nameGap: 28 };
}

function baseOption(title: string, series: any[], xAxes: any[], yAxes: any[], grids?: any[]): any {
  return {
    animation: false,
    backgroundColor: "#ffffff",
    title: { text: title, left: "center" },
    legend: { bottom: 0, type: "scroll" },
    grid: grids ?? [{ left: 70, right: 30, top: 50, bottom: 70 }],
    xAxis: xAxes,
    yAxis: yAxes,
    series,
  };
}

/** line + optional markers + optional error bars for one curve family. */
function curveFamily(
  t: Table, producedBy: string, xCol: string, yCol: string,
  mcCol: string, seCol: string, name: string, color: string,
  axisIndex: number, logY: boolean
): any[] {
  const xs = column(t, xCol, producedBy);
  const out: any[] = [
    line(name, xs, column(t, yCol, producedBy),
         { color, axis: axisIndex, logSafe: logY }),
  ];
  if (hasColumn(t, mcCol)) {
    out.push(markers(`${name} (MC)`, xs, column(t, mcCol, producedBy),
                     { color, axis: axisIndex, logSafe: logY }));
    if (hasColumn(t, seCol)) {
      out.push(errorBars(xs, column(t, mcCol, producedBy),
                         column(t, seCol, producedBy),
                         { color, axis: axisIndex, logY }));
    }
  }
  return out;
}

const CMD = {
  stationary: "gbmflow stationary",
  moments: "gbmflow moments",
  logmoments: "gbmflow logmoments",
  boundary: "gbmflow boundary",
  fpt: "gbmflow fpt",
  mfpt: "gbmflow mfpt",
  speedup: "gbmflow speedup",
};

function paramLabel(params: any, keys: string[]): string {
  const bits = keys
    .filter((k) => params[k] !== undefined)
    .map((k) => `${k}=${Number(params[k]).toPrecision(3)}`);
  return bits.join(", ");
}

// --- figure: stationary double power law -------------------------------

const stationarySpec: FigureSpec = {
  id: "stationary",
  title: "Stationary density with entry-exit turnover",
  inputs: [
    { file: "stationary_blue.csv", producedBy: CMD.stationary },
    { file: "stationary_green.csv", producedBy: CMD.stationary },
  ],
  build(dir) {
    const series: any[] = [];
    this.inputs.forEach((inp, i) => {
      const t = loadCsv(dir, inp.file, inp.producedBy);
      const params = manifestParams(dir, inp.file);
      const name = paramLabel(params, ["mu", "sigma"]) || inp.file;
      series.push(...curveFamily(t, inp.producedBy, "x", "f_analytic",
                                 "f_mc", "f_mc_se", name, PALETTE[i], 0, true));
    });
    const option = baseOption(this.title, series,
      [axis("log", "x")], [axis("log", "stationary density")]);
    return { option, seriesCount: series.length };
  },
};

// --- figure: mean and MSD in the three regimes --------------------------

const momentsSpec: FigureSpec = {
  id: "moments",
  title: "Mean and MSD: saturating, exponential, and linear regimes",
  inputs: [
    { file: "moments_saturating.csv", producedBy: CMD.moments },
    { file: "moments_exponential.csv", producedBy: CMD.moments },
    { file: "moments_linear.csv", producedBy: CMD.moments },
  ],
  build(dir) {
    const series: any[] = [];
    const panelLog = [false, true, false];
    this.inputs.forEach((inp, panel) => {
      const t = loadCsv(dir, inp.file, inp.producedBy);
      const logY = panelLog[panel];
      series.push(...curveFamily(t, inp.producedBy, "t", "mean", "mean_mc",
                                 "mean_se", `mean (${"abc"[panel]})`,
                                 PALETTE[0], panel, logY));
      series.push(...curveFamily(t, inp.producedBy, "t", "msd", "msd_mc",
                                 "msd_se", `MSD (${"abc"[panel]})`,
                                 PALETTE[2], panel, logY));
    });
    const grids = [0, 1, 2].map((i) => ({
      left: `${6 + i * 33}%`, width: "26%", top: 60, bottom: 70,
    }));
    const xAxes = [0, 1, 2].map((i) => axis("value", "t", i));
    const yAxes = [0, 1, 2].map((i) => axis(panelLog[i] ? "log" : "value",
                                            i === 0 ? "moment" : "", i));
    const option = baseOption(this.title, series, xAxes, yAxes, grids);
    return { option, seriesCount: series.length };
  },
};

// --- figure: log-moments with stationary asymptotes ---------------------

const logmomentsSpec: FigureSpec = {
  id: "logmoments",
  title: "Log-mean and log-MSD relaxing to their stationary values",
  inputs: [{ file: "logmoments.csv", producedBy: CMD.logmoments }],
  build(dir) {
    const inp = this.inputs[0];
    const t = loadCsv(dir, inp.file, inp.producedBy);
    const ts = column(t, "t", inp.producedBy);
    const series: any[] = [
      ...curveFamily(t, inp.producedBy, "t", "log_mean", "log_mean_mc",
                     "log_mean_se", "log-mean", PALETTE[0], 0, false),
      ...curveFamily(t, inp.producedBy, "t", "log_msd", "log_msd_mc",
                     "log_msd_se", "log-MSD", PALETTE[2], 0, false),
    ];
    const manifest = loadJson(dir, inp.file.replace(/\.csv$/, ".manifest.json"));
    const asym = manifest?.asymptotes;
    if (asym) {
      const flat = (v: number) => ts.map(() => v);
      series.push(line("log-mean asymptote", ts, flat(asym.log_mean),
                       { color: PALETTE[0], dashed: true }));
      series.push(line("log-MSD asymptote", ts, flat(asym.log_msd),
                       { color: PALETTE[2], dashed: true }));
    }
    const option = baseOption(this.title, series,
      [axis("value", "t")], [axis("value", "log-moment")]);
    return { option, seriesCount: series.length };
  },
};

// --- figure: relaxation core boundary ------------------------------------

const boundarySpec: FigureSpec = {
  id: "boundary",
  title: "Spread of the relaxed core between transient regions",
  inputs: [{ file: "boundary.csv", producedBy: CMD.boundary }],
  build(dir) {
    const inp = this.inputs[0];
    const t = loadCsv(dir, inp.file, inp.producedBy);
    const ts = column(t, "t", inp.producedBy);
    const series = [
      line("lower boundary", ts, column(t, "x_low", inp.producedBy),
           { color: PALETTE[0], logSafe: true }),
      line("upper boundary", ts, column(t, "x_high", inp.producedBy),
           { color: PALETTE[2], logSafe: true }),
    ];
    const option = baseOption(this.title, series,
      [axis("value", "t")], [axis("log", "x")]);
    return { option, seriesCount: series.length };
  },
};

// --- figure: MFPT scans and the optimal exit-rate locus ------------------

const mfptSpec: FigureSpec = {
  id: "mfpt",
  title: "MFPT over the exit rate (left); optimal exit rate vs alpha (right)",
  inputs: [
    { file: "mfpt.csv", producedBy: CMD.mfpt },
    { file: "mfpt_locus.csv", producedBy: `${CMD.mfpt} --optimal-locus` },
  ],
  build(dir) {
    const scan = loadCsv(dir, this.inputs[0].file, this.inputs[0].producedBy);
    const locus = loadCsv(dir, this.inputs[1].file, this.inputs[1].producedBy);
    const alphas = column(scan, "alpha", CMD.mfpt);
    const lams = column(scan, "lambda_m", CMD.mfpt);
    const mfpts = column(scan, "mfpt", CMD.mfpt);
    const series: any[] = [];
    const uniq = [...new Set(alphas)];
    uniq.forEach((a, i) => {
      const sel = alphas.map((v, j) => j).filter((j) => alphas[j] === a);
      series.push(line(`alpha=${a}`, sel.map((j) => lams[j]),
                       sel.map((j) => mfpts[j]),
                       { color: PALETTE[i % PALETTE.length], logSafe: true }));
    });
    const summary = loadJson(dir, "mfpt_summary.json");
    if (summary?.optima) {
      const opt = Object.values(summary.optima) as any[];
      series.push(markers("optima", opt.map((o) => o.lambda_m_star),
                          opt.map((o) => o.mfpt_star),
                          { color: "#caa002", symbol: "diamond", logSafe: true }));
    }
    // right panel: the optimal exit rate as a function of alpha
    series.push(line(
      "optimal exit rate",
      column(locus, "alpha", CMD.mfpt),
      column(locus, "lambda_m_star", CMD.mfpt),
      { color: PALETTE[3], axis: 1 }
    ));
    const grids = [
      { left: "7%", width: "40%", top: 60, bottom: 70 },
      { left: "58%", width: "36%", top: 60, bottom: 70 },
    ];
    const xAxes = [axis("log", "exit rate", 0), axis("value", "alpha", 1)];
    const yAxes = [axis("value", "MFPT", 0), axis("value", "optimal exit rate", 1)];
    const option = baseOption(this.title, series, xAxes, yAxes, grids);
    return { option, seriesCount: series.length };
  },
};

// --- figure: speed-up ratio against optimized resetting ------------------

const speedupSpec: FigureSpec = {
  id: "speedup",
  title: "Optimized entry-exit vs optimized resetting",
  inputs: [{ file: "speedup.csv", producedBy: CMD.speedup }],
  build(dir) {
    const inp = this.inputs[0];
    const t = loadCsv(dir, inp.file, inp.producedBy);
    const alphas = column(t, "alpha", inp.producedBy);
    const eps = column(t, "epsilon", inp.producedBy);
    const series: any[] = [
      line("speed-up ratio", alphas, eps, { color: PALETTE[0] }),
      line("break-even", alphas, alphas.map(() => 1.0),
           { color: "#888", dashed: true }),
    ];
    const summary = loadJson(dir, "speedup_summary.json");
    if (summary?.alpha_c !== undefined) {
      series.push(markers("alpha_c", [summary.alpha_c], [1.0],
                          { color: "#caa002", symbol: "diamond" }));
    }
    const option = baseOption(this.title, series,
      [axis("value", "alpha")], [axis("value", "MFPT ratio")]);
    return { option, seriesCount: series.length };
  },
};

// --- figure: first-passage densities --------------------------------------

const fptSpec: FigureSpec = {
  id: "fpt",
  title: "First-passage densities: free process (left), with entry-exit (right)",
  inputs: [
    { file: "fpt_free_x3.csv", producedBy: CMD.fpt },
    { file: "fpt_free_x4.csv", producedBy: CMD.fpt },
    { file: "fpt_free_x5.csv", producedBy: CMD.fpt },
    { file: "fpt_open_lm04.csv", producedBy: `${CMD.fpt} --mode open` },
    { file: "fpt_open_lm08.csv", producedBy: `${CMD.fpt} --mode open` },
    { file: "fpt_open_lm12.csv", producedBy: `${CMD.fpt} --mode open` },
  ],
  build(dir) {
    const series: any[] = [];
    this.inputs.forEach((inp, i) => {
      const panel = i < 3 ? 0 : 1;
      const t = loadCsv(dir, inp.file, inp.producedBy);
      const params = manifestParams(dir, inp.file);
      const name = panel === 0
        ? `x_T=${params.x_target ?? "?"}`
        : `lambda_m=${params.lambda_m ?? "?"}`;
      series.push(...curveFamily(t, inp.producedBy, "t", "p_analytic",
                                 "p_mc", "p_mc_se", name,
                                 PALETTE[i % 3], panel, false));
    });
    const grids = [
      { left: "7%", width: "40%", top: 60, bottom: 70 },
      { left: "58%", width: "36%", top: 60, bottom: 70 },
    ];
    const xAxes = [axis("value", "t", 0), axis("value", "t", 1)];
    const yAxes = [axis("value", "FPT density", 0), axis("value", "", 1)];
    const option = baseOption(this.title, series, xAxes, yAxes, grids);
    return { option, seriesCount: series.length };
  },
};

export const FIGURES: FigureSpec[] = [
  stationarySpec,
  momentsSpec,
  logmomentsSpec,
  boundarySpec,
  mfptSpec,
  speedupSpec,
  fptSpec,
];

export function figureById(id: string): FigureSpec {
  const spec = FIGURES.find((f) => f.id === id);
  if (!spec) {
    throw new Error(
      `unknown figure '${id}'; known: ${FIGURES.map((f) => f.id).join(", ")}`
    );
  }
  return spec;
}
