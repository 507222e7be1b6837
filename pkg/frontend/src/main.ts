#!/usr/bin/env node
/**
 * figuregen: render the figure set from the producer CLI's artifacts.
 *
 *   figuregen --all --in data/ --out figs/
 *   figuregen --figure stationary --in data/ --out figs/
 */

import { InputError } from "./csv";
import { FIGURES, figureById } from "./figures";
import { renderFigure } from "./render";

interface Args {
  all: boolean;
  figures: string[];
  inDir: string;
  outDir: string;
}

function parseArgs(argv: string[]): Args {
  const args: Args = { all: false, figures: [], inDir: "data", outDir: "figs" };
  for (let i = 0; i < argv.length; i++) {
    const a = argv[i];
    if (a === "--all") args.all = true;
    else if (a === "--figure") args.figures.push(argv[++i]);
    else if (a === "--in") args.inDir = argv[++i];
    else if (a === "--out") args.outDir = argv[++i];
    else if (a === "--help" || a === "-h") {
      console.log(
        "usage: figuregen (--all | --figure <id> ...) [--in DIR] [--out DIR]\n" +
          `figures: ${FIGURES.map((f) => f.id).join(", ")}`
      );
      process.exit(0);
    } else {
      console.error(`unknown argument: ${a}`);
      process.exit(2);
    }
  }
  if (!args.all && args.figures.length === 0) {
    console.error("nothing to do: pass --all or --figure <id>");
    process.exit(2);
  }
  return args;
}

function main() {
  const args = parseArgs(process.argv.slice(2));
  const specs = args.all ? FIGURES : args.figures.map(figureById);
  for (const spec of specs) {
    try {
      const res = renderFigure(spec, args.inDir, args.outDir);
      console.log(`${res.id}: ${res.path} (${res.seriesCount} series)`);
    } catch (err) {
      if (err instanceof InputError) {
        console.error(`${spec.id}: ${err.message}`);
        process.exit(1);
      }
      throw err;
    }
  }
}

main();
