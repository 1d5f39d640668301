#!/usr/bin/env node
import { PlotKind, PlotSpec, renderPlot } from "./plots.js";

const USAGE = `usage: neutralflow-plotviz <kind> <input.csv...> [--limit limit.csv] --out figure.svg
kinds: profiles-overlay, shear-decay-loglog, monitor-envelopes, leaf-fan`;

export function parseArgs(argv: string[]): PlotSpec {
  if (argv.length === 0) throw new Error(USAGE);
  const kind = argv[0] as PlotKind;
  const inputs: string[] = [];
  let out: string | undefined;
  let limit: string | undefined;
  for (let i = 1; i < argv.length; i++) {
    const a = argv[i];
    if (a === "--out") out = argv[++i];
    else if (a === "--limit") limit = argv[++i];
    else if (a.startsWith("--")) throw new Error(`unknown flag ${a}\n${USAGE}`);
    else inputs.push(a);
  }
  if (!out) throw new Error(`--out is required\n${USAGE}`);
  return { kind, inputs, limit, out };
}

export function main(argv: string[]): number {
  try {
    const spec = parseArgs(argv);
    renderPlot(spec);
    console.log(`wrote ${spec.out}`);
    return 0;
  } catch (err) {
    console.error(err instanceof Error ? err.message : String(err));
    return 1;
  }
}

if (process.argv[1] && process.argv[1].endsWith("main.js")) {
  process.exit(main(process.argv.slice(2)));
}
