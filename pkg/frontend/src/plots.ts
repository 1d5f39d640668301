import { writeFileSync } from "fs";
import { column, parseCsv, requireRows, Table } from "./csv.js";
import { extent, figure, fmt, polyline, ramp, render } from "./svg.js";

export type PlotKind = "profiles-overlay" | "shear-decay-loglog" | "monitor-envelopes" | "leaf-fan";

export interface PlotSpec {
  kind: PlotKind;
  inputs: string[];
  limit?: string;
  out: string;
}

function load(paths: string[]): Table[] {
  return paths.map((p) => requireRows(parseCsv(p)));
}

/** psi(theta) snapshots with the closed-form limit dashed. */
export function profilesOverlay(spec: PlotSpec): string {
  const tables = load(spec.inputs);
  const limit = spec.limit ? requireRows(parseCsv(spec.limit)) : undefined;
  const all = tables.concat(limit ? [limit] : []);
  const xdom = extent(all.flatMap((t) => column(t, "theta")));
  const ydom = extent(all.flatMap((t) => column(t, "psi")));
  const fig = figure(xdom, ydom, {
    xlabel: "theta (rad)",
    ylabel: "psi",
    title: "profile snapshots toward the stationary limit",
  });
  tables.forEach((t, i) => {
    const c = ramp(tables.length > 1 ? i / (tables.length - 1) : 0);
    fig.body.push(
      polyline(column(t, "theta"), column(t, "psi"), fig.sx, fig.sy, `stroke="${c}" stroke-width="1.4"`),
    );
  });
  if (limit) {
    fig.body.push(
      polyline(
        column(limit, "theta"),
        column(limit, "psi"),
        fig.sx,
        fig.sy,
        `stroke="#000" stroke-width="1.6" stroke-dasharray="6 4"`,
      ),
    );
  }
  return render(fig);
}

/** sup|sigma| against t on log-log axes with a slope -1 reference.
 *  The decay window starts at t = 1; if the run converged before t = 1 the
 *  whole positive-t series is shown instead of failing. */
export function shearDecay(spec: PlotSpec): string {
  const table = load(spec.inputs)[0];
  const t = column(table, "t");
  const sig = column(table, "sup_sigma");
  let keep = t.map((ti, i) => [ti, sig[i]]).filter(([ti, si]) => ti >= 1 && si > 0);
  if (keep.length === 0) {
    keep = t.map((ti, i) => [ti, sig[i]]).filter(([ti, si]) => ti > 0 && si > 0);
  }
  if (keep.length === 0) {
    throw new Error(`empty series: no positive (t, sup_sigma) samples in ${table.file}`);
  }
  const xs = keep.map(([a]) => a);
  const ys = keep.map(([, b]) => b);
  const fig = figure(extent(xs), extent(ys), {
    xlabel: "t",
    ylabel: "sup |sigma|",
    title: "shear decay (log-log), reference slope -1",
    xlog: true,
    ylog: true,
  });
  fig.body.push(polyline(xs, ys, fig.sx, fig.sy, `stroke="#c22" stroke-width="1.6"`));
  // slope -1 reference through the first kept sample
  const c0 = ys[0] * xs[0];
  const refx = [xs[0], xs[xs.length - 1]];
  const refy = refx.map((x) => c0 / x);
  fig.body.push(
    polyline(refx, refy, fig.sx, fig.sy, `stroke="#888" stroke-width="1" stroke-dasharray="4 4"`),
  );
  return render(fig);
}

/** u_min/u_max band over time: the discrete maximum-principle envelope. */
export function monitorEnvelopes(spec: PlotSpec): string {
  const table = load(spec.inputs)[0];
  const t = column(table, "t");
  const lo = column(table, "u_min");
  const hi = column(table, "u_max");
  const fig = figure(extent(t), extent(lo.concat(hi)), {
    xlabel: "t",
    ylabel: "psi' / sin(2 theta)",
    title: "twist-quotient envelope u_min(t), u_max(t)",
  });
  const band =
    t.map((x, i) => `${fmt(fig.sx(x))},${fmt(fig.sy(hi[i]))}`).join(" ") +
    " " +
    t
      .slice()
      .reverse()
      .map((x, i) => `${fmt(fig.sx(x))},${fmt(fig.sy(lo[lo.length - 1 - i]))}`)
      .join(" ");
  fig.body.push(`<polygon fill="#cce0f5" stroke="none" points="${band}"/>`);
  fig.body.push(polyline(t, hi, fig.sx, fig.sy, `stroke="#246" stroke-width="1.4"`));
  fig.body.push(polyline(t, lo, fig.sx, fig.sy, `stroke="#246" stroke-width="1.4"`));
  return render(fig);
}

/** Steady leaves psi(theta), one polyline per leaf, colored by contact angle
 *  (read off as each leaf's largest theta sample). */
export function leafFan(spec: PlotSpec): string {
  const tables = load(spec.inputs);
  const withAngle = tables
    .map((tb) => {
      const theta = column(tb, "theta");
      return { tb, angle: theta[theta.length - 1] };
    })
    .sort((a, b) => a.angle - b.angle);
  const xdom = extent(tables.flatMap((tb) => column(tb, "theta")));
  const ydom = extent(tables.flatMap((tb) => column(tb, "psi")));
  const fig = figure(xdom, ydom, {
    xlabel: "theta (rad)",
    ylabel: "psi",
    title: "steady leaves colored by contact angle",
  });
  const a0 = withAngle[0].angle;
  const a1 = withAngle[withAngle.length - 1].angle;
  for (const { tb, angle } of withAngle) {
    const tcol = a1 > a0 ? (angle - a0) / (a1 - a0) : 0;
    fig.body.push(
      polyline(
        column(tb, "theta"),
        column(tb, "psi"),
        fig.sx,
        fig.sy,
        `stroke="${ramp(tcol)}" stroke-width="1.5"`,
      ),
    );
  }
  return render(fig);
}

const RENDERERS: Record<PlotKind, (spec: PlotSpec) => string> = {
  "profiles-overlay": profilesOverlay,
  "shear-decay-loglog": shearDecay,
  "monitor-envelopes": monitorEnvelopes,
  "leaf-fan": leafFan,
};

/** Render the requested plot kind and write the SVG; inputs are read-only. */
export function renderPlot(spec: PlotSpec): string {
  const renderer = RENDERERS[spec.kind];
  if (!renderer) {
    throw new Error(`unknown plot kind '${spec.kind}' (known: ${Object.keys(RENDERERS).join(", ")})`);
  }
  if (spec.inputs.length === 0) {
    throw new Error("no input CSV files given");
  }
  const svg = renderer(spec);
  writeFileSync(spec.out, svg, "utf-8");
  return svg;
}
