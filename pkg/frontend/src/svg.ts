/** Minimal deterministic SVG plotting: linear/log scales, axes, polylines.
 *  Numbers are formatted with fixed precision so re-rendering the same data
 *  reproduces the byte-identical file. */

export const WIDTH = 720;
export const HEIGHT = 480;
export const MARGIN = { left: 64, right: 16, top: 20, bottom: 44 };

export function fmt(x: number): string {
  if (!isFinite(x)) throw new Error(`non-finite coordinate: ${x}`);
  return x.toPrecision(8).replace(/\.?0+$/, "").replace(/\.?0+e/, "e");
}

export interface Scale {
  (x: number): number;
  domain: [number, number];
  ticks(): number[];
}

export function linearScale(domain: [number, number], range: [number, number]): Scale {
  const [d0, d1] = domain;
  const [r0, r1] = range;
  const span = d1 - d0 || 1;
  const f = ((x: number) => r0 + ((x - d0) / span) * (r1 - r0)) as Scale;
  f.domain = domain;
  f.ticks = () => {
    const raw = span / 5;
    const mag = Math.pow(10, Math.floor(Math.log10(Math.abs(raw))));
    const step = [1, 2, 5, 10].map((m) => m * mag).find((s) => span / s <= 6) ?? mag * 10;
    const out: number[] = [];
    for (let v = Math.ceil(d0 / step) * step; v <= d1 + 1e-12 * span; v += step) {
      out.push(Math.abs(v) < step * 1e-9 ? 0 : v);
    }
    return out;
  };
  return f;
}

export function logScale(domain: [number, number], range: [number, number]): Scale {
  const [d0, d1] = domain;
  if (d0 <= 0 || d1 <= 0) throw new Error(`log scale needs a positive domain, got [${d0}, ${d1}]`);
  const inner = linearScale([Math.log10(d0), Math.log10(d1)], range);
  const f = ((x: number) => inner(Math.log10(x))) as Scale;
  f.domain = domain;
  f.ticks = () => {
    const out: number[] = [];
    for (let e = Math.ceil(Math.log10(d0) - 1e-9); e <= Math.log10(d1) + 1e-9; e++) {
      out.push(Math.pow(10, e));
    }
    return out;
  };
  return f;
}

export function extent(values: number[]): [number, number] {
  let lo = Infinity;
  let hi = -Infinity;
  for (const v of values) {
    if (v < lo) lo = v;
    if (v > hi) hi = v;
  }
  if (!isFinite(lo) || !isFinite(hi)) throw new Error("cannot scale an empty or non-finite series");
  if (lo === hi) {
    lo -= 0.5;
    hi += 0.5;
  }
  return [lo, hi];
}

export function polyline(
  xs: number[],
  ys: number[],
  sx: Scale,
  sy: Scale,
  style: string,
): string {
  const pts = xs.map((x, i) => `${fmt(sx(x))},${fmt(sy(ys[i]))}`).join(" ");
  return `<polyline fill="none" ${style} points="${pts}"/>`;
}

/** Simple color ramp from dark blue to orange-red, deterministic. */
export function ramp(t: number): string {
  const r = Math.round(30 + 195 * t);
  const g = Math.round(60 + 80 * (1 - Math.abs(2 * t - 1)));
  const b = Math.round(200 - 170 * t);
  return `rgb(${r},${g},${b})`;
}

export interface Figure {
  body: string[];
  sx: Scale;
  sy: Scale;
}

export function figure(
  xdom: [number, number],
  ydom: [number, number],
  opts: { xlabel: string; ylabel: string; title: string; xlog?: boolean; ylog?: boolean },
): Figure {
  const sx = (opts.xlog ? logScale : linearScale)(xdom, [MARGIN.left, WIDTH - MARGIN.right]);
  const sy = (opts.ylog ? logScale : linearScale)(ydom, [HEIGHT - MARGIN.bottom, MARGIN.top]);
  const body: string[] = [];
  body.push(`<rect width="${WIDTH}" height="${HEIGHT}" fill="white"/>`);
  const x0 = MARGIN.left;
  const x1 = WIDTH - MARGIN.right;
  const y0 = HEIGHT - MARGIN.bottom;
  const y1 = MARGIN.top;
  for (const t of sx.ticks()) {
    const px = fmt(sx(t));
    body.push(`<line x1="${px}" y1="${y0}" x2="${px}" y2="${y1}" stroke="#eee"/>`);
    const label = opts.xlog ? `1e${Math.round(Math.log10(t))}` : fmt(t);
    body.push(
      `<text x="${px}" y="${y0 + 18}" font-size="11" text-anchor="middle" fill="#333">${label}</text>`,
    );
  }
  for (const t of sy.ticks()) {
    const py = fmt(sy(t));
    body.push(`<line x1="${x0}" y1="${py}" x2="${x1}" y2="${py}" stroke="#eee"/>`);
    const label = opts.ylog ? `1e${Math.round(Math.log10(t))}` : fmt(t);
    body.push(
      `<text x="${x0 - 6}" y="${py}" font-size="11" text-anchor="end" dominant-baseline="middle" fill="#333">${label}</text>`,
    );
  }
  body.push(`<line x1="${x0}" y1="${y0}" x2="${x1}" y2="${y0}" stroke="#000"/>`);
  body.push(`<line x1="${x0}" y1="${y0}" x2="${x0}" y2="${y1}" stroke="#000"/>`);
  body.push(
    `<text x="${(x0 + x1) / 2}" y="${HEIGHT - 8}" font-size="13" text-anchor="middle">${opts.xlabel}</text>`,
  );
  body.push(
    `<text x="14" y="${(y0 + y1) / 2}" font-size="13" text-anchor="middle" transform="rotate(-90 14 ${(y0 + y1) / 2})">${opts.ylabel}</text>`,
  );
  body.push(`<text x="${(x0 + x1) / 2}" y="14" font-size="14" text-anchor="middle">${opts.title}</text>`);
  return { body, sx, sy };
}

export function render(fig: Figure): string {
  return (
    `<svg xmlns="http://www.w3.org/2000/svg" width="${WIDTH}" height="${HEIGHT}" viewBox="0 0 ${WIDTH} ${HEIGHT}">\n` +
    fig.body.join("\n") +
    "\n</svg>\n"
  );
}
