import { numbers, parseArgs, readCsv, requireColumns } from "../csv";
import { BLACK, SERIES, extent, fmt, makeFrame, writeMeta } from "../raster";

// Log-log error plot of the temporal sweeps in a convergence CSV, one series
// per scheme, annotated with the fitted slope of each.

const { csv, out } = parseArgs(process.argv.slice(2));
const rows = readCsv(csv);
requireColumns(rows, ["sweep", "scheme", "n", "tau", "error"], csv);

const temporal = rows.filter((r) => r.sweep === "temporal");
if (temporal.length === 0) {
  throw new Error(`${csv} has no temporal-sweep rows`);
}
const schemes = [...new Set(temporal.map((r) => r.scheme))];

const lx = numbers(temporal, "tau").map(Math.log10);
const ly = numbers(temporal, "error").map(Math.log10);
const frame = makeFrame(640, 480, extent(lx), extent(ly), "log10 tau", "log10 error");

function fitSlope(xs: number[], ys: number[]): number {
  const n = xs.length;
  const mx = xs.reduce((a, b) => a + b, 0) / n;
  const my = ys.reduce((a, b) => a + b, 0) / n;
  let num = 0;
  let den = 0;
  for (let i = 0; i < n; i++) {
    num += (xs[i] - mx) * (ys[i] - my);
    den += (xs[i] - mx) ** 2;
  }
  return num / den;
}

const slopes: Record<string, number> = {};
schemes.forEach((scheme, si) => {
  const rowsFor = temporal.filter((r) => r.scheme === scheme);
  const xs = numbers(rowsFor, "tau").map(Math.log10);
  const ys = numbers(rowsFor, "error").map(Math.log10);
  const color = SERIES[si % SERIES.length];
  const pts = xs
    .map((x, i) => ({ x, y: ys[i] }))
    .sort((a, b) => a.x - b.x);
  for (let i = 1; i < pts.length; i++) {
    frame.raster.line(
      frame.x.apply(pts[i - 1].x),
      frame.y.apply(pts[i - 1].y),
      frame.x.apply(pts[i].x),
      frame.y.apply(pts[i].y),
      color,
    );
  }
  for (const p of pts) {
    frame.raster.disc(frame.x.apply(p.x), frame.y.apply(p.y), 3, color);
  }
  const slope = fitSlope(xs, ys);
  slopes[scheme] = slope;
  frame.raster.text(60, 20 + 12 * si, `${scheme} slope ${fmt(slope)}`, color);
});

frame.raster.writePng(out);
writeMeta(out, { kind: "convergence-loglog", source: csv, slopes });
console.log(
  `wrote ${out}; slopes ` +
    Object.entries(slopes)
      .map(([k, v]) => `${k}=${v.toFixed(2)}`)
      .join(", "),
);
