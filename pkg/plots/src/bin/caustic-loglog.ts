import { numbers, parseArgs, readCsv, requireColumns } from "../csv";
import { GREY, SERIES, extent, fmt, makeFrame, writeMeta } from "../raster";

// Peak amplitude against the inverse oscillation scale on log2 axes, with a
// slope-one reference line for comparison.

const { csv, out } = parseArgs(process.argv.slice(2));
const rows = readCsv(csv);
requireColumns(rows, ["epsilon", "max_amplitude"], csv);

const lx = numbers(rows, "epsilon").map((e) => Math.log2(1 / e));
const ly = numbers(rows, "max_amplitude").map(Math.log2);
const frame = makeFrame(560, 440, extent(lx), extent(ly, 0.15),
  "log2 1/eps", "log2 max|u|");

// reference line of slope one anchored at the first data point
const x0 = Math.min(...lx);
const y0 = ly[lx.indexOf(x0)];
const x1 = Math.max(...lx);
frame.raster.line(
  frame.x.apply(x0),
  frame.y.apply(y0),
  frame.x.apply(x1),
  frame.y.apply(y0 + (x1 - x0)),
  GREY,
);
frame.raster.text(60, 20, "slope 1 reference", GREY);

const color = SERIES[0];
const pts = lx.map((x, i) => ({ x, y: ly[i] })).sort((a, b) => a.x - b.x);
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

frame.raster.writePng(out);
writeMeta(out, {
  kind: "caustic-loglog",
  source: csv,
  reference_slope: 1,
  points: pts,
});
console.log(`wrote ${out} (${pts.length} points, slope-1 reference drawn)`);
