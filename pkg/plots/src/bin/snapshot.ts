import { numbers, parseArgs, readCsv, requireColumns } from "../csv";
import { SERIES, extent, fmt, makeFrame, writeMeta } from "../raster";

// Interface profiles (x, y) from a surface-wave snapshot CSV, one curve per
// snapshot time.

const { csv, out } = parseArgs(process.argv.slice(2));
const rows = readCsv(csv);
requireColumns(rows, ["t", "x", "y"], csv);

const times = [...new Set(rows.map((r) => r.t))];
const xs = numbers(rows, "x");
const ys = numbers(rows, "y");
const frame = makeFrame(720, 420, extent(xs), extent(ys, 0.15), "x", "y");

times.forEach((t, ti) => {
  const group = rows.filter((r) => r.t === t);
  const gx = numbers(group, "x");
  const gy = numbers(group, "y");
  const color = SERIES[ti % SERIES.length];
  for (let i = 1; i < gx.length; i++) {
    frame.raster.line(
      frame.x.apply(gx[i - 1]),
      frame.y.apply(gy[i - 1]),
      frame.x.apply(gx[i]),
      frame.y.apply(gy[i]),
      color,
    );
  }
  frame.raster.text(60, 20 + 12 * ti, `t = ${fmt(Number(t))}`, color);
});

frame.raster.writePng(out);
writeMeta(out, {
  kind: "snapshot",
  source: csv,
  times: times.map(Number),
  points_per_time: rows.length / times.length,
});
console.log(`wrote ${out} with ${times.length} profile(s)`);
