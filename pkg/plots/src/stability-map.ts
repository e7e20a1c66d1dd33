import { numbers, readCsv, requireColumns } from "./csv";
import {
  BLACK,
  Raster,
  STABLE,
  Scale,
  UNSTABLE,
  fmt,
  writeMeta,
} from "./raster";

export type AxisTransform = "sqrt" | "linear";

interface Cell {
  h: number;
  tau: number;
  classification: string;
  px: number;
  py: number;
}

/** Midpoint-bounded band edges around each sorted coordinate value. */
function bandEdges(sorted: number[]): Array<[number, number]> {
  return sorted.map((v, i) => {
    const lo = i === 0 ? v - (sorted[1] !== undefined ? (sorted[1] - v) / 2 : 0.5) : (sorted[i - 1] + v) / 2;
    const hi =
      i === sorted.length - 1
        ? v + (i > 0 ? (v - sorted[i - 1]) / 2 : 0.5)
        : (v + sorted[i + 1]) / 2;
    return [lo, hi];
  });
}

/**
 * Two-color raster of scan cells in either the (sqrt h, tau) or (h, tau)
 * plane.  Writes the PNG plus a JSON sidecar recording the axis transform
 * and the pixel position of every cell, so the geometry is verifiable.
 */
export function renderStabilityMap(
  csvPath: string,
  outPath: string,
  transform: AxisTransform,
  width = 640,
  height = 480,
): void {
  const rows = readCsv(csvPath);
  requireColumns(rows, ["h", "tau", "classification"], csvPath);
  const hs = numbers(rows, "h");
  const taus = numbers(rows, "tau");
  const tx = (h: number) => (transform === "sqrt" ? Math.sqrt(h) : h);

  const uniqueH = [...new Set(hs)].sort((a, b) => a - b);
  const uniqueTau = [...new Set(taus)].sort((a, b) => a - b);
  const hEdges = bandEdges(uniqueH.map(tx));
  const tauEdges = bandEdges(uniqueTau);

  const xLo = Math.min(...hEdges.map((e) => e[0]));
  const xHi = Math.max(...hEdges.map((e) => e[1]));
  const yLo = Math.min(...tauEdges.map((e) => e[0]));
  const yHi = Math.max(...tauEdges.map((e) => e[1]));

  const margin = { left: 50, right: 15, top: 15, bottom: 35 };
  const raster = new Raster(width, height);
  const x = new Scale(xLo, xHi, margin.left, width - margin.right);
  const y = new Scale(yLo, yHi, height - margin.bottom, margin.top);

  const cells: Cell[] = [];
  rows.forEach((row, i) => {
    const h = hs[i];
    const tau = taus[i];
    const hi = uniqueH.indexOf(h);
    const ti = uniqueTau.indexOf(tau);
    const [ex0, ex1] = hEdges[hi];
    const [ey0, ey1] = tauEdges[ti];
    const color = row.classification === "unstable" ? UNSTABLE : STABLE;
    const px0 = x.apply(ex0);
    const px1 = x.apply(ex1);
    const py1 = y.apply(ey0);
    const py0 = y.apply(ey1);
    raster.fillRect(px0, py0, px1 - px0 + 1, py1 - py0 + 1, color);
    cells.push({
      h,
      tau,
      classification: row.classification,
      px: Math.round(x.apply(tx(h))),
      py: Math.round(y.apply(tau)),
    });
  });

  raster.line(x.p0, y.p0, x.p1, y.p0, BLACK);
  raster.line(x.p0, y.p0, x.p0, y.p1, BLACK);
  const xLabel = transform === "sqrt" ? "sqrt h" : "h";
  raster.text(width - margin.right - 6 * (xLabel.length + 1), y.p0 + 12, xLabel);
  raster.text(x.p0 + 4, margin.top, "tau");
  for (const v of uniqueH) {
    raster.text(x.apply(tx(v)) - 10, y.p0 + 14, fmt(tx(v)));
  }
  for (const v of [uniqueTau[0], uniqueTau[uniqueTau.length - 1]]) {
    raster.text(2, y.apply(v) - 3, fmt(v));
  }

  raster.writePng(outPath);
  writeMeta(outPath, {
    kind: `stability-map-${transform}`,
    source: csvPath,
    axis_transform: transform,
    x_axis: { data0: xLo, data1: xHi, pixel0: x.p0, pixel1: x.p1 },
    y_axis: { data0: yLo, data1: yHi, pixel0: y.p0, pixel1: y.p1 },
    cells,
  });
}
