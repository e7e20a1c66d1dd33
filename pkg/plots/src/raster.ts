import { writeFileSync } from "fs";
import { PNG } from "pngjs";
import { GLYPH_HEIGHT, GLYPH_WIDTH, glyph } from "./font";

export type Color = [number, number, number];

export const WHITE: Color = [255, 255, 255];
export const BLACK: Color = [20, 20, 20];
export const GREY: Color = [170, 170, 170];
export const STABLE: Color = [240, 200, 60]; // warm cell
export const UNSTABLE: Color = [40, 70, 180]; // cold cell
export const SERIES: Color[] = [
  [40, 70, 180],
  [200, 60, 50],
  [30, 140, 70],
  [150, 60, 170],
  [220, 130, 30],
  [60, 160, 180],
];

/** Minimal RGB raster with just enough drawing for the figure scripts. */
export class Raster {
  readonly width: number;
  readonly height: number;
  private data: Uint8Array;

  constructor(width: number, height: number, background: Color = WHITE) {
    this.width = width;
    this.height = height;
    this.data = new Uint8Array(width * height * 3);
    this.fillRect(0, 0, width, height, background);
  }

  set(x: number, y: number, c: Color): void {
    x = Math.round(x);
    y = Math.round(y);
    if (x < 0 || y < 0 || x >= this.width || y >= this.height) return;
    const i = (y * this.width + x) * 3;
    this.data[i] = c[0];
    this.data[i + 1] = c[1];
    this.data[i + 2] = c[2];
  }

  fillRect(x0: number, y0: number, w: number, h: number, c: Color): void {
    const xa = Math.max(0, Math.round(x0));
    const ya = Math.max(0, Math.round(y0));
    const xb = Math.min(this.width, Math.round(x0 + w));
    const yb = Math.min(this.height, Math.round(y0 + h));
    for (let y = ya; y < yb; y++) {
      for (let x = xa; x < xb; x++) {
        const i = (y * this.width + x) * 3;
        this.data[i] = c[0];
        this.data[i + 1] = c[1];
        this.data[i + 2] = c[2];
      }
    }
  }

  line(x0: number, y0: number, x1: number, y1: number, c: Color): void {
    // Bresenham on rounded endpoints
    let xa = Math.round(x0);
    let ya = Math.round(y0);
    const xb = Math.round(x1);
    const yb = Math.round(y1);
    const dx = Math.abs(xb - xa);
    const dy = -Math.abs(yb - ya);
    const sx = xa < xb ? 1 : -1;
    const sy = ya < yb ? 1 : -1;
    let err = dx + dy;
    for (;;) {
      this.set(xa, ya, c);
      if (xa === xb && ya === yb) break;
      const e2 = 2 * err;
      if (e2 >= dy) {
        err += dy;
        xa += sx;
      }
      if (e2 <= dx) {
        err += dx;
        ya += sy;
      }
    }
  }

  disc(x: number, y: number, r: number, c: Color): void {
    for (let dy = -r; dy <= r; dy++) {
      for (let dx = -r; dx <= r; dx++) {
        if (dx * dx + dy * dy <= r * r) this.set(x + dx, y + dy, c);
      }
    }
  }

  text(x: number, y: number, s: string, c: Color = BLACK, scale = 1): void {
    let cx = Math.round(x);
    for (const ch of s) {
      const rows = glyph(ch);
      for (let ry = 0; ry < GLYPH_HEIGHT; ry++) {
        for (let rx = 0; rx < GLYPH_WIDTH; rx++) {
          if ((rows[ry] >> (GLYPH_WIDTH - 1 - rx)) & 1) {
            this.fillRect(cx + rx * scale, y + ry * scale, scale, scale, c);
          }
        }
      }
      cx += (GLYPH_WIDTH + 1) * scale;
    }
  }

  writePng(path: string): void {
    const png = new PNG({ width: this.width, height: this.height });
    for (let i = 0, j = 0; i < this.data.length; i += 3, j += 4) {
      png.data[j] = this.data[i];
      png.data[j + 1] = this.data[i + 1];
      png.data[j + 2] = this.data[i + 2];
      png.data[j + 3] = 255;
    }
    writeFileSync(path, PNG.sync.write(png));
  }
}

/** Linear mapping from a data interval onto a pixel interval. */
export class Scale {
  constructor(
    readonly d0: number,
    readonly d1: number,
    readonly p0: number,
    readonly p1: number,
  ) {}

  apply(v: number): number {
    if (this.d1 === this.d0) return 0.5 * (this.p0 + this.p1);
    return this.p0 + ((v - this.d0) / (this.d1 - this.d0)) * (this.p1 - this.p0);
  }
}

export function extent(values: number[], pad = 0.05): [number, number] {
  let lo = Math.min(...values);
  let hi = Math.max(...values);
  if (lo === hi) {
    lo -= 0.5;
    hi += 0.5;
  }
  const span = hi - lo;
  return [lo - pad * span, hi + pad * span];
}

export interface Frame {
  raster: Raster;
  x: Scale;
  y: Scale;
}

/** White canvas with a plot box, axis lines, and corner-anchored labels. */
export function makeFrame(
  width: number,
  height: number,
  xRange: [number, number],
  yRange: [number, number],
  xLabel: string,
  yLabel: string,
): Frame {
  const margin = { left: 50, right: 15, top: 15, bottom: 35 };
  const raster = new Raster(width, height);
  const x = new Scale(xRange[0], xRange[1], margin.left, width - margin.right);
  const y = new Scale(yRange[0], yRange[1], height - margin.bottom, margin.top);
  raster.line(x.p0, y.p0, x.p1, y.p0, BLACK);
  raster.line(x.p0, y.p0, x.p0, y.p1, BLACK);
  raster.text(width - margin.right - 6 * (xLabel.length + 1), y.p0 + 12, xLabel);
  raster.text(x.p0 + 4, margin.top, yLabel);
  for (const frac of [0, 0.5, 1]) {
    const vx = xRange[0] + frac * (xRange[1] - xRange[0]);
    const vy = yRange[0] + frac * (yRange[1] - yRange[0]);
    const px = x.apply(vx);
    const py = y.apply(vy);
    raster.line(px, y.p0, px, y.p0 + 4, BLACK);
    raster.text(px - 12, y.p0 + 14, fmt(vx));
    raster.line(x.p0 - 4, py, x.p0, py, BLACK);
    raster.text(2, py - 3, fmt(vy));
  }
  return { raster, x, y };
}

export function fmt(v: number): string {
  if (v === 0) return "0";
  const a = Math.abs(v);
  if (a >= 1000 || a < 0.01) return v.toExponential(1).replace("e", "e");
  return String(Math.round(v * 100) / 100);
}

export function writeMeta(outPath: string, meta: unknown): string {
  const metaPath = outPath.replace(/\.png$/i, "") + ".meta.json";
  writeFileSync(metaPath, JSON.stringify(meta, null, 2) + "\n");
  return metaPath;
}
