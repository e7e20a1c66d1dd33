import { execFileSync } from "child_process";
import { existsSync, mkdtempSync, readFileSync, writeFileSync } from "fs";
import { tmpdir } from "os";
import { join } from "path";
import { describe, expect, it } from "vitest";

const ROOT = join(__dirname, "..");
const FIXTURES = join(ROOT, "fixtures");

function run(script: string, csv: string, out: string): string {
  return execFileSync("node", [join(ROOT, "dist/bin", script + ".js"),
    "--csv", csv, "--out", out], { encoding: "utf8" });
}

function pngBytes(path: string): Buffer {
  const buf = readFileSync(path);
  // PNG signature
  expect(buf.subarray(0, 8)).toEqual(
    Buffer.from([0x89, 0x50, 0x4e, 0x47, 0x0d, 0x0a, 0x1a, 0x0a]),
  );
  expect(buf.length).toBeGreaterThan(1000);
  return buf;
}

function meta(outPath: string): any {
  return JSON.parse(readFileSync(outPath.replace(/\.png$/, "") + ".meta.json", "utf8"));
}

describe("figure scripts on fixture CSVs", () => {
  const dir = mkdtempSync(join(tmpdir(), "plots-"));

  it("stability-map-sqrt renders the scan fixture", () => {
    const out = join(dir, "scan-sqrt.png");
    run("stability-map-sqrt", join(FIXTURES, "scan-fixture.csv"), out);
    pngBytes(out);
    const m = meta(out);
    expect(m.axis_transform).toBe("sqrt");
    expect(m.cells.length).toBe(18);
  });

  it("stability-map-linear renders the scan fixture", () => {
    const out = join(dir, "scan-linear.png");
    run("stability-map-linear", join(FIXTURES, "scan-fixture.csv"), out);
    pngBytes(out);
    expect(meta(out).axis_transform).toBe("linear");
  });

  it("convergence-loglog annotates fitted slopes", () => {
    const out = join(dir, "conv.png");
    const stdout = run("convergence-loglog", join(FIXTURES, "converge-fixture.csv"), out);
    pngBytes(out);
    const slopes = meta(out).slopes;
    expect(Math.abs(slopes["rk4"] - 4)).toBeLessThan(0.3);
    expect(Math.abs(slopes["crank-nicolson"] - 2)).toBeLessThan(0.2);
    expect(Math.abs(slopes["forward-euler"] - 1)).toBeLessThan(0.2);
    expect(Math.abs(slopes["backward-euler"] - 1)).toBeLessThan(0.2);
    expect(stdout).toContain("slopes");
  });

  it("caustic-loglog draws the slope-1 reference", () => {
    const out = join(dir, "caustic.png");
    run("caustic-loglog", join(FIXTURES, "caustic-fixture.csv"), out);
    pngBytes(out);
    expect(meta(out).reference_slope).toBe(1);
  });

  it("snapshot renders one curve per time", () => {
    const out = join(dir, "snap.png");
    run("snapshot", join(FIXTURES, "waterwave-fixture-snapshots.csv"), out);
    pngBytes(out);
    expect(meta(out).times).toEqual([0, 0.5, 1]);
  });

  it("rendering is idempotent modulo bytes", () => {
    const a = join(dir, "again-a.png");
    const b = join(dir, "again-b.png");
    run("snapshot", join(FIXTURES, "waterwave-fixture-snapshots.csv"), a);
    run("snapshot", join(FIXTURES, "waterwave-fixture-snapshots.csv"), b);
    expect(readFileSync(a).equals(readFileSync(b))).toBe(true);
  });
});

describe("failure modes", () => {
  const dir = mkdtempSync(join(tmpdir(), "plots-err-"));

  it("missing columns produce a descriptive error", () => {
    const bad = join(dir, "bad.csv");
    writeFileSync(bad, "foo,bar\n1,2\n");
    const out = join(dir, "bad.png");
    let message = "";
    try {
      run("stability-map-sqrt", bad, out);
    } catch (err: any) {
      message = String(err.stderr ?? err.message);
    }
    expect(message).toContain("missing column");
    expect(message).toContain("available: foo, bar");
    expect(existsSync(out)).toBe(false);
  });

  it("a single-cell map still renders", () => {
    const one = join(dir, "one.csv");
    writeFileSync(one, "experiment,h,tau,classification,growth_ratio,steps_run\n" +
      "t,0.1,0.01,stable,1.0,5\n");
    const out = join(dir, "one.png");
    run("stability-map-sqrt", one, out);
    pngBytes(out);
    expect(meta(out).cells.length).toBe(1);
  });
});

describe("square-root axis transform (synthetic 2x2 grid)", () => {
  it("cell pixel coordinates sit at sqrt(h) positions", () => {
    const dir = mkdtempSync(join(tmpdir(), "plots-sqrt-"));
    const csvPath = join(dir, "grid.csv");
    // h values 0.01 and 0.04 have sqrt 0.1 and 0.2
    writeFileSync(csvPath,
      "experiment,h,tau,classification,growth_ratio,steps_run\n" +
      "s,0.01,0.1,stable,1.0,10\n" +
      "s,0.01,0.2,unstable,2000.0,3\n" +
      "s,0.04,0.1,stable,1.0,10\n" +
      "s,0.04,0.2,unstable,1500.0,2\n");
    const out = join(dir, "grid.png");
    run("stability-map-sqrt", csvPath, out);
    const m = meta(out);
    const ax = m.x_axis;
    const toPixel = (v: number) =>
      ax.pixel0 + ((v - ax.data0) / (ax.data1 - ax.data0)) * (ax.pixel1 - ax.pixel0);
    for (const cell of m.cells) {
      expect(Math.abs(cell.px - toPixel(Math.sqrt(cell.h)))).toBeLessThanOrEqual(1);
    }
    // the two columns must be separated by sqrt spacing, not linear spacing:
    // sqrt puts 0.01 at 1/3 of the span between sqrt(0.01)=0.1 and sqrt(0.04)=0.2
    const cellA = m.cells.find((c: any) => c.h === 0.01)!;
    const cellB = m.cells.find((c: any) => c.h === 0.04)!;
    const span = ax.pixel1 - ax.pixel0;
    const gap = (cellB.px - cellA.px) / span;
    // with midpoint padding the two sqrt columns sit half the padded span apart
    expect(gap).toBeGreaterThan(0.4);
    const ay = m.y_axis;
    const tauPixel = (v: number) =>
      ay.pixel0 + ((v - ay.data0) / (ay.data1 - ay.data0)) * (ay.pixel1 - ay.pixel0);
    for (const cell of m.cells) {
      expect(Math.abs(cell.py - tauPixel(cell.tau))).toBeLessThanOrEqual(1);
    }
  });
});
