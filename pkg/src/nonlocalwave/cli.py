"""The ``nlwave`` command: experiment drivers emitting CSV + manifest artifacts.

Subcommands: ``stability-scan``, ``converge``, ``hf-caustic``, ``waterwave``,
``rk-analyze``.  Each accepts ``--config FILE`` (plain ``key = value`` lines,
``#`` comments) plus overriding flags; every CSV gets a sidecar
``<name>.manifest.txt`` recording the exact configuration.
"""

from __future__ import annotations

import argparse
import math
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .errors import NoImaginaryAxisStability, TableauParseError
from .stability import (
    cfl_threshold,
    classify,
    growth_factor_z,
    imag_axis_extent,
    stability_function_det,
    TraceClass,
)
from .tableau import load_tableau
from .waterwave import WaterWaveConfig, cosine_wave_state, run_waterwave
from . import experiments as xp


def parse_config_file(path) -> dict:
    """Parse ``key = value`` lines; values become int/float/list when possible."""
    out = {}
    for raw in Path(path).read_text().splitlines():
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"bad config line (need key = value): {raw!r}")
        key, val = (s.strip() for s in line.split("=", 1))
        out[key] = _parse_value(val)
    return out


def _parse_value(val: str):
    if "," in val:
        return [_parse_value(v.strip()) for v in val.split(",") if v.strip()]
    for cast in (int, float):
        try:
            return cast(val)
        except ValueError:
            continue
    return val


def _as_list(value, cast):
    if isinstance(value, (list, tuple)):
        return [cast(v) for v in value]
    return [cast(value)]


def _config(args) -> dict:
    cfg = parse_config_file(args.config) if args.config else {}
    if args.tableau:
        cfg["tableau"] = args.tableau
    if args.threads:
        cfg["threads"] = args.threads
    return cfg


def _out_dir(args) -> Path:
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    return out


def cmd_stability_scan(args) -> int:
    cfg = _config(args)
    system = cfg.get("system", "constant")
    tableau = cfg.get("tableau", "rk4")
    t_final = float(cfg.get("t_final", 10.0 if system != "waterwave" else 4.0))
    seed = int(cfg.get("seed", 7))
    threads = int(cfg.get("threads", 1))
    n_values = _as_list(cfg.get("n_values", [32, 64, 128]), int)
    if "tau_values" in cfg:
        tau_values = _as_list(cfg["tau_values"], float)
    else:
        tau_lo = float(cfg.get("tau_min", 1e-3))
        tau_hi = float(cfg.get("tau_max", 0.5))
        count = int(cfg.get("tau_count", 40))
        tau_values = list(np.geomspace(tau_lo, tau_hi, count))
    out = _out_dir(args)
    name = cfg.get("name", f"scan-{system}-{tableau}")
    params = {"system": system, "tableau": tableau, "t_final": t_final,
              "seed": seed, "n_values": n_values, "tau_values": tau_values,
              "guard": xp.SCAN_GUARD}
    csv_path = out / f"{name}.csv"
    manifest_path = out / f"{name}.manifest.txt"
    skip = None
    if csv_path.exists() and manifest_path.exists():
        old = xp.read_manifest(manifest_path)
        if old.get("manifest_hash") == xp.manifest_hash(params):
            done = xp.load_scan_csv(csv_path)
            length = 1.0 if system == "high-frequency" else 2 * math.pi
            skip = {(int(round(length / r.h)), r.tau) for r in done}
            print(f"resuming: {len(skip)} cells already recorded")
    records = xp.stability_scan(system, tableau, n_values, tau_values, t_final,
                                seed=seed, threads=threads,
                                experiment=name, skip=skip)
    if skip:
        records = sorted(records + done, key=lambda r: (r.h, r.tau))
    xp.write_manifest(manifest_path, name, params)
    xp.write_csv(csv_path, xp.SCAN_HEADER, xp.scan_to_rows(records))
    unstable = sum(r.classification == "unstable" for r in records)
    print(f"{csv_path}: {len(records)} cells, {unstable} unstable")
    if cfg.get("boundary", 0):
        points = xp.boundary_curve(system, tableau, n_values, t_final,
                                   seed=seed, threads=threads)
        bpath = out / f"{name}-boundary.csv"
        xp.write_csv(bpath, xp.BOUNDARY_HEADER,
                     [[p.h, p.n, p.tau_star, p.trials] for p in points])
        slope = xp.loglog_slope([p.h for p in points], [p.tau_star for p in points])
        print(f"{bpath}: fitted slope of tau* vs h = {slope:.3f}")
    return 0


def cmd_converge(args) -> int:
    cfg = _config(args)
    out = _out_dir(args)
    name = cfg.get("name", "converge")
    schemes = _as_list(cfg.get("schemes", ["forward-euler", "backward-euler",
                                           "crank-nicolson", "rk4"]), str)
    n_ref = int(cfg.get("reference_n", 128))
    tau_top = float(cfg.get("tau_max", 0.05))
    halvings = int(cfg.get("halvings", 5))
    spatial_n = _as_list(cfg.get("spatial_n", [8, 16, 32, 64, 128]), int)
    spatial_tau = float(cfg.get("spatial_tau", 1e-5))
    taus = [tau_top * 0.5**j for j in range(halvings + 1)]
    records = []
    for scheme in schemes:
        records += xp.temporal_sweep(scheme, taus, n=n_ref)
        order = xp.fit_temporal_order(records[-len(taus):])
        print(f"{scheme}: fitted temporal order {order:.3f}")
    records += xp.spatial_sweep(spatial_n, tau=spatial_tau, reference_n=n_ref)
    params = {"schemes": schemes, "reference_n": n_ref, "taus": taus,
              "spatial_n": spatial_n, "spatial_tau": spatial_tau}
    xp.write_manifest(out / f"{name}.manifest.txt", name, params)
    xp.write_csv(out / f"{name}.csv", xp.CONVERGENCE_HEADER,
                 [[r.sweep, r.scheme, r.n, r.tau, r.error] for r in records])
    print(f"{out / (name + '.csv')}: {len(records)} rows")
    return 0


def cmd_hf_caustic(args) -> int:
    cfg = _config(args)
    out = _out_dir(args)
    name = cfg.get("name", "caustic")
    exps = _as_list(cfg.get("epsilon_exponents", [4, 5, 6, 7, 8, 9, 10]), int)
    snapshot_exps = set(_as_list(cfg.get("snapshot_exponents", [4, 6, 8, 10]), int))
    t_final = float(cfg.get("t_final", 0.0625))
    records, snap_rows = [], []
    for i in exps:
        eps = 2.0 ** (-i)
        want_snap = i in snapshot_exps
        result = xp.caustic_run(eps, t_final=t_final, snapshot=want_snap)
        if want_snap:
            rec, (x, amp) = result
            snap_rows += [[eps, float(xx), float(aa)] for xx, aa in zip(x, amp)]
        else:
            rec = result
        records.append(rec)
        print(f"eps=2^-{i}: n={rec.n} tau={rec.tau:.3e} max|u|={rec.max_amplitude:.4f}")
    params = {"epsilon_exponents": exps, "t_final": t_final,
              "snapshot_exponents": sorted(snapshot_exps)}
    xp.write_manifest(out / f"{name}.manifest.txt", name, params)
    xp.write_csv(out / f"{name}.csv", xp.CAUSTIC_HEADER,
                 [[r.epsilon, r.n, r.tau, r.max_amplitude, r.initial_max]
                  for r in records])
    if snap_rows:
        xp.write_csv(out / f"{name}-snapshots.csv", ["epsilon", "x", "abs_u"],
                     snap_rows)
    if len(records) >= 3:
        tail = records[-4:] if len(records) >= 4 else records
        slope = xp.loglog_slope([1.0 / r.epsilon for r in tail],
                                [r.max_amplitude for r in tail])
        print(f"amplitude growth slope vs 1/eps (last {len(tail)}): {slope:.3f}")
    return 0


def cmd_waterwave(args) -> int:
    cfg = _config(args)
    out = _out_dir(args)
    name = cfg.get("name", "waterwave")
    mode = cfg.get("mode", "turnover")
    if mode == "scan":
        ns = argparse.Namespace(**vars(args))
        ns.config = None
        scan_cfg = dict(cfg)
        scan_cfg["system"] = "waterwave"
        return _scan_with(ns, scan_cfg)
    n = int(cfg.get("n", 512))
    amplitude = float(cfg.get("amplitude", 0.6))
    tau = float(cfg.get("tau", 1.0 / 4000.0))
    t_final = float(cfg.get("t_final", 3.7))
    snap_times = _as_list(cfg.get("snapshot_times", [0.0, 1.0, 2.0, 3.0, 3.5, 3.7]),
                          float)
    config = WaterWaveConfig(tableau=load_tableau(cfg.get("tableau", "rk4")),
                             tau=tau, t_final=t_final,
                             gravity=float(cfg.get("gravity", 1.0)))
    from .grid import Grid

    grid = Grid(n)
    initial = cosine_wave_state(grid, amplitude, config)
    result = run_waterwave(initial, config, snapshot_times=snap_times)
    params = {"n": n, "amplitude": amplitude, "tau": tau, "t_final": t_final,
              "tableau": config.tableau.name, "gravity": config.gravity,
              "snapshot_times": snap_times}
    xp.write_manifest(out / f"{name}.manifest.txt", name, params)
    snap_rows = []
    for s in result.snapshots:
        for j in range(grid.n):
            snap_rows.append([s.t, j, grid.nodes[j], float(s.z.real[j]),
                              float(s.z.imag[j]), float(s.phi[j]),
                              float(s.gamma[j])])
    xp.write_csv(out / f"{name}-snapshots.csv", xp.SNAPSHOT_HEADER, snap_rows)
    xp.write_csv(out / f"{name}-diagnostics.csv", xp.DIAGNOSTICS_HEADER,
                 [[d.t, d.min_jacobian, d.max_abs_y, d.gamma_iterations,
                   d.energy_proxy] for d in result.diagnostics])
    print(f"ran to t={result.state.t:g} in {result.steps} steps; "
          f"turnover at t={result.turnover_time}")
    return 0


def _scan_with(args, cfg) -> int:
    system = cfg["system"]
    tableau = cfg.get("tableau", "rk4")
    t_final = float(cfg.get("t_final", 4.0))
    n_values = _as_list(cfg.get("n_values", [64, 128]), int)
    threads = int(cfg.get("threads", 1))
    out = _out_dir(args)
    name = cfg.get("name", f"scan-{system}-{tableau}")
    points = xp.boundary_curve(system, tableau, n_values, t_final,
                               threads=threads)
    xp.write_manifest(out / f"{name}.manifest.txt", name,
                      {"system": system, "tableau": tableau,
                       "t_final": t_final, "n_values": n_values})
    xp.write_csv(out / f"{name}-boundary.csv", xp.BOUNDARY_HEADER,
                 [[p.h, p.n, p.tau_star, p.trials] for p in points])
    slope = xp.loglog_slope([p.h for p in points], [p.tau_star for p in points])
    print(f"boundary slope vs h: {slope:.3f}")
    return 0


def cmd_rk_analyze(args) -> int:
    cfg = _config(args)
    source = cfg.get("tableau", args.tableau or "rk4")
    try:
        tab = load_tableau(source)
    except TableauParseError as exc:
        where = f" (line {exc.line_number})" if exc.line_number else ""
        print(f"error: {exc}{where}", file=sys.stderr)
        return 2
    report = classify(tab)
    extent = report.imag_extent
    print(f"tableau {tab.name}: {tab.stages} stages, "
          f"{'explicit' if tab.explicit else 'implicit'}")
    print(f"tr(G^2) = {report.tr_g2:.12g}")
    print(f"tr((G - e w^T)^2) = {report.tr_gewt2:.12g}")
    label = ("strong" if report.classification is TraceClass.STRONG_AS_TAU_TO_0
             else "weak")
    print(f"trace classification as tau -> 0: {label}")
    if report.notes:
        print(f"note: {report.notes}")
    if not tab.explicit:
        eigs = np.linalg.eigvals(tab.matrix)
        poles = sorted(1.0 / e for e in eigs if abs(e) > 1e-14)
        print(f"poles of f(z): {', '.join(f'{p:.6g}' for p in poles) or 'none'}")
    if math.isinf(extent):
        print(f"imaginary-axis extent: unbounded up to cap; "
              f"growth factor <= 1 on the sampled axis")
        z_hi = float(cfg.get("z_max", 16.0))
    elif extent == 0.0:
        print("imaginary-axis extent: 0 -- no square-root step law; "
              "use the tau ~ h regime")
        z_hi = float(cfg.get("z_max", 4.0))
    else:
        print(f"imaginary-axis extent C1 = {extent:.9g}")
        z_hi = 2.0 * extent**2
    c = float(cfg.get("c", 3.0))
    sigma = float(cfg.get("sigma", 1.0))
    h = float(cfg.get("h", 2 * math.pi / 128))
    try:
        tau_max = cfl_threshold(tab, c, sigma, h, extent=extent)
        print(f"step threshold at c={c:g}, sigma={sigma:g}, h={h:.6g}: "
              f"tau <= {tau_max:.6g}")
    except NoImaginaryAxisStability:
        print(f"no square-root threshold at c={c:g}, sigma={sigma:g}, "
              f"h={h:.6g}; keep tau proportional to h")
    rows = []
    for z in np.linspace(0.0, z_hi, int(cfg.get("z_count", 81))):
        rows.append([float(z), growth_factor_z(tab, float(z)),
                     abs(stability_function_det(tab, 1j * math.sqrt(max(z, 0.0))))])
    out = _out_dir(args)
    path = out / f"rk-analyze-{tab.name}.csv"
    xp.write_csv(path, ["z", "growth_factor", "abs_f_iy"], rows)
    print(f"growth-factor table: {path}")
    return 0


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="nlwave",
        description="Stability, convergence, and wave experiments for "
                    "nonlocal hyperbolic systems",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)
    for name, fn, blurb in (
        ("stability-scan", cmd_stability_scan, "classify (h, tau) cells stable/unstable"),
        ("converge", cmd_converge, "temporal and spatial error sweeps vs the exact oracle"),
        ("hf-caustic", cmd_hf_caustic, "amplitude growth across the oscillation scale sweep"),
        ("waterwave", cmd_waterwave, "surface-wave turn-over run or stability scan"),
        ("rk-analyze", cmd_rk_analyze, "growth-factor report for a Butcher tableau"),
    ):
        p = sub.add_parser(name, help=blurb)
        p.add_argument("--config", default=None, help="key = value config file")
        p.add_argument("--out-dir", default="artifacts", help="output directory")
        p.add_argument("--tableau", default=None,
                       help="tableau name or file (overrides config)")
        p.add_argument("--threads", type=int, default=None,
                       help="parallel worker count for independent cells")
        p.set_defaults(func=fn)
    args = parser.parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
