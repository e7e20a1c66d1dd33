"""Reproducible experiment drivers: stability scans, convergence, caustics.

Every driver returns plain records and can write them as CSV with a sidecar
key-value manifest.  Runs are deterministic for a fixed manifest: data seeds
are explicit, cells are computed independently, and rows are sorted before
writing, so identical manifests produce byte-identical CSV files.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from datetime import datetime, timezone
from hashlib import sha256
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from . import __version__ as _code_version
from .errors import Diverged, GammaSolveFailed, JacobianDegenerate, QuadratureSingular
from .filters import identity_filter
from .grid import Grid, SpectralField
from .stability import cfl_threshold, imag_axis_extent
from .system import (
    CoefficientSet,
    SolverState,
    exact_constant_solution,
    integrate,
    wkb_initial,
)
from .tableau import load_tableau
from .waterwave import (
    WaterWaveConfig,
    cosine_wave_state,
    run_waterwave,
    state_from_gamma,
)

TWO_PI = 2.0 * math.pi


# ---------------------------------------------------------------------------
# systems under test
# ---------------------------------------------------------------------------

def variable_c(theta, t):
    return np.exp(np.cos(theta + t))


def variable_sigma(theta, t):
    return 2.0 + np.sin(theta + t)


def make_coefficients(system: str, epsilon: float = 1.0) -> CoefficientSet:
    if system == "constant":
        return CoefficientSet(sigma=1.0, c=3.0, epsilon=epsilon,
                              sigma_floor=0.5, c_floor=0.5)
    if system == "variable":
        return CoefficientSet(sigma=variable_sigma, c=variable_c, epsilon=epsilon,
                              sigma_floor=0.9, c_floor=0.3)
    if system == "high-frequency":
        return CoefficientSet(sigma=1.0, c=1.0, epsilon=epsilon,
                              sigma_floor=0.5, c_floor=0.5)
    raise ValueError(f"unknown system {system!r}")


def coefficient_sup_product(system: str) -> float:
    """sup over (theta, t) of sigma*c, for frozen-coefficient step predictions."""
    if system == "constant":
        return 3.0
    if system == "high-frequency":
        return 1.0
    theta = np.linspace(0, TWO_PI, 4001)
    return float(np.max(variable_sigma(theta, 0.0) * variable_c(theta, 0.0)))


def seeded_state(grid: Grid, seed: int = 7, decay: float = 1.0,
                 tail: float = 1e-2) -> SolverState:
    """Deterministic broadband real data for stability scans.

    The spectrum decays like ``(1+|k|)^-decay`` with a flat tail of relative
    size ``tail`` on the upper half of the modes, so instabilities at any
    wavenumber are seeded well above rounding and divergence is detected
    promptly near the true threshold.
    """
    rng = np.random.default_rng(seed)
    n = grid.n
    k = grid.modes

    def one():
        mag = (1.0 + np.abs(k).astype(float)) ** (-decay)
        mag[np.abs(k) > n // 4] += tail
        spec = mag * np.exp(1j * rng.uniform(0, TWO_PI, n))
        # Hermitian symmetry for a real field; mean and Nyquist forced real.
        full = np.zeros(n, dtype=np.complex128)
        pos = np.arange(1, n // 2)
        full[0] = mag[0]
        full[n // 2] = mag[n // 2]
        full[pos] = spec[pos]
        full[n - pos] = np.conj(spec[pos])
        f = SpectralField.from_spectrum(grid, full)
        norm = math.sqrt(grid.spacing) * np.linalg.norm(f.samples)
        return SpectralField(grid, f.samples.real / norm)

    return SolverState(u=one(), v=one(), t=0.0)


# ---------------------------------------------------------------------------
# scan records and cell execution
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ScanRecord:
    experiment: str
    h: float
    tau: float
    classification: str  # "stable" | "unstable"
    growth_ratio: float
    steps_run: int


_WW_FAILURES = (Diverged, GammaSolveFailed, QuadratureSingular, JacobianDegenerate)

# Divergence guard for scan classification.  Weakly stable runs grow by at
# most ~1e2 over the scan horizons, so 1e3 separates bounded growth from
# blow-up while keeping the detected boundary close to the neutral-growth
# contour; a much larger guard drags the measured threshold visibly above
# the square-root law on coarse grids (the blow-up must then outrun the
# guard within very few steps).
SCAN_GUARD = 1e3


def run_scan_cell(system: str, tableau_name: str, n: int, tau: float,
                  t_final: float, seed: int = 7, guard: float = SCAN_GUARD,
                  experiment: str = "scan") -> ScanRecord:
    """Integrate one (h, tau) cell to classification.

    Any blow-up symptom (guard trip, sheet-strength failure, quadrature
    collision, collapsed Jacobian) classifies the cell unstable; the specific
    failure is a symptom of the same divergence event.
    """
    tableau = load_tableau(tableau_name)
    if system == "waterwave":
        grid = Grid(n)
        config = WaterWaveConfig(tableau=tableau, tau=tau, t_final=t_final,
                                 guard=guard)
        state = cosine_wave_state(grid, 0.3, config)
        try:
            result = run_waterwave(state, config)
        except _WW_FAILURES as exc:
            ratio = getattr(exc, "ratio", math.inf)
            step = getattr(exc, "step", 0)
            return ScanRecord(experiment, grid.spacing, tau, "unstable",
                              float(ratio), int(step))
        last = result.diagnostics[-1]
        ratio = last.max_abs_y / max(result.diagnostics[0].max_abs_y, 1e-30)
        return ScanRecord(experiment, grid.spacing, tau, "stable",
                          float(ratio), result.steps)
    coeffs = make_coefficients(system)
    length = 1.0 if system == "high-frequency" else TWO_PI
    grid = Grid(n, length)
    state = seeded_state(grid, seed=seed)
    filt = identity_filter()
    try:
        result = integrate(state, coeffs, filt, tableau, tau, t_final,
                           guard=guard, method="auto")
    except Diverged as exc:
        return ScanRecord(experiment, grid.spacing, tau, "unstable",
                          float(exc.ratio), exc.step)
    return ScanRecord(experiment, grid.spacing, tau, "stable",
                      result.norm_ratio, result.steps)


def stability_scan(system: str, tableau_name: str, n_values: Sequence[int],
                   tau_values: Sequence[float], t_final: float,
                   seed: int = 7, threads: int = 1,
                   experiment: str = "scan",
                   skip: Optional[set] = None) -> list[ScanRecord]:
    """Classify every (n, tau) cell; cells are independent jobs."""
    cells = [(n, tau) for n in n_values for tau in tau_values
             if skip is None or (n, tau) not in skip]
    if threads > 1 and len(cells) > 1:
        with ProcessPoolExecutor(max_workers=threads) as pool:
            futures = [
                pool.submit(run_scan_cell, system, tableau_name, n, tau,
                            t_final, seed, SCAN_GUARD, experiment)
                for n, tau in cells
            ]
            records = [f.result() for f in futures]
    else:
        records = [run_scan_cell(system, tableau_name, n, tau, t_final,
                                 seed, SCAN_GUARD, experiment) for n, tau in cells]
    records.sort(key=lambda r: (r.h, r.tau))
    return records


# ---------------------------------------------------------------------------
# empirical stability boundary
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class BoundaryPoint:
    h: float
    n: int
    tau_star: float
    trials: int


def boundary_bisect(system: str, tableau_name: str, n: int, t_final: float,
                    tau_guess: float, seed: int = 7,
                    rel_tol: float = 0.01) -> BoundaryPoint:
    """Locate the stable/unstable transition in tau by bracketing + bisection."""

    def stable(tau):
        rec = run_scan_cell(system, tableau_name, n, tau, t_final, seed=seed)
        return rec.classification == "stable"

    trials = 0
    lo = hi = None
    tau = tau_guess
    if stable(tau):
        lo = tau
        while hi is None:
            trials += 1
            tau *= 2.0
            if trials > 60:
                raise RuntimeError("no unstable step found while bracketing")
            if stable(tau):
                lo = tau
            else:
                hi = tau
    else:
        hi = tau
        while lo is None:
            trials += 1
            tau /= 2.0
            if trials > 60:
                raise RuntimeError("no stable step found while bracketing")
            if stable(tau):
                lo = tau
            else:
                hi = tau
    while hi / lo > 1.0 + rel_tol:
        trials += 1
        mid = math.sqrt(lo * hi)
        if stable(mid):
            lo = mid
        else:
            hi = mid
    length = 1.0 if system == "high-frequency" else TWO_PI
    return BoundaryPoint(h=length / n, n=n, tau_star=math.sqrt(lo * hi),
                         trials=trials)


def _boundary_job(args):
    system, tableau_name, n, t_final, tau_guess, seed = args
    return boundary_bisect(system, tableau_name, n, t_final, tau_guess, seed)


def boundary_curve(system: str, tableau_name: str, n_values: Sequence[int],
                   t_final: float, seed: int = 7,
                   threads: int = 1) -> list[BoundaryPoint]:
    """Empirical threshold tau*(h) over a family of grids."""
    if system == "waterwave":
        return waterwave_boundary(tableau_name, sorted(n_values, reverse=True),
                                  t_final=t_final)
    prod = coefficient_sup_product(system)
    jobs = []
    for n in n_values:
        length = 1.0 if system == "high-frequency" else TWO_PI
        h = length / n
        tableau = load_tableau(tableau_name)
        extent = imag_axis_extent(tableau)
        if extent > 0 and math.isfinite(extent):
            guess = cfl_threshold(tableau, prod, 1.0, h, extent=extent)
        else:
            guess = 0.1 * h
        jobs.append((system, tableau_name, n, t_final, guess, seed))
    if threads > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=threads) as pool:
            points = list(pool.map(_boundary_job, jobs))
    else:
        points = [_boundary_job(j) for j in jobs]
    points.sort(key=lambda p: p.h)
    return points


def loglog_slope(x: Sequence[float], y: Sequence[float]) -> float:
    """Least-squares slope of log y against log x."""
    lx, ly = np.log(np.asarray(x, float)), np.log(np.asarray(y, float))
    return float(np.polyfit(lx, ly, 1)[0])


# ---------------------------------------------------------------------------
# water-wave boundary via perturbation growth
# ---------------------------------------------------------------------------

def band_noise(grid: Grid, rng, amplitude: float) -> np.ndarray:
    """Real noise supported on modes |k| in [0.3 n, n/2], sup-normalized."""
    n = grid.n
    k = grid.modes
    mask = (np.abs(k) >= int(0.3 * n)) & (np.abs(k) <= n // 2)
    spec = np.zeros(n, dtype=np.complex128)
    pos = np.arange(1, n // 2)
    vals = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    spec[pos] = vals[pos] * mask[pos]
    spec[n - pos] = np.conj(spec[pos])
    out = np.real(np.fft.ifft(spec) * n)
    return amplitude * out / max(float(np.max(np.abs(out))), 1e-300)


def waterwave_cell_is_stable(tableau_name: str, n: int, tau: float,
                             t_final: float = 4.0, amplitude: float = 0.3,
                             noise: float = 1e-8, ratio_limit: float = 1e3,
                             seed: int = 11) -> bool:
    """Orbital-stability verdict for one water-wave cell.

    Integrates the wave and a probe-perturbed twin (noise in the upper mode
    band, where the square-root step law lives) and compares the growth of
    their difference against ``ratio_limit``.  The global-norm guard alone is
    blind here: near the step-law threshold the run lasts only tens of steps,
    far too few for the tail instability to lift the perturbation from the
    wave's tiny spectral floor all the way past a norm guard, while the
    relative growth of an explicit probe is measurable immediately.
    Blow-up symptoms (guard trip, strength-solve failure, quadrature
    collision, degenerate Jacobian) in either twin also classify unstable.
    """
    grid = Grid(n)
    config = WaterWaveConfig(tableau=load_tableau(tableau_name), tau=tau,
                             t_final=t_final, guard=SCAN_GUARD)
    rng = np.random.default_rng(seed)
    base = cosine_wave_state(grid, amplitude, config)
    y = amplitude * np.cos(grid.nodes) + band_noise(grid, rng, noise)
    gamma = 1.0 + amplitude * np.sin(grid.nodes) + band_noise(grid, rng, noise)
    pert = state_from_gamma(grid, grid.nodes + 1j * y, gamma, config)
    d0 = np.linalg.norm(pert.z - base.z) + np.linalg.norm(pert.phi - base.phi)
    try:
        rb = run_waterwave(base, config)
        rp = run_waterwave(pert, config)
    except _WW_FAILURES:
        return False
    d1 = (np.linalg.norm(rp.state.z - rb.state.z)
          + np.linalg.norm(rp.state.phi - rb.state.phi))
    return d1 / d0 < ratio_limit


def waterwave_boundary(tableau_name: str, n_values: Sequence[int],
                       t_final: float = 4.0, amplitude: float = 0.3,
                       seed: int = 11, rel_tol: float = 0.01) -> list[BoundaryPoint]:
    """Empirical step-law threshold tau*(h) for the surface-wave scheme."""
    points = []
    for n in n_values:
        h = TWO_PI / n
        tau = 0.4 * math.sqrt(h)

        def stable(t):
            return waterwave_cell_is_stable(tableau_name, n, t, t_final,
                                            amplitude, seed=seed)

        trials = 0
        lo = hi = None
        if stable(tau):
            lo = tau
            for _ in range(60):
                trials += 1
                tau *= 1.5
                if stable(tau):
                    lo = tau
                else:
                    hi = tau
                    break
        else:
            hi = tau
            for _ in range(60):
                trials += 1
                tau /= 1.5
                if stable(tau):
                    lo = tau
                    break
                hi = tau
        if lo is None or hi is None:
            raise RuntimeError(f"failed to bracket the boundary at n={n}")
        while hi / lo > 1.0 + rel_tol:
            trials += 1
            mid = math.sqrt(lo * hi)
            if stable(mid):
                lo = mid
            else:
                hi = mid
        points.append(BoundaryPoint(h=h, n=n, tau_star=math.sqrt(lo * hi),
                                    trials=trials))
    return points


# ---------------------------------------------------------------------------
# high-frequency boundary sweep (tau*(epsilon) with h = epsilon/4)
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class EpsilonBoundaryPoint:
    epsilon: float
    n: int
    h: float
    tau_star: float


def hf_boundary_sweep(tableau_name: str, epsilons: Sequence[float],
                      t_final: float = 1.0, seed: int = 7,
                      threads: int = 1) -> list[EpsilonBoundaryPoint]:
    """Empirical threshold against epsilon on grids with h = epsilon/4."""
    tableau = load_tableau(tableau_name)
    extent = imag_axis_extent(tableau)
    points = []
    for eps in epsilons:
        n = int(round(4.0 / eps))
        if n % 2:
            n += 1
        h = 1.0 / n

        def stable(tau, eps=eps, n=n):
            grid = Grid(n, 1.0)
            coeffs = make_coefficients("high-frequency", epsilon=eps)
            state = seeded_state(grid, seed=seed)
            try:
                integrate(state, coeffs, identity_filter(), tableau, tau,
                          t_final, guard=SCAN_GUARD, method="auto")
            except Diverged:
                return False
            return True

        if extent > 0 and math.isfinite(extent):
            guess = cfl_threshold(tableau, 1.0, 1.0, h, epsilon=eps, extent=extent)
        else:
            guess = 0.1 * eps * h
        lo = hi = None
        tau = guess
        if stable(tau):
            lo = tau
            for _ in range(60):
                tau *= 2
                if stable(tau):
                    lo = tau
                else:
                    hi = tau
                    break
        else:
            hi = tau
            for _ in range(60):
                tau /= 2
                if stable(tau):
                    lo = tau
                    break
                hi = tau
        if lo is None or hi is None:
            raise RuntimeError("failed to bracket the stability boundary")
        while hi / lo > 1.01:
            mid = math.sqrt(lo * hi)
            if stable(mid):
                lo = mid
            else:
                hi = mid
        points.append(EpsilonBoundaryPoint(epsilon=eps, n=n, h=h,
                                           tau_star=math.sqrt(lo * hi)))
    return points


# ---------------------------------------------------------------------------
# convergence study (constant coefficients, exact oracle)
# ---------------------------------------------------------------------------

def convergence_initial_data(grid: Grid) -> SolverState:
    u0 = SpectralField.from_function(grid, lambda th: np.exp(np.sin(th)) + np.cos(th))
    v0 = SpectralField.from_function(grid, lambda th: np.cos(th) ** 2)
    return SolverState(u=u0, v=v0, t=0.0)


@dataclass(frozen=True)
class ConvergenceRecord:
    sweep: str  # "spatial" | "temporal"
    scheme: str
    n: int
    tau: float
    error: float


def _oracle_on(grid: Grid, reference_grid: Grid, c: float, sigma: float,
               t: float) -> SolverState:
    """Exact solution from analytic data on a fine grid, restricted to ``grid``."""
    ref = convergence_initial_data(reference_grid)
    u, v = exact_constant_solution(ref.u, ref.v, c=c, sigma=sigma, t=t)
    stride = reference_grid.n // grid.n
    return SolverState(
        u=SpectralField(grid, u.samples[::stride]),
        v=SpectralField(grid, v.samples[::stride]),
        t=t,
    )


def temporal_sweep(scheme: str, taus: Sequence[float], n: int = 128,
                   t_final: float = 2.0) -> list[ConvergenceRecord]:
    """l2 errors against the exact oracle as tau is refined on a fixed grid."""
    grid = Grid(n)
    coeffs = make_coefficients("constant")
    state0 = convergence_initial_data(grid)
    exact_u, exact_v = exact_constant_solution(state0.u, state0.v, c=3.0,
                                               sigma=1.0, t=t_final)
    tableau = load_tableau(scheme)
    out = []
    for tau in taus:
        result = integrate(state0, coeffs, None, tableau, tau, t_final,
                           method="auto")
        err = _l2_error(result.state, exact_u, exact_v)
        out.append(ConvergenceRecord("temporal", scheme, n, float(tau), err))
    return out


def spatial_sweep(n_values: Sequence[int], tau: float = 1e-5,
                  scheme: str = "rk4", t_final: float = 2.0,
                  reference_n: int = 128) -> list[ConvergenceRecord]:
    """l2 errors against the fine-grid oracle as the grid is refined."""
    coeffs = make_coefficients("constant")
    ref_grid = Grid(reference_n)
    tableau = load_tableau(scheme)
    out = []
    for n in n_values:
        grid = Grid(n)
        state0 = convergence_initial_data(grid)
        result = integrate(state0, coeffs, None, tableau, tau, t_final,
                           method="auto")
        oracle = _oracle_on(grid, ref_grid, c=3.0, sigma=1.0, t=t_final)
        err = _l2_error(result.state, oracle.u, oracle.v)
        out.append(ConvergenceRecord("spatial", scheme, n, float(tau), err))
    return out


def _l2_error(state: SolverState, exact_u: SpectralField,
              exact_v: SpectralField) -> float:
    h = state.grid.spacing
    eu = math.sqrt(h) * np.linalg.norm(state.u.samples - exact_u.samples)
    ev = math.sqrt(h) * np.linalg.norm(state.v.samples - exact_v.samples)
    return float(eu + ev)


def fit_temporal_order(records: Sequence[ConvergenceRecord]) -> float:
    taus = [r.tau for r in records]
    errs = [r.error for r in records]
    return loglog_slope(taus, errs)


# ---------------------------------------------------------------------------
# caustic (high-frequency amplitude) sweep
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class CausticRecord:
    epsilon: float
    n: int
    tau: float
    max_amplitude: float
    initial_max: float


def caustic_run(epsilon: float, t_final: float = 0.0625,
                snapshot: bool = False):
    """Max |u| over the run for one epsilon; optionally the final |u| profile.

    Grid and step follow the resolved-oscillation rule: h = epsilon/4 and
    tau = half the square-root CFL threshold for the chosen method.
    """
    n = int(round(4.0 / epsilon))
    if n % 2:
        n += 1
    grid = Grid(n, 1.0)
    state, _ = wkb_initial(grid, epsilon)
    coeffs = make_coefficients("high-frequency", epsilon=epsilon)
    tableau = load_tableau("rk4")
    tau = 0.5 * cfl_threshold(tableau, 1.0, 1.0, grid.spacing, epsilon=epsilon)
    peak = {"value": 0.0}

    def watch_max(t, u, v):
        m = float(np.max(np.abs(u)))
        if m > peak["value"]:
            peak["value"] = m
        return m

    result = integrate(state, coeffs, None, tableau, tau, t_final,
                       monitors=(watch_max,), method="auto")
    record = CausticRecord(
        epsilon=epsilon, n=n, tau=tau,
        max_amplitude=peak["value"],
        initial_max=float(np.max(np.abs(state.u.samples))),
    )
    if snapshot:
        return record, (grid.nodes, np.abs(result.state.u.samples))
    return record


# ---------------------------------------------------------------------------
# CSV + manifest artifacts
# ---------------------------------------------------------------------------

def _fmt(value) -> str:
    if isinstance(value, float):
        return repr(value)
    return str(value)


def write_csv(path, header: Sequence[str], rows: Sequence[Sequence]) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    lines = [",".join(header)]
    lines += [",".join(_fmt(v) for v in row) for row in rows]
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


def manifest_hash(params: dict) -> str:
    payload = ";".join(f"{k}={_fmt(params[k])}" for k in sorted(params))
    return sha256(payload.encode()).hexdigest()[:16]


def write_manifest(path, experiment: str, params: dict) -> str:
    """Sidecar key-value manifest; returns its content hash."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    digest = manifest_hash(params)
    lines = [f"experiment = {experiment}", f"code_version = {_code_version}",
             f"manifest_hash = {digest}",
             f"created = {datetime.now(timezone.utc).isoformat()}"]
    lines += [f"{k} = {_fmt(params[k])}" for k in sorted(params)]
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return digest


def read_manifest(path) -> dict:
    out = {}
    for line in Path(path).read_text().splitlines():
        if "=" in line:
            k, v = line.split("=", 1)
            out[k.strip()] = v.strip()
    return out


def scan_to_rows(records: Sequence[ScanRecord]) -> list[list]:
    return [[r.experiment, r.h, r.tau, r.classification, r.growth_ratio, r.steps_run]
            for r in records]


SCAN_HEADER = ["experiment", "h", "tau", "classification", "growth_ratio", "steps_run"]
BOUNDARY_HEADER = ["h", "n", "tau_star", "trials"]
CONVERGENCE_HEADER = ["sweep", "scheme", "n", "tau", "error"]
CAUSTIC_HEADER = ["epsilon", "n", "tau", "max_amplitude", "initial_max"]
SNAPSHOT_HEADER = ["t", "j", "alpha", "x", "y", "phi", "gamma"]
DIAGNOSTICS_HEADER = ["t", "min_jacobian", "max_abs_y", "gamma_iters", "energy_proxy"]


def load_scan_csv(path) -> list[ScanRecord]:
    rows = Path(path).read_text().strip().splitlines()
    out = []
    for line in rows[1:]:
        exp, h, tau, cls, ratio, steps = line.split(",")
        out.append(ScanRecord(exp, float(h), float(tau), cls, float(ratio),
                              int(steps)))
    return out
