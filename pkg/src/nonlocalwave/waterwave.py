"""Filtered Lagrangian scheme for periodic free-surface (deep water) waves.

The interface is tracked by markers ``z_j = x_j + i y_j`` with surface
potential ``phi_j``.  The marker velocity combines an alternating-point
cotangent quadrature of the periodic vortex-sheet integral with a local
bound-circulation term; the sheet strength ``gamma`` is not evolved but
recovered at every evaluation from the potential constraint

    D_rho phi_j = gamma_j / 2 + Re[ z_alpha,j * S_j(gamma) ]

with ``S_j(gamma) = (1/(4 pi i)) sum_{p-j odd} gamma_p cot((rz_j - rz_p)/2) 2h``
and ``z_alpha,j = 1 + D_rho(z_j - alpha_j)``.  The alternating-point rule
(only opposite-parity nodes, weight 2h) skips the kernel singularity at
p = j and is spectrally accurate for smooth interfaces.  All spectral
operations act on the periodic parts: positions are filtered through
``rz = alpha + rho_check(z - alpha)``.

The surface potential of a sheet with nonzero mean strength is not periodic:
it carries a linear part ``phi = slope * alpha + periodic``.  The slope is a
discrete circulation, constant in time, stored separately on the state; the
stored samples hold only the periodic part.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field as dc_field
from typing import Optional, Sequence

import numpy as np

from .errors import (
    Diverged,
    GammaSolveFailed,
    JacobianDegenerate,
    QuadratureSingular,
)
from .filters import Filter, wave_filter
from .grid import Grid
from .tableau import ButcherTableau, rk4
from .errors import UnsupportedImplicit

# |cot| beyond this means two filtered nodes are closer than ~1e-10
# to a kernel pole (arguments are half-differences, so the bound is 2/sep).
_COT_LIMIT = 2e10
_JACOBIAN_TOL = 1e-10


@dataclass
class WaterWaveConfig:
    gravity: float = 1.0
    filt: Filter = dc_field(default_factory=wave_filter)
    gamma_tol: float = 1e-12
    gamma_max_iter: int = 200
    gamma_direct_fallback: bool = True
    tableau: ButcherTableau = dc_field(default_factory=rk4)
    tau: float = 1.0 / 4000.0
    t_final: float = 4.0
    guard: float = 1e6

    def __post_init__(self):
        if self.gamma_tol <= 0:
            raise ValueError("gamma_tol must be positive")


@dataclass
class WaterWaveState:
    """Marker positions, periodic potential samples, and the potential slope."""

    grid: Grid
    z: np.ndarray
    phi: np.ndarray
    phi_slope: float = 0.0
    t: float = 0.0
    gamma: Optional[np.ndarray] = None  # cached converged sheet strength

    def __post_init__(self):
        self.z = np.asarray(self.z, dtype=np.complex128)
        self.phi = np.asarray(self.phi, dtype=np.float64)
        if self.z.shape != (self.grid.n,) or self.phi.shape != (self.grid.n,):
            raise ValueError("state arrays must match the grid size")

    @property
    def periodic_part(self) -> np.ndarray:
        return self.z - self.grid.nodes

    @property
    def y(self) -> np.ndarray:
        return self.z.imag


class _Spectral:
    """Per-grid symbols shared by all evaluations."""

    def __init__(self, grid: Grid, filt: Filter):
        self.grid = grid
        self.rho = filt.values(grid)
        self.dsym = 1j * grid.kappa * self.rho

    def filtered(self, f: np.ndarray) -> np.ndarray:
        return np.fft.ifft(self.rho * np.fft.fft(f))

    def deriv(self, f: np.ndarray) -> np.ndarray:
        return np.fft.ifft(self.dsym * np.fft.fft(f))

    def both(self, f: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        fh = np.fft.fft(f)
        return np.fft.ifft(self.rho * fh), np.fft.ifft(self.dsym * fh)


class CotKernel:
    """Alternating-point quadrature of the periodic sheet integral.

    Built once per interface configuration; applying it to a strength vector
    is then a pair of dense (n/2 x n/2) matvecs.  Antisymmetry of the
    cotangent gives the odd-row block as the negative transpose of the
    even-row block, so only one block of complex cotangents is evaluated.
    """

    def __init__(self, rz: np.ndarray, spacing: float):
        n = rz.shape[0]
        arg = 0.5 * (rz[0::2, None] - rz[None, 1::2])
        with np.errstate(divide="ignore", invalid="ignore"):
            cot = 1.0 / np.tan(arg)
        if not np.isfinite(cot).all() or np.max(np.abs(cot)) > _COT_LIMIT:
            raise QuadratureSingular(
                "filtered nodes of opposite parity closer than ~1e-10 to a cotangent pole"
            )
        # weight 2h and prefactor 1/(4 pi i)
        self.block = cot * (spacing / (2.0 * np.pi) * -1j)
        self.n = n

    def apply(self, gamma: np.ndarray) -> np.ndarray:
        s = np.empty(self.n, dtype=np.complex128)
        s[0::2] = self.block @ gamma[1::2]
        s[1::2] = -(self.block.T @ gamma[0::2])
        return s


def cot_kernel_sum(state: WaterWaveState, gamma: np.ndarray,
                   config: Optional[WaterWaveConfig] = None,
                   j: Optional[int] = None):
    """S_j(gamma) for one index j, or the full length-n vector when j is None."""
    config = config or WaterWaveConfig()
    sp = _Spectral(state.grid, config.filt)
    rz = state.grid.nodes + sp.filtered(state.periodic_part)
    s = CotKernel(rz, state.grid.spacing).apply(np.asarray(gamma, dtype=np.float64))
    return s if j is None else complex(s[j])


def _solve_gamma_direct(kernel: CotKernel, z_alpha: np.ndarray,
                        target: np.ndarray) -> np.ndarray:
    """Dense real solve of (I + T) gamma = target, T gamma = 2 Re[z_alpha S(gamma)]."""
    n = kernel.n
    full = np.zeros((n, n), dtype=np.complex128)
    full[0::2, 1::2] = kernel.block
    full[1::2, 0::2] = -kernel.block.T
    t_mat = 2.0 * np.real(z_alpha[:, None] * full)
    return np.linalg.solve(np.eye(n) + t_mat, target)


def _gamma_fixed_point(kernel: CotKernel, z_alpha: np.ndarray, target: np.ndarray,
                       start: np.ndarray, tol: float, max_iter: int,
                       direct_fallback: bool) -> tuple[np.ndarray, int]:
    gamma = start
    residual = math.inf
    for it in range(1, max_iter + 1):
        with np.errstate(over="ignore", invalid="ignore"):
            new = target - 2.0 * np.real(z_alpha * kernel.apply(gamma))
        if not np.isfinite(new).all():
            break  # iteration left the contraction regime
        scale = max(float(np.linalg.norm(new)), 1e-300)
        residual = float(np.linalg.norm(new - gamma)) / scale
        gamma = new
        if residual <= tol:
            return gamma, it
    if direct_fallback and kernel.n <= 1024:
        solved = _solve_gamma_direct(kernel, z_alpha, target)
        if np.isfinite(solved).all():
            return solved, max_iter
    raise GammaSolveFailed(
        f"sheet-strength iteration stalled at relative change {residual:.3g}",
        residual=residual,
    )


def solve_gamma(state: WaterWaveState, config: Optional[WaterWaveConfig] = None,
                warm: Optional[np.ndarray] = None) -> np.ndarray:
    """Converged sheet strength for the current interface and potential."""
    config = config or WaterWaveConfig()
    sp = _Spectral(state.grid, config.filt)
    rho_s, d_s = sp.both(state.periodic_part)
    rz = state.grid.nodes + rho_s
    z_alpha = 1.0 + d_s
    dphi = state.phi_slope + np.real(sp.deriv(state.phi))
    kernel = CotKernel(rz, state.grid.spacing)
    start = state.gamma if warm is None else np.asarray(warm, dtype=np.float64)
    if start is None:
        start = 2.0 * dphi
    gamma, _ = _gamma_fixed_point(
        kernel, z_alpha, 2.0 * dphi, start,
        config.gamma_tol, config.gamma_max_iter, config.gamma_direct_fallback,
    )
    state.gamma = gamma
    return gamma


@dataclass(frozen=True)
class WaterWaveDerivative:
    z_dot: np.ndarray
    phi_dot: np.ndarray
    gamma: np.ndarray
    w_bar: np.ndarray
    z_alpha: np.ndarray
    gamma_iterations: int


def _evaluate_rhs(grid: Grid, z: np.ndarray, phi: np.ndarray, phi_slope: float,
                  config: WaterWaveConfig, sp: _Spectral,
                  warm: Optional[np.ndarray]) -> WaterWaveDerivative:
    s_part = z - grid.nodes
    rho_s, d_s = sp.both(s_part)
    z_alpha = 1.0 + d_s
    if np.min(np.abs(z_alpha)) < _JACOBIAN_TOL:
        raise JacobianDegenerate("interface parametrization derivative vanished")
    dphi = phi_slope + np.real(sp.deriv(phi))
    kernel = CotKernel(grid.nodes + rho_s, grid.spacing)
    start = warm if warm is not None else 2.0 * dphi
    gamma, iters = _gamma_fixed_point(
        kernel, z_alpha, 2.0 * dphi, start,
        config.gamma_tol, config.gamma_max_iter, config.gamma_direct_fallback,
    )
    s_sum = kernel.apply(gamma)
    w_bar = s_sum + gamma / (2.0 * z_alpha)
    z_dot = np.conj(w_bar)
    phi_dot = 0.5 * np.abs(w_bar) ** 2 - config.gravity * z.imag
    return WaterWaveDerivative(z_dot=z_dot, phi_dot=phi_dot, gamma=gamma,
                               w_bar=w_bar, z_alpha=z_alpha, gamma_iterations=iters)


def waterwave_rhs(state: WaterWaveState,
                  config: Optional[WaterWaveConfig] = None) -> WaterWaveDerivative:
    """Marker velocities and potential rate for the current state.

    The sheet strength is re-solved from scratch-or-cache for this state; the
    returned structure carries it along with the mean surface velocity
    ``w_bar`` (markers move at ``conj(w_bar)``).
    """
    config = config or WaterWaveConfig()
    sp = _Spectral(state.grid, config.filt)
    deriv = _evaluate_rhs(state.grid, state.z, state.phi, state.phi_slope,
                          config, sp, state.gamma)
    state.gamma = deriv.gamma
    return deriv


# ---------------------------------------------------------------------------
# initial data
# ---------------------------------------------------------------------------

def state_from_gamma(grid: Grid, z: np.ndarray, gamma: np.ndarray,
                     config: Optional[WaterWaveConfig] = None) -> WaterWaveState:
    """Build a state from positions and sheet strength.

    The potential is recovered from the constraint: its filtered derivative
    must equal ``gamma/2 + Re[z_alpha S(gamma)]``.  The mean of that target
    becomes the (non-periodic) potential slope; the periodic part is obtained
    by inverting the filtered derivative off the mean with the Nyquist mode
    dropped, normalized to zero mean.
    """
    config = config or WaterWaveConfig()
    sp = _Spectral(grid, config.filt)
    z = np.asarray(z, dtype=np.complex128)
    gamma = np.asarray(gamma, dtype=np.float64)
    s_part = z - grid.nodes
    rho_s, d_s = sp.both(s_part)
    kernel = CotKernel(grid.nodes + rho_s, grid.spacing)
    target = gamma / 2.0 + np.real((1.0 + d_s) * kernel.apply(gamma))
    slope = float(np.mean(target))
    that = np.fft.fft(target - slope) / grid.n
    phih = np.zeros_like(that)
    invertible = np.abs(sp.dsym) > 1e-13
    invertible[grid.n // 2] = False
    phih[invertible] = that[invertible] / sp.dsym[invertible]
    phi = np.real(np.fft.ifft(phih) * grid.n)
    return WaterWaveState(grid=grid, z=z, phi=phi, phi_slope=slope, t=0.0,
                          gamma=gamma.copy())


def flat_state(grid: Grid, gamma0: float = 1.0,
               config: Optional[WaterWaveConfig] = None) -> WaterWaveState:
    """Undisturbed surface carrying a uniform sheet of strength gamma0."""
    return state_from_gamma(grid, grid.nodes.astype(np.complex128),
                            np.full(grid.n, float(gamma0)), config)


def cosine_wave_state(grid: Grid, amplitude: float,
                      config: Optional[WaterWaveConfig] = None) -> WaterWaveState:
    """The standard overturning-wave family: y = a cos, gamma = 1 + a sin."""
    z = grid.nodes + 1j * amplitude * np.cos(grid.nodes)
    gamma = 1.0 + amplitude * np.sin(grid.nodes)
    return state_from_gamma(grid, z, gamma, config)


# ---------------------------------------------------------------------------
# time integration
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class DiagnosticsRow:
    t: float
    min_jacobian: float
    max_abs_y: float
    gamma_iterations: int
    energy_proxy: float


@dataclass
class WaterWaveResult:
    state: WaterWaveState
    steps: int
    diagnostics: list
    snapshots: list
    turnover_time: Optional[float]


def _diag_row(t: float, deriv: WaterWaveDerivative, y: np.ndarray,
              spacing: float, gravity: float) -> DiagnosticsRow:
    proxy = 0.5 * spacing * float(np.sum(np.abs(deriv.w_bar) ** 2)) \
        + 0.5 * gravity * spacing * float(np.sum(y**2))
    return DiagnosticsRow(
        t=t,
        min_jacobian=float(np.min(np.real(deriv.z_alpha))),
        max_abs_y=float(np.max(np.abs(y))),
        gamma_iterations=deriv.gamma_iterations,
        energy_proxy=proxy,
    )


def run_waterwave(initial: WaterWaveState, config: Optional[WaterWaveConfig] = None,
                  snapshot_times: Sequence[float] = ()) -> WaterWaveResult:
    """Integrate the surface to ``config.t_final`` with per-step diagnostics.

    Only explicit tableaus are supported (the sheet-strength constraint is
    re-solved at every stage, warm-started from the previous evaluation).
    Snapshots are emitted at the first step reaching each requested time.
    Divergence is declared when the periodic state norm exceeds the guard or
    any sample goes non-finite.
    """
    config = config or WaterWaveConfig()
    tab = config.tableau
    if not tab.explicit:
        raise UnsupportedImplicit("the nonlinear surface solver supports explicit tableaus only")
    grid = initial.grid
    sp = _Spectral(grid, config.filt)
    h = grid.spacing
    tau = config.tau
    t0 = initial.t
    span = config.t_final - t0
    n_full = int(math.floor(span / tau + 1e-12))
    tail = span - n_full * tau
    if tail < 1e-12 * max(tau, 1.0):
        tail = 0.0
    total = n_full + (1 if tail else 0)

    z = initial.z.copy()
    phi = initial.phi.astype(np.float64).copy()
    slope = initial.phi_slope
    warm = initial.gamma

    def norm_of(zv, pv):
        s_part = zv - grid.nodes
        return math.sqrt(h) * (np.linalg.norm(s_part) + np.linalg.norm(pv))

    norm0 = norm_of(z, phi)
    limit = config.guard * max(norm0, 1.0)

    pending = sorted(snapshot_times)
    diagnostics = []
    snapshots = []
    turnover_time = None

    def record(t_now, deriv, zv, pv):
        nonlocal turnover_time, pending
        row = _diag_row(t_now, deriv, zv.imag, h, config.gravity)
        diagnostics.append(row)
        if turnover_time is None and row.min_jacobian < 0.0:
            turnover_time = t_now
        while pending and t_now >= pending[0] - 1e-12:
            pending.pop(0)
            snapshots.append(WaterWaveState(grid=grid, z=zv.copy(), phi=pv.copy(),
                                            phi_slope=slope, t=t_now,
                                            gamma=deriv.gamma.copy()))

    step = 0
    while step < total:
        t_now = t0 + step * tau
        step_tau = tau if step < n_full else tail
        # First stage sits at the accepted state (all shipped explicit
        # tableaus have node 0), so its evaluation doubles as diagnostics.
        stages_z, stages_p = [], []
        for i in range(tab.stages):
            zi, pi = z, phi
            for jj in range(i):
                gij = tab.matrix[i, jj]
                if gij != 0.0:
                    zi = zi + step_tau * gij * stages_z[jj]
                    pi = pi + step_tau * gij * stages_p[jj]
            deriv = _evaluate_rhs(grid, zi, pi, slope, config, sp, warm)
            warm = deriv.gamma
            if i == 0:
                record(t_now, deriv, z, phi)
            stages_z.append(deriv.z_dot)
            stages_p.append(deriv.phi_dot)
        for i in range(tab.stages):
            wi = tab.weights[i]
            if wi != 0.0:
                z = z + step_tau * wi * stages_z[i]
                phi = phi + step_tau * wi * stages_p[i]
        step += 1
        t_next = t0 + step * tau if step <= n_full else config.t_final
        norm = norm_of(z, phi)
        if not (np.isfinite(norm) and np.isfinite(z).all()) or norm > limit:
            ratio = norm / max(norm0, 1.0) if np.isfinite(norm) else math.inf
            exc = Diverged(
                f"surface norm ratio {ratio:.3g} exceeded guard at step {step}",
                step=step, time=t_next, ratio=ratio,
            )
            # Keep what was measured before blow-up for post-mortem analysis.
            exc.partial = WaterWaveResult(state=None, steps=step,
                                          diagnostics=diagnostics,
                                          snapshots=snapshots,
                                          turnover_time=turnover_time)
            raise exc

    final_deriv = _evaluate_rhs(grid, z, phi, slope, config, sp, warm)
    record(config.t_final, final_deriv, z, phi)
    final = WaterWaveState(grid=grid, z=z, phi=phi, phi_slope=slope,
                           t=config.t_final, gamma=final_deriv.gamma)
    return WaterWaveResult(state=final, steps=step, diagnostics=diagnostics,
                           snapshots=snapshots, turnover_time=turnover_time)
