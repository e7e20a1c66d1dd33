"""Solvers for the coupled nonlocal first-order system.

The evolution is

    du/dt = sigma(theta, t) * Lam_rho v + b(theta, t) * D_rho u + g1
    dv/dt = ( -c(theta, t) * u + b(theta, t) * D_rho v + g2 ) / epsilon

where ``Lam_rho`` and ``D_rho`` are the (optionally filtered) fractional
Laplacian and derivative.  Coefficients may be constants or smooth functions
of (theta, t); ``epsilon`` rescales the second equation for the
high-oscillation regime.  For constant coefficients every Fourier mode is an
independent 2x2 oscillator, which provides both an exact closed-form solution
(the oracle used throughout the tests) and an exact per-mode Runge-Kutta
propagator used as a fast path for explicit and implicit tableaus alike.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional, Union

import numpy as np

from .errors import (
    AliasingGuard,
    Diverged,
    FilterRequired,
    InconsistentInitialData,
    NonPositiveCoefficient,
    PoleOfStabilityFunction,
    UnsupportedImplicit,
)
from .filters import Filter
from .grid import Grid, SpectralField
from .operators import derivative_symbol, fractional_laplacian_symbol
from .stability import rk_step
from .tableau import ButcherTableau

Coefficient = Union[float, Callable[[np.ndarray, float], np.ndarray]]


@dataclass(frozen=True)
class CoefficientSet:
    """Coefficients of the system; scalars or callables of (theta, t).

    ``sigma`` and ``c`` must stay positive (checked at every evaluation
    against the declared floors ``sigma_floor``/``c_floor``, default 0).
    ``b`` adds transport terms, ``g1``/``g2`` are forcings, and ``epsilon``
    rescales dv/dt.
    """

    sigma: Coefficient = 1.0
    c: Coefficient = 1.0
    b: Optional[Coefficient] = None
    g1: Optional[Callable[[np.ndarray, float], np.ndarray]] = None
    g2: Optional[Callable[[np.ndarray, float], np.ndarray]] = None
    epsilon: float = 1.0
    sigma_floor: float = 0.0
    c_floor: float = 0.0

    def __post_init__(self):
        if not 0 < self.epsilon <= 1:
            raise ValueError(f"epsilon must lie in (0, 1], got {self.epsilon}")

    @property
    def constant(self) -> bool:
        """True when sigma, c are numbers and there is no transport term."""
        return (not callable(self.sigma) and not callable(self.c)
                and self.b is None)

    @property
    def unforced(self) -> bool:
        return self.g1 is None and self.g2 is None

    def _eval(self, coeff, name, floor, theta, t):
        if callable(coeff):
            vals = np.broadcast_to(
                np.asarray(coeff(theta, t), dtype=np.float64), theta.shape
            )
        else:
            vals = np.full(theta.shape, float(coeff))
        if np.min(vals) <= floor:
            raise NonPositiveCoefficient(
                f"{name} dropped to {np.min(vals):.3g} (floor {floor:.3g}) at t={t:.6g}"
            )
        return vals

    def sigma_at(self, theta, t):
        return self._eval(self.sigma, "sigma", self.sigma_floor, theta, t)

    def c_at(self, theta, t):
        return self._eval(self.c, "c", self.c_floor, theta, t)

    def b_at(self, theta, t):
        if self.b is None:
            return None
        if callable(self.b):
            return np.broadcast_to(
                np.asarray(self.b(theta, t), dtype=np.float64), theta.shape
            )
        return np.full(theta.shape, float(self.b))

    def forcing_at(self, which, theta, t):
        g = self.g1 if which == 1 else self.g2
        if g is None:
            return None
        return np.broadcast_to(np.asarray(g(theta, t), dtype=np.complex128), theta.shape)


@dataclass
class SolverState:
    """Pair of complex grid functions (u, v) at a common time."""

    u: SpectralField
    v: SpectralField
    t: float = 0.0

    def __post_init__(self):
        if self.u.grid != self.v.grid:
            raise ValueError("u and v must share one grid")
        self.u.require_finite()
        self.v.require_finite()

    @property
    def grid(self) -> Grid:
        return self.u.grid


def _require_transport_filter(coeffs: CoefficientSet, filt: Optional[Filter]):
    if coeffs.b is not None:
        if filt is None or not (filt.endpoint_zero and filt.endpoint_flat):
            raise FilterRequired(
                "transport terms need a filter with endpoint_zero and endpoint_flat "
                "(the highest modes must be damped for the discrete energy to stay stable)"
            )


class _RhsKernel:
    """Precomputed symbols for fast evaluation on packed (u, v) arrays."""

    def __init__(self, grid: Grid, coeffs: CoefficientSet, filt: Optional[Filter]):
        _require_transport_filter(coeffs, filt)
        self.grid = grid
        self.coeffs = coeffs
        self.lam = fractional_laplacian_symbol(grid, filt)
        self.deriv = derivative_symbol(grid, filt)
        self.theta = grid.nodes
        self.inv_eps = 1.0 / coeffs.epsilon

    def __call__(self, t: float, y: np.ndarray) -> np.ndarray:
        n = self.grid.n
        u, v = y[:n], y[n:]
        co = self.coeffs
        sigma = co.sigma_at(self.theta, t)
        c = co.c_at(self.theta, t)
        du = sigma * np.fft.ifft(self.lam * np.fft.fft(v))
        dv = -c * u
        b = co.b_at(self.theta, t)
        if b is not None:
            du = du + b * np.fft.ifft(self.deriv * np.fft.fft(u))
            dv = dv + b * np.fft.ifft(self.deriv * np.fft.fft(v))
        g1 = co.forcing_at(1, self.theta, t)
        if g1 is not None:
            du = du + g1
        g2 = co.forcing_at(2, self.theta, t)
        if g2 is not None:
            dv = dv + g2
        return np.concatenate([du, dv * self.inv_eps])


def rhs(state: SolverState, coeffs: CoefficientSet,
        filt: Optional[Filter] = None) -> tuple[SpectralField, SpectralField]:
    """Time derivative (du/dt, dv/dt) of a state."""
    kernel = _RhsKernel(state.grid, coeffs, filt)
    packed = kernel(state.t, np.concatenate([state.u.samples, state.v.samples]))
    n = state.grid.n
    return (SpectralField(state.grid, packed[:n]),
            SpectralField(state.grid, packed[n:]))


# ---------------------------------------------------------------------------
# exact constant-coefficient solution (the oracle)
# ---------------------------------------------------------------------------

def exact_constant_solution(u0: SpectralField, v0: SpectralField, c: float,
                            sigma: float, epsilon: float = 1.0,
                            t: float = 0.0) -> tuple[SpectralField, SpectralField]:
    """Closed-form evolution of each Fourier mode for constant sigma and c.

    Mode k oscillates at ``omega_k = sqrt(sigma*c*|kappa_k|/epsilon)``:

        uhat_k(t) = uhat_k(0) cos(w t) + (sigma |kappa_k| / w) vhat_k(0) sin(w t)
        vhat_k(t) = vhat_k(0) cos(w t) - (c / (epsilon w)) uhat_k(0) sin(w t)

    while the mean mode keeps u fixed and drifts v linearly:
    ``vhat_0(t) = vhat_0(0) - (c/epsilon) uhat_0(0) t``.
    """
    grid = u0.grid
    kab = np.abs(grid.kappa)
    omega = np.sqrt(sigma * c * kab / epsilon)
    uh0, vh0 = u0.spectrum, v0.spectrum
    cos_t, sin_t = np.cos(omega * t), np.sin(omega * t)
    uh = uh0 * cos_t
    vh = vh0 * cos_t
    nz = omega > 0
    uh[nz] += (sigma * kab[nz] / omega[nz]) * vh0[nz] * sin_t[nz]
    vh[nz] -= (c / (epsilon * omega[nz])) * uh0[nz] * sin_t[nz]
    vh[~nz] -= (c / epsilon) * uh0[~nz] * t
    return (SpectralField.from_spectrum(grid, uh),
            SpectralField.from_spectrum(grid, vh))


# ---------------------------------------------------------------------------
# energy
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class EnergyRecord:
    """Discrete energy functional and its pieces at one time.

    ``total = (lambda_part + l2v_part + cu_part) / 2`` is the Lyapunov
    functional that is merely bounded (Gronwall) for variable coefficients;
    ``conserved = (epsilon*lambda_part + cu_part) / 2`` is the combination
    that the constant-coefficient flow preserves exactly (the ``<v, v>`` term
    oscillates even then, so only this part is a strict invariant).
    """

    t: float
    lambda_part: float
    l2v_part: float
    cu_part: float
    epsilon: float = 1.0

    @property
    def total(self) -> float:
        return 0.5 * (self.lambda_part + self.l2v_part + self.cu_part)

    @property
    def conserved(self) -> float:
        return 0.5 * (self.epsilon * self.lambda_part + self.cu_part)


def energy(state: SolverState, coeffs: CoefficientSet,
           filt: Optional[Filter] = None) -> EnergyRecord:
    """Evaluate the energy functional <Lam_rho v, v> + ||v||^2 + <(c/sigma) u, u>."""
    grid = state.grid
    h = grid.spacing
    u, v = state.u.samples, state.v.samples
    lam = fractional_laplacian_symbol(grid, filt)
    lam_v = np.fft.ifft(lam * np.fft.fft(v))
    lambda_part = float(np.real(h * np.vdot(v, lam_v)))
    l2v_part = float(h * np.sum(np.abs(v) ** 2))
    ratio = coeffs.c_at(grid.nodes, state.t) / coeffs.sigma_at(grid.nodes, state.t)
    cu_part = float(h * np.sum(ratio * np.abs(u) ** 2))
    return EnergyRecord(t=state.t, lambda_part=lambda_part, l2v_part=l2v_part,
                        cu_part=cu_part, epsilon=coeffs.epsilon)


# ---------------------------------------------------------------------------
# time integration
# ---------------------------------------------------------------------------

@dataclass
class IntegrationResult:
    state: SolverState
    steps: int
    monitor_series: list
    norm_ratio: float


def _state_norm(y: np.ndarray, n: int, h: float) -> float:
    ru = math.sqrt(h) * np.linalg.norm(y[:n])
    rv = math.sqrt(h) * np.linalg.norm(y[n:])
    return float(ru + rv)


class _SpectralPropagator:
    """Exact per-mode RK map for constant coefficients and no forcing.

    Mode k evolves by the 2x2 matrix ``a_k I + b_k tau A_k`` with
    ``A_k = [[0, sigma*m_k], [-c/epsilon, 0]]`` and ``m_k = |kappa_k| rho_k``.
    Since ``A_k^2 = -nu_k I``, the coefficients follow from the scalar
    stability function evaluated on the imaginary axis:
    ``a_k = Re f(i tau sqrt(nu_k))`` and ``b_k = Im f(.)/(tau sqrt(nu_k))``
    (with the ``sum(w)`` limit at nu = 0).  This reproduces the generic
    stepper to rounding for explicit tableaus and solves the implicit stage
    equations exactly per mode for implicit ones.
    """

    def __init__(self, grid: Grid, coeffs: CoefficientSet,
                 filt: Optional[Filter], tableau: ButcherTableau, tau: float):
        if not (coeffs.constant and coeffs.unforced):
            raise UnsupportedImplicit(
                "per-mode propagation needs constant coefficients and no forcing"
            )
        sigma, c, eps = float(coeffs.sigma), float(coeffs.c), coeffs.epsilon
        rho = np.ones(grid.n) if filt is None else filt.values(grid)
        m = np.abs(grid.kappa) * rho
        nu = sigma * c * m / eps
        y = tau * np.sqrt(nu)
        s = tableau.stages
        lhs = np.broadcast_to(np.eye(s), (grid.n, s, s)) - 1j * y[:, None, None] * tableau.matrix
        try:
            x = np.linalg.solve(lhs, np.ones((grid.n, s, 1), dtype=np.complex128))
        except np.linalg.LinAlgError as exc:
            raise PoleOfStabilityFunction(
                f"{tableau.name}: stage system singular at step {tau:g}"
            ) from exc
        f = 1.0 + 1j * y * (x[:, :, 0] @ tableau.weights)
        self.a = f.real
        wsum = float(np.sum(tableau.weights))
        self.b = np.where(y > 0, np.divide(f.imag, y, out=np.full_like(y, wsum),
                                           where=y > 0), wsum)
        self.usym = tau * self.b * sigma * m      # multiplies vhat in the u update
        self.vsym = tau * self.b * c / eps        # multiplies uhat in the v update
        self.n = grid.n

    def step_spectra(self, uh: np.ndarray, vh: np.ndarray):
        return self.a * uh + self.usym * vh, self.a * vh - self.vsym * uh

    def step(self, y: np.ndarray) -> np.ndarray:
        n = self.n
        uh, vh = self.step_spectra(np.fft.fft(y[:n]), np.fft.fft(y[n:]))
        return np.concatenate([np.fft.ifft(uh), np.fft.ifft(vh)])


def integrate(state: SolverState, coeffs: CoefficientSet, filt: Optional[Filter],
              tableau: ButcherTableau, tau: float, t_final: float,
              monitors=(), guard: float = 1e6,
              method: str = "auto") -> IntegrationResult:
    """Step the system from ``state.t`` to ``t_final`` with a fixed step.

    The last step is shortened to land on ``t_final`` exactly.  Monitors are
    callables ``(t, u_samples, v_samples) -> value`` invoked at the start and
    after every step; their outputs are collected in ``monitor_series``.

    ``method`` is one of ``"auto"``, ``"generic"`` (stagewise evaluation) or
    ``"spectral"`` (exact per-mode map; constant coefficients only).  Implicit
    tableaus are accepted only on the spectral path.

    Raises
    ------
    Diverged
        When the combined l2 norm exceeds ``guard`` times its initial value
        or goes non-finite.
    """
    if tau <= 0:
        raise ValueError("tau must be positive")
    grid = state.grid
    n, h = grid.n, grid.spacing
    spectral_ok = coeffs.constant and coeffs.unforced
    if method == "auto":
        method = "spectral" if spectral_ok else "generic"
    if method == "spectral" and not spectral_ok:
        raise UnsupportedImplicit("spectral stepping needs constant coefficients and no forcing")
    if method == "generic" and not tableau.explicit:
        if not spectral_ok:
            raise UnsupportedImplicit(
                f"{tableau.name} is implicit; only constant-coefficient systems are supported"
            )
        method = "spectral"

    kernel = _RhsKernel(grid, coeffs, filt)  # validates transport preconditions
    y = np.concatenate([state.u.samples, state.v.samples])
    t0 = state.t
    norm0 = _state_norm(y, n, h)
    limit = guard * norm0 if norm0 > 0 else math.inf

    span = t_final - t0
    if span < 0:
        raise ValueError("t_final must not precede the state time")
    n_full = int(math.floor(span / tau + 1e-12))
    tail = span - n_full * tau
    if tail < 1e-12 * max(tau, 1.0):
        tail = 0.0

    series = [[] for _ in monitors]
    for i, m in enumerate(monitors):
        series[i].append(m(t0, y[:n], y[n:]))

    total_steps = n_full + (1 if tail > 0 else 0)
    step = 0

    def check_guard(norm, t_next):
        if not math.isfinite(norm) or norm > limit:
            ratio = norm / norm0 if norm0 > 0 and math.isfinite(norm) else math.inf
            raise Diverged(
                f"norm ratio {ratio:.3g} exceeded guard {guard:g} at step {step}",
                step=step, time=t_next, ratio=ratio,
            )

    if method == "spectral":
        # Work purely on coefficients; samples are materialized only when a
        # monitor needs them.  The norm guard uses Parseval on raw FFTs.
        prop = _SpectralPropagator(grid, coeffs, filt, tableau, tau)
        tail_prop = (_SpectralPropagator(grid, coeffs, filt, tableau, tail)
                     if tail > 0 else None)
        scale = math.sqrt(h / n)
        uh, vh = np.fft.fft(y[:n]), np.fft.fft(y[n:])
        while step < total_steps:
            if step < n_full:
                uh, vh = prop.step_spectra(uh, vh)
                t_next = t0 + (step + 1) * tau
            else:
                uh, vh = tail_prop.step_spectra(uh, vh)
                t_next = t_final
            step += 1
            norm = scale * (np.linalg.norm(uh) + np.linalg.norm(vh))
            check_guard(float(norm), t_next)
            if monitors:
                us, vs = np.fft.ifft(uh), np.fft.ifft(vh)
                for i, m in enumerate(monitors):
                    series[i].append(m(t_next, us, vs))
        y = np.concatenate([np.fft.ifft(uh), np.fft.ifft(vh)])
    else:
        while step < total_steps:
            t_now = t0 + step * tau
            if step < n_full:
                y = rk_step(tableau, kernel, y, t_now, tau)
                t_next = t0 + (step + 1) * tau
            else:
                y = rk_step(tableau, kernel, y, t_now, tail)
                t_next = t_final
            step += 1
            check_guard(_state_norm(y, n, h), t_next)
            for i, m in enumerate(monitors):
                series[i].append(m(t_next, y[:n], y[n:]))

    final = SolverState(
        u=SpectralField(grid, y[:n]),
        v=SpectralField(grid, y[n:]),
        t=t_final,
    )
    ratio = _state_norm(y, n, h) / norm0 if norm0 > 0 else 0.0
    return IntegrationResult(state=final, steps=step, monitor_series=series,
                             norm_ratio=float(ratio))


# ---------------------------------------------------------------------------
# operator spectrum diagnostic
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class OperatorSpectrum:
    eigenvalues: np.ndarray
    max_real: float
    max_imag: float


def operator_spectrum(coeffs: CoefficientSet, t: float, grid: Grid,
                      filt: Optional[Filter] = None) -> OperatorSpectrum:
    """Eigenvalues of the frozen-time linear map (u, v) -> (sigma Lam_rho v, -c u / eps).

    Dense assembly; intended for diagnostic sizes (n <= 2048).  For constant
    coefficients the spectrum is exactly ``+-i sqrt(sigma c |kappa| rho / eps)``;
    for variable smooth coefficients with an endpoint-damping filter the real
    parts stay bounded uniformly in n while the imaginary parts scale like
    ``1/sqrt(h)``.
    """
    if grid.n > 2048:
        raise ValueError("operator spectrum is a dense diagnostic; use n <= 2048")
    n = grid.n
    lam = fractional_laplacian_symbol(grid, filt)
    # Columns of the fractional Laplacian as a real matrix: symbol is real
    # and even, so the imaginary part is rounding noise.
    lam_mat = np.fft.ifft(lam[:, None] * np.fft.fft(np.eye(n), axis=0), axis=0).real
    sigma = coeffs.sigma_at(grid.nodes, t)
    c = coeffs.c_at(grid.nodes, t)
    a = np.zeros((2 * n, 2 * n))
    a[:n, n:] = sigma[:, None] * lam_mat
    a[n:, :n] = -np.diag(c) / coeffs.epsilon
    eigs = np.linalg.eigvals(a)
    return OperatorSpectrum(
        eigenvalues=eigs,
        max_real=float(np.max(eigs.real)),
        max_imag=float(np.max(eigs.imag)),
    )


# ---------------------------------------------------------------------------
# oscillatory (WKB) initial data
# ---------------------------------------------------------------------------

def wkb_profile(x: np.ndarray, epsilon: float) -> np.ndarray:
    """Gaussian-windowed oscillatory profile on the unit circle."""
    window = np.exp(-100.0 * (x - 0.5) ** 2)
    phase = np.log(20.0 * np.cosh(5.0 * x - 2.5)) / epsilon
    return window * np.exp(1j * phase)


def wkb_initial(grid: Grid, epsilon: float, sigma: float = 1.0,
                filt: Optional[Filter] = None,
                mean_policy: str = "drop") -> tuple[SolverState, dict]:
    """State whose u and du/dt both equal the oscillatory profile at t = 0.

    v is recovered by inverting ``sigma * Lam_rho`` mode by mode.  The mean of
    the requested du/dt cannot be represented (the fractional Laplacian kills
    constants), so it is dropped and reported; pass ``mean_policy="raise"``
    to make a nonzero mean an error instead.

    Raises
    ------
    AliasingGuard
        If the grid spacing exceeds epsilon/4, too coarse for the phase.
    """
    if abs(grid.length - 1.0) > 1e-12:
        raise ValueError("oscillatory initial data is defined on the unit-period grid")
    if grid.spacing > epsilon / 4 + 1e-15:
        raise AliasingGuard(
            f"need spacing <= epsilon/4 = {epsilon / 4:.3g}, got {grid.spacing:.3g}"
        )
    profile = wkb_profile(grid.nodes, epsilon)
    u = SpectralField(grid, profile)
    ut_hat = u.spectrum.copy()
    dropped = complex(ut_hat[0])
    if mean_policy == "raise" and abs(dropped) > 1e-14 * max(np.abs(ut_hat).max(), 1e-300):
        raise InconsistentInitialData(
            f"requested du/dt has nonzero mean {dropped:.3g}"
        )
    rho = np.ones(grid.n) if filt is None else filt.values(grid)
    m = sigma * np.abs(grid.kappa) * rho
    vh = np.zeros_like(ut_hat)
    good = m > 1e-14
    vh[good] = ut_hat[good] / m[good]
    leftover = np.abs(ut_hat[~good]).sum() - abs(dropped)
    v = SpectralField.from_spectrum(grid, vh)
    info = {"dropped_mean": dropped, "dropped_filtered_mass": float(max(leftover, 0.0))}
    return SolverState(u=u, v=v, t=0.0), info
