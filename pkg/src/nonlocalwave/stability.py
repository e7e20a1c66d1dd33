"""Exact Runge-Kutta growth-factor analysis for the oscillatory mode family.

Each Fourier mode of the coupled first-order system reduces, after a real
similarity transform, to ``y' = Q y`` with ``Q = [[0, sqrt(nu)], [-sqrt(nu), 0]]``
and mode parameter ``nu = c*sigma*|kappa|`` (divided by epsilon in the
rescaled regime).  Because ``Q^2 = -nu*I``, one step of any Runge-Kutta
method produces a growth matrix of the form ``a*I + b*tau*Q`` whose l2 norm
equals its spectral radius

    psi(tau, nu) = sqrt( |det(I + tau^2 nu (G - e w^T)^2)|
                       / |det(I + tau^2 nu G^2)| )

which is also ``|f(i tau sqrt(nu))|`` for the scalar stability function
``f(z) = 1 + z w^T (I - zG)^{-1} e``.  The functions here compute psi both
ways, locate the imaginary-axis extent of the stability region, and turn it
into square-root-type CFL step limits.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .errors import NoImaginaryAxisStability, PoleOfStabilityFunction, StageSolveFailed, UnsupportedImplicit
from .tableau import ButcherTableau

# Growth this close to 1 counts as "no growth" when searching the imaginary axis.
EXTENT_TOL = 1e-12
# Extents below this are artifacts of the finite tolerance: a method with
# psi^2 ~ 1 + q y^2 formally satisfies psi <= 1 + EXTENT_TOL out to
# y ~ sqrt(2e-12/q), which stays below 1e-4 for any growth coefficient
# q >= 2e-4.  Such values collapse to an exact zero.
EXTENT_FLOOR = 1e-4
EXTENT_CAP = 1e3


@dataclass(frozen=True)
class GrowthQuery:
    """A (tau, nu) pair; the growth factor depends only on z = tau^2 * nu."""

    tau: float
    nu: float

    def __post_init__(self):
        if self.tau <= 0 or self.nu < 0:
            raise ValueError("need tau > 0 and nu >= 0")

    @property
    def z(self) -> float:
        return self.tau**2 * self.nu


class TraceClass(enum.Enum):
    STRONG_AS_TAU_TO_0 = "strong"
    WEAK_AS_TAU_TO_0 = "weak"


@dataclass(frozen=True)
class StabilityReport:
    classification: TraceClass
    tr_g2: float
    tr_gewt2: float
    imag_extent: float
    notes: str = ""


def _ewt(t: ButcherTableau) -> np.ndarray:
    return np.outer(np.ones(t.stages), t.weights)


def stability_function(t: ButcherTableau, z: complex) -> complex:
    """f(z) = 1 + z w^T (I - zG)^{-1} e via a linear solve."""
    s = t.stages
    a = np.eye(s) - z * t.matrix
    try:
        x = np.linalg.solve(a, np.ones(s))
    except np.linalg.LinAlgError as exc:
        raise PoleOfStabilityFunction(f"I - zG singular at z={z}") from exc
    if not np.isfinite(x).all():
        raise PoleOfStabilityFunction(f"I - zG singular at z={z}")
    return complex(1.0 + z * np.dot(t.weights, x))


def stability_function_det(t: ButcherTableau, z: complex) -> complex:
    """Determinant form det(I - zG + z e w^T) / det(I - zG)."""
    s = np.eye(t.stages)
    num = np.linalg.det(s - z * t.matrix + z * _ewt(t))
    den = np.linalg.det(s - z * t.matrix)
    if den == 0:
        raise PoleOfStabilityFunction(f"I - zG singular at z={z}")
    return complex(num / den)


def growth_factor_z(t: ButcherTableau, z: float) -> float:
    """psi as a function of z = tau^2 * nu >= 0."""
    if z < 0:
        raise ValueError("z must be nonnegative")
    s = np.eye(t.stages)
    num = abs(np.linalg.det(s + z * np.linalg.matrix_power(t.matrix - _ewt(t), 2)))
    if t.explicit:
        den = 1.0  # I + z G^2 is unit lower triangular
    else:
        den = abs(np.linalg.det(s + z * np.linalg.matrix_power(t.matrix, 2)))
        if den == 0 or not math.isfinite(den):
            raise PoleOfStabilityFunction(f"det(I + zG^2) vanishes at z={z}")
    return math.sqrt(num / den)


def growth_factor(t: ButcherTableau, query: GrowthQuery) -> float:
    """One-step amplification psi(tau, nu) of the oscillatory mode pair."""
    return growth_factor_z(t, query.z)


def brute_force_growth(t: ButcherTableau, tau: float, nu: float) -> np.ndarray:
    """Assemble the 2x2 growth matrix by actually taking one RK step.

    The stage equations for the linear system ``y' = Q y`` are solved exactly
    as one (2s)x(2s) linear system, so this covers implicit tableaus too and
    serves as the independent oracle for :func:`growth_factor`.
    """
    s = t.stages
    q = math.sqrt(nu) * np.array([[0.0, 1.0], [-1.0, 0.0]])
    lhs = np.eye(2 * s) - tau * np.kron(t.matrix, q)
    m = np.empty((2, 2))
    for col, y in enumerate(np.eye(2)):
        rhs = np.kron(np.ones(s), q @ y)
        try:
            k = np.linalg.solve(lhs, rhs)
        except np.linalg.LinAlgError as exc:
            raise PoleOfStabilityFunction(
                f"stage system singular at tau={tau}, nu={nu}"
            ) from exc
        m[:, col] = y + tau * (np.kron(t.weights, np.eye(2)) @ k)
    return m


def _psi_on_grid(t: ButcherTableau, y: np.ndarray) -> np.ndarray:
    """|f(iy)| on an array of y >= 0, via eigenvalue products (vectorized)."""
    z = (y.astype(np.complex128)) ** 2
    num_eigs = np.linalg.eigvals(np.linalg.matrix_power(t.matrix - _ewt(t), 2))
    num = np.abs(np.prod(1.0 + np.multiply.outer(z, num_eigs), axis=-1))
    if t.explicit:
        den = 1.0
    else:
        den_eigs = np.linalg.eigvals(np.linalg.matrix_power(t.matrix, 2))
        den = np.abs(np.prod(1.0 + np.multiply.outer(z, den_eigs), axis=-1))
    with np.errstate(divide="ignore", invalid="ignore"):
        out = np.sqrt(num / den)
    return out


def imag_axis_extent(t: ButcherTableau, cap: float = EXTENT_CAP,
                     coarse_step: float = 1e-3, resolution: float = 1e-9) -> float:
    """Largest y with psi <= 1 + 1e-12 on all of [0, y]; inf if that holds up to ``cap``.

    A coarse scan at spacing ``coarse_step`` brackets the first crossing,
    then bisection refines it to ``resolution``.  Results below a small floor
    collapse to exactly 0 (see :data:`EXTENT_FLOOR`).
    """
    tol = 1.0 + EXTENT_TOL
    y = np.arange(0.0, cap + coarse_step, coarse_step)
    psi = _psi_on_grid(t, y)
    bad = np.nonzero(~(psi <= tol))[0]  # catches NaN from poles as well
    if bad.size == 0:
        return math.inf
    first = bad[0]
    if first == 0:
        return 0.0
    lo, hi = y[first - 1], y[first]
    while hi - lo > resolution:
        mid = 0.5 * (lo + hi)
        if _psi_on_grid(t, np.array([mid]))[0] <= tol:
            lo = mid
        else:
            hi = mid
    extent = 0.5 * (lo + hi)
    return 0.0 if extent <= EXTENT_FLOOR else extent


def cfl_threshold(t: ButcherTableau, c: float, sigma: float, h: float,
                  epsilon: float = 1.0, extent: float = None) -> float:
    """Largest tau with tau * sqrt(nu_max / epsilon) inside the imaginary-axis extent.

    With ``nu_max = c*sigma*pi/h`` this is the square-root step law
    ``tau_max = C1 * sqrt(epsilon * h / (c*sigma*pi))``.

    Raises
    ------
    NoImaginaryAxisStability
        If the extent is zero; the caller must fall back to a tau ~ h regime.
    """
    if extent is None:
        extent = imag_axis_extent(t)
    if extent == 0.0:
        raise NoImaginaryAxisStability(
            f"{t.name}: stability region meets the imaginary axis only at 0"
        )
    if math.isinf(extent):
        return math.inf
    return extent * math.sqrt(epsilon * h / (c * sigma * math.pi))


def classify(t: ButcherTableau) -> StabilityReport:
    """Trace test for strong vs weak small-step stability, plus the axis extent."""
    tr_g2 = float(np.trace(np.linalg.matrix_power(t.matrix, 2)))
    tr_gewt2 = float(np.trace(np.linalg.matrix_power(t.matrix - _ewt(t), 2)))
    # Ties are weak; compare with a tolerance so exact ties (e.g. both traces
    # zero) are not broken by rounding in the matrix products.
    tie_tol = 1e-12 * max(1.0, abs(tr_g2), abs(tr_gewt2))
    strong = tr_g2 > tr_gewt2 + tie_tol
    extent = imag_axis_extent(t)
    notes = ""
    if not strong and extent > 0:
        notes = "weak by trace test, but strongly stable under the square-root step law"
    return StabilityReport(
        classification=TraceClass.STRONG_AS_TAU_TO_0 if strong else TraceClass.WEAK_AS_TAU_TO_0,
        tr_g2=tr_g2,
        tr_gewt2=tr_gewt2,
        imag_extent=extent,
        notes=notes,
    )


# ---------------------------------------------------------------------------
# generic tableau stepping
# ---------------------------------------------------------------------------

def rk_step(t: ButcherTableau, rhs, y, time: float, tau: float, stage_solver=None):
    """One Runge-Kutta step of size tau on an ndarray state.

    ``rhs(time, y) -> dy`` may return complex arrays of any shape.  Explicit
    tableaus are evaluated stage by stage; implicit tableaus require a
    ``stage_solver(t, rhs, y, time, tau) -> list_of_stage_derivatives``.
    """
    y = np.asarray(y)
    if t.explicit:
        stages = []
        for i in range(t.stages):
            yi = y
            for j in range(i):
                gij = t.matrix[i, j]
                if gij != 0.0:
                    yi = yi + tau * gij * stages[j]
            stages.append(np.asarray(rhs(time + t.nodes[i] * tau, yi)))
    else:
        if stage_solver is None:
            raise UnsupportedImplicit(
                f"{t.name} has implicit stages; provide a stage_solver"
            )
        stages = stage_solver(t, rhs, y, time, tau)
    out = y
    for i in range(t.stages):
        wi = t.weights[i]
        if wi != 0.0:
            out = out + tau * wi * stages[i]
    return out


def fixed_point_stage_solver(max_iter: int = 100, tol: float = 1e-13):
    """Picard iteration on the stage derivatives, for mildly implicit problems."""

    def solver(t: ButcherTableau, rhs, y, time: float, tau: float):
        y = np.asarray(y)
        stages = [np.asarray(rhs(time + t.nodes[i] * tau, y)) for i in range(t.stages)]
        for _ in range(max_iter):
            new = []
            for i in range(t.stages):
                yi = y
                for j in range(t.stages):
                    gij = t.matrix[i, j]
                    if gij != 0.0:
                        yi = yi + tau * gij * stages[j]
                new.append(np.asarray(rhs(time + t.nodes[i] * tau, yi)))
            change = max(
                float(np.max(np.abs(a - b))) if a.size else 0.0
                for a, b in zip(new, stages)
            )
            scale = max(max(float(np.max(np.abs(a))) for a in new), 1e-300)
            stages = new
            if change <= tol * scale:
                return stages
        raise StageSolveFailed(
            f"{t.name}: stage fixed point did not converge within {max_iter} iterations"
        )

    return solver
