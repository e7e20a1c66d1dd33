"""Pseudo-spectral laboratory for nonlocal hyperbolic wave systems.

Subpackages by concern:

* :mod:`~nonlocalwave.grid`, :mod:`~nonlocalwave.operators`,
  :mod:`~nonlocalwave.filters` -- periodic grids, multiplier operators,
  norms, filters.
* :mod:`~nonlocalwave.tableau`, :mod:`~nonlocalwave.stability` -- Butcher
  tableaus, exact growth-factor analysis, square-root CFL thresholds,
  generic RK stepping.
* :mod:`~nonlocalwave.system` -- the coupled nonlocal system: right-hand
  sides, exact constant-coefficient oracle, energy, integration,
  operator-spectrum diagnostic, oscillatory initial data.
* :mod:`~nonlocalwave.waterwave` -- filtered Lagrangian water-wave scheme.
* :mod:`~nonlocalwave.experiments` -- stability scans, convergence sweeps,
  caustic sweeps, CSV/manifest artifacts.
* :mod:`~nonlocalwave.cli` -- the ``nlwave`` command.
"""

from . import errors
from .filters import (
    Filter,
    exponential_filter,
    identity_filter,
    sharp_filter,
    sinc_filter,
    wave_filter,
)
from .grid import Grid, SpectralField
from .operators import (
    apply_symbol,
    commutator_smoothing_diag,
    derivative,
    fractional_laplacian,
    h1_norm,
    h_half_norm,
    hilbert,
    inner,
    l2_norm,
    linf_norm,
    norms_and_inner,
    q_norm,
    smooth,
)
from .stability import (
    GrowthQuery,
    StabilityReport,
    TraceClass,
    brute_force_growth,
    cfl_threshold,
    classify,
    fixed_point_stage_solver,
    growth_factor,
    growth_factor_z,
    imag_axis_extent,
    rk_step,
    stability_function,
    stability_function_det,
)
from .system import (
    CoefficientSet,
    EnergyRecord,
    IntegrationResult,
    SolverState,
    energy,
    exact_constant_solution,
    integrate,
    operator_spectrum,
    rhs,
    wkb_initial,
    wkb_profile,
)
from .tableau import (
    ButcherTableau,
    backward_euler,
    crank_nicolson,
    forward_euler,
    load_tableau,
    parse_tableau,
    rk4,
    weighted_euler,
)
from .waterwave import (
    CotKernel,
    WaterWaveConfig,
    WaterWaveResult,
    WaterWaveState,
    cosine_wave_state,
    cot_kernel_sum,
    flat_state,
    run_waterwave,
    solve_gamma,
    state_from_gamma,
    waterwave_rhs,
)

__version__ = "0.1.0"
