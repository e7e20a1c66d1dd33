"""Uniform periodic grids and grid functions with cached Fourier coefficients.

Conventions
-----------
A grid with ``n`` nodes on a period of length ``L`` has spacing ``h = L/n``
and nodes ``theta_j = j*h``.  Fourier coefficients are indexed by the integer
modes ``k in {-n/2+1, ..., n/2}`` (the Nyquist bin is assigned to ``+n/2``),
stored in FFT layout.  The physical wavenumber of mode ``k`` is
``kappa(k) = 2*pi*k/L`` and the normalized phase is ``xi(k) = 2*pi*k/n``,
which always lies in ``(-pi, pi]``.

The coefficient normalization is ``f_j = sum_k fhat_k exp(i*kappa(k)*theta_j)``
with ``fhat_k = (1/n) * sum_j f_j exp(-i*kappa(k)*theta_j)``, so the discrete
inner product ``<f, g> = h * sum_j f_j conj(g_j)`` satisfies Parseval's
identity ``<f, g> = L * sum_k fhat_k conj(ghat_k)``.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Callable

import numpy as np

from .errors import InvalidField

TWO_PI = 2.0 * np.pi


@dataclass(frozen=True)
class Grid:
    """Uniform periodic grid: ``n`` even nodes on a circle of length ``length``."""

    n: int
    length: float = TWO_PI

    def __post_init__(self):
        if self.n <= 0 or self.n % 2 != 0:
            raise ValueError(f"node count must be even and positive, got {self.n}")
        if not self.length > 0:
            raise ValueError(f"period must be positive, got {self.length}")

    @property
    def spacing(self) -> float:
        return self.length / self.n

    @cached_property
    def nodes(self) -> np.ndarray:
        return np.arange(self.n) * self.spacing

    @cached_property
    def modes(self) -> np.ndarray:
        """Integer mode indices in FFT layout, with the Nyquist bin at +n/2."""
        k = np.fft.fftfreq(self.n, d=1.0 / self.n).astype(np.int64)
        k[self.n // 2] = self.n // 2
        return k

    @cached_property
    def kappa(self) -> np.ndarray:
        """Physical wavenumbers 2*pi*k/length, FFT layout."""
        return TWO_PI * self.modes / self.length

    @cached_property
    def xi(self) -> np.ndarray:
        """Normalized phases 2*pi*k/n in (-pi, pi], FFT layout."""
        return TWO_PI * self.modes / self.n

    def __hash__(self):
        return hash((self.n, self.length))


class SpectralField:
    """Immutable complex grid function with lazily cached DFT coefficients.

    Samples are frozen at construction, so the coefficient cache can never go
    stale and fields are safe to share across threads (call :attr:`spectrum`
    once before sharing to avoid a racy first computation).  All operators
    acting on fields return new instances.
    """

    __slots__ = ("grid", "_samples", "_spectrum")

    def __init__(self, grid: Grid, samples, _spectrum=None):
        samples = np.asarray(samples, dtype=np.complex128)
        if samples.shape != (grid.n,):
            raise ValueError(f"expected {grid.n} samples, got shape {samples.shape}")
        samples = samples.copy()
        samples.flags.writeable = False
        self.grid = grid
        self._samples = samples
        self._spectrum = _spectrum

    @classmethod
    def from_function(cls, grid: Grid, fn: Callable) -> "SpectralField":
        return cls(grid, fn(grid.nodes))

    @classmethod
    def from_spectrum(cls, grid: Grid, coeffs) -> "SpectralField":
        coeffs = np.asarray(coeffs, dtype=np.complex128)
        if coeffs.shape != (grid.n,):
            raise ValueError(f"expected {grid.n} coefficients, got {coeffs.shape}")
        samples = np.fft.ifft(coeffs) * grid.n
        coeffs = coeffs.copy()
        coeffs.flags.writeable = False
        return cls(grid, samples, _spectrum=coeffs)

    @property
    def samples(self) -> np.ndarray:
        return self._samples

    @property
    def spectrum(self) -> np.ndarray:
        """Coefficients fhat_k in FFT layout (computed once, then cached)."""
        if self._spectrum is None:
            spec = np.fft.fft(self._samples) / self.grid.n
            spec.flags.writeable = False
            self._spectrum = spec
        return self._spectrum

    def require_finite(self):
        if not np.isfinite(self._samples).all():
            raise InvalidField("field contains NaN or Inf samples")
        return self

    @property
    def is_finite(self) -> bool:
        return bool(np.isfinite(self._samples).all())

    def __add__(self, other):
        if isinstance(other, SpectralField):
            self._check_same_grid(other)
            return SpectralField(self.grid, self._samples + other._samples)
        return SpectralField(self.grid, self._samples + other)

    def __sub__(self, other):
        if isinstance(other, SpectralField):
            self._check_same_grid(other)
            return SpectralField(self.grid, self._samples - other._samples)
        return SpectralField(self.grid, self._samples - other)

    def __mul__(self, other):
        if isinstance(other, SpectralField):
            self._check_same_grid(other)
            return SpectralField(self.grid, self._samples * other._samples)
        return SpectralField(self.grid, self._samples * other)

    __rmul__ = __mul__

    def __neg__(self):
        return SpectralField(self.grid, -self._samples)

    def _check_same_grid(self, other: "SpectralField"):
        if other.grid != self.grid:
            raise ValueError("fields live on different grids")

    def __repr__(self):
        return f"SpectralField(n={self.grid.n}, length={self.grid.length:.6g})"
