"""Uniform position grid, its conjugate momentum grid, and spectral kernels.

Discrete Fourier convention, shared by every module that touches momentum
space (forward transform, position to momentum):

    f_tilde(p_j) = dx/sqrt(2*pi) * sum_k f(x_k) * exp(-i*p_j*x_k)

with p_j = (j - n/2)*dp, dp = 2*pi/(n*dx), so the momentum grid spans
[-pi/dx, pi/dx).  With these weights the pair is unitary: Parseval holds as
sum|f|^2*dx = sum|f_tilde|^2*dp.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .errors import DomainError, GridMismatchError, ResourceError

DENSE_MATRIX_LIMIT = 4096


@dataclass(frozen=True)
class Grid1D:
    """Uniform grid of n_points samples on [x_min, x_min + n_points*dx)."""

    n_points: int
    x_min: float
    dx: float

    @property
    def x_max(self) -> float:
        return self.x_min + self.n_points * self.dx

    @property
    def dp(self) -> float:
        return 2 * np.pi / (self.n_points * self.dx)

    @cached_property
    def x(self) -> np.ndarray:
        return self.x_min + self.dx * np.arange(self.n_points)

    @cached_property
    def p(self) -> np.ndarray:
        """Momentum samples sorted ascending, spanning [-pi/dx, pi/dx)."""
        return (np.arange(self.n_points) - self.n_points // 2) * self.dp

    @cached_property
    def p_fft(self) -> np.ndarray:
        """Momentum samples in numpy FFT order, for diagonal propagators."""
        return 2 * np.pi * np.fft.fftfreq(self.n_points, d=self.dx)

    def same_as(self, other: "Grid1D") -> bool:
        return (self.n_points == other.n_points
                and abs(self.x_min - other.x_min) < 1e-12
                and abs(self.dx - other.dx) < 1e-12)


def make_grid(n_points: int, x_half_width: float) -> Grid1D:
    """Symmetric grid on [-x_half_width, x_half_width - dx]."""
    if n_points < 16 or (n_points & (n_points - 1)) != 0:
        raise DomainError("n_points must be a power of two >= 16")
    if x_half_width <= 0:
        raise DomainError("x_half_width must be positive")
    dx = 2 * x_half_width / n_points
    return Grid1D(n_points=n_points, x_min=-x_half_width, dx=dx)


def default_half_width(x_shift: float) -> float:
    """Grid half width so a state displaced by x_shift stays far from the edge."""
    return max(8.0, 4.0 * abs(x_shift) + 8.0)


@dataclass
class ComplexField:
    """Complex samples on a Grid1D, in position ('x') or momentum ('p') space."""

    grid: Grid1D
    values: np.ndarray
    space: str = "x"

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=complex)
        if self.values.shape != (self.grid.n_points,):
            raise GridMismatchError("field length does not match grid")
        if self.space not in ("x", "p"):
            raise DomainError("space must be 'x' or 'p'")

    @property
    def measure(self) -> float:
        return self.grid.dx if self.space == "x" else self.grid.dp

    def norm_squared(self) -> float:
        return float(np.sum(np.abs(self.values) ** 2) * self.measure)

    def normalized(self) -> "ComplexField":
        n2 = self.norm_squared()
        if n2 <= 0:
            raise DomainError("cannot normalize a zero field")
        return ComplexField(self.grid, self.values / np.sqrt(n2), self.space)

    def copy(self) -> "ComplexField":
        return ComplexField(self.grid, self.values.copy(), self.space)


def inner(a: ComplexField, b: ComplexField) -> complex:
    """<a|b> with the grid measure."""
    if not a.grid.same_as(b.grid) or a.space != b.space:
        raise GridMismatchError("inner product needs matching grids")
    return complex(np.sum(np.conj(a.values) * b.values) * a.measure)


def to_momentum(f: ComplexField) -> ComplexField:
    """Unitary transform to the sorted momentum grid."""
    if f.space != "x":
        raise DomainError("to_momentum expects a position-space field")
    g = f.grid
    n = g.n_points
    # exp(-i p_j x_k) = exp(-i p_j x_min) * (-1)^k * exp(-2*pi*i*j*k/n)
    signs = np.where(np.arange(n) % 2 == 0, 1.0, -1.0)
    spec = np.fft.fft(f.values * signs)
    spec *= np.exp(-1j * g.p * g.x_min) * g.dx / np.sqrt(2 * np.pi)
    return ComplexField(g, spec, space="p")


def from_momentum(f: ComplexField) -> ComplexField:
    """Inverse of to_momentum."""
    if f.space != "p":
        raise DomainError("from_momentum expects a momentum-space field")
    g = f.grid
    n = g.n_points
    work = f.values * np.exp(1j * g.p * g.x_min)
    signs = np.where(np.arange(n) % 2 == 0, 1.0, -1.0)
    vals = np.fft.ifft(work) * signs
    vals *= n * g.dp / np.sqrt(2 * np.pi)
    return ComplexField(g, vals, space="x")


def spectral_derivative(values: np.ndarray, grid: Grid1D, order: int = 1) -> np.ndarray:
    """d^order/dx^order via the Fourier grid.  Real input gives real output."""
    spec = np.fft.fft(values)
    spec *= (1j * grid.p_fft) ** order
    out = np.fft.ifft(spec)
    if np.isrealobj(values):
        return out.real
    return out


def translate(field: ComplexField, a: float) -> ComplexField:
    """phi(x) -> phi(x - a) by a momentum-space phase ramp (periodic)."""
    if field.space != "x":
        raise DomainError("translate expects a position-space field")
    spec = np.fft.fft(field.values)
    spec *= np.exp(-1j * field.grid.p_fft * a)
    return ComplexField(field.grid, np.fft.ifft(spec), space="x")


def boost(field: ComplexField, p0: float) -> ComplexField:
    """Momentum boost: multiply by exp(i*p0*x)."""
    if field.space != "x":
        raise DomainError("boost expects a position-space field")
    return ComplexField(field.grid,
                        field.values * np.exp(1j * p0 * field.grid.x), space="x")


def kinetic_matrix(grid: Grid1D) -> np.ndarray:
    """Dense real symmetric Fourier-grid matrix for p^2/2.

    Built as a circulant from the inverse transform of p^2/2, then
    symmetrized to remove roundoff; exact on grid-commensurate plane waves.
    """
    n = grid.n_points
    if n > DENSE_MATRIX_LIMIT:
        raise ResourceError(
            f"dense kinetic matrix for n_points={n} exceeds the "
            f"{DENSE_MATRIX_LIMIT} limit; use a coarser grid or apply p^2/2 "
            "spectrally instead")
    kernel = np.fft.ifft(grid.p_fft**2 / 2).real  # row 0 of the circulant
    idx = (np.arange(n)[:, None] - np.arange(n)[None, :]) % n
    mat = kernel[idx]
    return (mat + mat.T) / 2
