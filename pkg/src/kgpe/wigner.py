"""Discrete Wigner transform, time averaging, and momentum-moment analysis.

The transform follows the pure-state definition with the harmonic-unit
effective hbar equal to 1:

    W(x_i, p_j) = (dx/pi) * Re sum_m exp(-2i*p_j*m*dx)
                   * conj(phi(x_i - m*dx)) * phi(x_i + m*dx)

with zero padding outside the grid.  The Wigner momentum lattice has
n_points samples spaced pi/(n_points*dx) (twice as fine as the field's
conjugate grid, matching the exp(-2ip tau) kernel) spanning
[-pi/(2dx), pi/(2dx)).  With these weights the p-marginal reproduces
|phi(x)|^2 exactly, so W integrates to the state norm.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DomainError, GridMismatchError
from .grids import ComplexField, Grid1D, spectral_derivative

DENSITY_FLOOR = 1e-6   # below this rho, moment ratios are masked as undefined


@dataclass
class WignerGrid:
    """Real W(x_i, p_j) on the position x momentum lattice, row-major in x."""

    x_grid: np.ndarray
    p_grid: np.ndarray
    values: np.ndarray
    dx: float
    dp: float

    def same_lattice(self, other: "WignerGrid") -> bool:
        return (self.values.shape == other.values.shape
                and abs(self.dx - other.dx) < 1e-12
                and abs(self.dp - other.dp) < 1e-12
                and abs(self.x_grid[0] - other.x_grid[0]) < 1e-12)

    def marginal_x(self) -> np.ndarray:
        """Integral over p; equals |phi(x)|^2 for a transform of phi."""
        return self.values.sum(axis=1) * self.dp

    def marginal_p(self) -> np.ndarray:
        return self.values.sum(axis=0) * self.dx

    def total(self) -> float:
        return float(self.values.sum() * self.dx * self.dp)


def wigner_momentum_grid(grid: Grid1D) -> np.ndarray:
    n = grid.n_points
    dp_w = np.pi / (n * grid.dx)
    return (np.arange(n) - n // 2) * dp_w


def wigner_transform(field: ComplexField) -> WignerGrid:
    """Wigner function of a position-space field, exactly real by construction."""
    if field.space != "x":
        raise DomainError("wigner_transform expects a position-space field")
    grid = field.grid
    n = grid.n_points
    half = n // 2
    pad = np.zeros(3 * n, dtype=complex)
    pad[n:2 * n] = field.values

    # correlation C[i, m] = conj(phi(x_i - m dx)) * phi(x_i + m dx), with the
    # offset m stored in FFT order (0..half-1, -half..-1)
    m_fft = np.where(np.arange(n) < half, np.arange(n), np.arange(n) - n)
    ii = np.arange(n)[:, None] + n
    corr = np.conj(pad[ii - m_fft[None, :]]) * pad[ii + m_fft[None, :]]

    spec = np.fft.fft(corr, axis=1)
    w = (grid.dx / np.pi) * np.fft.fftshift(spec, axes=1).real
    return WignerGrid(x_grid=grid.x, p_grid=wigner_momentum_grid(grid),
                      values=w, dx=grid.dx, dp=float(np.pi / (n * grid.dx)))


def accumulate_time_average(snapshots) -> WignerGrid:
    """Pointwise arithmetic mean of Wigner snapshots on one common lattice."""
    snapshots = list(snapshots)
    if not snapshots:
        raise DomainError("need at least one snapshot")
    first = snapshots[0]
    acc = np.zeros_like(first.values)
    for snap in snapshots:
        if not first.same_lattice(snap):
            raise GridMismatchError("snapshots live on different lattices")
        acc += snap.values
    acc /= len(snapshots)
    return WignerGrid(first.x_grid, first.p_grid, acc, first.dx, first.dp)


@dataclass
class MomentFields:
    """Density and momentum moments of a Wigner function.

    P_n is indexed 1..n_max in `p_moments` (p_moments[0] is P_1 = P).
    Entries of P_n and sigma_p2 where rho < DENSITY_FLOOR are undefined;
    `defined` marks the usable region.
    """

    rho: np.ndarray
    p_moments: np.ndarray
    sigma_p2: np.ndarray
    defined: np.ndarray

    @property
    def momentum_field(self) -> np.ndarray:
        return self.p_moments[0]


def moments(w: WignerGrid, n_max: int = 2) -> MomentFields:
    """Quadrature moments rho*P_n(x) = integral dp p^n W(x,p)."""
    if n_max < 1:
        raise DomainError("n_max must be >= 1")
    rho = w.marginal_x()
    if rho.min() < -1e-12:
        raise DomainError("marginal density is negative beyond roundoff")
    rho = np.clip(rho, 0.0, None)
    defined = rho > DENSITY_FLOOR
    safe_rho = np.where(defined, rho, 1.0)
    p_moments = np.empty((n_max, rho.size))
    for order in range(1, n_max + 1):
        raw = (w.values * w.p_grid**order).sum(axis=1) * w.dp
        p_moments[order - 1] = np.where(defined, raw / safe_rho, 0.0)
    if n_max >= 2:
        sigma = np.where(defined, p_moments[1] - p_moments[0] ** 2, 0.0)
    else:
        raw2 = (w.values * w.p_grid**2).sum(axis=1) * w.dp
        sigma = np.where(defined, raw2 / safe_rho - p_moments[0] ** 2, 0.0)
    return MomentFields(rho=rho, p_moments=p_moments, sigma_p2=sigma,
                        defined=defined)


def symmetrized_moment(field: ComplexField, order: int) -> np.ndarray:
    """rho*P_n directly from the wavefunction (Weyl-symmetrized moment).

    Independent of the Wigner path: uses spectral derivatives,
    rho*P_n = Re 2^-n sum_r C(n,r) conj(D^r phi) D^(n-r) phi, D = -i d/dx.
    """
    from math import comb
    derivs = [field.values.copy()]
    for _ in range(order):
        derivs.append(-1j * spectral_derivative(derivs[-1], field.grid))
    acc = np.zeros(field.grid.n_points, dtype=complex)
    for r in range(order + 1):
        acc += comb(order, r) * np.conj(derivs[r]) * derivs[order - r]
    return (acc / 2**order).real


@dataclass
class ContinuityResidual:
    """Residual field of d(rho)/dt + d(rho P)/dx at the pair midpoint."""

    residual: np.ndarray
    defined: np.ndarray
    max_abs: float


def continuity_residual(snapshot_pair, dt: float) -> ContinuityResidual:
    """Check the continuity equation on two Wigner snapshots dt apart.

    Uses the forward difference of rho against the spectral derivative of
    the pair-averaged flux rho*P, so the residual is second order in dt.
    """
    w1, w2 = snapshot_pair
    if not w1.same_lattice(w2):
        raise GridMismatchError("snapshots live on different lattices")
    grid = _lattice_grid(w1)
    flux1 = (w1.values * w1.p_grid).sum(axis=1) * w1.dp
    flux2 = (w2.values * w2.p_grid).sum(axis=1) * w2.dp
    rho1 = w1.marginal_x()
    rho2 = w2.marginal_x()
    res = (rho2 - rho1) / dt + spectral_derivative((flux1 + flux2) / 2, grid)
    defined = (rho1 + rho2) / 2 > DENSITY_FLOOR
    max_abs = float(np.max(np.abs(res[defined]))) if defined.any() else 0.0
    return ContinuityResidual(residual=res, defined=defined, max_abs=max_abs)


@dataclass
class MomentumBalanceResidual:
    """Residuals of the momentum-moment equation at the middle snapshot.

    `full` keeps the sigma_p^2 transport term; `hydro` is the closed
    hydrodynamic form without it, reported for contrast.
    """

    full: np.ndarray
    hydro: np.ndarray
    defined: np.ndarray
    max_full: float
    max_hydro: float


def momentum_balance_residual(snapshot_triple, dt: float,
                              params) -> MomentumBalanceResidual:
    """Centered-difference residual of dP/dt for three consecutive snapshots.

    The exact first-moment equation (all orders in the effective hbar) is
        dP/dt = -d/dx [x^2/2 + g1*rho + P^2/2] - (1/rho) d/dx (sigma_p^2 rho);
    dropping the last term gives the hydrodynamic form.
    """
    w1, w2, w3 = snapshot_triple
    if not (w1.same_lattice(w2) and w2.same_lattice(w3)):
        raise GridMismatchError("snapshots live on different lattices")
    grid = _lattice_grid(w2)
    m1 = moments(w1, 2)
    m2 = moments(w2, 2)
    m3 = moments(w3, 2)
    defined = m1.defined & m2.defined & m3.defined
    dp_dt = (m3.momentum_field - m1.momentum_field) / (2 * dt)
    g1 = params.g1
    pressure = grid.x**2 / 2 + g1 * m2.rho + m2.momentum_field**2 / 2
    grad = spectral_derivative(pressure, grid)
    hydro = dp_dt + grad
    safe_rho = np.where(m2.defined, m2.rho, 1.0)
    sigma_flux = spectral_derivative(m2.sigma_p2 * m2.rho, grid)
    full = hydro + np.where(m2.defined, sigma_flux / safe_rho, 0.0)
    max_full = float(np.max(np.abs(full[defined]))) if defined.any() else 0.0
    max_hydro = float(np.max(np.abs(hydro[defined]))) if defined.any() else 0.0
    return MomentumBalanceResidual(full=full, hydro=hydro, defined=defined,
                                   max_full=max_full, max_hydro=max_hydro)


def participation_ratio(w: WignerGrid) -> float:
    """PR = 1 / integral of the squared positive part; larger = more spread."""
    pos = np.clip(w.values, 0.0, None)
    denom = float((pos**2).sum() * w.dx * w.dp)
    if denom <= 0:
        raise DomainError("Wigner function has no positive part")
    return 1.0 / denom


def purity_integral(w: WignerGrid) -> float:
    """Integral of W^2; bounded by 1/(2*pi) for normalized pure states."""
    return float((w.values**2).sum() * w.dx * w.dp)


def _lattice_grid(w: WignerGrid) -> Grid1D:
    return Grid1D(n_points=w.x_grid.size, x_min=float(w.x_grid[0]), dx=w.dx)
