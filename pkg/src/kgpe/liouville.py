"""Self-consistent classical-ensemble limit of the kicked GPE.

An ensemble of phase-space points is transported under the trap plus the
mean-field potential g1*rho_coarse(x), where rho_coarse is a kernel-density
estimate refreshed as the ensemble moves; kicks are the same exact momentum
map as for single particles.  Between mean-field impulses the harmonic part
is applied as an exact rotation, so the upsilon=0 limit reduces to the
classical kicked-oscillator map to machine precision, and the splitting
stays second order in dt for upsilon > 0.

All coordinates are harmonic units (x_h, p_h); the kick impulse is then
p -> p + (kappa/eta)*sin(sqrt(2)*eta*x).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError, GridMismatchError
from .grids import Grid1D, spectral_derivative
from .scaling import ScaledParams
from .wigner import WignerGrid, wigner_momentum_grid

PRODUCTION_MIN_PARTICLES = 10_000
DEFAULT_BANDWIDTH_CELLS = 4.0


@dataclass
class CoarseDensity:
    """Kernel-density estimate of the ensemble's position density."""

    grid: Grid1D
    rho: np.ndarray
    bandwidth: float


@dataclass
class Ensemble:
    """N phase-space samples with uniform weight 1/N and a density workspace."""

    x: np.ndarray
    p: np.ndarray
    params: ScaledParams
    rng_seed: int
    grid: Grid1D
    bandwidth: float
    substep_count: int = 0
    outside_events: int = 0
    _density: CoarseDensity | None = field(default=None, repr=False)

    def __post_init__(self):
        self.x = np.asarray(self.x, dtype=float)
        self.p = np.asarray(self.p, dtype=float)
        if self.x.shape != self.p.shape or self.x.ndim != 1 or self.x.size < 1:
            raise DomainError("x and p must be equal-length 1D arrays")
        if self.bandwidth < self.grid.dx:
            raise DomainError("bandwidth must be at least one grid spacing")

    @property
    def n(self) -> int:
        return self.x.size

    @property
    def weight(self) -> float:
        return 1.0 / self.n


def sample_from_wigner(w: WignerGrid, n_samples: int, seed: int,
                       params: ScaledParams,
                       bandwidth: float | None = None) -> Ensemble:
    """Rejection-sample n_samples points from the positive part of W.

    W is treated as piecewise constant on its cells; proposals are uniform
    over the bounding box of the positive support.  Deterministic for a
    fixed seed.  Rejects W whose negative mass exceeds 1% of the positive
    mass (then it is not a usable classical distribution).
    """
    if n_samples < 1:
        raise DomainError("n_samples must be >= 1")
    vals = w.values
    pos = np.clip(vals, 0.0, None)
    neg_mass = float(-np.clip(vals, None, 0.0).sum())
    pos_mass = float(pos.sum())
    if pos_mass <= 0:
        raise DomainError("Wigner function has no positive mass")
    if neg_mass / pos_mass > 0.01:
        raise DomainError(
            f"negative Wigner mass fraction {neg_mass / pos_mass:.3f} exceeds "
            "1%; not a valid classical distribution")

    rows, cols = np.nonzero(pos)
    x0, p0 = w.x_grid[0], w.p_grid[0]
    x_lo = w.x_grid[rows.min()] - w.dx / 2
    x_hi = w.x_grid[rows.max()] + w.dx / 2
    p_lo = w.p_grid[cols.min()] - w.dp / 2
    p_hi = w.p_grid[cols.max()] + w.dp / 2
    w_max = pos.max()
    nx, npg = vals.shape

    rng = np.random.default_rng(seed)
    xs, ps = [], []
    remaining = n_samples
    while remaining > 0:
        chunk = max(int(2.2 * remaining * (x_hi - x_lo) * (p_hi - p_lo)
                        * w_max / pos_mass / w.dx / w.dp) + 1024, 1024)
        chunk = min(chunk, 8_000_000)
        cx = rng.uniform(x_lo, x_hi, chunk)
        cp = rng.uniform(p_lo, p_hi, chunk)
        u = rng.uniform(0.0, w_max, chunk)
        i = np.clip(np.rint((cx - x0) / w.dx).astype(int), 0, nx - 1)
        j = np.clip(np.rint((cp - p0) / w.dp).astype(int), 0, npg - 1)
        keep = u < pos[i, j]
        cx, cp = cx[keep], cp[keep]
        take = min(remaining, cx.size)
        xs.append(cx[:take])
        ps.append(cp[:take])
        remaining -= take

    grid = Grid1D(n_points=w.x_grid.size, x_min=float(w.x_grid[0]), dx=w.dx)
    if bandwidth is None:
        bandwidth = DEFAULT_BANDWIDTH_CELLS * grid.dx
    return Ensemble(x=np.concatenate(xs), p=np.concatenate(ps), params=params,
                    rng_seed=seed, grid=grid, bandwidth=bandwidth)


def coarse_density(ensemble: Ensemble, grid: Grid1D | None = None,
                   bandwidth: float | None = None) -> CoarseDensity:
    """Gaussian-kernel density estimate, normalized to unit mass."""
    grid = grid or ensemble.grid
    bandwidth = bandwidth if bandwidth is not None else ensemble.bandwidth
    if bandwidth < grid.dx:
        raise DomainError("bandwidth must be at least one grid spacing")
    idx = np.clip(((ensemble.x - grid.x_min) / grid.dx).astype(int),
                  0, grid.n_points - 1)
    counts = np.bincount(idx, minlength=grid.n_points).astype(float)
    rho = counts * ensemble.weight / grid.dx
    smooth = np.fft.ifft(np.fft.fft(rho)
                         * np.exp(-0.5 * (grid.p_fft * bandwidth) ** 2)).real
    smooth = np.clip(smooth, 0.0, None)
    smooth /= smooth.sum() * grid.dx
    return CoarseDensity(grid=grid, rho=smooth, bandwidth=bandwidth)


def mean_field_force(density: CoarseDensity, g1: float) -> np.ndarray:
    """-g1 * d(rho_coarse)/dx on the grid (spectral derivative)."""
    return -g1 * spectral_derivative(density.rho, density.grid)


def _rotate(ensemble: Ensemble, angle: float):
    c, s = np.cos(angle), np.sin(angle)
    x_new = c * ensemble.x + s * ensemble.p
    ensemble.p *= c
    ensemble.p -= s * ensemble.x
    ensemble.x = x_new


def step_mean_field(ensemble: Ensemble, dt: float,
                    density_refresh: int = 1) -> Ensemble:
    """One Strang substep: half rotation, mean-field impulse, half rotation.

    The harmonic drift is an exact rotation, so only the mean-field impulse
    carries time-step error.  The coarse density is recomputed every
    density_refresh substeps.  Mutates the ensemble in place.
    """
    if dt > ensemble.params.tau_h / 256 + 1e-15:
        raise DomainError("dt must not exceed tau_h/256")
    _rotate(ensemble, dt / 2)
    g1 = ensemble.params.g1
    if g1 > 0:
        if ensemble._density is None or ensemble.substep_count % density_refresh == 0:
            ensemble._density = coarse_density(ensemble)
        grid = ensemble.grid
        force = mean_field_force(ensemble._density, g1)
        f_at = np.interp(ensemble.x, grid.x, force)
        outside = (ensemble.x < grid.x_min) | (ensemble.x >= grid.x_max)
        if outside.any():
            f_at[outside] = 0.0  # trap-only force beyond grid support
            ensemble.outside_events += int(outside.sum())
        ensemble.p += dt * f_at
    _rotate(ensemble, dt / 2)
    ensemble.substep_count += 1
    return ensemble


def kick_ensemble(ensemble: Ensemble) -> Ensemble:
    """Exact kick impulse per particle; positions unchanged.  In place."""
    pr = ensemble.params
    ensemble.p += (pr.kappa / pr.eta) * np.sin(np.sqrt(2) * pr.eta * ensemble.x)
    return ensemble


def transport(ensemble: Ensemble, duration: float, dt: float,
              density_refresh: int = 1) -> Ensemble:
    """Advance by `duration` of mean-field flow in substeps of size <= dt."""
    n_sub = max(1, int(np.ceil(duration / dt - 1e-12)))
    sub_dt = duration / n_sub
    for _ in range(n_sub):
        step_mean_field(ensemble, sub_dt, density_refresh)
    return ensemble


def phase_histogram(ensemble: Ensemble) -> WignerGrid:
    """2D density histogram of (x, p) on the ensemble grid's Wigner lattice."""
    grid = ensemble.grid
    p_lattice = wigner_momentum_grid(grid)
    dp_w = float(p_lattice[1] - p_lattice[0])
    x_edges = np.append(grid.x - grid.dx / 2, grid.x[-1] + grid.dx / 2)
    p_edges = np.append(p_lattice - dp_w / 2, p_lattice[-1] + dp_w / 2)
    counts, _, _ = np.histogram2d(ensemble.x, ensemble.p,
                                  bins=[x_edges, p_edges])
    dens = counts * ensemble.weight / (grid.dx * dp_w)
    return WignerGrid(x_grid=grid.x, p_grid=p_lattice, values=dens,
                      dx=grid.dx, dp=dp_w)


@dataclass
class LiouvilleRunRecord:
    """Final ensemble plus the time-averaged pre-kick phase histogram."""

    ensemble: Ensemble
    average_histogram: WignerGrid
    n_kicks: int


def run_kicked_ensemble(ensemble0: Ensemble, n_kicks: int, dt: float | None = None,
                        density_refresh: int = 1,
                        observers=()) -> LiouvilleRunRecord:
    """Alternate kicks and mean-field transport, averaging pre-kick histograms.

    Mirrors the quantum protocol: the histogram is accumulated on the state
    just before each of the n_kicks kicks.  Deterministic for a fixed
    ensemble (seeded sampling upstream).
    """
    ens = ensemble0
    tau = ens.params.tau_h
    if dt is None:
        dt = tau / 1024
    if n_kicks == 0:
        return LiouvilleRunRecord(ens, phase_histogram(ens), 0)
    hist = phase_histogram(ens)
    acc = np.zeros_like(hist.values)
    for j in range(n_kicks):
        if j > 0:
            hist = phase_histogram(ens)
        acc += hist.values
        for obs in observers:
            obs(j, ens)
        kick_ensemble(ens)
        transport(ens, tau, dt, density_refresh)
    avg = WignerGrid(x_grid=hist.x_grid, p_grid=hist.p_grid,
                     values=acc / n_kicks, dx=hist.dx, dp=hist.dp)
    return LiouvilleRunRecord(ensemble=ens, average_histogram=avg,
                              n_kicks=n_kicks)
