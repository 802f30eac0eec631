"""Split-operator integration of the scaled Gross-Pitaevskii equation.

Between kicks the equation in harmonic units is

    i d(phi)/dt = [-1/2 d^2/dx^2 + x^2/2 + g1*|phi|^2] phi,   g1 = upsilon/eta**3,

advanced by symmetric (Strang) splitting; the position factor applies the
exact flow of the potential+interaction part, with |phi|^2 taken at the
start of that factor (a pure phase, so the density it uses is exact).
A kick is the exact phase map

    phi -> exp(-i*kappa*cos(sqrt(2)*eta*x)/(sqrt(2)*eta**2)) * phi.

Ground states come from imaginary-time propagation with a decreasing step
schedule and per-step renormalization.  All reported states are monitored
for density reaching the grid boundary.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .errors import BoundaryError, ConvergenceError, DomainError
from .grids import (ComplexField, Grid1D, default_half_width, kinetic_matrix,
                    make_grid, spectral_derivative, translate)
from .scaling import ScaledParams

DEFAULT_SUBSTEPS = 2048
BOUNDARY_DENSITY_LIMIT = 1e-8
BOUNDARY_POINTS = 8
DISPLACE_MARGIN = 5.0


@dataclass
class GpeState:
    """Condensate wavefunction plus its clock and control parameters."""

    field: ComplexField
    t_h: float
    params: ScaledParams

    def copy(self) -> "GpeState":
        return GpeState(self.field.copy(), self.t_h, self.params)


@dataclass
class GroundState:
    """Stationary GPE solution and its chemical potential (units hbar*omega)."""

    field: ComplexField
    mu: float
    residual: float = 0.0


@dataclass
class KickedRunRecord:
    """Outcome of a kicked run: final state and per-kick scalar series."""

    final_state: GpeState
    n_kicks: int
    norms: np.ndarray
    energies: np.ndarray
    x_means: np.ndarray
    p_means: np.ndarray


def coherent_state(grid: Grid1D, x0: float = 0.0, p0: float = 0.0) -> ComplexField:
    """Harmonic-unit coherent state centred at (x0, p0)."""
    x = grid.x
    vals = np.pi**-0.25 * np.exp(-((x - x0) ** 2) / 2 + 1j * p0 * (x - x0))
    return ComplexField(grid, vals).normalized()


def kick_phase(grid: Grid1D, params: ScaledParams) -> np.ndarray:
    """The kick phase angle kappa*cos(sqrt(2)*eta*x)/(sqrt(2)*eta**2)."""
    eta = params.eta
    return params.kappa * np.cos(np.sqrt(2) * eta * grid.x) / (np.sqrt(2) * eta**2)


def check_boundary(field: ComplexField, t_h: float | None = None):
    """Abort when probability density reaches the grid edge."""
    rho = np.abs(field.values) ** 2
    edge = max(rho[:BOUNDARY_POINTS].max(), rho[-BOUNDARY_POINTS:].max())
    if edge > BOUNDARY_DENSITY_LIMIT:
        when = "" if t_h is None else f" at t_h={t_h:.4f}"
        raise BoundaryError(
            f"boundary density {edge:.3e} exceeds {BOUNDARY_DENSITY_LIMIT:.0e}"
            f"{when}; enlarge the grid half-width")


def _strang_steps(values: np.ndarray, grid: Grid1D, g1: float, dt: float,
                  n_steps: int) -> np.ndarray:
    """n_steps of T/2 . X . T/2 with merged interior kinetic factors."""
    v_trap = grid.x**2 / 2
    kin_half = np.exp(-0.25j * grid.p_fft**2 * dt)
    kin_full = kin_half**2
    spec = np.fft.fft(values) * kin_half
    for step in range(n_steps):
        psi = np.fft.ifft(spec)
        psi *= np.exp(-1j * dt * (v_trap + g1 * np.abs(psi) ** 2))
        spec = np.fft.fft(psi)
        spec *= kin_full if step < n_steps - 1 else kin_half
    return np.fft.ifft(spec)


def evolve_between_kicks(state: GpeState, tau_h: float,
                         n_substeps: int = DEFAULT_SUBSTEPS) -> GpeState:
    """Advance the state by tau_h of kick-free GPE flow."""
    if n_substeps < 1:
        raise DomainError("n_substeps must be >= 1")
    dt = tau_h / n_substeps
    vals = _strang_steps(state.field.values, state.field.grid,
                         state.params.g1, dt, n_substeps)
    out = GpeState(ComplexField(state.field.grid, vals),
                   state.t_h + tau_h, state.params)
    check_boundary(out.field, out.t_h)
    return out


def apply_kick(state: GpeState) -> GpeState:
    """Exact delta-kick phase map; density is untouched."""
    phase = kick_phase(state.field.grid, state.params)
    vals = state.field.values * np.exp(-1j * phase)
    return GpeState(ComplexField(state.field.grid, vals), state.t_h, state.params)


def run_kicked(state0: GpeState, n_kicks: int, observers=(),
               n_substeps: int = DEFAULT_SUBSTEPS) -> KickedRunRecord:
    """Kick, then free-evolve, n_kicks times.

    Observers are callables (kick_index, state) invoked on the state just
    before each kick; kick_index runs from 0 to n_kicks-1.  The returned
    final state is the one just before a hypothetical kick n_kicks+1.
    """
    state = state0.copy()
    tau = state.params.tau_h
    norms = np.empty(n_kicks + 1)
    energies = np.empty(n_kicks + 1)
    x_means = np.empty(n_kicks + 1)
    p_means = np.empty(n_kicks + 1)
    for j in range(n_kicks + 1):
        norms[j] = state.field.norm_squared()
        energies[j] = energy(state)
        x_means[j] = mean_x(state.field)
        p_means[j] = mean_p(state.field)
        if j == n_kicks:
            break
        for obs in observers:
            obs(j, state)
        state = apply_kick(state)
        state = evolve_between_kicks(state, tau, n_substeps)
    return KickedRunRecord(state, n_kicks, norms, energies, x_means, p_means)


def energy(state: GpeState) -> float:
    """GPE energy functional (kinetic + trap + interaction/2)."""
    grid = state.field.grid
    vals = state.field.values
    spec = np.fft.fft(vals)
    # kinetic quadrature: sum p^2/2 |phi_k|^2 * dx/n  (unitary-DFT weights)
    kin = np.sum(grid.p_fft**2 / 2 * np.abs(spec) ** 2) * grid.dx / grid.n_points
    rho = np.abs(vals) ** 2
    pot = np.sum((grid.x**2 / 2) * rho) * grid.dx
    nonlin = 0.5 * state.params.g1 * np.sum(rho**2) * grid.dx
    return float(kin + pot + nonlin)


def mean_x(field: ComplexField) -> float:
    rho = np.abs(field.values) ** 2
    return float(np.sum(field.grid.x * rho) * field.grid.dx)


def mean_p(field: ComplexField) -> float:
    dphi = spectral_derivative(field.values, field.grid)
    return float(np.imag(np.sum(np.conj(field.values) * dphi)) * field.grid.dx)


def ground_state(params: ScaledParams, grid: Grid1D | None = None,
                 dtau_schedule=(1e-2, 3e-3, 1e-3, 3e-4, 1e-4),
                 sweep_steps: int = 25, max_sweeps: int = 2000,
                 residual_tol: float = 1e-6) -> GroundState:
    """Imaginary-time ground state of the trapped GPE (no kicks).

    Renormalizes every step; each schedule stage runs until the chemical
    potential is stationary between sweeps (1e-10 at the final step size).
    The returned field is real and nonnegative.
    """
    if params.upsilon < 0:
        raise DomainError("upsilon must be nonnegative")
    if grid is None:
        grid = make_grid(1024, 8.0)
    g1 = params.g1
    v_trap = grid.x**2 / 2
    psi = np.pi**-0.25 * np.exp(-grid.x**2 / 2) + 0j
    psi /= np.sqrt(np.sum(np.abs(psi) ** 2) * grid.dx)

    def chem_potential(p):
        spec = np.fft.fft(p)
        kin = np.sum(grid.p_fft**2 / 2 * np.abs(spec) ** 2) * grid.dx / grid.n_points
        rho = np.abs(p) ** 2
        return float(kin + np.sum((v_trap + g1 * rho) * rho) * grid.dx)

    mu = chem_potential(psi)
    for stage, dtau in enumerate(dtau_schedule):
        kin_half = np.exp(-0.25 * grid.p_fft**2 * dtau)
        tol = 1e-10 if stage == len(dtau_schedule) - 1 else 1e-8
        for _ in range(max_sweeps):
            for _ in range(sweep_steps):
                psi = np.fft.ifft(kin_half * np.fft.fft(psi))
                psi *= np.exp(-dtau * (v_trap + g1 * np.abs(psi) ** 2))
                psi = np.fft.ifft(kin_half * np.fft.fft(psi))
                psi /= np.sqrt(np.sum(np.abs(psi) ** 2) * grid.dx)
            mu_new = chem_potential(psi)
            dmu, mu = abs(mu_new - mu), mu_new
            if dmu < tol:
                break
        else:
            if stage == len(dtau_schedule) - 1:
                raise ConvergenceError(
                    f"imaginary time did not converge (|dmu|={dmu:.2e})",
                    residual=dmu)

    # strip the residual global phase; the converged state is nodeless
    psi = np.abs(psi).astype(complex)
    psi /= np.sqrt(np.sum(np.abs(psi) ** 2) * grid.dx)
    mu = chem_potential(psi)
    h_psi = (np.fft.ifft(grid.p_fft**2 / 2 * np.fft.fft(psi))
             + (v_trap + g1 * np.abs(psi) ** 2) * psi)
    res = float(np.sqrt(np.sum(np.abs(h_psi - mu * psi) ** 2) * grid.dx))
    if res > residual_tol:
        raise ConvergenceError(
            f"stationarity residual {res:.2e} above {residual_tol:.0e}",
            residual=res)
    return GroundState(ComplexField(grid, psi), mu, res)


def displace(field: ComplexField, a: float) -> ComplexField:
    """Rigid spectral translation phi(x) -> phi(x-a)."""
    half = (field.grid.x_max - field.grid.x_min) / 2
    if abs(a) > half - DISPLACE_MARGIN:
        raise DomainError(
            f"displacement {a:+.3f} leaves less than {DISPLACE_MARGIN} "
            "harmonic lengths of margin; enlarge the grid")
    return translate(field, a)


def center_position(center, params: ScaledParams) -> float:
    """Resolve the {stable|unstable|value} initial-centre selector."""
    if isinstance(center, str):
        if center == "unstable":
            return np.sqrt(2) * np.pi / params.eta
        if center == "stable":
            return 2 * np.sqrt(2) * np.pi / params.eta
        raise DomainError(f"unknown centre selector {center!r}")
    return float(center)


def displaced_ground_state(params: ScaledParams, center,
                           grid: Grid1D | None = None) -> GpeState:
    """Ground state rigidly shifted to the requested centre, at t_h=0."""
    a = center_position(center, params)
    if grid is None:
        grid = make_grid(1024, default_half_width(a))
    gs = ground_state(params, grid)
    return GpeState(displace(gs.field, a), 0.0, params)


# --- Floquet crystal-symmetry checks ---------------------------------------

def displacement_operator(field: ComplexField, alpha: complex) -> ComplexField:
    """Apply D(alpha) = exp(alpha a+ - alpha* a) in harmonic units.

    Shifts position by sqrt(2)*Re(alpha) and momentum by sqrt(2)*Im(alpha).
    """
    xi = np.sqrt(2) * alpha.real
    varpi = np.sqrt(2) * alpha.imag
    out = translate(field, xi)
    vals = out.values * np.exp(1j * varpi * field.grid.x) * np.exp(-0.5j * varpi * xi)
    return ComplexField(field.grid, vals)


def is_admissible_displacement(alpha: complex, eta: float, q: int,
                               r: int = 1, tol: float = 1e-9) -> bool:
    """Whether alpha sits on the lattice where D(alpha) commutes with F^q.

    The condition is 2*eta*Re(alpha*exp(2j*pi*k*r/q)) in 2*pi*Z for every
    kick stage k = 0..q-1.
    """
    for k in range(q):
        val = 2 * eta * (alpha * np.exp(2j * np.pi * k * r / q)).real / (2 * np.pi)
        if abs(val - round(val)) > tol:
            return False
    return True


def admissible_alpha(eta: float, q: int, l0: int = 1, l1: int = 0) -> complex:
    """A generator of the admissible displacement lattice for q in {1,2,3,4,6}."""
    pi = np.pi
    if q in (1, 2):
        return complex(pi * l0 / eta, 0.0)
    if q == 3:
        return complex(pi * l0 / eta, -pi * (l0 + 2 * l1) / (np.sqrt(3) * eta))
    if q == 4:
        return complex(pi * l0 / eta, -pi * l1 / eta)
    if q == 6:
        return complex(pi * l0 / eta, pi * (l0 - 2 * l1) / (np.sqrt(3) * eta))
    raise DomainError("no crystal lattice for q outside {1,2,3,4,6}")


def floquet_commutator_norm(params: ScaledParams, q: int, alpha: complex,
                            r: int = 1, grid: Grid1D | None = None,
                            test_states=None) -> float:
    """Largest ||[D(alpha), F^q] psi|| over a basis of test states.

    F is one kick period (kick phase, then exact harmonic rotation by
    tau_h = 2*pi*r/q, built from the dense Fourier-grid Hamiltonian).
    Near zero only for q in {1,2,3,4,6} with alpha on the admissible
    lattice; off-lattice alpha is computed anyway but flagged.
    """
    if grid is None:
        grid = make_grid(512, 16.0)
    if not is_admissible_displacement(alpha, params.eta, q, r):
        warnings.warn("alpha is not on the admissible displacement lattice",
                      stacklevel=2)
    tau = 2 * np.pi * r / q
    h0 = kinetic_matrix(grid) + np.diag(grid.x**2 / 2)
    evals, evecs = scipy.linalg.eigh(h0)
    u_harm = (evecs * np.exp(-1j * evals * tau)) @ evecs.T
    phase = np.exp(-1j * kick_phase(grid, params))

    def floquet_q(vals):
        for _ in range(q):
            vals = u_harm @ (phase * vals)
        return vals

    if test_states is None:
        test_states = [coherent_state(grid, x0, p0).values
                       for x0, p0 in [(0.0, 0.0), (1.0, 0.0), (0.0, 1.0),
                                      (1.5, -1.0), (-2.0, 0.5)]]
        test_states += [evecs[:, j] / np.sqrt(grid.dx) for j in range(4)]

    worst = 0.0
    for vals in test_states:
        f = ComplexField(grid, vals)
        lhs = displacement_operator(ComplexField(grid, floquet_q(f.values)), alpha)
        rhs = floquet_q(displacement_operator(f, alpha).values)
        diff = float(np.sqrt(np.sum(np.abs(lhs.values - rhs) ** 2) * grid.dx))
        worst = max(worst, diff)
    return worst
