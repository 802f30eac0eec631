"""Castin-Dum non-condensate dynamics around the kicked condensate.

The linearization operator for a stationary condensate phi with chemical
potential mu (harmonic units, g1 = upsilon/eta**3) is the 2n x 2n block
matrix

    L = [[ H + g1 Q rho Q,        g1 Q phi^2 Q* ],
         [-g1 Q* conj(phi)^2 Q,  -(H + g1 Q* rho Q*)]]

with H = p^2/2 + x^2/2 + g1 rho - mu and projectors Q = 1 - |phi><phi|,
Q* = 1 - |phi*><phi*|.  Its spectrum pairs as {E_k, -E_k} plus two zero
modes spanned by (phi, 0) and (0, phi*); eigenpairs are normalized to the
indefinite norm <u|u> - <v|v> = 1.

During kicked evolution the working pairs (U_k, V_k) follow the unprojected
linearized-GPE generator (no chemical-potential shift, per the projected
time-evolution identity), split into momentum half-steps and an exact 2x2
position-space block per grid point; physical (u_k, v_k) are recovered by
projecting with the instantaneous condensate just before each kick, and the
depletion estimate is sum_k <v_k|v_k>.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .errors import DomainError, LockstepError, ResourceError
from .grids import (ComplexField, Grid1D, default_half_width, kinetic_matrix,
                    make_grid, translate)
from .gpe import (GpeState, GroundState, apply_kick, center_position,
                  check_boundary, displace, ground_state, kick_phase)
from .scaling import ScaledParams

DENSE_L_LIMIT = 1024
ZERO_MODE_CUTOFF = 1e-6  # E^2 below this counts as a zero mode


@dataclass
class BdgModeSet:
    """K mode pairs on a common grid, with the condensate they belong to.

    After diagonalization u, v hold the normalized eigenpairs; during a
    kicked run the same container carries the unprojected working pairs
    (U_k, V_k) and t_h tracks their clock for lockstep checks.
    """

    u: np.ndarray           # (K, n) complex
    v: np.ndarray           # (K, n) complex
    energies: np.ndarray    # (K,)
    ground: GroundState
    params: ScaledParams
    grid: Grid1D
    t_h: float = 0.0

    @property
    def n_modes(self) -> int:
        return self.u.shape[0]

    def copy(self) -> "BdgModeSet":
        return BdgModeSet(self.u.copy(), self.v.copy(), self.energies.copy(),
                          self.ground, self.params, self.grid, self.t_h)


def indefinite_norms(modes: BdgModeSet) -> np.ndarray:
    """<u_k|u_k> - <v_k|v_k> per mode (1 for properly normalized pairs)."""
    dx = modes.grid.dx
    return ((np.abs(modes.u) ** 2).sum(axis=1)
            - (np.abs(modes.v) ** 2).sum(axis=1)) * dx


def v_norms(modes: BdgModeSet) -> np.ndarray:
    return (np.abs(modes.v) ** 2).sum(axis=1) * modes.grid.dx


def build_L(ground: GroundState, params: ScaledParams,
            grid: Grid1D) -> np.ndarray:
    """Assemble the dense 2n x 2n linearization matrix in position space."""
    n = grid.n_points
    if n > DENSE_L_LIMIT:
        raise ResourceError(
            f"dense L for n_points={n} exceeds the {DENSE_L_LIMIT} budget; "
            "diagonalize on a coarser grid")
    phi = ground.field.values
    rho = np.abs(phi) ** 2
    g1 = params.g1
    dx = grid.dx
    h = kinetic_matrix(grid) + np.diag(grid.x**2 / 2 + g1 * rho - ground.mu)
    h = h.astype(complex)
    q = np.eye(n, dtype=complex) - dx * np.outer(phi, np.conj(phi))
    q_star = np.eye(n, dtype=complex) - dx * np.outer(np.conj(phi), phi)
    top_left = h + g1 * (q @ np.diag(rho).astype(complex) @ q)
    top_right = g1 * (q @ np.diag(phi**2) @ q_star)
    bottom_left = -g1 * (q_star @ np.diag(np.conj(phi) ** 2) @ q)
    bottom_right = -(h + g1 * (q_star @ np.diag(rho).astype(complex) @ q_star))
    return np.block([[top_left, top_right], [bottom_left, bottom_right]])


def diagonalize_modes(big_l: np.ndarray, n_modes: int, ground: GroundState,
                      params: ScaledParams) -> BdgModeSet:
    """Lowest n_modes positive-energy eigenpairs, indefinitely normalized.

    For the usual real ground state the problem reduces to the n x n
    product (A-B)(A+B) acting on w = u+v, which is solved instead of the
    full 2n x 2n matrix; a generic complex condensate falls back to a dense
    eigensolve of L itself.  Modes are orthogonalized against the zero
    modes and phase-fixed so the largest-|u| sample is real positive.
    """
    grid = ground.field.grid
    n = grid.n_points
    if big_l.shape != (2 * n, 2 * n):
        raise DomainError("L does not match the ground-state grid")
    if np.abs(big_l.imag).max() < 1e-12:
        u, v, e = _diagonalize_real(big_l.real, n_modes, ground)
    else:
        u, v, e = _diagonalize_complex(big_l, n_modes, ground)
    p_max = np.pi / grid.dx
    if e[-1] > 0.5 * (p_max**2 / 2):
        raise DomainError(
            f"mode energy {e[-1]:.1f} is above half the grid's kinetic "
            "cutoff; refine the grid for this many modes")
    return BdgModeSet(u=u, v=v, energies=e, ground=ground, params=params,
                      grid=grid, t_h=0.0)


def _project_out_ground(u, v, phi, dx):
    """Remove the zero-mode components: u along phi, v along phi*."""
    u = u - phi * (dx * np.sum(np.conj(phi) * u))
    v = v - np.conj(phi) * (dx * np.sum(phi * v))
    return u, v


def _diagonalize_real(big_l, n_modes, ground):
    n = big_l.shape[0] // 2
    a = big_l[:n, :n]
    b = big_l[:n, n:]
    phi = ground.field.values.real
    dx = ground.field.grid.dx
    apb = a + b
    evals, w = scipy.linalg.eig((a - b) @ apb)
    if np.abs(evals.imag).max() > 1e-6 * max(np.abs(evals.real).max(), 1.0):
        raise DomainError("unexpected complex spectrum; condensate may be "
                          "dynamically unstable on this grid")
    e2 = evals.real
    order = np.argsort(e2)
    positive = [i for i in order if e2[i] > ZERO_MODE_CUTOFF]
    if len(positive) < n_modes:
        raise DomainError(f"only {len(positive)} positive modes available")
    us, vs, es = [], [], []
    for i in positive[:n_modes]:
        energy = float(np.sqrt(e2[i]))
        wi = w[:, i].real
        yi = apb @ wi / energy
        u = (wi + yi) / 2
        v = (wi - yi) / 2
        u, v = _project_out_ground(u, v, phi, dx)
        s = dx * (u @ u - v @ v)
        if s <= 0:
            raise DomainError("negative-norm branch selected during "
                              "normalization")
        u /= np.sqrt(s)
        v /= np.sqrt(s)
        if u[np.argmax(np.abs(u))] < 0:
            u, v = -u, -v
        us.append(u.astype(complex))
        vs.append(v.astype(complex))
        es.append(energy)
    return np.array(us), np.array(vs), np.array(es)


def _diagonalize_complex(big_l, n_modes, ground):
    n = big_l.shape[0] // 2
    phi = ground.field.values
    dx = ground.field.grid.dx
    evals, vecs = scipy.linalg.eig(big_l)
    scale = max(np.abs(evals).max(), 1.0)
    real_pos = [i for i in range(evals.size)
                if abs(evals[i].imag) < 1e-6 * scale
                and evals[i].real > np.sqrt(ZERO_MODE_CUTOFF)]
    real_pos.sort(key=lambda i: evals[i].real)
    us, vs, es = [], [], []
    for i in real_pos:
        u = vecs[:n, i]
        v = vecs[n:, i]
        u, v = _project_out_ground(u, v, phi, dx)
        s = dx * float(np.sum(np.abs(u) ** 2) - np.sum(np.abs(v) ** 2))
        if s <= 0:
            continue  # that eigenvector is the (v*, u*) partner of -E
        u = u / np.sqrt(s)
        v = v / np.sqrt(s)
        theta = np.angle(u[np.argmax(np.abs(u))])
        u = u * np.exp(-1j * theta)
        v = v * np.exp(-1j * theta)
        us.append(u)
        vs.append(v)
        es.append(float(evals[i].real))
        if len(us) == n_modes:
            break
    if len(us) < n_modes:
        raise DomainError(f"only {len(us)} positive-norm modes available")
    return np.array(us), np.array(vs), np.array(es)


def shift_modes(modes: BdgModeSet, a: float) -> BdgModeSet:
    """Translate every u_k, v_k by a with the condensate's spectral shift."""
    grid = modes.grid
    half = (grid.x_max - grid.x_min) / 2
    if abs(a) > half - 5.0:
        raise DomainError("shift leaves too little grid margin")
    out = modes.copy()
    for k in range(modes.n_modes):
        out.u[k] = translate(ComplexField(grid, modes.u[k]), a).values
        out.v[k] = translate(ComplexField(grid, modes.v[k]), a).values
    return out


def evolve_uv(modes: BdgModeSet, state: GpeState, tau_h: float,
              n_substeps: int = 2048) -> tuple[BdgModeSet, GpeState]:
    """Advance working pairs and condensate in lockstep by tau_h.

    Both use the same symmetric splitting and identical substeps: momentum
    half-steps (opposite kinetic signs for U and V), then one exact 2x2
    position-space exponential per grid point built from the concurrent
    condensate.  Returns the evolved pair set and condensate.
    """
    if abs(modes.t_h - state.t_h) > 1e-12:
        raise LockstepError(
            f"mode clock {modes.t_h} != condensate clock {state.t_h}")
    if n_substeps < 1:
        raise DomainError("n_substeps must be >= 1")
    grid = modes.grid
    g1 = state.params.g1
    dt = tau_h / n_substeps
    v_trap = grid.x**2 / 2
    p2 = grid.p_fft**2
    kin_half_c = np.exp(-0.25j * p2 * dt)
    kin_full_c = kin_half_c**2
    kin_half_v = np.conj(kin_half_c)
    kin_full_v = np.conj(kin_full_c)

    spec_c = np.fft.fft(state.field.values) * kin_half_c
    spec_u = np.fft.fft(modes.u, axis=1) * kin_half_c
    spec_v = np.fft.fft(modes.v, axis=1) * kin_half_v
    for step in range(n_substeps):
        psi = np.fft.ifft(spec_c)
        uu = np.fft.ifft(spec_u, axis=1)
        vv = np.fft.ifft(spec_v, axis=1)

        rho = np.abs(psi) ** 2
        diag = v_trap + 2 * g1 * rho
        coup = g1 * psi**2
        omega = np.sqrt(diag**2 - np.abs(coup) ** 2 + 0j)
        theta = omega * dt
        cos_t = np.cos(theta)
        # sin(theta)/omega with its dt limit as omega -> 0
        small = np.abs(theta) < 1e-8
        sinc = np.where(small, dt, np.sin(theta) / np.where(small, 1.0, omega))
        u_new = (cos_t - 1j * sinc * diag) * uu - 1j * sinc * coup * vv
        v_new = 1j * sinc * np.conj(coup) * uu + (cos_t + 1j * sinc * diag) * vv

        psi = psi * np.exp(-1j * dt * (v_trap + g1 * rho))
        last = step == n_substeps - 1
        spec_c = np.fft.fft(psi) * (kin_half_c if last else kin_full_c)
        spec_u = np.fft.fft(u_new, axis=1) * (kin_half_c if last else kin_full_c)
        spec_v = np.fft.fft(v_new, axis=1) * (kin_half_v if last else kin_full_v)

    out = modes.copy()
    out.u = np.fft.ifft(spec_u, axis=1)
    out.v = np.fft.ifft(spec_v, axis=1)
    out.t_h = modes.t_h + tau_h
    new_state = GpeState(ComplexField(grid, np.fft.ifft(spec_c)),
                         state.t_h + tau_h, state.params)
    check_boundary(new_state.field, new_state.t_h)
    return out, new_state


def kick_uv(modes: BdgModeSet) -> BdgModeSet:
    """Kick phases with opposite signs on u and v; moduli untouched."""
    phase = kick_phase(modes.grid, modes.params)
    out = modes.copy()
    out.u *= np.exp(-1j * phase)[None, :]
    out.v *= np.exp(1j * phase)[None, :]
    return out


def project_pairs(modes: BdgModeSet, state: GpeState) -> tuple[np.ndarray, np.ndarray]:
    """Physical pairs u_k = Q(t) U_k, v_k = Q*(t) V_k at the current time."""
    if abs(modes.t_h - state.t_h) > 1e-12:
        raise LockstepError(
            f"mode clock {modes.t_h} != condensate clock {state.t_h}")
    phi = state.field.values
    dx = modes.grid.dx
    norm2 = np.sum(np.abs(phi) ** 2) * dx
    over_u = (modes.u @ np.conj(phi)) * dx / norm2
    over_v = (modes.v @ phi) * dx / norm2
    u_proj = modes.u - over_u[:, None] * phi[None, :]
    v_proj = modes.v - over_v[:, None] * np.conj(phi)[None, :]
    return u_proj, v_proj


def project_and_measure(modes: BdgModeSet, state: GpeState) -> np.ndarray:
    """Row of depletion contributions <v_k|v_k> after projection."""
    _, v_proj = project_pairs(modes, state)
    return (np.abs(v_proj) ** 2).sum(axis=1) * modes.grid.dx


@dataclass
class DepletionSeries:
    """Per-mode <v_k|v_k> sampled just before each kick, plus their sum.

    Row j corresponds to the state after j complete kick periods, i.e.
    just before kick j+1; row 0 is the initial (post-shift) value.
    """

    kicks: np.ndarray        # (n_rows,)
    vk: np.ndarray           # (n_rows, K)
    norm_drift: np.ndarray   # (n_rows,) max |<u|u>-<v|v>-1| over modes
    params: ScaledParams
    center: float

    @property
    def sums(self) -> np.ndarray:
        return self.vk.sum(axis=1)


def depletion_run(params: ScaledParams, center, n_kicks: int,
                  n_modes: int = 15, grid: Grid1D | None = None,
                  n_substeps: int = 2048,
                  ground: GroundState | None = None,
                  modes: BdgModeSet | None = None) -> DepletionSeries:
    """Full pipeline: ground state, mode set, shift, kicked lockstep run.

    A precomputed ground state / mode set for the same (params, grid) can
    be passed to share the diagonalization between runs that differ only
    in the initial centre.
    """
    a = center_position(center, params)
    if grid is None:
        grid = make_grid(1024, default_half_width(a))
    if ground is None:
        ground = ground_state(params, grid)
    if modes is None:
        modes = diagonalize_modes(build_L(ground, params, grid), n_modes,
                                  ground, params)
    state = GpeState(displace(ground.field, a), 0.0, params)
    work = shift_modes(modes, a)

    rows = np.empty((n_kicks + 1, work.n_modes))
    drift = np.empty(n_kicks + 1)
    rows[0] = project_and_measure(work, state)
    drift[0] = float(np.abs(indefinite_norms(work) - 1.0).max())
    for j in range(1, n_kicks + 1):
        state = apply_kick(state)
        work = kick_uv(work)
        work, state = evolve_uv(work, state, params.tau_h, n_substeps)
        rows[j] = project_and_measure(work, state)
        drift[j] = float(np.abs(indefinite_norms(work) - 1.0).max())
    return DepletionSeries(kicks=np.arange(n_kicks + 1), vk=rows,
                           norm_drift=drift, params=params, center=a)
