"""Point-particle dynamics of the delta-kicked harmonic oscillator.

Works in the scaled variables (x~, p~) = (eta*x_h, eta*p_h), in which the
kick-to-kick map depends only on kappa and tau_h:

    free evolution:  clockwise rotation by tau_h in the (x~, p~) plane
    kick:            p~ -> p~ + kappa*sin(sqrt(2)*x~)

Both stages are exact, so no integrator is involved.  Orbits are sampled
just before each kick, matching the convention used for the Wigner and
depletion snapshots.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError

CRYSTAL_ORDERS = frozenset({1, 2, 3, 4, 6})


@dataclass(frozen=True)
class ResonanceSpec:
    """Resonant kick period tau_h = 2*pi*r/q with r, q coprime."""

    r: int
    q: int

    def __post_init__(self):
        if self.r < 1 or self.q < 1:
            raise DomainError("r and q must be positive integers")
        if math.gcd(self.r, self.q) != 1:
            raise DomainError("r and q must be coprime")

    @property
    def tau_h(self) -> float:
        return 2 * np.pi * self.r / self.q


def harmonic_rotate(x, p, tau_h):
    """Free harmonic evolution for time tau_h: clockwise rotation."""
    c, s = np.cos(tau_h), np.sin(tau_h)
    return c * x + s * p, c * p - s * x


def kick(x, p, kappa):
    """Impulse from the kick potential (kappa/sqrt(2))*cos(sqrt(2)*x~)."""
    return x, p + kappa * np.sin(np.sqrt(2) * np.asarray(x))


def kick_potential(x, kappa):
    return kappa / np.sqrt(2) * np.cos(np.sqrt(2) * np.asarray(x))


def poincare_section(seed_points, n_kicks: int, spec: ResonanceSpec,
                     kappa: float) -> np.ndarray:
    """Orbit samples just before each kick, concatenated by seed index.

    seed_points: array-like of shape (n_seeds, 2).  Returns an array of
    shape (n_seeds*n_kicks, 2); the first sample of each orbit is the seed
    itself (the state just before the first kick).
    """
    if n_kicks < 1:
        raise DomainError("n_kicks must be >= 1")
    seeds = np.atleast_2d(np.asarray(seed_points, dtype=float))
    x, p = seeds[:, 0].copy(), seeds[:, 1].copy()
    tau = spec.tau_h
    out = np.empty((seeds.shape[0], n_kicks, 2))
    for j in range(n_kicks):
        out[:, j, 0], out[:, j, 1] = x, p
        x, p = kick(x, p, kappa)
        x, p = harmonic_rotate(x, p, tau)
    return out.reshape(-1, 2)


def web_symmetry_score(cloud: np.ndarray, q: int, bins: int = 256) -> float:
    """Overlap of the cloud's 2D histogram with itself rotated by 2*pi/q.

    Bhattacharyya coefficient of the two normalized histograms over the
    cloud's origin-centred bounding square; 1 means perfectly q-symmetric.
    """
    cloud = np.asarray(cloud, dtype=float)
    if cloud.size == 0:
        raise DomainError("cloud is empty")
    half = float(np.max(np.abs(cloud))) * (1 + 1e-12) or 1.0
    edges = np.linspace(-half, half, bins + 1)
    theta = 2 * np.pi / q
    c, s = np.cos(theta), np.sin(theta)
    rot = np.column_stack([c * cloud[:, 0] - s * cloud[:, 1],
                           s * cloud[:, 0] + c * cloud[:, 1]])
    h1, _, _ = np.histogram2d(cloud[:, 0], cloud[:, 1], bins=[edges, edges])
    h2, _, _ = np.histogram2d(rot[:, 0], rot[:, 1], bins=[edges, edges])
    h1 /= h1.sum()
    h2 /= h2.sum()
    return float(np.sum(np.sqrt(h1 * h2)))


def crystal_symmetry_admissible(q: int) -> bool:
    """True iff rotational order q is compatible with phase-space translation."""
    if q < 1:
        raise DomainError("q must be >= 1")
    return q in CRYSTAL_ORDERS
