"""Conversion between physical experimental parameters and the dimensionless set.

Everything downstream of this module works in the dimensionless parameters
(eta, kappa, upsilon, tau_h); physical units (kg, rad/s, m, J) exist only
here.  Two conventions are supported:

* single particle in a kicked harmonic trap, kick potential K*cos(k*x):
      eta     = k*sqrt(hbar/(2*m*omega))
      kappa   = K*k**2/(sqrt(2)*m*omega**2)
      upsilon = u*k**3/(2*sqrt(2)*m*omega**2)

* driven BEC, where the far-detuned pulsed laser produces cos(2*k*x), so the
  effective wavenumber doubles and eta' = 2*eta:
      eta'    = k*sqrt(2*hbar/(m*omega))
      kappa   = hbar*k**2*sigma*sqrt(pi/2)*Omega**2/(2*m*omega*Delta)
      upsilon = 8*hbar*N*k**3*omega_r*a_s/(sqrt(2)*m*omega**2)

In both cases tau_h = omega*tau, time measured in trap periods/2pi.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

from .errors import DomainError

HBAR = 1.054571817e-34      # J s (CODATA 2018)
ATOMIC_MASS = 1.66053906660e-27  # kg


@dataclass(frozen=True)
class Species:
    """An atomic species: mass in kg and s-wave scattering length in m."""

    mass: float
    a_s: float


# Scattering lengths as used for the reference table; isotope masses from
# mass number * atomic mass unit.
SPECIES = {
    "Na-23": Species(mass=23 * ATOMIC_MASS, a_s=2.75e-9),
    "Rb-87": Species(mass=87 * ATOMIC_MASS, a_s=5.1e-9),
}

# Reference ground-state chemical potentials (units of hbar*omega), keyed by
# the effective GPE coupling g1 = upsilon/eta**3.  These are the values the
# imaginary-time solver reproduces to +-0.02; the table command embeds them
# so it can run without a solve.
REFERENCE_MU = {1.0: 0.87, 0.125: 0.55, 10.0: 3.11, 1.25: 0.95}


@dataclass
class PhysicalParams:
    """Laboratory-frame parameters.

    `kick_energy` (J) multiplies cos(k*x) in the kick train, `interaction`
    (J m) is the 1D contact-interaction strength.  `tau` is the kick period
    in seconds; the BEC pulse parameters are `rabi` (rad/s), `detuning`
    (rad/s) and `pulse_width` (s).
    """

    mass: float
    omega: float
    k: float
    tau: float = 0.0
    omega_r: float = 0.0
    kick_energy: float = 0.0
    interaction: float = 0.0
    a_s: float = 0.0
    n_atoms: float = 0.0
    rabi: float = 0.0
    detuning: float = 0.0
    pulse_width: float = 0.0

    def validate(self):
        if self.mass <= 0 or self.omega <= 0 or self.k <= 0:
            raise DomainError("mass, omega and k must be positive")
        if self.omega_r and self.omega_r < self.omega:
            raise DomainError("quasi-1D reduction needs omega_r >= omega")


@dataclass(frozen=True)
class ScaledParams:
    """The dimensionless control set consumed by every dynamics module."""

    eta: float
    kappa: float
    upsilon: float
    tau_h: float
    source: PhysicalParams | None = field(default=None, compare=False)
    convention: str = "single-particle"

    def __post_init__(self):
        if self.eta <= 0:
            raise DomainError("eta must be positive")
        if self.kappa < 0 or self.upsilon < 0:
            raise DomainError("kappa and upsilon must be nonnegative")
        if self.tau_h <= 0:
            raise DomainError("tau_h must be positive")
        if not math.isfinite(self.g1):
            raise DomainError("effective coupling upsilon/eta**3 not finite")

    @property
    def g1(self) -> float:
        """Effective GPE coupling upsilon/eta**3 in harmonic units."""
        return self.upsilon / self.eta**3


def scale_from_single_particle(p: PhysicalParams) -> ScaledParams:
    """Dimensionless parameters for the single-particle kick convention."""
    p.validate()
    if p.tau <= 0:
        raise DomainError("kick period tau must be positive")
    eta = p.k * math.sqrt(HBAR / (2 * p.mass * p.omega))
    kappa = p.kick_energy * p.k**2 / (math.sqrt(2) * p.mass * p.omega**2)
    upsilon = p.interaction * p.k**3 / (2 * math.sqrt(2) * p.mass * p.omega**2)
    return ScaledParams(eta=eta, kappa=kappa, upsilon=upsilon,
                        tau_h=p.omega * p.tau, source=p,
                        convention="single-particle")


def invert_single_particle(s: ScaledParams, mass: float, omega: float,
                           k: float) -> tuple[float, float, float]:
    """Recover (kick_energy, interaction, tau) from a scaled set.

    Algebraic inverse of scale_from_single_particle for given (m, omega, k);
    used by the round-trip checks.
    """
    kick = s.kappa * math.sqrt(2) * mass * omega**2 / k**2
    u = s.upsilon * 2 * math.sqrt(2) * mass * omega**2 / k**3
    tau = s.tau_h / omega
    return kick, u, tau


def scale_from_bec_experiment(p: PhysicalParams) -> ScaledParams:
    """Dimensionless parameters for the pulsed-laser BEC realization.

    The cos(2kx) light-shift potential doubles the effective wavenumber, so
    the returned eta slot holds eta' = 2*eta.  Warns when sigma*|Delta| <= 1
    (the pulse is then too spectrally broad for the adiabatic elimination).
    """
    p.validate()
    if p.detuning == 0:
        raise DomainError("detuning must be nonzero")
    if p.pulse_width <= 0:
        raise DomainError("pulse width sigma must be positive")
    if p.tau <= 0:
        raise DomainError("kick period tau must be positive")
    if p.pulse_width * abs(p.detuning) <= 1.0:
        warnings.warn("pulse width sigma <= 1/|Delta|: delta-kick "
                      "approximation is marginal", stacklevel=2)
    eta_prime = p.k * math.sqrt(2 * HBAR / (p.mass * p.omega))
    kappa = (HBAR * p.k**2 * p.pulse_width * math.sqrt(math.pi / 2)
             * p.rabi**2 / (2 * p.mass * p.omega * p.detuning))
    upsilon = (8 * HBAR * p.n_atoms * p.k**3 * p.omega_r * p.a_s
               / (math.sqrt(2) * p.mass * p.omega**2))
    return ScaledParams(eta=eta_prime, kappa=kappa, upsilon=upsilon,
                        tau_h=p.omega * p.tau, source=p, convention="bec")


def experiment_table(species: Species, upsilon: float, eta_prime: float,
                     omega_ratio: float) -> dict:
    """Atom-number design coefficients for one parameter point.

    Returns lambda = sqrt(hbar/m)*upsilon/(2*a_s*eta'**3), such that the atom
    number is N = lambda*sqrt(omega)/omega_r, and nu = lambda/sqrt(omega_ratio)
    such that N = nu/sqrt(omega_r) at fixed omega_r/omega.  Both in s**-1/2.
    """
    if species.a_s <= 0 or species.mass <= 0:
        raise DomainError("species needs positive mass and a_s")
    if eta_prime <= 0 or omega_ratio <= 0 or upsilon < 0:
        raise DomainError("eta_prime and omega_ratio must be positive")
    lam = math.sqrt(HBAR / species.mass) * upsilon / (2 * species.a_s * eta_prime**3)
    return {"lambda": lam, "nu": lam / math.sqrt(omega_ratio)}


def reference_table(omega_ratio: float = 10.0) -> list[dict]:
    """All rows of the experimental-design table.

    One row per (upsilon, eta_prime, species) over upsilon in {1, 10},
    eta' in {1, 2}, species Na-23 and Rb-87, with the reference chemical
    potential for g1 = upsilon/eta'**3 attached.
    """
    rows = []
    for upsilon in (1.0, 10.0):
        for eta_prime in (1.0, 2.0):
            g1 = upsilon / eta_prime**3
            for name, sp in SPECIES.items():
                out = experiment_table(sp, upsilon, eta_prime, omega_ratio)
                rows.append({
                    "species": name,
                    "upsilon": upsilon,
                    "eta_prime": eta_prime,
                    "mu_hw": REFERENCE_MU.get(g1, float("nan")),
                    "lambda": out["lambda"],
                    "nu": out["nu"],
                })
    return rows
