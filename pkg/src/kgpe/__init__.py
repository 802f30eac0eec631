"""Numerical laboratory for the delta-kicked harmonic-oscillator GPE.

Modules: scaling (physical <-> dimensionless parameters), grids (spectral
machinery), classical (kicked-oscillator point dynamics), gpe (split-step
solver), wigner (phase-space analysis), liouville (self-consistent
semiclassical ensembles), bogoliubov (depletion dynamics), fileio and cli
(formats and front end).
"""

__version__ = "0.1.0"

from .scaling import (PhysicalParams, ScaledParams, Species, SPECIES,
                      experiment_table, scale_from_bec_experiment,
                      scale_from_single_particle)
from .grids import ComplexField, Grid1D, make_grid
from .gpe import GpeState, GroundState, ground_state, run_kicked
from .wigner import WignerGrid, wigner_transform
from .liouville import Ensemble, sample_from_wigner
from .bogoliubov import BdgModeSet, DepletionSeries, depletion_run

__all__ = [
    "__version__",
    "PhysicalParams", "ScaledParams", "Species", "SPECIES",
    "experiment_table", "scale_from_bec_experiment",
    "scale_from_single_particle",
    "ComplexField", "Grid1D", "make_grid",
    "GpeState", "GroundState", "ground_state", "run_kicked",
    "WignerGrid", "wigner_transform",
    "Ensemble", "sample_from_wigner",
    "BdgModeSet", "DepletionSeries", "depletion_run",
]
