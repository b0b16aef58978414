"""Persistent-homology chaos detection for the pulse-driven Kerr cavity.

Classical mean-field and quantum-jump simulators feed delay-embedded
observables into a Vietoris-Rips persistence engine; the average H1
lifetime separates regular from chaotic drive parameters.
"""

from ._backend import BACKEND
from .classical import (ClassicalParams, DriveProfile, bifurcation_scan,
                        integrate_classical)
from .embedding import delay_embed, estimate_delay_mi, estimate_dimension_fnn
from .errors import *  # noqa: F401,F403
from .homology import (PersistenceDiagram, average_lifetime, cloud_persistence,
                       distance_matrix, maxmin_subsample, rips_persistence)
from .pipeline import (PhaseDiagramGrid, SweepConfig, preset, robustness_study,
                       run_cell, sweep_phase_diagram)
from .quantum import (QuantumParams, bin_jump_counts, build_operators,
                      evolve_trajectory, integrate_master_equation)
from .series import TimeSeries

__version__ = "0.1.0"
