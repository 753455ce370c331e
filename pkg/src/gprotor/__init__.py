"""Rotating Gross-Pitaevskii toolkit: fields, ground states, split-step dynamics, moment ODE."""

from .dynamics import EvolveConfig, evolve
from .ehrenfest import classify_general_omega, classify_growth, propagate_moments, resonant_subspace
from .field import GridSpec, ProblemParams, WaveField, energy, make_grid, mass, moments
from .groundstate import GroundStateConfig, coercivity_check, solve_ground_state
from .rotation import frame_transform, rotate_field

__all__ = [
    "EvolveConfig", "GridSpec", "GroundStateConfig", "ProblemParams", "WaveField",
    "classify_general_omega", "classify_growth", "coercivity_check", "energy", "evolve",
    "frame_transform", "make_grid", "mass", "moments", "propagate_moments",
    "resonant_subspace", "rotate_field", "solve_ground_state",
]
