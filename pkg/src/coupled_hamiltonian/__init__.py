"""Coupled Hamiltonian systems: simulation, symplecticity checks, diagnostics."""

from .core import (CoordinateLayout, CoupledSystem, Interaction, PhaseState, Subsystem,
                   eval_vector_field, fd_gradient, total_energy)
from .integrators import (IntegratorKind, IntegratorSpec, Trajectory, implicit_midpoint_step,
                          integrate, rk4_step, stormer_verlet_step)
from .symplectic import (ObstructionForm, SymplecticVerdict, check_symplectic,
                         check_symplectic_on_manifold, interaction_jacobian, map_pullback_residual,
                         obstruction_form, sample_states)

__all__ = [
    "CoordinateLayout", "CoupledSystem", "Interaction", "PhaseState", "Subsystem",
    "eval_vector_field", "fd_gradient", "total_energy",
    "IntegratorKind", "IntegratorSpec", "Trajectory", "implicit_midpoint_step", "integrate",
    "rk4_step", "stormer_verlet_step",
    "ObstructionForm", "SymplecticVerdict", "check_symplectic", "check_symplectic_on_manifold",
    "interaction_jacobian", "map_pullback_residual", "obstruction_form", "sample_states",
]
