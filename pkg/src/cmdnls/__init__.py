"""Spectral laboratory for the Calogero-Moser derivative NLS on the line.

The solution space is the Hardy half: fields whose Fourier transform is
supported on xi >= 0.  Everything in the package — quadrature, products,
the Lax matrix, the explicit multi-soliton machinery, the pole dynamics,
and the time steppers — lives on one shared frequency lattice so that
cross-checks between independent realizations of the same object are
meaningful to near machine precision.
"""

from .fields import (
    ChiralField,
    FrequencyGrid,
    RealLineField,
    chiral_from_values,
    embed,
    hilbert_transform,
    make_grid,
    project_plus,
    real_values,
    realline_from_values,
    values,
)
from .functionals import (
    energy,
    galilean_boost,
    gauge_inverse,
    gauge_transform,
    gauged_energy,
    mass,
    modulus_centroid,
    momentum,
    sobolev_norm,
    variance,
)
from .dynamics import ground_state, pde_rhs
from .lax import (
    EigenSystem,
    LaxMatrix,
    SpectralData,
    assemble_B,
    assemble_B_tilde,
    assemble_lax,
    bound_states,
    conserved_hierarchy,
    lax_equation_residual,
    operator_bound_checks,
    spectral_data_from_potential,
    toeplitz_from_symbol,
)
from .solitons import (
    RationalSoliton,
    eval_soliton,
    growth_scan,
    hs_norm_from_poles,
    lattice_residues,
    poles_at_time,
    potential_roundtrip,
    residues_at_time,
    residues_from_poles,
    sample_soliton,
    synth_matrix,
    two_soliton_explicit,
    validate_multisoliton,
)
from .poles import PoleState, PoleTrajectory, acceleration_residual, integrate, pole_rhs
from .evolve import (
    EvolutionConfig,
    Trajectory,
    conservation_report,
    evolve,
    gauge_crosscheck,
    spectral_evolution_check,
    virial_check,
)

__version__ = "0.1.0"

__all__ = [
    "ChiralField",
    "EigenSystem",
    "EvolutionConfig",
    "FrequencyGrid",
    "LaxMatrix",
    "PoleState",
    "PoleTrajectory",
    "RationalSoliton",
    "RealLineField",
    "SpectralData",
    "Trajectory",
    "acceleration_residual",
    "assemble_B",
    "assemble_B_tilde",
    "assemble_lax",
    "bound_states",
    "chiral_from_values",
    "conservation_report",
    "conserved_hierarchy",
    "embed",
    "energy",
    "eval_soliton",
    "evolve",
    "galilean_boost",
    "gauge_crosscheck",
    "gauge_inverse",
    "gauge_transform",
    "gauged_energy",
    "ground_state",
    "growth_scan",
    "hilbert_transform",
    "hs_norm_from_poles",
    "integrate",
    "lattice_residues",
    "lax_equation_residual",
    "make_grid",
    "mass",
    "modulus_centroid",
    "momentum",
    "operator_bound_checks",
    "pde_rhs",
    "pole_rhs",
    "poles_at_time",
    "potential_roundtrip",
    "project_plus",
    "real_values",
    "realline_from_values",
    "residues_at_time",
    "residues_from_poles",
    "sample_soliton",
    "sobolev_norm",
    "spectral_data_from_potential",
    "spectral_evolution_check",
    "synth_matrix",
    "toeplitz_from_symbol",
    "two_soliton_explicit",
    "validate_multisoliton",
    "values",
    "variance",
    "virial_check",
]
