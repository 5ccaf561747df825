"""Numerical lab for the mean-field limit of bosons with random interactions.

Pairs exact N-boson lattice dynamics with the Hartree flow over Monte Carlo
sampled interaction fields and checks that the gap between the quantum and
the mean-field expectations shrinks as N grows.
"""

from .ensemble import (ExperimentPlan, SampleResult, SummaryRow, estimate,
                       run_ensemble, run_sample, tail_diagnostic)
from .grid import (LatticeGrid, WaveFunction, build_grid, convolve,
                   gaussian_packet, laplacian_apply, normalize, plane_wave,
                   uniform_state)
from .hartree import (HartreeRunParams, evolve_hartree, hartree_expectation,
                      hartree_step)
from .manybody import (FockBasis, ManyBodyState, SparseHamiltonian,
                       assemble_hamiltonian, build_fock_basis, evolve_manybody,
                       manybody_expectation, product_state_lift,
                       reduced_density_matrix)
from .observables import (PObservable, condensate_projector, lift_factor,
                          operator_norm, site_multiplier)
from .random_field import (FieldSpec, RandomField, field_bound, mix_seed,
                           sample_field)

__all__ = [
    "ExperimentPlan", "SampleResult", "SummaryRow", "estimate",
    "run_ensemble", "run_sample", "tail_diagnostic",
    "LatticeGrid", "WaveFunction", "build_grid", "convolve",
    "gaussian_packet", "laplacian_apply", "normalize", "plane_wave",
    "uniform_state",
    "HartreeRunParams", "evolve_hartree", "hartree_expectation", "hartree_step",
    "FockBasis", "ManyBodyState", "SparseHamiltonian", "assemble_hamiltonian",
    "build_fock_basis", "evolve_manybody", "manybody_expectation",
    "product_state_lift", "reduced_density_matrix",
    "PObservable", "condensate_projector", "lift_factor", "operator_norm",
    "site_multiplier",
    "FieldSpec", "RandomField", "field_bound", "mix_seed", "sample_field",
]

__version__ = "0.1.0"
