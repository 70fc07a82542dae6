"""Simulated absorption imaging of bosons released from a double-well trap."""
from .expansion import (DensityProfile, SpatialGrid, WavepacketFamily, fringe_period,
                        mode_function, operator_density, shot_density)
from .hilbert import (CoherentParams, OneBodyMatrix, TwoModeState, coherent_gram,
                      coherent_state, fock_state, one_body_matrix, overlap, povm_weight)
from .imaging import (RunConfig, ShotRecord, density_difference, povm_average_fock_closed,
                      povm_average_quadrature, run_monte_carlo, sample_shot,
                      trace_average_fock, xi_marginal_fock)
from .trap import TrapParams, evolve_in_trap, ground_state, hamiltonian_tridiagonal

__version__ = "0.1.0"
