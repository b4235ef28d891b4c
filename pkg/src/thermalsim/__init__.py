"""Trotterized spin-chain dynamics under gate noise.

Simulation (statevector trajectories, exact eigenbasis evolution),
fixed-energy random product-state sampling, and closed-form/fitted
predictors of local observable error versus time, system size, and
Trotter step.
"""

from .circuits import Gate, TrotterCircuit, build_trotter_circuit, steps_for
from .evolve import (apply_circuit_trajectory, circuit_unitary,
                     compile_circuit, evolve)
from .ensemble import EnsembleTables, ensemble_tables
from .models import (ModelParams, build_hamiltonian, floquet_hamiltonian,
                     hamiltonian_split, local_energy_density,
                     mixed_field_ising, quantum_east_couplings,
                     square_lattice_edges, trotter_perturbation, xy_model)
from .noise import (NoiseModel, depolarizing_kraus, effective_gate_counts,
                    fixed_depolarizing, infidelity_conversions,
                    variant_channels)
from .pauli import Operator, PauliString, error_shift_operator, pauli_anticommutes
from .predictor import (ErrorFit, error_model, fit_error_model,
                        heating_trajectory, naive_estimate, optimal_tau,
                        tdpt_trotter_error, xy_decay_rate, xy_energy)
from .rpe import (SamplerConfig, SpinConfiguration, autocorrelation,
                  config_energy, effective_field, mcmc_run, mcmc_step,
                  product_state_energy_range, rejection_sample,
                  seed_configuration)
from .states import (DensityMatrix, EigenSystem, OneRdm, StateVector,
                     diagonal_ensemble, evolve_exact, expectation,
                     insert_pauli, interpolate, one_rdm, prepare_product_state,
                     site_averaged_rdm, trace_distance)

__version__ = "0.1.0"
