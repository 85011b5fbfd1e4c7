"""Discrete-spectrum thermodynamics near absolute zero.

Gibbs states and entropy of parameterised spectra, isotherm/adiabat cooling
protocols, the link between a parameter-independent ground entropy and the
impossibility of reaching ``T = 0``, and projective energy measurements.
"""
from .errors import (ArgumentError, DomainError, ModelError, NumericalError, ProjectionError, ProtocolError,
                     StructureError, ThirdLawError, TruncationError, ValidationError)
from .spectra import Level, SpectrumModel, box, custom, degenerate_ground, harmonic, levels_at, truncation_count, two_level
from .thermo import (EntropySurface, ThermalState, entropy, entropy_via_integral, gibbs_populations, nernst_check,
                     partition_function, planck_check, specific_heat, thermal_state)
from .processes import (Adiabatic, Isothermal, Measure, Thermalize, apply_adiabatic, apply_isothermal, run_protocol,
                        staircase)
from .measurement import (EnergyProjector, StateVector, born_probabilities, ground_state_attainment, project,
                          sample_measurement)
from .unattainability import b2_solve, deduce_nernst, equivalence_harness, forward_contradiction, second_law_check

__version__ = "0.1.0"
