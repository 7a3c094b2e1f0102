"""Simulation toolkit for a dissipative two-level atom strongly coupled
to a driven cavity mode: exact steady states, phase-space distributions,
diffusive trajectories, mean-field laws, and ladder spectra."""

__version__ = "0.1.0"

from .params import ScaleSet, SystemParams, derived_scales, from_config
from .operators import OperatorMatrix, TruncatedSpace
from .master_equation import DensityMatrix, build_liouvillian, evolve, steady_state
from .observables import (BlochVector, QuasiProbGrid, bloch_vector,
                          expectation, field_amplitude, grid_peaks, husimi_q,
                          mean_photon, reduce_atom, reduce_field, wigner)
from .semiclassical import (BranchCurve, ThresholdStates, above_threshold,
                            anharmonic_n, asymptotic_roots,
                            bistability_onset_detuning, bloch_below_threshold,
                            branch_curve, kerr_effective, neoclassical_roots,
                            offset_detuning, spontaneous_roots,
                            weak_drive_photon)
from .spectrum import (SpectralLine, blockade_detuning, dressed_frequencies,
                       quasi_energies, resonance_detuning)
from .trajectories import (ScanSchedule, TrajectoryRecord, dwell_statistics,
                           ensemble_mean, run_trajectory)
from .harness import Scenario, auto_truncation, boundary_search, run_scenario
