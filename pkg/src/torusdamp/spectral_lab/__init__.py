"""Fourier pseudospectral experiments on flat tori (d = 2, 3)."""
from .estimates import (NonConcentration, SlabEstimate, check_1d_resolvent, check_nonconcentration,
                        check_slab_estimate, epsilon_of_h, slice_mass)
from .grid import GridField, load_field, save_field
from .quantization import (fourier_multiplier, microlocal_mass, psi_partition, psi_step,
                           second_microlocal_mass)
from .quasimodes import (QuasimodeReport, bump, gaussian_beam, helmholtz_residual, helmholtz_solve,
                         plane_wave, profile_quasimode, quasimode_report, snap_h)
from .wave import (EnergyTrace, SimulationNaN, WaveState, energy, fit_decay_rate, oracle_energy,
                   oracle_rate, random_band_limited, rasterize_damping, run_simulation,
                   step_damped_wave)

__all__ = [
    "GridField", "save_field", "load_field",
    "rasterize_damping", "WaveState", "step_damped_wave", "energy", "run_simulation",
    "EnergyTrace", "SimulationNaN", "fit_decay_rate", "oracle_rate", "oracle_energy",
    "random_band_limited",
    "gaussian_beam", "plane_wave", "profile_quasimode", "helmholtz_solve", "helmholtz_residual", "snap_h", "bump",
    "QuasimodeReport", "quasimode_report",
    "epsilon_of_h", "slice_mass", "check_nonconcentration", "check_slab_estimate",
    "check_1d_resolvent", "NonConcentration", "SlabEstimate",
    "fourier_multiplier", "microlocal_mass", "second_microlocal_mass", "psi_partition", "psi_step",
]
