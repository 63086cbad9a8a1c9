"""Mean-field Ehrenfest simulation of polariton wavepacket transport."""

from .analysis import WavefrontFit, real_space_density, signed_positions, track_wavefront
from .ensemble import EnsembleConfig, EnsembleFailure, EnsembleResult, run_ensemble
from .hamiltonian import SingleExcitationHamiltonian, build_hq
from .propagate import Trajectory, TrajectoryFailure, propagate_trajectory
from .sampling import sample_wigner, wigner_variances
from .states import NuclearPhaseSpace, SingleExcitationState
from .wavepacket import WavepacketInit, initialize_wavepacket

__all__ = [
    "EnsembleConfig",
    "EnsembleFailure",
    "EnsembleResult",
    "NuclearPhaseSpace",
    "SingleExcitationHamiltonian",
    "SingleExcitationState",
    "Trajectory",
    "TrajectoryFailure",
    "WavefrontFit",
    "WavepacketInit",
    "build_hq",
    "initialize_wavepacket",
    "propagate_trajectory",
    "real_space_density",
    "run_ensemble",
    "sample_wigner",
    "signed_positions",
    "track_wavefront",
    "wigner_variances",
]
