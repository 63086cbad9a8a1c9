"""Thermal Wigner sampling of the harmonic phonon bath."""

from __future__ import annotations

import numpy as np

from ..greens import ThermalState
from ..model import HBAR, DiscretizedBath
from .states import NuclearPhaseSpace


def wigner_variances(omega, thermal: ThermalState):
    """Var(R), Var(P) of the thermal Wigner function for modes of energy ``omega``.

    Var(R) = hbar / (2 Omega) coth(beta hbar Omega / 2), Var(P) = Omega^2 Var(R),
    with Omega = omega / hbar in rad/fs.
    """
    omega = np.asarray(omega, dtype=float)
    Omega = omega / HBAR
    coth = 1.0 / np.tanh(0.5 * thermal.beta * omega)
    var_r = HBAR / (2 * Omega) * coth
    return var_r, Omega**2 * var_r


def trajectory_rng(base_seed: int, index: int) -> np.random.Generator:
    """Independent stream for trajectory ``index`` of an ensemble."""
    return np.random.default_rng(np.random.SeedSequence(base_seed, spawn_key=(index,)))


def trajectory_seed(base_seed: int, index: int) -> int:
    return int(np.random.SeedSequence(base_seed, spawn_key=(index,)).generate_state(1, np.uint64)[0])


def sample_wigner(thermal: ThermalState, bath: DiscretizedBath, N: int, rng) -> NuclearPhaseSpace:
    """Independent Gaussian (R, P) for every (site, mode), zero mean.

    ``rng`` is a Generator or anything accepted by ``np.random.default_rng``.
    """
    rng = np.random.default_rng(rng)
    var_r, var_p = wigner_variances(bath.omega, thermal)
    R = rng.standard_normal((N, len(bath))) * np.sqrt(var_r)
    P = rng.standard_normal((N, len(bath))) * np.sqrt(var_p)
    return NuclearPhaseSpace(R, P)
