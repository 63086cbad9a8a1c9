"""Gaussian LP wavepackets on the cavity-mode grid."""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.special import erfc

from ..model import HBAR, KGrid, ModelParams, bare_group_velocity, k_at_lp_energy, polariton_point
from .states import SingleExcitationState


class SpectralLeakageWarning(UserWarning):
    pass


@dataclass(frozen=True)
class WavepacketInit:
    """LP wavepacket centred at ``center_k`` (or at LP energy ``lp_energy``).

    The width is ``width_k`` in k, or ``width_energy`` converted through the
    bare LP group velocity at the centre (sigma_k = sigma_E / (hbar v_g)).
    """

    center_k: Optional[float] = None
    lp_energy: Optional[float] = None
    width_k: Optional[float] = None
    width_energy: Optional[float] = 0.010
    branch: str = "LP"

    def __post_init__(self):
        if (self.center_k is None) == (self.lp_energy is None):
            raise ValueError("give exactly one of center_k and lp_energy")
        if self.width_k is None and self.width_energy is None:
            raise ValueError("give width_k or width_energy")
        w = self.width_k if self.width_k is not None else self.width_energy
        if not w > 0:
            raise ValueError("wavepacket width must be positive")
        if self.branch != "LP":
            raise ValueError("only LP wavepackets are supported")

    def resolve(self, params: ModelParams):
        """(k0, sigma_k) in 1/nm."""
        k0 = self.center_k if self.center_k is not None else k_at_lp_energy(self.lp_energy, params)
        if self.width_k is not None:
            return k0, self.width_k
        vg = abs(float(bare_group_velocity(k0, "LP", params)))
        return k0, self.width_energy / (HBAR * vg)


def centred_offset(params: ModelParams, k0: float) -> int:
    """Mode-index offset that centres the M-mode window on ``k0``."""
    return int(round(k0 / params.dk))


def initialize_wavepacket(init: WavepacketInit, grid: KGrid, params: ModelParams,
                          x_center=0.0, leak_tol=0.01) -> SingleExcitationState:
    """Gaussian superposition of LP eigenstates |-,k> mapped to sites and photons.

    LP amplitudes are exp(-(k - k0)^2 / (4 sigma_k^2)) exp(-i k x_center); each
    LP state is -sin(Theta) |bright_k> + cos(Theta) |1_k> with the bright
    exciton (1/sqrt N) sum_n exp(i k x_n) |E_n>.
    """
    k0, sigma = init.resolve(params)
    k = np.asarray(grid.k_parallel, dtype=float)
    if k.size == 0:
        raise ValueError("empty mode grid")
    if not (k[0] <= k0 <= k[-1]):
        raise ValueError(f"wavepacket centre {k0:.6g} lies outside the mode window "
                         f"[{k[0]:.6g}, {k[-1]:.6g}]")
    dk = params.dk
    lo, hi = k[0] - dk / 2, k[-1] + dk / 2
    leak = 0.5 * (erfc((k0 - lo) / (np.sqrt(2) * sigma)) + erfc((hi - k0) / (np.sqrt(2) * sigma)))
    if leak > leak_tol:
        warnings.warn(f"{leak:.2%} of the wavepacket lies outside the mode window",
                      SpectralLeakageWarning, stacklevel=2)
    phi = np.exp(-((k - k0) ** 2) / (4 * sigma**2)) * np.exp(-1j * k * x_center)
    bp = polariton_point(k, params)
    s, c = np.sin(bp.mixing_angle), np.cos(bp.mixing_angle)
    x = np.arange(params.N) * params.L
    bright = np.exp(1j * np.outer(x, k)) / np.sqrt(params.N)
    exciton = bright @ (-s * phi)
    photon = c * phi
    norm = np.sqrt(np.sum(np.abs(exciton) ** 2) + np.sum(np.abs(photon) ** 2))
    return SingleExcitationState(exciton / norm, photon / norm)


def k_distribution(state: SingleExcitationState, grid: KGrid, params: ModelParams):
    """Probability on each mode-grid k: photon plus bright-exciton weight."""
    x = np.arange(params.N) * params.L
    bright = state.exciton @ np.exp(-1j * np.outer(x, grid.k_parallel)) / np.sqrt(params.N)
    return np.abs(state.photon) ** 2 + np.abs(bright) ** 2
