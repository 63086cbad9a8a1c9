from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass
class SingleExcitationState:
    """Exciton amplitudes c_n (..., N) and photon amplitudes c_k (..., M).

    Leading dimensions, if any, index independent trajectories.
    """

    exciton: np.ndarray
    photon: np.ndarray

    def norm(self):
        return np.sum(np.abs(self.exciton) ** 2, axis=-1) + np.sum(np.abs(self.photon) ** 2, axis=-1)

    def copy(self):
        return SingleExcitationState(self.exciton.copy(), self.photon.copy())

    def batched(self, n):
        """The same state repeated for ``n`` trajectories."""
        return SingleExcitationState(
            np.broadcast_to(self.exciton, (n,) + self.exciton.shape[-1:]).copy(),
            np.broadcast_to(self.photon, (n,) + self.photon.shape[-1:]).copy(),
        )


@dataclass
class NuclearPhaseSpace:
    """Mass-weighted bath coordinates R and momenta P, shape (..., N, Nb)."""

    R: np.ndarray
    P: np.ndarray

    def __post_init__(self):
        if self.R.shape != self.P.shape:
            raise ValueError(f"R {self.R.shape} and P {self.P.shape} differ in shape")

    def copy(self):
        return NuclearPhaseSpace(self.R.copy(), self.P.copy())
