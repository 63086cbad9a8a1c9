"""Single-excitation GHTC Hamiltonian in the site / cavity-mode basis."""

from __future__ import annotations

import numpy as np

from ..model import HBAR, DiscretizedBath, ModelParams, cavity_dispersion, coupling_at_k, mode_grid


def mass_weighted_coupling(bath: DiscretizedBath):
    """Angular frequencies (rad/fs) and couplings c_alpha sqrt(2 Omega / hbar).

    Maps c_alpha (b + b^dag) onto a classical mass-weighted coordinate R with
    h_B = (P^2 + Omega^2 R^2) / 2, R in sqrt(eV) fs.
    """
    Omega = np.asarray(bath.omega) / HBAR
    return Omega, np.asarray(bath.c) * np.sqrt(2 * Omega / HBAR)


class SingleExcitationHamiltonian:
    """Matrix-free H_Q(R) acting on exciton amplitudes C (..., N) and photon
    amplitudes A (..., M).

    Exciton block is diagonal in sites, photon block diagonal in k, and the
    coupling is <E_n|H|k> = g_k exp(i k x_n) with g_k the single-molecule
    coupling.  Energies are measured from ``energy_ref`` so the RK4 phases stay
    small; this only drops a global phase.
    """

    def __init__(self, params: ModelParams, bath: DiscretizedBath, energy_ref=0.0):
        self.params = params
        self.bath = bath
        self.energy_ref = float(energy_ref)
        grid = mode_grid(params)
        self.k = grid.k_parallel
        self.x = np.arange(params.N) * params.L
        self.omega_k = cavity_dispersion(self.k, params)
        self.g = coupling_at_k(self.k, params) / np.sqrt(params.N)
        phase = np.exp(1j * np.outer(self.x, self.k))  # (N, M)
        # photon -> site: (..., M) @ (M, N); site -> photon: (..., N) @ (N, M)
        self._to_sites = np.ascontiguousarray((phase * self.g).T)
        self._to_modes = np.ascontiguousarray(phase.conj() * self.g)
        self._field = np.ascontiguousarray(phase.T) / np.sqrt(params.N)
        self.Omega, self.c_tilde = mass_weighted_coupling(bath)
        self.photon_diag = self.omega_k - self.energy_ref

    @property
    def N(self):
        return self.params.N

    @property
    def M(self):
        return self.params.M

    def site_energies(self, R):
        """Exciton energies relative to ``energy_ref`` for coordinates R (..., N, Nb)."""
        shift = (self.params.omega0 - self.energy_ref)
        if R is None or len(self.bath) == 0:
            return np.full(self.N, shift)
        return shift + R @ self.c_tilde

    def apply(self, C, A, eps):
        """(H C, H A) for site energies ``eps`` from :meth:`site_energies`."""
        HC = eps * C
        HA = self.photon_diag * A
        if self.M:
            HC += A @ self._to_sites
            HA += C @ self._to_modes
        return HC, HA

    def photon_field(self, A):
        """Photon amplitude mapped onto the lattice, (1/sqrt N) sum_k a_k e^{i k x_n}."""
        if not self.M:
            return np.zeros(A.shape[:-1] + (self.N,), dtype=complex)
        return A @ self._field

    def electronic_energy(self, C, A, R):
        """Re <psi|H_Q(R)|psi> in absolute eV, per leading index."""
        eps = self.site_energies(R)
        HC, HA = self.apply(C, A, eps)
        val = np.sum((C.conj() * HC).real, axis=-1) + np.sum((A.conj() * HA).real, axis=-1)
        norm = np.sum(np.abs(C) ** 2, axis=-1) + np.sum(np.abs(A) ** 2, axis=-1)
        return val + self.energy_ref * norm

    def bath_energy(self, R, P):
        return 0.5 * np.sum(P**2 + (self.Omega**2) * R**2, axis=(-2, -1))

    def forces(self, C, R):
        """Mean-field force -d/dR [<psi|H_SB|psi> + h_B]."""
        pop = np.abs(C) ** 2
        return -pop[..., :, None] * self.c_tilde - (self.Omega**2) * R

    def dense(self, R=None):
        """Dense (N+M) x (N+M) matrix in absolute eV (sites first, then modes)."""
        N, M = self.N, self.M
        H = np.zeros((N + M, N + M), dtype=complex)
        eps = self.site_energies(R) + self.energy_ref
        H[np.arange(N), np.arange(N)] = eps
        H[N + np.arange(M), N + np.arange(M)] = self.omega_k
        coupling = self._to_sites.T  # (N, M): g_k e^{i k x_n}
        H[:N, N:] = coupling
        H[N:, :N] = coupling.conj().T
        return H


def build_hq(R, params: ModelParams, bath: DiscretizedBath):
    """Dense single-excitation H_Q(R) in eV; R has shape (N, Nb) or is None."""
    if R is not None:
        R = np.asarray(R, dtype=float)
        if R.shape != (params.N, len(bath)):
            raise ValueError(f"R has shape {R.shape}, expected {(params.N, len(bath))}")
    return SingleExcitationHamiltonian(params, bath).dense(R)
