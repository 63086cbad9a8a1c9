"""Generalized Holstein-Tavis-Cummings model: cavity, polaritons and phonon bath.

Units throughout: energies in eV, time in fs, lengths in nm.  Photon and
polariton "frequencies" are stored as energies (hbar * omega).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.optimize import brentq

HBAR = 0.6582119569  # eV fs
C_LIGHT = 299.792458  # nm / fs
KB = 8.617333262e-5  # eV / K

# Window of the dense theory grid, in units of k_perp.
DENSE_KMAX_FACTOR = 3.0
DENSE_POINTS = 2001


@dataclass(frozen=True)
class ModelParams:
    """Cavity, exciton and lattice parameters.

    ``gc`` is the collective coupling sqrt(N) * g_c.  ``L`` defaults to the
    spacing for which the cavity-mode grid reaches 3 k_perp.  ``mode_offset``
    shifts the integer mode indices so a window of ``M`` modes can be centred
    away from k = 0 (used by the dynamics to resolve a wavepacket at finite k).
    """

    omega0: float = 1.96
    omega_c: float = 1.90
    gc: float = 0.120
    N: int = 2000
    M: int = 57
    L: Optional[float] = None
    mode_offset: int = 0

    def __post_init__(self):
        if not (self.omega0 > 0 and self.omega_c > 0):
            raise ValueError("omega0 and omega_c must be positive")
        if self.gc < 0:
            raise ValueError("collective coupling must be non-negative")
        if self.M < 0 or self.N < max(self.M, 1):
            raise ValueError(f"need N >= M >= 0 and N >= 1, got N={self.N}, M={self.M}")
        if self.M > 0 and self.M % 2 == 0:
            raise ValueError(f"M must be odd, got {self.M}")
        if self.L is None:
            object.__setattr__(self, "L", default_spacing(self.N, self.M, self.omega_c))
        if not self.L > 0:
            raise ValueError("L must be positive")

    @property
    def k_perp(self) -> float:
        return self.omega_c / (HBAR * C_LIGHT)

    @property
    def box_length(self) -> float:
        return self.N * self.L

    @property
    def dk(self) -> float:
        """Spacing of the cavity-mode grid."""
        return 2 * np.pi / self.box_length


def default_spacing(N, M, omega_c=1.90):
    """Lattice spacing for which the largest mode index sits at 3 k_perp."""
    k_perp = omega_c / (HBAR * C_LIGHT)
    half = max((M - 1) // 2, 1)
    return 2 * np.pi * half / (N * DENSE_KMAX_FACTOR * k_perp)


@dataclass(frozen=True)
class KGrid:
    k_indices: np.ndarray
    k_parallel: np.ndarray
    dense: Optional[np.ndarray] = None

    @property
    def theory_points(self) -> np.ndarray:
        return self.k_parallel if self.dense is None else self.dense


def mode_grid(params: ModelParams) -> KGrid:
    """Integer cavity-mode grid k_par = 2 pi k / (N L)."""
    half = (params.M - 1) // 2 if params.M else 0
    idx = np.arange(-half, half + 1, dtype=int)[: params.M] + params.mode_offset
    return KGrid(k_indices=idx, k_parallel=idx * params.dk)


def dense_grid(params: ModelParams, k_max=None, n_points=DENSE_POINTS, k_min=0.0) -> KGrid:
    """Mode grid plus a uniform dense grid for evaluating the theory."""
    if k_max is None:
        k_max = DENSE_KMAX_FACTOR * params.k_perp
    if n_points < 2 or not k_max > k_min:
        raise ValueError("dense grid needs >= 2 points and k_max > k_min")
    base = mode_grid(params)
    return KGrid(base.k_indices, base.k_parallel, np.linspace(k_min, k_max, n_points))


@dataclass(frozen=True)
class BandPoint:
    """Bare polariton quantities at one or many k (fields broadcast with k)."""

    k_parallel: np.ndarray
    omega_k: np.ndarray
    g_k: np.ndarray
    energy_up: np.ndarray
    energy_lp: np.ndarray
    mixing_angle: np.ndarray
    hopfield_lp: np.ndarray
    zeta_up: np.ndarray
    dark_gap: np.ndarray
    omega0: float = field(default=1.96)

    @property
    def energy_dark(self) -> float:
        return self.omega0


def cavity_dispersion(k_parallel, params: ModelParams):
    """Fabry-Perot photon energy hbar*c*sqrt(k_perp^2 + k_par^2) in eV."""
    k = np.asarray(k_parallel, dtype=float)
    return HBAR * C_LIGHT * np.hypot(params.k_perp, k)


def coupling_at_k(k_parallel, params: ModelParams):
    """Collective coupling sqrt(N) g_k = sqrt(N) g_c sqrt(w_k/w_c) cos(theta)."""
    k = np.asarray(k_parallel, dtype=float)
    omega_k = cavity_dispersion(k, params)
    cos_theta = np.cos(np.arctan2(np.abs(k), params.k_perp))
    return params.gc * np.sqrt(omega_k / params.omega_c) * cos_theta


def polariton_point(k_parallel, params: ModelParams) -> BandPoint:
    k = np.asarray(k_parallel, dtype=float)
    wk = cavity_dispersion(k, params)
    g = coupling_at_k(k, params)
    detuning = wk - params.omega0
    rabi = np.sqrt(detuning**2 + 4 * g**2)
    mean = 0.5 * (wk + params.omega0)
    e_up = mean + 0.5 * rabi
    e_lp = mean - 0.5 * rabi
    # sin^2 of this angle is the LP matter fraction; see decisions on the branch choice
    theta = 0.5 * np.arctan2(2 * g, -detuning)
    with np.errstate(invalid="ignore", divide="ignore"):
        c2 = np.where(rabi > 0, 0.5 * (1 + detuning / np.where(rabi > 0, rabi, 1)),
                      (detuning > 0).astype(float))
    return BandPoint(
        k_parallel=k,
        omega_k=wk,
        g_k=g,
        energy_up=e_up,
        energy_lp=e_lp,
        mixing_angle=theta,
        hopfield_lp=c2,
        zeta_up=1 - c2,
        dark_gap=params.omega0 - e_lp,
        omega0=params.omega0,
    )


def _coupling_derivatives(k, params):
    # d(w_k)/dk and d(sqrt(N) g_k)/dk, with sqrt(N) g_k = gc * sqrt(w_c / w_k)
    wk = cavity_dispersion(k, params)
    dwk = (HBAR * C_LIGHT) ** 2 * k / wk
    g = params.gc * np.sqrt(params.omega_c / wk)
    dg = -0.5 * g / wk * dwk
    return wk, dwk, g, dg


def bare_group_velocity(k_parallel, branch: str, params: ModelParams):
    """Analytic d(omega_pm)/dk_par in nm/fs, including the k-dependence of g_k."""
    k = np.asarray(k_parallel, dtype=float)
    wk, dwk, g, dg = _coupling_derivatives(k, params)
    detuning = wk - params.omega0
    rabi = np.sqrt(detuning**2 + 4 * g**2)
    drabi = (detuning * dwk + 4 * g * dg) / np.where(rabi > 0, rabi, 1.0)
    sign = _branch_sign(branch)
    return (0.5 * dwk + sign * 0.5 * drabi) / HBAR


def _branch_sign(branch):
    b = str(branch).upper()
    if b in ("UP", "+"):
        return 1.0
    if b in ("LP", "-"):
        return -1.0
    raise ValueError(f"unknown branch {branch!r}; expected 'UP' or 'LP'")


def k_at_lp_energy(energy, params: ModelParams) -> float:
    """Non-negative k_par at which the bare LP energy equals ``energy``."""
    lp = lambda k: float(polariton_point(k, params).energy_lp) - energy
    lo = 0.0
    if lp(lo) > 0:
        raise ValueError(f"LP energy {energy} eV lies below the band bottom")
    hi = params.k_perp
    while lp(hi) < 0:
        hi *= 2
        if hi > 1e4 * params.k_perp:
            raise ValueError(f"LP energy {energy} eV is not reached (LP < {params.omega0} eV)")
    return brentq(lp, lo, hi, xtol=1e-15, rtol=1e-14)


@dataclass(frozen=True)
class BathSpec:
    lam: float = 0.006
    omega_f: float = 0.006
    n_modes: int = 35

    def __post_init__(self):
        if self.lam < 0:
            raise ValueError("reorganization energy must be non-negative")
        if not self.omega_f > 0:
            raise ValueError("bath characteristic frequency must be positive")
        if self.n_modes < 1:
            raise ValueError("need at least one bath mode")


@dataclass(frozen=True)
class DiscretizedBath:
    omega: np.ndarray  # eV
    c: np.ndarray  # eV

    @property
    def reorganization(self) -> float:
        return float(np.sum(self.c**2 / self.omega))

    def __len__(self):
        return len(self.omega)


def discretize_bath(spec: BathSpec) -> DiscretizedBath:
    """Drude-Lorentz bath sampled at equal intervals of reorganization energy.

    Mode alpha (1-based) sits at w_f tan(pi/2 (1 - alpha/(Nb+1))) and carries
    c_alpha^2 / w_alpha = lambda / (Nb + 1).
    """
    nb = spec.n_modes
    alpha = np.arange(1, nb + 1)
    omega = spec.omega_f * np.tan(0.5 * np.pi * (1 - alpha / (nb + 1)))
    c = np.sqrt(spec.lam * omega / (nb + 1))
    return DiscretizedBath(omega=omega, c=c)
