"""First-order (Fan-Migdal) phonon renormalization of the polariton bands.

All frequencies enter as energies (eV), so the polarizability kernel comes
out in 1/eV and ``2 c_alpha^2 * Xi`` is directly an energy shift.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import FrozenSet, Optional

import numpy as np

from .model import (
    HBAR,
    KB,
    BandPoint,
    DiscretizedBath,
    KGrid,
    ModelParams,
    bare_group_velocity,
    mode_grid,
    polariton_point,
)

BRANCHES = ("UP", "LP", "dark")

# Bath modes are processed in blocks to bound memory of the (k, alpha) tables.
_BLOCK_ELEMENTS = 4_000_000


class ConfigurationError(ValueError):
    pass


@dataclass(frozen=True)
class ThermalState:
    temperature: float

    def __post_init__(self):
        if not self.temperature > 0:
            raise ValueError("temperature must be positive")

    @property
    def beta(self) -> float:
        return 1.0 / (KB * self.temperature)


@dataclass(frozen=True)
class SelfEnergyConfig:
    eta: float = 1e-3
    include_branches: FrozenSet[str] = frozenset(BRANCHES)
    dark_only: bool = True
    derivative_step: float = 1e-6
    self_consistent: bool = False
    sc_tol: float = 1e-9
    sc_max_iter: int = 200
    sc_damping: float = 0.5

    def __post_init__(self):
        object.__setattr__(self, "include_branches", frozenset(self.include_branches))
        unknown = self.include_branches - set(BRANCHES)
        if unknown:
            raise ConfigurationError(f"unknown branches {sorted(unknown)}")
        if not self.eta > 0:
            raise ConfigurationError("eta must be positive")
        if not self.derivative_step > 0:
            raise ConfigurationError("derivative_step must be positive")


@dataclass(frozen=True)
class TastParams:
    G: float = 3.0

    def __post_init__(self):
        if self.G < 0:
            raise ValueError("G must be non-negative")


def bose_einstein(omega, thermal: ThermalState):
    """Bose-Einstein occupation of modes with energy ``omega`` (eV)."""
    omega = np.asarray(omega, dtype=float)
    if np.any(omega <= 0):
        raise ValueError("Bose-Einstein occupation needs omega > 0")
    x = thermal.beta * omega
    # e^-x / (1 - e^-x): no overflow for large x
    return np.exp(-x) / -np.expm1(-x)


def polarizability(e_mu, e_nu, omega_alpha, thermal: ThermalState, eta):
    """Real part of the finite-temperature phonon polarizability kernel (1/eV)."""
    x = np.asarray(e_mu, dtype=float) - np.asarray(e_nu, dtype=float)
    n = bose_einstein(omega_alpha, thermal)
    a = x - omega_alpha
    b = x + omega_alpha
    return (1 + n) * a / (a * a + eta * eta) + n * b / (b * b + eta * eta)


def polarizability_imag(e_mu, e_nu, omega_alpha, thermal: ThermalState, eta):
    """Imaginary (Lorentzian) counterpart of :func:`polarizability`."""
    x = np.asarray(e_mu, dtype=float) - np.asarray(e_nu, dtype=float)
    n = bose_einstein(omega_alpha, thermal)
    a = x - omega_alpha
    b = x + omega_alpha
    return -(1 + n) * eta / (a * a + eta * eta) - n * eta / (b * b + eta * eta)


def dark_polarizability_lp(dark_gap, omega_alpha, thermal: ThermalState, eta):
    """LP -> dark kernel with eta kept only on the (w_alpha - gap) denominator."""
    gap = np.asarray(dark_gap.dark_gap if isinstance(dark_gap, BandPoint) else dark_gap,
                     dtype=float)
    n = bose_einstein(omega_alpha, thermal)
    a = omega_alpha - gap
    return n * a / (a * a + eta * eta) - (1 + n) / (omega_alpha + gap)


def _bath_sum(kernel, x, bath: DiscretizedBath):
    """sum_alpha 2 c_alpha^2 kernel(x, omega_alpha) for an array of x."""
    x = np.asarray(x, dtype=float)
    flat = x.reshape(-1)
    out = np.zeros(flat.shape)
    weights = 2 * bath.c**2
    step = max(1, _BLOCK_ELEMENTS // max(len(bath), 1))
    for i in range(0, flat.size, step):
        xs = flat[i:i + step, None]
        out[i:i + step] = kernel(xs, bath.omega[None, :]) @ weights
    return out.reshape(x.shape)


@dataclass
class RenormalizedBand:
    """Renormalized LP/UP bands on a k grid (arrays indexed by k)."""

    base: BandPoint
    correction_lp: np.ndarray
    correction_up: np.ndarray
    linewidth_lp: np.ndarray
    linewidth_up: np.ndarray
    vg_bare_lp: Optional[np.ndarray] = None
    vg_bare_up: Optional[np.ndarray] = None
    vg_lp: Optional[np.ndarray] = None
    vg_up: Optional[np.ndarray] = None
    meta: dict = field(default_factory=dict)

    @property
    def k_parallel(self):
        return self.base.k_parallel

    @property
    def energy_lp(self):
        return self.base.energy_lp + self.correction_lp

    @property
    def energy_up(self):
        return self.base.energy_up + self.correction_up

    def __len__(self):
        return len(np.atleast_1d(self.base.k_parallel))


class _SelfEnergy:
    """Evaluates Re/Im Sigma for one branch at arbitrary probe energies."""

    def __init__(self, params, bath, thermal, cfg):
        if len(bath) == 0:
            raise ConfigurationError("bath has no modes")
        self.params, self.bath, self.thermal, self.cfg = params, bath, thermal, cfg
        eta = cfg.eta
        self.re = lambda x, w: polarizability(x, 0.0, w, thermal, eta)
        self.im = lambda x, w: polarizability_imag(x, 0.0, w, thermal, eta)
        self.re_dark_lp = lambda gap, w: dark_polarizability_lp(gap, w, thermal, eta)
        if not cfg.dark_only:
            N, M = params.N, params.M
            if M < 1 or N <= M:
                raise ConfigurationError(
                    "full k' sum needs an integer mode grid with N > M >= 1")
            grid = mode_grid(params)
            bp = polariton_point(grid.k_parallel, params)
            self.targets = []
            if "UP" in cfg.include_branches:
                self.targets.append((bp.energy_up, bp.zeta_up))
            if "LP" in cfg.include_branches:
                self.targets.append((bp.energy_lp, bp.hopfield_lp))
            self.dark_weight = (N - M) if "dark" in cfg.include_branches else 0
            self.inv_n = 1.0 / N

    def __call__(self, energy, branch):
        """(Re, Im) of Sigma / zeta_mu^2 at probe energy ``energy`` for ``branch``."""
        omega0 = self.params.omega0
        energy = np.asarray(energy, dtype=float)
        if self.cfg.dark_only:
            if branch == "LP":
                re = _bath_sum(self.re_dark_lp, omega0 - energy, self.bath)
            else:
                re = _bath_sum(self.re, energy - omega0, self.bath)
            im = _bath_sum(self.im, energy - omega0, self.bath)
            return re, im
        re = np.zeros(energy.shape)
        im = np.zeros(energy.shape)
        if self.dark_weight:
            re += self.dark_weight * _bath_sum(self.re, energy - omega0, self.bath)
            im += self.dark_weight * _bath_sum(self.im, energy - omega0, self.bath)
        for e_nu, zeta2 in self.targets:
            x = energy[..., None] - e_nu
            re += _bath_sum(self.re, x, self.bath) @ zeta2
            im += _bath_sum(self.im, x, self.bath) @ zeta2
        return re * self.inv_n, im * self.inv_n


def _solve_branch(sigma, bare, zeta2, branch, cfg):
    re, im = sigma(bare, branch)
    corr = zeta2 * re
    if not cfg.self_consistent:
        return corr, zeta2 * im, 0
    energy = bare + corr
    for it in range(1, cfg.sc_max_iter + 1):
        re, im = sigma(energy, branch)
        target = bare + zeta2 * re
        step = target - energy
        energy = energy + (1 - cfg.sc_damping) * step
        if np.max(np.abs(step)) < cfg.sc_tol:
            break
    else:
        raise ArithmeticError(
            f"self-consistent {branch} band did not converge in {cfg.sc_max_iter} iterations")
    return energy - bare, zeta2 * im, it


def renormalized_band(k, params: ModelParams, bath: DiscretizedBath,
                      thermal: ThermalState, cfg: SelfEnergyConfig = SelfEnergyConfig()):
    """Fan-Migdal corrected LP and UP bands at the points ``k``.

    ``k`` may be a :class:`KGrid` (its theory points are used) or an array of
    k_par values.  With ``cfg.dark_only`` the k' sum is collapsed onto the dark
    manifold; otherwise every mode-grid polariton and the N - M dark states are
    summed with a 1/N weight.
    """
    if isinstance(k, KGrid):
        k = k.theory_points
    k = np.atleast_1d(np.asarray(k, dtype=float))
    if k.size == 0:
        raise ConfigurationError("empty k grid")
    base = polariton_point(k, params)
    sigma = _SelfEnergy(params, bath, thermal, cfg)
    corr_lp, gam_lp, it_lp = _solve_branch(sigma, base.energy_lp, base.hopfield_lp, "LP", cfg)
    corr_up, gam_up, it_up = _solve_branch(sigma, base.energy_up, base.zeta_up, "UP", cfg)
    return RenormalizedBand(
        base=base,
        correction_lp=corr_lp,
        correction_up=corr_up,
        linewidth_lp=gam_lp,
        linewidth_up=gam_up,
        meta={"sc_iterations": (it_lp, it_up)},
    )


def renormalized_vg(band: RenormalizedBand, params: ModelParams, rtol=1e-6):
    """Fill group velocities of ``band`` from a grid derivative of its energies.

    The bare part of dE/dk is taken analytically and only the correction is
    differenced (central inside, one-sided at the ends), so a vanishing
    correction returns the bare velocity exactly.  The grid must be uniform.
    Returns the band for chaining.
    """
    k = np.atleast_1d(band.k_parallel)
    if k.size < 2:
        raise ValueError("need at least two k points for a derivative")
    dk = np.diff(k)
    if np.any(dk <= 0) or np.ptp(dk) > rtol * abs(dk.mean()):
        raise ValueError("k grid must be strictly increasing and uniform")
    band.vg_bare_lp = bare_group_velocity(k, "LP", params)
    band.vg_bare_up = bare_group_velocity(k, "UP", params)
    band.vg_lp = band.vg_bare_lp + np.gradient(band.correction_lp, k) / HBAR
    band.vg_up = band.vg_bare_up + np.gradient(band.correction_up, k) / HBAR
    return band


def renormalized_vg_at(k, params, bath, thermal, cfg: SelfEnergyConfig = SelfEnergyConfig(),
                       branch="LP"):
    """Renormalized group velocity at arbitrary k: analytic bare velocity plus
    a central difference of the correction with half-width ``cfg.derivative_step``."""
    k = np.atleast_1d(np.asarray(k, dtype=float))
    h = cfg.derivative_step
    pts = np.concatenate([k - h, k + h])
    band = renormalized_band(pts, params, bath, thermal, cfg)
    corr = band.correction_lp if branch == "LP" else band.correction_up
    n = k.size
    return bare_group_velocity(k, branch, params) + (corr[n:] - corr[:n]) / (2 * h * HBAR)


def tast_vg(vg_bare, dark_gap, thermal: ThermalState, tast: TastParams):
    """Thermally activated scattering estimate v_g / (1 + G exp(-beta gap))."""
    gap = np.asarray(dark_gap, dtype=float)
    if np.any(gap <= 0):
        raise ValueError("dark gap must be positive")
    return np.asarray(vg_bare) / (1 + tast.G * np.exp(-thermal.beta * gap))


def fit_tast_g(vg_bare, vg_target, dark_gap, thermal: ThermalState) -> float:
    """G for which the TAST expression reproduces ``vg_target`` exactly."""
    return float((vg_bare / vg_target - 1) * np.exp(thermal.beta * dark_gap))
