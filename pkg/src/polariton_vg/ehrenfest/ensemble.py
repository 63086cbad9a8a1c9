"""Trajectory ensembles: seeding, chunked execution and order-fixed reduction."""

from __future__ import annotations

import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from ..greens import ThermalState
from ..model import BathSpec, ModelParams, discretize_bath, mode_grid
from .analysis import WavefrontFit, signed_positions, track_wavefront
from .hamiltonian import SingleExcitationHamiltonian
from .propagate import propagate_trajectory, substeps
from .sampling import sample_wigner, trajectory_rng, trajectory_seed
from .states import NuclearPhaseSpace
from .wavepacket import WavepacketInit, centred_offset, initialize_wavepacket

log = logging.getLogger(__name__)


class EnsembleFailure(RuntimeError):
    pass


@dataclass(frozen=True)
class EnsembleConfig:
    params: ModelParams
    bath: BathSpec
    thermal: ThermalState
    wavepacket: WavepacketInit
    n_traj: int = 100
    base_seed: int = 12345
    dt_nuc: float = 2.5
    dt_el: float = 0.025
    t_max: float = 400.0
    stride: int = 2
    threshold: float = 0.05
    fit_window: tuple = (100.0, 400.0)
    chunk_size: int = 50
    workers: int = 1
    max_fail_fraction: float = 0.05
    centre_modes: bool = True

    def __post_init__(self):
        if self.n_traj < 1 or self.chunk_size < 1 or self.workers < 1:
            raise ValueError("n_traj, chunk_size and workers must be >= 1")
        substeps(self.dt_nuc, self.dt_el)
        if self.t_max < self.dt_nuc:
            raise ValueError("t_max shorter than one nuclear step")

    @property
    def n_steps(self):
        return int(round(self.t_max / self.dt_nuc))

    def resolved_params(self) -> ModelParams:
        """Model with the mode window centred on the wavepacket if requested."""
        if not self.centre_modes:
            return self.params
        k0, _ = self.wavepacket.resolve(self.params)
        return replace(self.params, mode_offset=centred_offset(self.params, k0))


@dataclass
class EnsembleResult:
    times: np.ndarray
    positions: np.ndarray
    density: np.ndarray  # (frames, N), averaged over successful trajectories
    photon_share: np.ndarray
    fit: WavefrontFit
    n_traj: int
    n_failed: int
    seeds: list
    norm_drift: np.ndarray
    energy_drift: np.ndarray
    k0: float
    energy_ref: float
    params: ModelParams = field(repr=False, default=None)

    @property
    def front(self):
        return self.fit.front

    @property
    def vg_fit(self):
        return self.fit.vg

    @property
    def vg_err(self):
        return self.fit.vg_err

    def refit(self, threshold=None, fit_window=None) -> WavefrontFit:
        """Re-run wavefront tracking on the stored averaged density."""
        return track_wavefront(self.density, self.positions, self.times,
                               threshold=self.fit.threshold if threshold is None else threshold,
                               fit_window=self.fit.window if fit_window is None else fit_window)


def _run_chunk(cfg: EnsembleConfig, indices):
    params = cfg.resolved_params()
    bath = discretize_bath(cfg.bath)
    grid = mode_grid(params)
    psi0 = initialize_wavepacket(cfg.wavepacket, grid, params)
    B = len(indices)
    R = np.empty((B, params.N, len(bath)))
    P = np.empty_like(R)
    for j, i in enumerate(indices):
        nuc = sample_wigner(cfg.thermal, bath, params.N, trajectory_rng(cfg.base_seed, i))
        R[j], P[j] = nuc.R, nuc.P
    probe = SingleExcitationHamiltonian(params, bath)
    e_ref = float(probe.electronic_energy(psi0.exciton, psi0.photon, None))
    ham = SingleExcitationHamiltonian(params, bath, e_ref)

    n_frames = cfg.n_steps // cfg.stride + 1
    density = np.zeros((n_frames, params.N))
    photon = np.zeros(n_frames)

    def on_frame(frame, t, C, A, R_, P_):
        rho = np.abs(C) ** 2 + np.abs(ham.photon_field(A)) ** 2
        density[frame] = rho.sum(axis=0)
        photon[frame] = np.sum(np.abs(A) ** 2)

    traj = propagate_trajectory(psi0.batched(B), NuclearPhaseSpace(R, P), params, bath,
                                cfg.dt_nuc, cfg.dt_el, cfg.n_steps, cfg.stride, ham=ham,
                                keep_states=False, on_frame=on_frame, on_failure="mask")
    return {
        "times": traj.times,
        "density": density,
        "photon": photon,
        "failed": traj.failed,
        "norm_drift": traj.norm_drift,
        "energy_drift": traj.energy_drift,
        "energy_ref": e_ref,
    }


def _chunks(n, size):
    return [list(range(s, min(s + size, n))) for s in range(0, n, size)]


def run_ensemble(cfg: EnsembleConfig) -> EnsembleResult:
    """Average ``cfg.n_traj`` Ehrenfest trajectories and fit the LP wavefront.

    Trajectory i draws its bath from SeedSequence(base_seed, spawn_key=(i,)).
    Trajectories run in fixed chunks of ``chunk_size`` and chunk sums are
    reduced in chunk order, so results do not depend on ``workers``.
    """
    chunks = _chunks(cfg.n_traj, cfg.chunk_size)
    if cfg.workers > 1 and len(chunks) > 1:
        with ProcessPoolExecutor(max_workers=cfg.workers) as pool:
            parts = list(pool.map(_run_chunk, [cfg] * len(chunks), chunks))
    else:
        parts = [_run_chunk(cfg, c) for c in chunks]

    failed = np.concatenate([p["failed"] for p in parts])
    n_failed = int(failed.sum())
    if n_failed:
        log.warning("%d of %d trajectories failed", n_failed, cfg.n_traj)
    if n_failed > cfg.max_fail_fraction * cfg.n_traj:
        raise EnsembleFailure(f"{n_failed} of {cfg.n_traj} trajectories failed "
                              f"(limit {cfg.max_fail_fraction:.0%})")
    n_ok = cfg.n_traj - n_failed
    density = parts[0]["density"].copy()
    photon = parts[0]["photon"].copy()
    for p in parts[1:]:
        density += p["density"]
        photon += p["photon"]
    density /= n_ok
    photon /= n_ok

    params = cfg.resolved_params()
    positions = signed_positions(params)
    times = parts[0]["times"]
    fit = track_wavefront(density, positions, times, cfg.threshold, cfg.fit_window)
    ok = ~failed
    return EnsembleResult(
        times=times,
        positions=positions,
        density=density,
        photon_share=photon,
        fit=fit,
        n_traj=cfg.n_traj,
        n_failed=n_failed,
        seeds=[trajectory_seed(cfg.base_seed, i) for i in range(cfg.n_traj)],
        norm_drift=np.concatenate([p["norm_drift"] for p in parts])[ok],
        energy_drift=np.concatenate([p["energy_drift"] for p in parts])[ok],
        k0=cfg.wavepacket.resolve(cfg.params)[0],
        energy_ref=parts[0]["energy_ref"],
        params=params,
    )
