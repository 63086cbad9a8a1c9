"""Mean-field Ehrenfest propagation: velocity Verlet for the bath, RK4 for the TDSE."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from ..model import HBAR, DiscretizedBath, ModelParams
from .hamiltonian import SingleExcitationHamiltonian
from .states import NuclearPhaseSpace, SingleExcitationState

log = logging.getLogger(__name__)


class TrajectoryFailure(ArithmeticError):
    pass


def substeps(dt_nuc, dt_el):
    ratio = dt_nuc / dt_el
    n = int(round(ratio))
    if n < 1 or abs(ratio - n) > 1e-9 * max(1.0, ratio):
        raise ValueError(f"dt_nuc / dt_el must be a positive integer, got {ratio}")
    return n


def rk4_substeps(ham: SingleExcitationHamiltonian, C, A, eps, dt, n):
    """``n`` RK4 steps of i hbar d(psi)/dt = H psi with H frozen (site energies ``eps``)."""
    fac = -1j * dt / HBAR
    for _ in range(n):
        h1c, h1a = ham.apply(C, A, eps)
        k1c, k1a = fac * h1c, fac * h1a
        h2c, h2a = ham.apply(C + 0.5 * k1c, A + 0.5 * k1a, eps)
        k2c, k2a = fac * h2c, fac * h2a
        h3c, h3a = ham.apply(C + 0.5 * k2c, A + 0.5 * k2a, eps)
        k3c, k3a = fac * h3c, fac * h3a
        h4c, h4a = ham.apply(C + k3c, A + k3a, eps)
        C = C + (k1c + 2 * (k2c + k3c) + fac * h4c) / 6
        A = A + (k1a + 2 * (k2a + k3a) + fac * h4a) / 6
    return C, A


@dataclass
class Trajectory:
    """Frames recorded every ``stride`` nuclear steps (frame 0 is t = 0).

    Arrays carry a trailing trajectory axis of length 1 for a single run.
    """

    times: np.ndarray
    norms: np.ndarray
    energies: np.ndarray
    states: list = field(default_factory=list)
    nuclear: Optional[NuclearPhaseSpace] = None
    final: Optional[SingleExcitationState] = None
    failed: Optional[np.ndarray] = None
    energy_ref: float = 0.0

    @property
    def norm_drift(self):
        return np.max(np.abs(self.norms - self.norms[0]), axis=0)

    @property
    def energy_drift(self):
        return np.max(np.abs(self.energies - self.energies[0]), axis=0)


def propagate_trajectory(state: SingleExcitationState, nuclear: NuclearPhaseSpace,
                         params: ModelParams, bath: DiscretizedBath, dt_nuc=2.5, dt_el=0.025,
                         n_steps=100, stride=1, energy_ref=None, keep_states=True,
                         on_frame: Optional[Callable] = None, ham=None,
                         on_failure="raise") -> Trajectory:
    """Propagate one trajectory, or a batch when amplitudes carry a leading axis.

    Each nuclear step: half kick of P, drift of R, ``dt_nuc/dt_el`` RK4
    substeps with H_Q frozen at the half-step positions, new mean-field force,
    second half kick.  ``on_frame(frame, t, C, A, R, P)`` is called at every
    recorded frame.  A non-finite trajectory raises :class:`TrajectoryFailure`,
    or with ``on_failure="mask"`` is frozen at zero and flagged in ``failed``.
    """
    n_sub = substeps(dt_nuc, dt_el)
    if stride < 1:
        raise ValueError("stride must be >= 1")
    single = state.exciton.ndim == 1
    C = np.atleast_2d(state.exciton).astype(complex)
    A = np.atleast_2d(state.photon).astype(complex)
    R = nuclear.R[None] if single else nuclear.R
    P = nuclear.P[None] if single else nuclear.P
    R = np.array(R, dtype=float)
    P = np.array(P, dtype=float)
    B = C.shape[0]
    if C.shape != (B, params.N) or A.shape != (B, params.M):
        raise ValueError(f"state shapes {C.shape}, {A.shape} do not match N={params.N}, M={params.M}")
    if R.shape != (B, params.N, len(bath)):
        raise ValueError(f"nuclear shape {R.shape} does not match {(B, params.N, len(bath))}")

    if ham is None:
        if energy_ref is None:
            probe = SingleExcitationHamiltonian(params, bath)
            energy_ref = float(np.mean(probe.electronic_energy(C, A, None)))
        ham = SingleExcitationHamiltonian(params, bath, energy_ref)
    failed = np.zeros(B, dtype=bool)

    times, norms, energies, states = [], [], [], []

    def record(frame, t):
        n = np.sum(np.abs(C) ** 2, axis=1) + np.sum(np.abs(A) ** 2, axis=1)
        e = ham.electronic_energy(C, A, R) + ham.bath_energy(R, P)
        times.append(t)
        norms.append(n)
        energies.append(e)
        if keep_states:
            states.append(SingleExcitationState(C[0].copy(), A[0].copy()) if single
                          else SingleExcitationState(C.copy(), A.copy()))
        if on_frame is not None:
            on_frame(frame, t, C, A, R, P)

    record(0, 0.0)
    F = ham.forces(C, R)
    for step in range(1, n_steps + 1):
        P += 0.5 * dt_nuc * F
        R_mid = R + 0.5 * dt_nuc * P
        R += dt_nuc * P
        C, A = rk4_substeps(ham, C, A, ham.site_energies(R_mid), dt_el, n_sub)
        F = ham.forces(C, R)
        P += 0.5 * dt_nuc * F

        pop = np.sum(np.abs(C) ** 2, axis=1) + np.sum(np.abs(A) ** 2, axis=1)
        bad = ~np.isfinite(pop) | ~np.isfinite(P[:, 0, 0])
        if np.any(bad & ~failed):
            which = np.flatnonzero(bad & ~failed)
            msg = f"non-finite state at step {step} (t = {step * dt_nuc} fs) in trajectories {which.tolist()}"
            if on_failure == "raise":
                raise TrajectoryFailure(msg)
            log.warning(msg)
            failed |= bad
            C[failed] = 0
            A[failed] = 0
            R[failed] = 0
            P[failed] = 0
            F[failed] = 0
        if step % stride == 0:
            record(step // stride, step * dt_nuc)

    nuc = NuclearPhaseSpace(R[0], P[0]) if single else NuclearPhaseSpace(R, P)
    final = SingleExcitationState(C[0], A[0]) if single else SingleExcitationState(C, A)
    return Trajectory(
        times=np.asarray(times),
        norms=np.asarray(norms),
        energies=np.asarray(energies),
        states=states,
        nuclear=nuc,
        final=final,
        failed=failed,
        energy_ref=ham.energy_ref,
    )
