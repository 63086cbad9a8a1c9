"""Real-space densities and wavefront tracking."""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
from scipy import stats

from ..model import ModelParams, mode_grid
from .states import SingleExcitationState


class BoundaryWarning(UserWarning):
    pass


def signed_positions(params: ModelParams):
    """Site positions folded into [-NL/2, NL/2) so a packet launched at x = 0
    moves through increasing x before wrapping around."""
    n = np.arange(params.N)
    return np.where(n < (params.N + 1) // 2, n, n - params.N) * params.L


def real_space_density(state: SingleExcitationState, params: ModelParams, grid=None):
    """rho(x_n) = |c_n|^2 + |(1/sqrt N) sum_k c_k exp(i k x_n)|^2 over sites."""
    if grid is None:
        grid = mode_grid(params)
    x = np.arange(params.N) * params.L
    field = state.photon @ np.exp(1j * np.outer(grid.k_parallel, x)) / np.sqrt(params.N)
    return np.abs(state.exciton) ** 2 + np.abs(field) ** 2


@dataclass
class WavefrontFit:
    times: np.ndarray
    front: np.ndarray
    vg: float
    vg_err: float
    window: tuple
    boundary_hit: bool
    n_points: int
    threshold: float = 0.05


def front_positions(density, positions, threshold=0.05):
    """Largest position per frame where density >= threshold * frame maximum."""
    if not 0 < threshold < 1:
        raise ValueError("threshold must lie in (0, 1)")
    density = np.atleast_2d(np.asarray(density, dtype=float))
    positions = np.asarray(positions, dtype=float)
    order = np.argsort(positions)
    pos = positions[order]
    rho = density[:, order]
    above = rho >= threshold * rho.max(axis=1, keepdims=True)
    last = pos.size - 1 - np.argmax(above[:, ::-1], axis=1)
    return pos[last]


def track_wavefront(density_series, positions, times, threshold=0.05, fit_window=(100.0, 400.0),
                    edge=None) -> WavefrontFit:
    """Front trace x_f(t) and least-squares slope over ``fit_window``.

    Frames from the first one whose front reaches ``edge`` (default: the last
    site in the forward direction) onward are dropped from the fit and the
    result is flagged.
    """
    times = np.asarray(times, dtype=float)
    density_series = np.atleast_2d(np.asarray(density_series, dtype=float))
    if density_series.shape[0] == 0:
        raise ValueError("empty density series")
    if density_series.shape[0] != times.size:
        raise ValueError("one time per density frame required")
    front = front_positions(density_series, positions, threshold)
    if edge is None:
        edge = np.max(positions)
    t1, t2 = fit_window
    hit = np.flatnonzero(front >= edge)
    boundary = hit.size > 0 and times[hit[0]] <= t2
    if boundary:
        t2 = min(t2, times[hit[0]] - 1e-9)
        warnings.warn(f"wavefront reached the lattice edge at t = {times[hit[0]]} fs; "
                      f"fit window truncated to [{t1}, {t2:.6g}]", BoundaryWarning, stacklevel=2)
    sel = (times >= t1) & (times <= t2)
    if np.count_nonzero(sel) < 3:
        raise ValueError(f"fewer than 3 frames inside fit window [{t1}, {t2}]")
    fit = stats.linregress(times[sel], front[sel])
    return WavefrontFit(times=times, front=front, vg=float(fit.slope), vg_err=float(fit.stderr),
                        window=(t1, t2), boundary_hit=bool(boundary), n_points=int(np.count_nonzero(sel)),
                        threshold=threshold)
