"""Phonon renormalization of exciton-polariton group velocities.

Submodules: ``model`` (cavity, polaritons, bath), ``greens`` (self-energy and
renormalized bands), ``ehrenfest`` (mixed quantum-classical dynamics) and
``cli`` (command-line front end).
"""

__version__ = "0.1.0"

from .model import (  # noqa: E402
    BathSpec,
    ModelParams,
    bare_group_velocity,
    discretize_bath,
    k_at_lp_energy,
    mode_grid,
    polariton_point,
)
from .greens import (  # noqa: E402
    SelfEnergyConfig,
    TastParams,
    ThermalState,
    renormalized_band,
    renormalized_vg,
    renormalized_vg_at,
    tast_vg,
)

__all__ = [
    "BathSpec",
    "ModelParams",
    "SelfEnergyConfig",
    "TastParams",
    "ThermalState",
    "bare_group_velocity",
    "discretize_bath",
    "k_at_lp_energy",
    "mode_grid",
    "polariton_point",
    "renormalized_band",
    "renormalized_vg",
    "renormalized_vg_at",
    "tast_vg",
]
