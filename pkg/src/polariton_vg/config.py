"""Run configuration: TOML schema, sweeps and conversion to module parameters.

Schema (all tables optional, defaults shown by ``polariton-vg config``)::

    [model]       omega0, omega_c, gc, N, M, L, mode_offset      (eV, nm)
    [bath]        lambda, omega_f, n_modes                        (theory bath)
    [thermal]     temperature                                     (K)
    [self_energy] eta, include_branches, dark_only, derivative_step,
                  self_consistent, k_max, n_dense
    [theory]      lp_energies
    [tast]        G
    [wavepacket]  lp_energy | center_k, width_energy | width_k
    [ensemble]    n_traj, base_seed, dt_nuc, dt_el, t_max, snapshot_stride,
                  threshold, fit_window, chunk_size, workers, bath_modes,
                  centre_modes, budget
    [sweep]       axis = "lambda" | "temperature" | "lpEnergy", values
    [output]      directory, format
"""

from __future__ import annotations

import hashlib
import math
from dataclasses import asdict, dataclass, field, fields, replace
from typing import List, Optional

import tomli
import tomli_w

from .ehrenfest.ensemble import EnsembleConfig
from .ehrenfest.wavepacket import WavepacketInit
from .greens import BRANCHES, SelfEnergyConfig, TastParams, ThermalState
from .model import BathSpec, ModelParams

SWEEP_AXES = ("lambda", "temperature", "lpEnergy")


class ConfigError(ValueError):
    pass


@dataclass
class ModelSection:
    omega0: float = 1.96
    omega_c: float = 1.90
    gc: float = 0.120
    N: int = 2000
    M: int = 57
    L: Optional[float] = 30.0
    mode_offset: int = 0


@dataclass
class BathSection:
    lam: float = 0.006
    omega_f: float = 0.006
    n_modes: int = 10000


@dataclass
class ThermalSection:
    temperature: float = 300.0


@dataclass
class SelfEnergySection:
    eta: float = 1e-3
    include_branches: List[str] = field(default_factory=lambda: list(BRANCHES))
    dark_only: bool = True
    derivative_step: float = 1e-6
    self_consistent: bool = False
    k_max: Optional[float] = None
    n_dense: int = 2001


@dataclass
class TheorySection:
    lp_energies: List[float] = field(default_factory=lambda: [1.84, 1.86])


@dataclass
class TastSection:
    G: Optional[float] = 3.0


@dataclass
class WavepacketSection:
    lp_energy: Optional[float] = 1.86
    center_k: Optional[float] = None
    width_energy: Optional[float] = 0.010
    width_k: Optional[float] = None


@dataclass
class EnsembleSection:
    n_traj: int = 100
    base_seed: int = 12345
    dt_nuc: float = 2.5
    dt_el: float = 0.025
    t_max: float = 400.0
    snapshot_stride: int = 2
    threshold: float = 0.05
    fit_window: List[float] = field(default_factory=lambda: [100.0, 400.0])
    chunk_size: int = 50
    workers: int = 1
    bath_modes: int = 35
    centre_modes: bool = True
    budget: float = 2.5e11


@dataclass
class SweepSection:
    axis: Optional[str] = None
    values: List[float] = field(default_factory=list)


@dataclass
class OutputSection:
    directory: Optional[str] = None
    format: str = "csv"


_SECTIONS = {
    "model": ModelSection,
    "bath": BathSection,
    "thermal": ThermalSection,
    "self_energy": SelfEnergySection,
    "theory": TheorySection,
    "tast": TastSection,
    "wavepacket": WavepacketSection,
    "ensemble": EnsembleSection,
    "sweep": SweepSection,
    "output": OutputSection,
}
# TOML key -> dataclass attribute where they differ
_RENAME = {("bath", "lambda"): "lam"}


@dataclass
class RunConfig:
    model: ModelSection = field(default_factory=ModelSection)
    bath: BathSection = field(default_factory=BathSection)
    thermal: ThermalSection = field(default_factory=ThermalSection)
    self_energy: SelfEnergySection = field(default_factory=SelfEnergySection)
    theory: TheorySection = field(default_factory=TheorySection)
    tast: TastSection = field(default_factory=TastSection)
    wavepacket: WavepacketSection = field(default_factory=WavepacketSection)
    ensemble: EnsembleSection = field(default_factory=EnsembleSection)
    sweep: SweepSection = field(default_factory=SweepSection)
    output: OutputSection = field(default_factory=OutputSection)

    # -- serialization -----------------------------------------------------
    @classmethod
    def from_dict(cls, data: dict) -> "RunConfig":
        unknown = set(data) - set(_SECTIONS)
        if unknown:
            raise ConfigError(f"unknown config sections: {sorted(unknown)}")
        kwargs = {}
        for name, section_cls in _SECTIONS.items():
            raw = dict(data.get(name, {}))
            names = {f.name for f in fields(section_cls)}
            values = {}
            for key, val in raw.items():
                attr = _RENAME.get((name, key), key)
                if attr not in names:
                    raise ConfigError(f"unknown key [{name}].{key}")
                values[attr] = val
            kwargs[name] = section_cls(**values)
        cfg = cls(**kwargs)
        cfg.validate()
        return cfg

    def to_dict(self) -> dict:
        out = {}
        inverse = {(s, a): k for (s, k), a in _RENAME.items()}
        for name in _SECTIONS:
            section = asdict(getattr(self, name))
            out[name] = {inverse.get((name, k), k): v for k, v in section.items() if v is not None}
        return out

    @classmethod
    def loads(cls, text: str) -> "RunConfig":
        try:
            return cls.from_dict(tomli.loads(text))
        except tomli.TOMLDecodeError as exc:
            raise ConfigError(f"invalid TOML: {exc}") from exc

    @classmethod
    def load(cls, path) -> "RunConfig":
        with open(path, "rb") as fh:
            try:
                return cls.from_dict(tomli.load(fh))
            except tomli.TOMLDecodeError as exc:
                raise ConfigError(f"{path}: invalid TOML: {exc}") from exc

    def dumps(self) -> str:
        return tomli_w.dumps(self.to_dict())

    def digest(self) -> str:
        """Hash of the physics content; worker count and output location are
        execution details and do not enter."""
        data = self.to_dict()
        data["ensemble"].pop("workers", None)
        data["output"].pop("directory", None)
        return hashlib.sha256(tomli_w.dumps(data).encode()).hexdigest()[:16]

    # -- validation and sweeps ---------------------------------------------
    def validate(self):
        try:
            self.model_params()
            self.bath_spec()
            self.dynamics_bath_spec()
            self.thermal_state()
            self.self_energy_config()
            self.wavepacket_init()
            if self.tast.G is not None:
                TastParams(self.tast.G)
        except (ValueError, TypeError) as exc:
            raise ConfigError(str(exc)) from exc
        if self.sweep.axis is not None:
            if self.sweep.axis not in SWEEP_AXES:
                raise ConfigError(f"sweep axis must be one of {SWEEP_AXES}, got {self.sweep.axis!r}")
            if not self.sweep.values:
                raise ConfigError("sweep values must be non-empty")
            for v in self.sweep.values:
                if not math.isfinite(v):
                    raise ConfigError("sweep values must be finite")
                if self.sweep.axis != "lambda" and v <= 0:
                    raise ConfigError(f"{self.sweep.axis} sweep values must be positive")
                if self.sweep.axis == "lambda" and v < 0:
                    raise ConfigError("lambda sweep values must be non-negative")
        if len(self.ensemble.fit_window) != 2 or self.ensemble.fit_window[0] >= self.ensemble.fit_window[1]:
            raise ConfigError("fit_window must be [t1, t2] with t1 < t2")
        if not 0 < self.ensemble.threshold < 1:
            raise ConfigError("threshold must lie in (0, 1)")
        if self.output.format != "csv":
            raise ConfigError("only csv output is supported")

    def sweep_points(self):
        """(value, config) pairs; a single (None, self) without a sweep."""
        if self.sweep.axis is None:
            return [(None, self)]
        return [(v, self.at(v)) for v in self.sweep.values]

    def at(self, value) -> "RunConfig":
        axis = self.sweep.axis
        cfg = RunConfig.from_dict(self.to_dict())
        if axis == "lambda":
            cfg.bath = replace(cfg.bath, lam=float(value))
        elif axis == "temperature":
            cfg.thermal = replace(cfg.thermal, temperature=float(value))
        elif axis == "lpEnergy":
            cfg.wavepacket = replace(cfg.wavepacket, lp_energy=float(value), center_k=None)
            cfg.theory = replace(cfg.theory, lp_energies=[float(value)])
        else:
            raise ConfigError("no sweep axis configured")
        cfg.validate()
        return cfg

    # -- conversion to module parameters -----------------------------------
    def model_params(self) -> ModelParams:
        return ModelParams(**asdict(self.model))

    def bath_spec(self) -> BathSpec:
        return BathSpec(self.bath.lam, self.bath.omega_f, self.bath.n_modes)

    def dynamics_bath_spec(self) -> BathSpec:
        return BathSpec(self.bath.lam, self.bath.omega_f, self.ensemble.bath_modes)

    def thermal_state(self) -> ThermalState:
        return ThermalState(self.thermal.temperature)

    def self_energy_config(self, dark_only=None) -> SelfEnergyConfig:
        s = self.self_energy
        return SelfEnergyConfig(
            eta=s.eta,
            include_branches=frozenset(s.include_branches),
            dark_only=s.dark_only if dark_only is None else dark_only,
            derivative_step=s.derivative_step,
            self_consistent=s.self_consistent,
        )

    def wavepacket_init(self) -> WavepacketInit:
        w = self.wavepacket
        return WavepacketInit(center_k=w.center_k, lp_energy=w.lp_energy,
                              width_k=w.width_k, width_energy=None if w.width_k is not None else w.width_energy)

    def ensemble_config(self) -> EnsembleConfig:
        e = self.ensemble
        return EnsembleConfig(
            params=self.model_params(),
            bath=self.dynamics_bath_spec(),
            thermal=self.thermal_state(),
            wavepacket=self.wavepacket_init(),
            n_traj=e.n_traj,
            base_seed=e.base_seed,
            dt_nuc=e.dt_nuc,
            dt_el=e.dt_el,
            t_max=e.t_max,
            stride=e.snapshot_stride,
            threshold=e.threshold,
            fit_window=tuple(e.fit_window),
            chunk_size=e.chunk_size,
            workers=e.workers,
            centre_modes=e.centre_modes,
        )

    def dynamics_cost(self) -> float:
        e = self.ensemble
        n_steps = e.t_max / e.dt_nuc
        return self.model.N * max(self.model.M, 1) * n_steps * (e.dt_nuc / e.dt_el) * e.n_traj
