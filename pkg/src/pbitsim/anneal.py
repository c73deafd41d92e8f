"""Simulated annealing on the emulated fabric.

The chip sets temperature through a control voltage; here the inverse
temperature ``beta`` is driven directly along a per-sweep schedule.
"""
from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .hardware import IDEAL, HardwareProfile
from .model import IsingModel, quantize
from .sampler import SamplerConfig, run_chain
from .topology import ChimeraTopology, ConfigurationError

__all__ = ["AnnealSchedule", "AnnealResult", "beta_at", "betas", "anneal", "sk_instance"]


@dataclass(frozen=True)
class AnnealSchedule:
    beta_start: float = 0.1
    beta_end: float = 3.0
    sweeps: int = 1000
    shape: str = "geometric"

    def __post_init__(self):
        if not (0 < self.beta_start <= self.beta_end):
            raise ConfigurationError("need 0 < beta_start <= beta_end")
        if self.sweeps < 1:
            raise ConfigurationError("sweeps must be >= 1")
        if self.shape not in ("linear", "geometric"):
            raise ConfigurationError(f"unknown schedule shape {self.shape!r}")


def beta_at(schedule: AnnealSchedule, t: int) -> float:
    """Inverse temperature at sweep ``t``; both endpoints are exact."""
    if not 0 <= t < schedule.sweeps:
        raise IndexError(f"sweep {t} outside [0, {schedule.sweeps})")
    return float(betas(schedule)[t])


def betas(schedule: AnnealSchedule) -> np.ndarray:
    b0, b1, T = schedule.beta_start, schedule.beta_end, schedule.sweeps
    if T == 1:
        return np.array([b0])
    if schedule.shape == "linear":
        out = np.linspace(b0, b1, T)
    else:
        out = np.exp(np.linspace(np.log(b0), np.log(b1), T))
    out[0], out[-1] = b0, b1
    # log/exp round trips can break monotonicity by an ulp
    return np.maximum.accumulate(out)


@dataclass
class AnnealResult:
    best_state: np.ndarray
    best_energy: float
    best_restart: int
    energy_traces: np.ndarray
    min_traces: np.ndarray
    final_energies: np.ndarray
    final_states: np.ndarray

    @property
    def restart_best(self) -> np.ndarray:
        return self.min_traces[:, -1]


def anneal(model: IsingModel, schedule: AnnealSchedule = AnnealSchedule(),
           config: SamplerConfig = SamplerConfig(), hardware: HardwareProfile = IDEAL,
           restarts: int = 1, threads: int = 1) -> AnnealResult:
    """Anneal from independent random starts and keep the lowest energy seen.

    Restart ``r`` draws from the ``r``-th child of ``config.seed``, so
    results do not depend on ``threads``. Ties go to the lowest restart.
    """
    if restarts < 1:
        raise ConfigurationError("restarts must be >= 1")
    sched = betas(schedule)
    children = np.random.SeedSequence(config.seed).spawn(restarts)
    cfg = SamplerConfig(beta=schedule.beta_end, schedule=config.schedule,
                        sweeps=schedule.sweeps, burn_in=schedule.sweeps - 1)

    def one(r):
        c = SamplerConfig(cfg.beta, cfg.schedule, cfg.sweeps, cfg.burn_in, children[r])
        return run_chain(model, c, hardware, betas=sched)

    if threads > 1 and restarts > 1:
        with ThreadPoolExecutor(threads) as pool:
            runs = list(pool.map(one, range(restarts)))
    else:
        runs = [one(r) for r in range(restarts)]
    traces = np.stack([s.energy_trace for s in runs])
    best_e = np.array([s.best_energy for s in runs])
    r = int(np.argmin(best_e))
    return AnnealResult(
        best_state=runs[r].best_state.astype(np.int64),
        best_energy=float(best_e[r]),
        best_restart=r,
        energy_traces=traces,
        min_traces=np.minimum.accumulate(traces, axis=1),
        final_energies=traces[:, -1],
        final_states=np.stack([s.final_state for s in runs]).astype(np.int64),
    )


def sk_instance(topology: ChimeraTopology, distribution: str = "pm1", seed=0,
                sigma: float = 0.3, weight_scale: float = 1.0) -> IsingModel:
    """Random spin glass on the native couplers, zero bias.

    ``distribution`` is ``"pm1"`` (each coupler +/- full scale) or
    ``"gaussian"`` (normal with std ``sigma`` in units of full scale,
    quantized to 8 bits).
    """
    rng = np.random.default_rng(seed)
    E = topology.num_edges
    if distribution == "pm1":
        J = np.where(rng.random(E) < 0.5, -127, 127)
    elif distribution == "gaussian":
        J = quantize(rng.normal(0.0, sigma, E), 1.0)
    else:
        raise ConfigurationError(f"unknown coupling distribution {distribution!r}")
    return IsingModel(topology, J=J, weight_scale=weight_scale)
