"""p-bit Gibbs dynamics.

Each p-bit sees the local field ``I_i = sum_j J_ij m_j + h_i`` and sets

    m_i = +1 if tanh(beta * I_i) + r >= 0 else -1,    r ~ U[-1, 1)

so that ``P(m_i = +1) = (1 + tanh(beta I_i)) / 2``, the Gibbs conditional
of ``exp(-beta E)``. Mismatch enters as ``beta -> beta * gain_i`` and
``I_i -> I_i + offset_i``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import _kernels
from .hardware import IDEAL, HardwareProfile, make_rng, mismatch_tables
from .model import IsingModel
from .topology import ConfigurationError, two_coloring

__all__ = [
    "SEQUENTIAL",
    "RANDOM_PERMUTATION",
    "CHROMATIC",
    "SamplerConfig",
    "ChainStats",
    "local_field",
    "pbit_update",
    "sweep",
    "run_chain",
    "clamped_run",
    "run_batch",
    "pattern_strings",
]

SEQUENTIAL = "sequential"
RANDOM_PERMUTATION = "random_permutation"
CHROMATIC = "chromatic"
SCHEDULES = (SEQUENTIAL, RANDOM_PERMUTATION, CHROMATIC)

# bound on the number of random values materialised per kernel call
_CHUNK_VALUES = 1 << 21


@dataclass(frozen=True)
class SamplerConfig:
    beta: float = 1.0
    schedule: str = SEQUENTIAL
    sweeps: int = 1000
    burn_in: int = 0
    seed: int = 0

    def __post_init__(self):
        if not self.beta > 0:
            raise ConfigurationError("beta must be positive")
        if self.schedule not in SCHEDULES:
            raise ConfigurationError(f"unknown schedule {self.schedule!r}; expected one of {SCHEDULES}")
        if self.sweeps < 1:
            raise ConfigurationError("sweeps must be >= 1")
        if not 0 <= self.burn_in < self.sweeps:
            raise ConfigurationError("burn_in must satisfy 0 <= burn_in < sweeps")


@dataclass
class ChainStats:
    """Post-burn-in statistics of one or more chains.

    ``histogram[p]`` counts samples whose designated nodes spell pattern
    ``p``; the first designated node is the most significant bit, bit 1 is
    spin +1.
    """

    designated: np.ndarray
    mean_spin: np.ndarray
    pair_correlation: np.ndarray
    histogram: np.ndarray
    energy_trace: np.ndarray
    final_state: np.ndarray
    best_energy: float
    best_state: np.ndarray
    samples: int = 0
    meta: dict = field(default_factory=dict)

    @property
    def distribution(self) -> np.ndarray:
        return self.histogram / max(self.samples, 1)

    def histogram_dict(self) -> dict:
        return {s: int(c) for s, c in zip(pattern_strings(len(self.designated)), self.histogram)}


def pattern_strings(k: int) -> list:
    return [format(p, f"0{k}b") if k else "" for p in range(2 ** k)]


def local_field(model: IsingModel, state, i: int) -> float:
    """Field on node ``i``: enabled couplings to neighbours plus its bias."""
    indptr, nbr, _ = model.topology.csr
    i = model.topology._as_flat(i)
    s = slice(indptr[i], indptr[i + 1])
    m = np.asarray(state, dtype=float)
    return float(np.dot(model.neighbor_weights[s], m[nbr[s]]) + model.bias_values[i])


def pbit_update(I: float, beta: float, r: float) -> int:
    """Stochastic sign update; ties (exactly zero) resolve to +1."""
    return 1 if np.tanh(beta * I) + r >= 0.0 else -1


def _orders(topology, schedule, sweeps, generator) -> np.ndarray:
    n = topology.num_nodes
    if schedule == SEQUENTIAL:
        return np.arange(n, dtype=np.int64)[None, :]
    if schedule == CHROMATIC:
        colors = two_coloring(topology)
        # same-colour nodes share no edge, so updating a class in sequence
        # is identical to updating it simultaneously
        return np.concatenate([np.flatnonzero(colors == 0), np.flatnonzero(colors == 1)])[None, :]
    return np.argsort(generator.random((sweeps, n)), axis=1).astype(np.int64)


def _streams(seed):
    ss = seed if isinstance(seed, np.random.SeedSequence) else np.random.SeedSequence(seed)
    rng_ss, order_ss, init_ss = ss.spawn(3)
    return rng_ss, np.random.default_rng(order_ss), np.random.default_rng(init_ss)


class _Engine:
    """Kernel arguments for one (model, hardware) pair."""

    def __init__(self, model: IsingModel, hardware: HardwareProfile):
        topo = model.topology
        self.model = model
        self.hardware = hardware
        self.indptr, self.nbr, _ = topo.csr
        self.nbr_w = np.ascontiguousarray(model.neighbor_weights)
        self.h = np.ascontiguousarray(model.bias_values)
        self.gain, self.offset = mismatch_tables(hardware, topo.num_nodes)
        self.edge_a = np.ascontiguousarray(topo.edges[:, 0])
        self.edge_b = np.ascontiguousarray(topo.edges[:, 1])
        self.edge_w = np.ascontiguousarray(model.coupling_values)

    def run(self, states, free, orders, betas, rands, t0, burn_in, designated, acc):
        B, T = rands.shape[:2]
        energy = np.empty((B, T))
        _kernels.gibbs_run(
            self.indptr, self.nbr, self.nbr_w, self.h, self.gain, self.offset, free,
            orders, betas, rands, states, t0, burn_in,
            self.edge_a, self.edge_b, self.edge_w, designated,
            acc["mean"], acc["pair"], acc["hist"], energy, acc["best_e"], acc["best_s"])
        return energy


def _accumulators(n, n_edges, k, B):
    return {
        "mean": np.zeros(n),
        "pair": np.zeros(n_edges),
        "hist": np.zeros(2 ** k, dtype=np.int64),
        "best_e": np.full(B, np.inf),
        "best_s": np.zeros((B, n), dtype=np.int8),
    }


def _prepare(model, clamps, initial_state, init_gen):
    n = model.num_nodes
    if initial_state is None:
        state = np.where(init_gen.random(n) < 0.5, -1, 1).astype(np.int8)
    else:
        state = np.array(initial_state, dtype=np.int8)
        if state.shape != (n,) or not np.all(np.abs(state) == 1):
            raise ValueError("initial state must be a +/-1 vector of length n")
    free = np.ones(n, dtype=np.bool_)
    for node, spin in (clamps or {}).items():
        i = model.topology._as_flat(node)
        if spin not in (-1, 1):
            raise ValueError(f"clamp value for node {node} must be +/-1")
        state[i] = spin
        free[i] = False
    return state, free


def _designated(model, designated):
    if designated is None:
        return np.zeros(0, dtype=np.int64)
    d = np.array([model.topology._as_flat(x) for x in designated], dtype=np.int64)
    if d.size > 24:
        raise ConfigurationError("at most 24 designated nodes")
    return d


def run_chain(model: IsingModel, config: SamplerConfig, hardware: HardwareProfile = IDEAL,
              designated=None, clamps: Optional[dict] = None, initial_state=None,
              betas=None, rng=None) -> ChainStats:
    """Run one Gibbs chain and collect statistics after ``config.burn_in``.

    Parameters
    ----------
    model : IsingModel
    config : SamplerConfig
    hardware : HardwareProfile
        Random source and mismatch applied to every update.
    designated : sequence of node ids, optional
        Nodes whose joint pattern is histogrammed.
    clamps : dict, optional
        ``{node: spin}``; clamped nodes are never updated.
    initial_state : array, optional
        Starting spins; random when omitted.
    betas : array, optional
        Per-sweep inverse temperature overriding ``config.beta`` (annealing).
    rng : random source, optional
        Object with ``draw(sweeps)``; built from the profile and seed if
        omitted.
    """
    topo = model.topology
    n = topo.num_nodes
    rng_ss, order_gen, init_gen = _streams(config.seed)
    source = rng if rng is not None else make_rng(hardware, topo, rng_ss)
    state, free = _prepare(model, clamps, initial_state, init_gen)
    desig = _designated(model, designated)
    T = config.sweeps
    if betas is None:
        betas = np.full(T, float(config.beta))
    else:
        betas = np.asarray(betas, dtype=float)
        if betas.shape != (T,):
            raise ValueError("betas must have one entry per sweep")
    orders = _orders(topo, config.schedule, T, order_gen)
    engine = _Engine(model, hardware)
    acc = _accumulators(n, topo.num_edges, len(desig), 1)
    states = state[None, :].copy()
    energy = np.empty(T)
    chunk = max(1, _CHUNK_VALUES // n)
    for t0 in range(0, T, chunk):
        t1 = min(T, t0 + chunk)
        rands = source.draw(t1 - t0)[None]
        sub_orders = orders if orders.shape[0] == 1 else orders[t0:t1]
        energy[t0:t1] = engine.run(states, free, sub_orders, betas[t0:t1], rands,
                                   t0, config.burn_in, desig, acc)[0]
    count = T - config.burn_in
    return ChainStats(
        designated=desig,
        mean_spin=acc["mean"] / count,
        pair_correlation=acc["pair"] / count,
        histogram=acc["hist"],
        energy_trace=energy,
        final_state=states[0].copy(),
        best_energy=float(acc["best_e"][0]),
        best_state=acc["best_s"][0].copy(),
        samples=count,
        meta={"seed": config.seed, "schedule": config.schedule, "beta": config.beta,
              "sweeps": config.sweeps, "burn_in": config.burn_in},
    )


def clamped_run(model: IsingModel, config: SamplerConfig, clamps: dict,
                hardware: HardwareProfile = IDEAL, designated=None, **kw) -> ChainStats:
    """:func:`run_chain` with the nodes in ``clamps`` held fixed."""
    return run_chain(model, config, hardware, designated=designated, clamps=clamps, **kw)


def sweep(model: IsingModel, state, config: SamplerConfig, rng, hardware: HardwareProfile = IDEAL,
          generator=None) -> np.ndarray:
    """One sweep from ``state``; returns the new state.

    ``rng`` supplies the uniforms, ``generator`` the node permutation when
    the schedule is random.
    """
    topo = model.topology
    state = np.array(state, dtype=np.int8)[None, :]
    gen = generator if generator is not None else np.random.default_rng(config.seed)
    orders = _orders(topo, config.schedule, 1, gen)
    engine = _Engine(model, hardware)
    acc = _accumulators(topo.num_nodes, topo.num_edges, 0, 1)
    engine.run(state, np.ones(topo.num_nodes, dtype=np.bool_), orders,
               np.array([float(config.beta)]), rng.draw(1)[None], 0, 1,
               np.zeros(0, dtype=np.int64), acc)
    return state[0]


def run_batch(model: IsingModel, states: np.ndarray, free: np.ndarray, sweeps: int,
              beta: float, rng, hardware: HardwareProfile = IDEAL, designated=None,
              schedule: str = SEQUENTIAL, order_gen=None, collect_last: int = 1):
    """Advance a batch of chains in place, ``sweeps`` each.

    Chains run back to back on the same random source, like successive
    runs on one chip. Statistics cover the last ``collect_last`` sweeps of
    every chain. Returns ``(mean_spin, pair_correlation, histogram, count)``.
    """
    topo = model.topology
    n = topo.num_nodes
    B = states.shape[0]
    desig = _designated(model, designated)
    rands = rng.draw(B * sweeps).reshape(B, sweeps, n)
    gen = order_gen if order_gen is not None else np.random.default_rng(0)
    orders = _orders(topo, schedule, B * sweeps, gen)
    acc = _accumulators(n, topo.num_edges, len(desig), B)
    _Engine(model, hardware).run(states, np.asarray(free, dtype=np.bool_), orders,
                                 np.full(sweeps, float(beta)), rands, 0,
                                 sweeps - collect_last, desig, acc)
    count = B * collect_last
    return acc["mean"] / count, acc["pair"] / count, acc["hist"], count
