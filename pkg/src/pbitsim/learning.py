"""Hardware-aware contrastive divergence.

Both phases run through the same :class:`HardwareProfile` the model will be
deployed on, so learned couplings and biases absorb the emulated mismatch.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np
from scipy.sparse import csgraph, coo_matrix

from .hardware import IDEAL, HardwareProfile, make_rng
from .model import CODE_MAX, IsingModel, quantize
from .sampler import SamplerConfig, run_batch, run_chain, pattern_strings
from .topology import ConfigurationError

__all__ = [
    "TargetDistribution",
    "CdConfig",
    "PhaseStats",
    "TrainingTrace",
    "positive_phase",
    "negative_phase",
    "cd_update",
    "train",
    "evaluate",
    "kl_divergence",
    "valid_mass",
]


@dataclass(frozen=True, eq=False)
class TargetDistribution:
    """Probability of each bit pattern over an ordered list of nodes.

    Pattern index ``p`` has the first node as its most significant bit;
    bit 1 means spin +1.
    """

    nodes: tuple
    probs: np.ndarray

    def __post_init__(self):
        p = np.array(self.probs, dtype=float)
        k = len(self.nodes)
        if p.shape != (2 ** k,):
            raise ValueError(f"{k} nodes need {2 ** k} probabilities, got {p.shape}")
        if np.any(p < 0) or abs(p.sum() - 1.0) > 1e-12:
            raise ValueError("probabilities must be non-negative and sum to 1")
        p.setflags(write=False)
        object.__setattr__(self, "nodes", tuple(self.nodes))
        object.__setattr__(self, "probs", p)

    @property
    def k(self) -> int:
        return len(self.nodes)

    def spins(self, patterns) -> np.ndarray:
        idx = np.asarray(patterns, dtype=np.int64)
        bits = (idx[..., None] >> np.arange(self.k - 1, -1, -1)) & 1
        return (2 * bits - 1).astype(np.int8)

    def to_json(self) -> dict:
        return {"nodes": list(self.nodes),
                "probs": {s: float(p) for s, p in zip(pattern_strings(self.k), self.probs) if p > 0}}

    @classmethod
    def from_json(cls, doc: dict) -> "TargetDistribution":
        nodes = tuple(doc["nodes"])
        probs = np.zeros(2 ** len(nodes))
        for s, p in doc["probs"].items():
            if len(s) != len(nodes) or set(s) - {"0", "1"}:
                raise ValueError(f"bad pattern {s!r} for {len(nodes)} nodes")
            probs[int(s, 2)] = p
        return cls(nodes, probs)


@dataclass(frozen=True)
class CdConfig:
    learning_rate: float = 0.05
    cd_k: int = 5
    steps: int = 1500
    batch: int = 32
    beta_train: float = 1.0
    seed: int = 0
    persistent: bool = False
    final_lr_fraction: float = 1.0
    eval_sweeps: int = 1000
    eval_burn_in: int = 50

    def __post_init__(self):
        if self.learning_rate < 0:
            raise ConfigurationError("learning_rate must be non-negative")
        if min(self.cd_k, self.steps, self.batch) < 1:
            raise ConfigurationError("cd_k, steps and batch must be >= 1")
        if not 0 <= self.final_lr_fraction <= 1:
            raise ConfigurationError("final_lr_fraction must be in [0, 1]")
        if not self.beta_train > 0:
            raise ConfigurationError("beta_train must be positive")
        if not 0 <= self.eval_burn_in < self.eval_sweeps:
            raise ConfigurationError("need 0 <= eval_burn_in < eval_sweeps")


@dataclass
class PhaseStats:
    mean: np.ndarray
    pair: np.ndarray
    states: np.ndarray = None


@dataclass
class TrainingTrace:
    kl: list = field(default_factory=list)
    correlation_error: list = field(default_factory=list)
    distributions: list = field(default_factory=list)

    def rows(self):
        return [(i, k, c) for i, (k, c) in enumerate(zip(self.kl, self.correlation_error))]


def kl_divergence(target, histogram) -> float:
    """``KL(target || q)`` with q the histogram smoothed by ``1 / (10 N)``.

    ``target`` may be a :class:`TargetDistribution` or a probability array;
    ``histogram`` holds counts over the same pattern space.
    """
    p = np.asarray(target.probs if isinstance(target, TargetDistribution) else target, dtype=float)
    c = np.asarray(histogram, dtype=float)
    if p.shape != c.shape:
        raise ValueError(f"pattern spaces differ: {p.shape} vs {c.shape}")
    n = c.sum()
    if n <= 0:
        raise ValueError("empty histogram")
    eps = 1.0 / (10.0 * n)
    q = (c / n + eps) / (1.0 + eps * c.size)
    nz = p > 0
    return max(0.0, float(np.sum(p[nz] * np.log(p[nz] / q[nz]))))


def valid_mass(target: TargetDistribution, distribution) -> float:
    """Probability the empirical distribution puts on the target's support."""
    return float(np.asarray(distribution)[target.probs > 0].sum())


def _allocate(probs, batch):
    # largest-remainder split of the batch over the support
    quota = probs * batch
    counts = np.floor(quota).astype(np.int64)
    short = batch - counts.sum()
    if short > 0:
        order = np.argsort(-(quota - counts), kind="stable")
        counts[order[:short]] += 1
    return counts


def _node_indices(model, target):
    return np.array([model.topology._as_flat(x) for x in target.nodes], dtype=np.int64)


class _Streams:
    def __init__(self, model, config, hardware):
        ss = np.random.SeedSequence(config.seed)
        rng_ss, order_ss, init_ss, eval_ss = ss.spawn(4)
        self.rng = make_rng(hardware, model.topology, rng_ss)
        self.order = np.random.default_rng(order_ss)
        self.init = np.random.default_rng(init_ss)
        self.eval_seed = int(eval_ss.generate_state(1)[0])


def positive_phase(model: IsingModel, target: TargetDistribution, config: CdConfig,
                   hardware: HardwareProfile = IDEAL, streams=None) -> PhaseStats:
    """Data-phase statistics with the designated nodes clamped.

    The batch is split over the target's patterns in proportion to their
    probability (zero-probability patterns get no chains). Hidden nodes run
    ``cd_k`` clamped sweeps from random starts; the last sweep is recorded.
    """
    streams = streams or _Streams(model, config, hardware)
    n = model.num_nodes
    vis = _node_indices(model, target)
    counts = _allocate(target.probs, config.batch)
    patterns = np.repeat(np.arange(target.probs.size), counts)
    B = patterns.size
    states = np.where(streams.init.random((B, n)) < 0.5, -1, 1).astype(np.int8)
    states[:, vis] = target.spins(patterns)
    free = np.ones(n, dtype=bool)
    free[vis] = False
    mean, pair, _, _ = run_batch(model, states, free, config.cd_k, config.beta_train,
                                 streams.rng, hardware, order_gen=streams.order)
    return PhaseStats(mean, pair, states)


def negative_phase(model: IsingModel, config: CdConfig, hardware: HardwareProfile = IDEAL,
                   start_states=None, streams=None) -> PhaseStats:
    """Model-phase statistics from ``cd_k`` free sweeps per chain.

    ``start_states`` (usually the positive-phase samples, or the previous
    negative states for persistent chains) are advanced in place.
    """
    streams = streams or _Streams(model, config, hardware)
    n = model.num_nodes
    if start_states is None:
        start_states = np.where(streams.init.random((config.batch, n)) < 0.5, -1, 1).astype(np.int8)
    mean, pair, _, _ = run_batch(model, start_states, np.ones(n, dtype=bool), config.cd_k,
                                 config.beta_train, streams.rng, hardware, order_gen=streams.order)
    return PhaseStats(mean, pair, start_states)


def _delta(model, pos, neg, lr):
    dJ = lr * (pos.pair - neg.pair) * model.enable
    dh = lr * (pos.mean - neg.mean)
    return dJ, dh


def cd_update(model: IsingModel, pos: PhaseStats, neg: PhaseStats, config: CdConfig) -> IsingModel:
    """One CD step on the codes: dequantize, add the update, re-quantize with
    saturation. Disabled couplers are left untouched."""
    dJ, dh = _delta(model, pos, neg, config.learning_rate)
    J = model.J / CODE_MAX * model.weight_scale + dJ
    h = model.bias_values + dh
    return model.replace(J=np.where(model.enable, quantize(J, model.weight_scale), model.J),
                         h=quantize(h, model.bias_scale))


def _check_embeddable(model, target):
    a, b = model.topology.edges[model.enable].T
    n = model.num_nodes
    g = coo_matrix((np.ones(a.size), (a, b)), shape=(n, n))
    _, labels = csgraph.connected_components(g, directed=False)
    vis = _node_indices(model, target)
    if len(set(labels[vis])) > 1:
        raise ConfigurationError("designated nodes are not connected through enabled couplers")


def evaluate(model: IsingModel, target: TargetDistribution, beta: float,
             hardware: HardwareProfile = IDEAL, sweeps: int = 100_000,
             burn_in: int = 1000, seed: int = 0):
    """Free-running histogram over the target nodes.

    Returns ``(kl, valid_mass, distribution)``.
    """
    stats = run_chain(model, SamplerConfig(beta, sweeps=sweeps, burn_in=burn_in, seed=seed),
                      hardware, designated=target.nodes)
    return kl_divergence(target, stats.histogram), valid_mass(target, stats.distribution), stats.distribution


def train(model: IsingModel, target: TargetDistribution, config: CdConfig = CdConfig(),
          hardware: HardwareProfile = IDEAL):
    """Train ``model`` toward ``target`` by CD-k.

    A real-valued copy of the weights accumulates the updates; the chip
    model is its 8-bit quantization, refreshed every step, so updates
    smaller than one code step are not lost. Weights saturate at full
    scale.

    Returns ``(model, trace)``. ``trace.kl[s]`` is measured after step
    ``s`` on a fixed-seed evaluation chain, so it is a deterministic
    function of the model.
    """
    _check_embeddable(model, target)
    streams = _Streams(model, config, hardware)
    enable = model.enable
    J_real = model.J / CODE_MAX * model.weight_scale
    h_real = model.bias_values.copy()
    eval_cfg = SamplerConfig(config.beta_train, sweeps=config.eval_sweeps,
                             burn_in=config.eval_burn_in, seed=streams.eval_seed)
    trace = TrainingTrace()
    persistent = None
    lr = config.learning_rate * np.linspace(1.0, config.final_lr_fraction, config.steps)
    for step in range(config.steps):
        pos = positive_phase(model, target, config, hardware, streams)
        start = pos.states if persistent is None else persistent
        neg = negative_phase(model, config, hardware, start, streams)
        if config.persistent:
            persistent = neg.states
        dJ, dh = _delta(model, pos, neg, lr[step])
        J_real = np.clip(J_real + dJ, -model.weight_scale, model.weight_scale)
        h_real = np.clip(h_real + dh, -model.bias_scale, model.bias_scale)
        model = model.replace(J=np.where(enable, quantize(J_real, model.weight_scale), model.J),
                              h=quantize(h_real, model.bias_scale))
        stats = run_chain(model, eval_cfg, hardware, designated=target.nodes)
        trace.kl.append(kl_divergence(target, stats.histogram))
        trace.correlation_error.append(float(np.mean(np.abs(pos.pair - neg.pair)[enable]))
                                       if enable.any() else 0.0)
        trace.distributions.append(stats.distribution)
    return model, trace


def save_target(target: TargetDistribution, path) -> None:
    with open(path, "w", newline="\n") as f:
        json.dump(target.to_json(), f, indent=1)
        f.write("\n")
