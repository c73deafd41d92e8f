"""On-chip mismatch measurement by bias sweep.

Every coupler is disabled so each p-bit is an isolated coin whose mean is
``tanh(beta_eff * (h + offset))``. Sweeping the bias code and fitting that
curve per node recovers the node's effective gain and offset.
"""
from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from scipy.optimize import curve_fit

from .hardware import IDEAL, HardwareProfile
from .model import CODE_MAX, IsingModel
from .sampler import SamplerConfig, run_chain

__all__ = ["Characterization", "default_codes", "bias_sweep_characterize", "fit_tanh"]

# a curve with no point inside this band carries no slope information
_SATURATED = 0.98


def default_codes(n: int = 33) -> np.ndarray:
    return np.round(np.linspace(-CODE_MAX, CODE_MAX, n)).astype(np.int64)


@dataclass
class Characterization:
    nodes: np.ndarray
    codes: np.ndarray
    bias: np.ndarray           # real bias value per code
    mean_spin: np.ndarray      # (codes, nodes)
    beta_eff: np.ndarray       # nan where the fit failed
    offset: np.ndarray
    fit_ok: np.ndarray
    beta: float

    def gain(self) -> np.ndarray:
        return self.beta_eff / self.beta


def _tanh_curve(h, b, o):
    return np.tanh(b * (h + o))


def fit_tanh(bias, mean, beta0=1.0):
    """Least-squares ``(beta_eff, offset)`` for ``mean = tanh(beta_eff (h + offset))``.

    Returns ``None`` if fewer than two points lie off saturation or the
    optimiser fails.
    """
    bias = np.asarray(bias, float)
    mean = np.asarray(mean, float)
    if np.count_nonzero(np.abs(mean) < _SATURATED) < 2:
        return None
    try:
        (b, o), _ = curve_fit(_tanh_curve, bias, mean, p0=(beta0, 0.0), maxfev=2000)
    except (RuntimeError, ValueError):
        return None
    if not (np.isfinite(b) and np.isfinite(o) and b > 0):
        return None
    return float(b), float(o)


def bias_sweep_characterize(model_template: IsingModel, nodes=None, codes=None,
                            config: SamplerConfig = SamplerConfig(sweeps=10_000),
                            hardware: HardwareProfile = IDEAL, threads: int = 1) -> Characterization:
    """Average spin versus bias code for isolated p-bits, plus tanh fits.

    All requested nodes are measured in parallel: the template's couplers
    are disabled and every requested node gets the same bias code. Each
    code runs ``config.sweeps`` sweeps (after ``config.burn_in``) on its own
    child seed of ``config.seed``.
    """
    topo = model_template.topology
    nodes = np.arange(topo.num_nodes) if nodes is None else np.array(
        [topo._as_flat(x) for x in nodes], dtype=np.int64)
    codes = default_codes() if codes is None else np.asarray(codes, dtype=np.int64)
    base = model_template.replace(enable=np.zeros(topo.num_edges, bool))
    seeds = np.random.SeedSequence(config.seed).spawn(len(codes))
    sweeps = config.sweeps + config.burn_in

    def one(i):
        h = np.zeros(topo.num_nodes, dtype=np.int64)
        h[nodes] = codes[i]
        cfg = SamplerConfig(config.beta, config.schedule, sweeps, config.burn_in, seeds[i])
        return run_chain(base.replace(h=h), cfg, hardware).mean_spin[nodes]

    if nodes.size == 0 or codes.size == 0:
        means = np.zeros((codes.size, nodes.size))
    elif threads > 1:
        with ThreadPoolExecutor(threads) as pool:
            means = np.array(list(pool.map(one, range(len(codes)))))
    else:
        means = np.array([one(i) for i in range(len(codes))])

    bias = codes / CODE_MAX * model_template.bias_scale
    beta_eff = np.full(nodes.size, np.nan)
    offset = np.full(nodes.size, np.nan)
    ok = np.zeros(nodes.size, dtype=bool)
    for j in range(nodes.size):
        fit = fit_tanh(bias, means[:, j], config.beta)
        if fit is not None:
            beta_eff[j], offset[j] = fit
            ok[j] = True
    return Characterization(nodes, codes, bias, means, beta_eff, offset, ok, config.beta)
