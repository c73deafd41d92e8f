"""Chip non-idealities: LFSR randomness, DAC resolution, analog mismatch.

Random sources hand the sampler a block of uniform values ``r`` with shape
``(sweeps, n_nodes)``. The ideal source is a continuous uniform on [-1, 1);
the LFSR source reproduces the chip scheme:

* one 32-bit Fibonacci LFSR per unit cell, taps (32, 22, 2, 1), advanced
  by 32 shifts (a fully fresh word) per sweep;
* the word is split into four 8-bit lanes, lane ``k = bits [8k, 8k+8)``;
* vertical node ``k`` reads lane ``k`` as is, horizontal node ``k`` reads
  it bit-reversed;
* the top ``dac_bits`` bits ``u`` map to ``(u - u_mid) / u_mid`` with
  ``u_mid = (2**dac_bits - 1) / 2``, a symmetric grid without a zero level.

Per-cell seeds come from a splitmix64 expansion of the master seed.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from . import _kernels
from .topology import ChimeraTopology, ConfigurationError, Shore

__all__ = [
    "HardwareProfile",
    "IDEAL",
    "LfsrBank",
    "IdealRng",
    "LfsrRng",
    "make_rng",
    "splitmix64",
    "reverse8",
    "byte_to_uniform",
    "rand_for_node",
    "mismatch_tables",
    "apply_mismatch",
]

TAPS_32 = (32, 22, 2, 1)
TAPS_16 = (16, 15, 13, 4)
_MASK64 = (1 << 64) - 1


def splitmix64(seed: int, count: int) -> list:
    """``count`` successive splitmix64 outputs starting from ``seed``."""
    x = seed & _MASK64
    out = []
    for _ in range(count):
        x = (x + 0x9E3779B97F4A7C15) & _MASK64
        z = x
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
        out.append(z ^ (z >> 31))
    return out


def reverse8(u: int) -> int:
    return int(f"{u & 0xFF:08b}"[::-1], 2)


_REV8 = np.array([reverse8(u) for u in range(256)], dtype=np.int64)


def byte_to_uniform(u, dac_bits: int = 8):
    half = ((1 << dac_bits) - 1) / 2.0
    return (np.asarray(u) - half) / half


class LfsrBank:
    """Per-cell Fibonacci LFSRs.

    Parameters
    ----------
    n_cells : int
    seed : int
        Master seed; cell seeds are ``splitmix64(seed)`` truncated to
        ``width`` bits (a zero result is replaced by the next output).
    width : int
        Register width in bits (32 on the chip).
    taps : tuple of int
        Polynomial exponents, e.g. (32, 22, 2, 1) for x^32+x^22+x^2+x+1.
    shifts_per_step : int, optional
        Shifts per :meth:`step`; defaults to ``width``.
    seeds : sequence of int, optional
        Explicit per-cell seeds, overriding ``seed``.
    """

    def __init__(self, n_cells, seed=1, width=32, taps=TAPS_32,
                 shifts_per_step=None, seeds=None):
        if width > 63 or max(taps) != width:
            raise ConfigurationError(f"taps {taps} do not match width {width}")
        self.width = width
        self.taps = tuple(taps)
        self.shifts_per_step = width if shifts_per_step is None else int(shifts_per_step)
        self._tap_shifts = np.array([width - t for t in taps], dtype=np.int64)
        mask = (1 << width) - 1
        if seeds is None:
            stream = iter(splitmix64(seed, 4 * n_cells + 16))
            seeds = []
            for _ in range(n_cells):
                s = next(stream) & mask
                while s == 0:
                    s = next(stream) & mask
                seeds.append(s)
        seeds = [int(s) & mask for s in seeds]
        if len(seeds) != n_cells:
            raise ConfigurationError("one seed per cell required")
        if any(s == 0 for s in seeds):
            raise ConfigurationError("LFSR seed 0 locks the register")
        self.state = np.array(seeds, dtype=np.int64)

    @property
    def n_cells(self) -> int:
        return self.state.shape[0]

    def step(self, cell: int) -> int:
        """Advance one cell by ``shifts_per_step`` shifts; return the new word."""
        s = _kernels.lfsr_shift(self.state[cell], self.width, self._tap_shifts,
                                self.shifts_per_step)
        self.state[cell] = s
        return int(s)

    def shift(self, cell: int) -> int:
        """Single-bit shift, for period checks."""
        s = _kernels.lfsr_shift(self.state[cell], self.width, self._tap_shifts, 1)
        self.state[cell] = s
        return int(s)

    def word(self, cell: int) -> int:
        return int(self.state[cell])


def rand_for_node(bank: LfsrBank, topology: ChimeraTopology, node: int,
                  dac_bits: int = 8) -> float:
    """Uniform value a node reads from its cell's current LFSR word."""
    cell = int(topology.node_cell[node])
    lanes = bank.width // 8
    lane = int(topology.node_index[node]) % lanes
    u = (bank.word(cell) >> (8 * lane)) & 0xFF
    if topology.node_shore[node] == Shore.HORIZONTAL:
        u = reverse8(u)
    return float(byte_to_uniform(u >> (8 - dac_bits), dac_bits))


class IdealRng:
    """Continuous uniform draws on [-1, 1) from a numpy Generator."""

    def __init__(self, n_nodes: int, seed):
        self.n_nodes = n_nodes
        self.generator = np.random.default_rng(seed)

    def draw(self, sweeps: int) -> np.ndarray:
        return self.generator.random((sweeps, self.n_nodes)) * 2.0 - 1.0


class LfsrRng:
    """LFSR-derived draws; one bank step per sweep."""

    def __init__(self, topology: ChimeraTopology, seed: int, dac_bits: int = 8,
                 bank: LfsrBank | None = None):
        if not 1 <= dac_bits <= 8:
            raise ConfigurationError("dac_bits must be in [1, 8]")
        self.topology = topology
        self.dac_bits = dac_bits
        self.bank = bank if bank is not None else LfsrBank(topology.n_cells, seed)
        self.n_nodes = topology.num_nodes

    def draw(self, sweeps: int) -> np.ndarray:
        out = np.empty((sweeps, self.n_nodes))
        t = self.topology
        b = self.bank
        _kernels.lfsr_draw(b.state, b.width, b._tap_shifts, b.shifts_per_step, sweeps,
                           t.node_cell, t.node_shore, t.node_index, b.width // 8,
                           self.dac_bits, _REV8, out)
        return out


@dataclass(frozen=True)
class HardwareProfile:
    """Emulated chip non-idealities.

    gain_sigma is the log-normal spread of each p-bit's effective beta;
    offset_sigma the normal spread of its input offset (field units).
    """

    rng: str = "ideal"
    dac_bits: int = 8
    gain_sigma: float = 0.0
    offset_sigma: float = 0.0
    mismatch_seed: int = 0

    def __post_init__(self):
        if self.rng not in ("ideal", "lfsr"):
            raise ConfigurationError(f"rng must be 'ideal' or 'lfsr', got {self.rng!r}")
        if not 1 <= self.dac_bits <= 8:
            raise ConfigurationError("dac_bits must be in [1, 8]")
        if self.gain_sigma < 0 or self.offset_sigma < 0:
            raise ConfigurationError("mismatch sigmas must be non-negative")

    @property
    def is_matched(self) -> bool:
        return self.gain_sigma == 0 and self.offset_sigma == 0

    def to_dict(self) -> dict:
        return {"rng": self.rng, "dac_bits": self.dac_bits, "gain_sigma": self.gain_sigma,
                "offset_sigma": self.offset_sigma, "mismatch_seed": self.mismatch_seed}


IDEAL = HardwareProfile()


@lru_cache(maxsize=64)
def _tables(gain_sigma, offset_sigma, seed, n):
    rng = np.random.default_rng(seed)
    z_gain = rng.standard_normal(n)
    z_off = rng.standard_normal(n)
    gain = np.exp(gain_sigma * z_gain) if gain_sigma > 0 else np.ones(n)
    offset = offset_sigma * z_off if offset_sigma > 0 else np.zeros(n)
    gain.setflags(write=False)
    offset.setflags(write=False)
    return gain, offset


def mismatch_tables(profile: HardwareProfile, n_nodes: int):
    """Frozen per-node ``(gain, offset)`` arrays for a profile."""
    return _tables(profile.gain_sigma, profile.offset_sigma, profile.mismatch_seed, n_nodes)


def apply_mismatch(profile: HardwareProfile, node: int, beta: float, field: float,
                   n_nodes: int):
    """Effective ``(beta, field)`` seen by one p-bit."""
    gain, offset = mismatch_tables(profile, n_nodes)
    return beta * gain[node], field + offset[node]


def make_rng(profile: HardwareProfile, topology: ChimeraTopology, seed):
    """Random source for one chain. ``seed`` may be an int or SeedSequence."""
    if profile.rng == "ideal":
        return IdealRng(topology.num_nodes, seed)
    if isinstance(seed, np.random.SeedSequence):
        seed = int(seed.generate_state(1, np.uint64)[0])
    return LfsrRng(topology, int(seed), profile.dac_bits)
