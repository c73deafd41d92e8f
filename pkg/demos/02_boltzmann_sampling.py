"""Gibbs sampling on one unit cell against exact enumeration.

A cell has 8 spins, so the exact Boltzmann distribution over 256 states is
cheap. We compare the ideal random source with the LFSR source at three
temperatures. The 8-bit random values put a floor of 1/256 under every
flip probability; on strongly coupled cells at beta = 2 that floor adds
visible TV distance, and ideal 8-bit-quantized bytes show the same
effect. Fewer DAC bits make it worse at any temperature.
"""
import numpy as np

from pbitsim import HardwareProfile, IsingModel, SamplerConfig, build_chimera, run_chain
from pbitsim.problems import boltzmann_distribution

cell = build_chimera(1, 1, 4)
rng = np.random.default_rng(42)
model = IsingModel(cell, rng.integers(-127, 128, cell.num_edges), rng.integers(-127, 128, 8))

sweeps = 400_000
for beta in (0.5, 1.0, 2.0):
    exact = boltzmann_distribution(model, beta)
    row = [f"beta={beta}"]
    for name, hw in (("ideal", HardwareProfile()), ("lfsr", HardwareProfile(rng="lfsr"))):
        for schedule in ("sequential", "chromatic"):
            s = run_chain(model, SamplerConfig(beta, schedule, sweeps + 1000, 1000, seed=1), hw,
                          designated=range(8))
            row.append(f"{name}/{schedule[:5]} TV={0.5 * np.abs(s.distribution - exact).sum():.4f}")
    print("  ".join(row))

# fewer DAC bits: coarser random values, larger bias in the sampled law
for bits in (8, 6, 4):
    hw = HardwareProfile(rng="lfsr", dac_bits=bits)
    s = run_chain(model, SamplerConfig(1.0, sweeps=sweeps, seed=2), hw, designated=range(8))
    print(f"dac_bits={bits}: TV at beta 1 = {0.5 * np.abs(s.distribution - boltzmann_distribution(model, 1.0)).sum():.4f}")
