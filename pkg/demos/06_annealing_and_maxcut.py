"""Simulated annealing: a spin glass and a Max-Cut instance.

Raising beta over 1000 sweeps freezes the chain into low-energy states.
On 16 spins we can check against exhaustive search. The same annealer
solves Max-Cut once the graph weights are written as antiferromagnetic
couplings; energy and cut are tied by E = W - 2 cut in code units.
"""
import numpy as np

from pbitsim import AnnealSchedule, SamplerConfig, anneal, build_chimera, chip_topology, sk_instance
from pbitsim.problems import (code_cut_identity, cut_value, ground_state, max_cut, maxcut_encode,
                              random_chimera_graph)

small = build_chimera(1, 2, 4)
glass = sk_instance(small, "pm1", seed=4)
res = anneal(glass, AnnealSchedule(), SamplerConfig(seed=0), restarts=4)
print(f"spin glass: annealed {res.best_energy:.3f}, exhaustive {ground_state(glass)[0]:.3f}")
print("min energy at sweeps 0/100/500/999:", np.round(res.min_traces[0, [0, 100, 500, 999]], 3))

graph = random_chimera_graph(small, seed=9)
mc = maxcut_encode(graph, small)
res = anneal(mc, AnnealSchedule(), SamplerConfig(seed=1), restarts=4)
best, _ = max_cut(graph)
e, w, cut2 = code_cut_identity(mc, res.best_state)
print(f"max-cut: annealed cut {cut_value(graph, res.best_state):.4f}, exhaustive {best:.4f}")
print(f"codes: E={e}, W={w}, 2cut={cut2}, E == W - 2cut: {e == w - cut2}")

# the whole chip, no oracle: compare schedule lengths
big = sk_instance(chip_topology(), "gaussian", seed=0)
for sweeps in (100, 1000, 5000):
    r = anneal(big, AnnealSchedule(sweeps=sweeps), SamplerConfig(schedule="chromatic", seed=0), restarts=2)
    print(f"440-spin glass, {sweeps:5d} sweeps: best energy {r.best_energy:.3f}")
