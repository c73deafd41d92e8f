"""Teaching a unit cell to be an AND gate.

The inputs A, B sit on vertical nodes 0, 1 and the output on horizontal
node 4; the rest of the cell is hidden. CD-k training moves all mass onto
the four valid truth-table rows. With the output clamped to 1 the
network must answer A = B = 1, i.e. it runs backwards.
"""
import numpy as np

from pbitsim import CdConfig, SamplerConfig, clamped_run, train
from pbitsim.learning import evaluate
from pbitsim.problems import gate_problem
from pbitsim.sampler import pattern_strings

model, target = gate_problem("AND")
trained, trace = train(model, target, CdConfig(seed=0))
print("KL every 150 steps:", np.round(trace.kl[::150], 3))

kl, mass, dist = evaluate(trained, target, 1.0)
for s, p, q in zip(pattern_strings(3), target.probs, dist):
    print(f"  A B Out = {s}: target {p:.2f}  learned {q:.3f}")
print(f"valid mass {mass:.3f}, KL {kl:.4f}")

inv = clamped_run(trained, SamplerConfig(sweeps=50_000, seed=1), {4: 1}, designated=[0, 1])
print("inputs given Out=1:", {k: round(float(v), 3) for k, v in zip(pattern_strings(2), inv.distribution)})
