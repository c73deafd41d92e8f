"""Training through the mismatched chip.

Every p-bit gets its own gain and offset. A model trained on an ideal
emulator and then loaded onto the chip sees those errors; training with
the mismatch in the loop lets the weights absorb them. Gain mismatch
alone barely hurts a gate, offsets hurt much more, so both are shown.
"""
import numpy as np

from pbitsim import IDEAL, CdConfig, HardwareProfile, train
from pbitsim.learning import evaluate
from pbitsim.problems import gate_problem

model, target = gate_problem("FULLADDER")
naive, _ = train(model, target, CdConfig(seed=0), IDEAL)
print(f"ideal-trained on ideal emulator: KL {evaluate(naive, target, 1.0)[0]:.4f}")

for label, kw in (("gain 0.1", dict(gain_sigma=0.1)), ("offset 0.2", dict(offset_sigma=0.2))):
    rows = []
    for chip_seed in range(3):
        chip = HardwareProfile(mismatch_seed=chip_seed, **kw)
        aware, _ = train(model, target, CdConfig(seed=0), chip)
        rows.append((evaluate(naive, target, 1.0, chip, seed=chip_seed)[0],
                     evaluate(aware, target, 1.0, chip, seed=chip_seed)[0]))
    rows = np.array(rows)
    print(f"{label}: naive KL {np.round(rows[:, 0], 4)}  aware KL {np.round(rows[:, 1], 4)}")
