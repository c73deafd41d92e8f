"""Software emulator of a CMOS p-bit chip: 440 probabilistic bits on a
Chimera fabric, 8-bit weights, LFSR randomness and analog mismatch, with
Gibbs sampling, annealing and hardware-aware contrastive divergence."""

__version__ = "0.1.0"

from .topology import (ChimeraTopology, ConfigurationError, NodeId, Shore, build_chimera,
                       chip_topology, neighbors, two_coloring)
from .model import IsingModel, dequantize, energies, energy, quantize
from .hardware import IDEAL, HardwareProfile, LfsrBank
from .sampler import SamplerConfig, clamped_run, local_field, pbit_update, run_chain, sweep
from .anneal import AnnealSchedule, anneal, beta_at, sk_instance
from .learning import CdConfig, TargetDistribution, kl_divergence, train
from .problems import brute_force, cut_value, gate_problem, gate_targets, maxcut_encode
from .characterize import bias_sweep_characterize
