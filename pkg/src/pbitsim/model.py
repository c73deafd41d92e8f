"""Quantized Ising problem held by the chip: couplings, biases, enable bits.

Weights are signed 8-bit codes in the symmetric range [-127, 127]. A code
``c`` stands for the real value ``c / 127 * scale``. Couplings and biases
carry independent scales, one per DAC branch.

Energy convention, used everywhere in the package::

    E(m) = - sum_{(i,j) enabled} J_ij m_i m_j - sum_i h_i m_i
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, replace
from functools import cached_property

import numpy as np

from .topology import ChimeraTopology, build_chimera

__all__ = [
    "CODE_MAX",
    "IsingModel",
    "quantize",
    "dequantize",
    "energy",
    "energies",
    "zero_model",
    "model_to_json",
    "model_from_json",
    "save_model",
    "load_model",
]

CODE_MAX = 127


def quantize(value, scale: float = 1.0):
    """Map a real value to the nearest 8-bit code, saturating at full scale.

    Rounds half away from zero. Works elementwise on arrays.

    >>> quantize(0.3, 1.0)
    38
    >>> quantize(-2.5, 1.0)
    -127
    """
    if not scale > 0:
        raise ValueError(f"scale must be positive, got {scale}")
    x = np.asarray(value, dtype=float)
    if not np.all(np.isfinite(x)):
        raise FloatingPointError("cannot quantize a non-finite value")
    y = np.clip(x / scale, -1.0, 1.0) * CODE_MAX
    code = (np.sign(y) * np.floor(np.abs(y) + 0.5)).astype(np.int64)
    return int(code) if code.ndim == 0 else code


def dequantize(code, scale: float = 1.0):
    """Real value represented by ``code`` at ``scale``."""
    c = np.asarray(code)
    if np.any(np.abs(c) > CODE_MAX):
        raise ValueError("weight code outside [-127, 127]")
    out = c / CODE_MAX * scale
    return float(out) if out.ndim == 0 else out


def _codes(values, size, what):
    arr = np.zeros(size, dtype=np.int64) if values is None else np.array(values, dtype=np.int64)
    if arr.shape != (size,):
        raise ValueError(f"{what} must have shape ({size},), got {arr.shape}")
    if np.any(np.abs(arr) > CODE_MAX):
        raise ValueError(f"{what} codes outside [-127, 127]")
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class IsingModel:
    """Ising problem on a Chimera topology with 8-bit weight codes.

    ``J`` holds one code per topology edge (edge order of
    ``topology.edges``), ``h`` one code per node. Instances are immutable;
    use :meth:`replace` to derive modified copies.
    """

    topology: ChimeraTopology
    J: np.ndarray = None
    h: np.ndarray = None
    enable: np.ndarray = None
    weight_scale: float = 1.0
    bias_scale: float = 1.0

    def __post_init__(self):
        t = self.topology
        object.__setattr__(self, "J", _codes(self.J, t.num_edges, "J"))
        object.__setattr__(self, "h", _codes(self.h, t.num_nodes, "h"))
        en = np.ones(t.num_edges, dtype=bool) if self.enable is None else np.array(self.enable, dtype=bool)
        if en.shape != (t.num_edges,):
            raise ValueError(f"enable must have shape ({t.num_edges},), got {en.shape}")
        en.setflags(write=False)
        object.__setattr__(self, "enable", en)
        if not (self.weight_scale > 0 and self.bias_scale > 0):
            raise ValueError("scales must be positive")
        object.__setattr__(self, "weight_scale", float(self.weight_scale))
        object.__setattr__(self, "bias_scale", float(self.bias_scale))

    @property
    def num_nodes(self) -> int:
        return self.topology.num_nodes

    @cached_property
    def coupling_values(self) -> np.ndarray:
        """Dequantized per-edge couplings, zero where the edge is disabled."""
        return np.where(self.enable, self.J / CODE_MAX * self.weight_scale, 0.0)

    @cached_property
    def bias_values(self) -> np.ndarray:
        return self.h / CODE_MAX * self.bias_scale

    @cached_property
    def neighbor_weights(self) -> np.ndarray:
        """Coupling value for every CSR neighbour slot of the topology."""
        _, _, eid = self.topology.csr
        return self.coupling_values[eid]

    def replace(self, **changes) -> "IsingModel":
        return replace(self, **changes)

    def dense_couplings(self) -> np.ndarray:
        """Symmetric ``(n, n)`` coupling matrix (real units)."""
        n = self.num_nodes
        W = np.zeros((n, n))
        a, b = self.topology.edges.T
        W[a, b] = self.coupling_values
        W[b, a] = self.coupling_values
        return W


def zero_model(topology: ChimeraTopology | None = None, **kw) -> IsingModel:
    return IsingModel(topology if topology is not None else build_chimera(), **kw)


def _check_state(model, state):
    m = np.asarray(state)
    if m.shape[-1] != model.num_nodes:
        raise ValueError(
            f"state length {m.shape[-1]} does not match node count {model.num_nodes}")
    return m


def energy(model: IsingModel, state) -> float:
    """Ising energy of one spin vector, each undirected edge counted once."""
    m = _check_state(model, state).astype(float)
    if m.ndim != 1:
        raise ValueError("energy expects a single state vector; use energies()")
    a, b = model.topology.edges.T
    return float(-np.dot(model.coupling_values, m[a] * m[b]) - np.dot(model.bias_values, m))


def energies(model: IsingModel, states) -> np.ndarray:
    """Vectorized :func:`energy` over a ``(..., n)`` stack of states."""
    m = _check_state(model, states).astype(float)
    a, b = model.topology.edges.T
    return -(m[..., a] * m[..., b]) @ model.coupling_values - m @ model.bias_values


# -- serialization ----------------------------------------------------------

def model_to_json(model: IsingModel) -> dict:
    edges = model.topology.edges
    return {
        "topology": model.topology.to_dict(),
        "weight_scale": repr(model.weight_scale),
        "bias_scale": repr(model.bias_scale),
        "edges": [
            {"node_a": int(a), "node_b": int(b), "code": int(c), "enabled": bool(e)}
            for (a, b), c, e in zip(edges, model.J, model.enable)
        ],
        "nodes": [{"id": i, "bias_code": int(c)} for i, c in enumerate(model.h)],
    }


def model_from_json(doc: dict) -> IsingModel:
    topo = build_chimera(**doc["topology"])
    J = np.zeros(topo.num_edges, dtype=np.int64)
    enable = np.zeros(topo.num_edges, dtype=bool)
    seen = set()
    for e in doc["edges"]:
        k = topo.edge_id(int(e["node_a"]), int(e["node_b"]))
        if k in seen:
            raise ValueError(f"duplicate edge ({e['node_a']}, {e['node_b']})")
        seen.add(k)
        J[k] = int(e["code"])
        enable[k] = bool(e["enabled"])
    h = np.zeros(topo.num_nodes, dtype=np.int64)
    for nd in doc["nodes"]:
        h[topo._as_flat(int(nd["id"]))] = int(nd["bias_code"])
    ws, bs = float(doc["weight_scale"]), float(doc["bias_scale"])
    if not (math.isfinite(ws) and math.isfinite(bs)):
        raise ValueError("scales must be finite")
    return IsingModel(topo, J, h, enable, ws, bs)


def save_model(model: IsingModel, path) -> None:
    with open(path, "w", newline="\n") as f:
        json.dump(model_to_json(model), f, indent=1)
        f.write("\n")


def load_model(path) -> IsingModel:
    with open(path) as f:
        return model_from_json(json.load(f))
