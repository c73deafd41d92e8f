"""Problem encoders and exhaustive oracles.

Graphs are lists of ``(u, v, w)`` triples. Node labels are flat topology ids
unless a ``placement`` mapping label -> flat id is supplied.
"""
from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .learning import TargetDistribution
from .model import IsingModel, quantize
from .topology import ChimeraTopology, build_chimera

__all__ = [
    "EmbeddingError",
    "OracleBudgetError",
    "GATE_ROWS",
    "maxcut_encode",
    "cut_value",
    "gate_targets",
    "enumerate_states",
    "ground_state",
    "boltzmann_distribution",
    "max_cut",
    "brute_force",
    "random_chimera_graph",
    "read_graph",
    "write_graph",
    "code_cut_identity",
    "GATE_LAYOUTS",
    "gate_problem",
]

MAX_ORACLE_SPINS = 24


class EmbeddingError(ValueError):
    """A graph edge has no native coupler on the topology."""


class OracleBudgetError(ValueError):
    """Exhaustive enumeration requested over too many spins."""


# valid rows as bit tuples; column order in the docstring of gate_targets
GATE_ROWS = {
    "AND": [(a, b, a & b) for a in (0, 1) for b in (0, 1)],
    "OR": [(a, b, a | b) for a in (0, 1) for b in (0, 1)],
    "XOR": [(a, b, a ^ b) for a in (0, 1) for b in (0, 1)],
    "FULLADDER": [(a, b, c, (a + b + c) & 1, (a + b + c) >> 1)
                  for a in (0, 1) for b in (0, 1) for c in (0, 1)],
}


def gate_targets(kind: str, nodes=None) -> TargetDistribution:
    """Uniform distribution over the valid truth-table rows of a gate.

    Columns are (A, B, Out) for AND/OR/XOR and (A, B, Cin, Sum, Cout) for
    the full adder. ``nodes`` places the columns on the fabric; it defaults
    to ``0..k-1``.
    """
    key = kind.upper().replace("_", "").replace("-", "")
    if key not in GATE_ROWS:
        raise ValueError(f"unknown gate {kind!r}")
    rows = GATE_ROWS[key]
    k = len(rows[0])
    probs = np.zeros(2 ** k)
    for row in rows:
        probs[int("".join(map(str, row)), 2)] = 1.0 / len(rows)
    return TargetDistribution(tuple(range(k)) if nodes is None else tuple(nodes), probs)


# -- graphs -------------------------------------------------------------------

def _normalize_graph(graph):
    out = []
    for e in graph:
        u, v, w = e
        out.append((u, v, float(w)))
    return out


def maxcut_encode(graph, topology: ChimeraTopology, placement=None,
                  weight_scale: float = 1.0) -> IsingModel:
    """Ising model whose ground states are the maximum cuts of ``graph``.

    Each edge gets ``J = -w`` after scaling so the largest ``|w|`` is full
    scale; couplers not in the graph are disabled and biases are zero.
    """
    graph = _normalize_graph(graph)
    if not graph:
        return IsingModel(topology, enable=np.zeros(topology.num_edges, bool),
                          weight_scale=weight_scale)
    wmax = max(abs(w) for _, _, w in graph)
    if wmax == 0:
        wmax = 1.0
    J = np.zeros(topology.num_edges, dtype=np.int64)
    enable = np.zeros(topology.num_edges, dtype=bool)
    for u, v, w in graph:
        a = placement[u] if placement is not None else u
        b = placement[v] if placement is not None else v
        try:
            k = topology.edge_id(topology._as_flat(a), topology._as_flat(b))
        except (KeyError, IndexError):
            raise EmbeddingError(f"edge ({u}, {v}) has no coupler on the topology") from None
        if enable[k]:
            raise ValueError(f"duplicate edge ({u}, {v})")
        J[k] = quantize(-w / wmax, 1.0)
        enable[k] = True
    return IsingModel(topology, J=J, enable=enable, weight_scale=weight_scale)


def cut_value(graph, state, placement=None) -> float:
    """Total weight of edges whose endpoints carry opposite spins."""
    m = np.asarray(state)
    total = 0.0
    for u, v, w in _normalize_graph(graph):
        a = placement[u] if placement is not None else u
        b = placement[v] if placement is not None else v
        if not (0 <= a < m.shape[-1] and 0 <= b < m.shape[-1]):
            raise ValueError(f"state does not cover edge ({u}, {v})")
        total += w * (1 - m[..., a] * m[..., b]) / 2
    return total


def random_chimera_graph(topology: ChimeraTopology, seed, edge_prob: float = 0.7,
                         weights=(0.1, 1.0)) -> list:
    """Random weighted subgraph of the fabric's couplers."""
    rng = np.random.default_rng(seed)
    keep = rng.random(topology.num_edges) < edge_prob
    w = rng.uniform(*weights, size=topology.num_edges)
    return [(int(a), int(b), float(x)) for (a, b), k, x in zip(topology.edges, keep, w) if k]


def read_graph(path) -> list:
    """Load ``u v w`` lines (``#`` comments allowed) or a JSON document
    ``{"edges": [[u, v, w], ...]}``."""
    text = Path(path).read_text()
    if str(path).endswith(".json"):
        doc = json.loads(text)
        return [(int(u), int(v), float(w)) for u, v, w in doc["edges"]]
    edges = []
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) != 3:
            raise ValueError(f"{path}:{lineno}: expected 'u v w'")
        edges.append((int(parts[0]), int(parts[1]), float(parts[2])))
    return edges


def write_graph(graph, path) -> None:
    with open(path, "w", newline="\n") as f:
        for u, v, w in graph:
            f.write(f"{u} {v} {w!r}\n")


# -- exhaustive oracles -------------------------------------------------------

def enumerate_states(n: int, start: int = 0, stop: int | None = None) -> np.ndarray:
    """Spin vectors for pattern indices ``start..stop``; node 0 is the most
    significant bit and bit 1 is spin +1."""
    stop = 2 ** n if stop is None else stop
    idx = np.arange(start, stop, dtype=np.int64)
    bits = (idx[:, None] >> np.arange(n - 1, -1, -1)) & 1
    return (2 * bits - 1).astype(np.int8)


def _check_budget(n):
    if n > MAX_ORACLE_SPINS:
        raise OracleBudgetError(f"{n} spins exceeds the enumeration budget of {MAX_ORACLE_SPINS}")


def _all_energies(model: IsingModel) -> np.ndarray:
    n = model.num_nodes
    _check_budget(n)
    a, b = model.topology.edges.T
    J, h = model.coupling_values, model.bias_values
    out = np.empty(2 ** n)
    chunk = 1 << 16
    for s in range(0, 2 ** n, chunk):
        m = enumerate_states(n, s, min(2 ** n, s + chunk)).astype(float)
        out[s:s + len(m)] = -(m[:, a] * m[:, b]) @ J - m @ h
    return out


def ground_state(model: IsingModel, atol: float = 1e-9):
    """``(ground_energy, ground_states)`` by exhaustive enumeration."""
    E = _all_energies(model)
    e0 = E.min()
    idx = np.flatnonzero(E <= e0 + atol)
    return float(e0), np.concatenate([enumerate_states(model.num_nodes, i, i + 1) for i in idx])


def boltzmann_distribution(model: IsingModel, beta: float) -> np.ndarray:
    """Exact ``exp(-beta E) / Z`` over all ``2**n`` patterns."""
    E = _all_energies(model)
    logw = -beta * E
    logw -= logw.max()
    p = np.exp(logw)
    return p / p.sum()


def max_cut(graph):
    """``(best_cut, best_assignments)`` for a graph of <= 24 nodes.

    Assignments map each node label to a spin.
    """
    graph = _normalize_graph(graph)
    labels = sorted({u for u, _, _ in graph} | {v for _, v, _ in graph})
    _check_budget(len(labels))
    pos = {x: i for i, x in enumerate(labels)}
    n = len(labels)
    best, best_idx = -np.inf, []
    chunk = 1 << 16
    for s in range(0, 2 ** n, chunk):
        m = enumerate_states(n, s, min(2 ** n, s + chunk)).astype(float)
        cuts = np.zeros(len(m))
        for u, v, w in graph:
            cuts += w * (1 - m[:, pos[u]] * m[:, pos[v]]) / 2
        top = cuts.max()
        if top > best + 1e-12:
            best, best_idx = top, []
        if top >= best - 1e-12:
            best_idx.extend(s + np.flatnonzero(cuts >= best - 1e-12))
    assignments = [dict(zip(labels, enumerate_states(n, i, i + 1)[0].tolist())) for i in best_idx]
    return float(best), assignments


def brute_force(problem, objective: str = "ground_energy", beta: float = 1.0):
    """Dispatch to the exhaustive oracles.

    ``objective`` is ``"ground_energy"`` or ``"boltzmann"`` for an
    :class:`IsingModel`, ``"max_cut"`` for an edge list.
    """
    if objective == "ground_energy":
        return ground_state(problem)
    if objective == "boltzmann":
        return boltzmann_distribution(problem, beta)
    if objective == "max_cut":
        return max_cut(problem)
    raise ValueError(f"unknown objective {objective!r}")


def code_cut_identity(model: IsingModel, state) -> tuple:
    """Integer check of ``E = W - 2 cut`` in code units for a Max-Cut model.

    Returns ``(energy_codes, total_codes, cut_codes)`` where the encoded
    edge weight is ``-J`` and ``energy_codes = -sum J m m``.
    """
    m = np.asarray(state, dtype=np.int64)
    a, b = model.topology.edges[model.enable].T
    w = -model.J[model.enable]
    prod = m[a] * m[b]
    energy_codes = int(np.sum(w * prod))
    total = int(np.sum(w))
    cut2 = int(np.sum(w * (1 - prod)))  # twice the cut, stays integral
    return energy_codes, total, cut2


# fabric layouts for the trained gates: (rows, cols, shore_size), column nodes
GATE_LAYOUTS = {
    "AND": ((1, 1, 4), (0, 1, 4)),
    "OR": ((1, 1, 4), (0, 1, 4)),
    "XOR": ((1, 1, 4), (0, 1, 4)),
    "FULLADDER": ((1, 2, 4), (0, 1, 2, 4, 5)),
}


def gate_problem(kind: str, weight_scale: float = 2.0, bias_scale: float = 2.0):
    """Blank model and target for training a gate on its default layout.

    Inputs sit on the vertical shore of cell (0, 0), outputs on its
    horizontal shore; every other node is hidden.
    """
    key = kind.upper().replace("_", "").replace("-", "")
    if key not in GATE_LAYOUTS:
        raise ValueError(f"unknown gate {kind!r}")
    grid, nodes = GATE_LAYOUTS[key]
    topo = build_chimera(*grid)
    return (IsingModel(topo, weight_scale=weight_scale, bias_scale=bias_scale),
            gate_targets(key, nodes))
