import itertools
import json

import numpy as np
import pytest

from pbitsim import IsingModel, brute_force, build_chimera, cut_value, gate_targets, maxcut_encode
from pbitsim.problems import (EmbeddingError, OracleBudgetError, code_cut_identity, enumerate_states,
                              gate_problem, random_chimera_graph, read_graph, write_graph)

from conftest import random_cell_model


def test_enumeration_order():
    s = enumerate_states(3)
    assert s[0].tolist() == [-1, -1, -1]
    assert s[1].tolist() == [-1, -1, 1]
    assert s[4].tolist() == [1, -1, -1]


def test_boltzmann_sums_to_one(cell):
    p = brute_force(random_cell_model(cell, 1), "boltzmann", beta=2.0)
    assert p.shape == (256,)
    assert p.sum() == pytest.approx(1.0, abs=1e-12)


def test_boltzmann_single_edge_closed_form():
    topo = build_chimera(1, 1, 1)
    model = IsingModel(topo, J=[127])
    p = brute_force(model, "boltzmann", beta=0.5)
    z = 2 * math_exp(0.5) + 2 * math_exp(-0.5)
    assert p == pytest.approx([math_exp(0.5) / z, math_exp(-0.5) / z, math_exp(-0.5) / z, math_exp(0.5) / z])


def math_exp(x):
    return float(np.exp(x))


def test_ground_state_by_loop(cell):
    from pbitsim.model import energy
    model = random_cell_model(cell, 2)
    e0, states = brute_force(model)
    loop = min(energy(model, np.array(s)) for s in itertools.product([-1, 1], repeat=8))
    assert e0 == pytest.approx(loop)
    assert all(energy(model, s) == pytest.approx(e0) for s in states)


def test_oracle_budget():
    with pytest.raises(OracleBudgetError):
        brute_force(IsingModel(build_chimera(2, 2, 4)))  # 32 spins


def test_max_cut_triangle_free_square():
    # 4-cycle of unit weights: max cut 4, two assignments
    topo = build_chimera(1, 1, 2)
    g = [(0, 2, 1.0), (2, 1, 1.0), (1, 3, 1.0), (3, 0, 1.0)]
    best, assignments = brute_force(g, "max_cut")
    assert best == 4.0
    assert len(assignments) == 2
    model = maxcut_encode(g, topo)
    e0, states = brute_force(model)
    assert all(cut_value(g, s) == 4.0 for s in states)


def test_maxcut_encode_codes():
    topo = build_chimera(1, 1, 4)
    g = [(0, 4, 2.0), (1, 5, 1.0), (2, 7, 0.5)]
    m = maxcut_encode(g, topo)
    assert m.enable.sum() == 3
    assert m.J[topo.edge_id(0, 4)] == -127
    assert m.J[topo.edge_id(1, 5)] == -64
    assert m.J[topo.edge_id(2, 7)] == -32
    assert np.all(m.h == 0)


def test_embedding_error():
    with pytest.raises(EmbeddingError):
        maxcut_encode([(0, 1, 1.0)], build_chimera(1, 1, 4))  # same shore


def test_cut_identity_all_states():
    topo = build_chimera(1, 2, 4)
    g = random_chimera_graph(topo, seed=4)
    m = maxcut_encode(g, topo)
    for s in enumerate_states(16)[::97]:
        e, w, cut2 = code_cut_identity(m, s)
        assert e == w - cut2


def test_graph_io_round_trip(tmp_path):
    g = random_chimera_graph(build_chimera(2, 2, 4), seed=1)
    write_graph(g, tmp_path / "g.txt")
    assert read_graph(tmp_path / "g.txt") == g
    (tmp_path / "g.json").write_text(json.dumps({"edges": [list(e) for e in g]}))
    assert read_graph(tmp_path / "g.json") == g


def test_gate_targets():
    t = gate_targets("AND")
    assert t.probs.tolist() == [0.25, 0, 0.25, 0, 0.25, 0, 0, 0.25]
    fa = gate_targets("FULLADDER")
    valid = np.flatnonzero(fa.probs)
    assert len(valid) == 8
    for idx in valid:
        a, b, c, s, co = map(int, format(idx, "05b"))
        assert a + b + c == s + 2 * co
    assert gate_targets("XOR").probs[0b011] == 0.25
    with pytest.raises(ValueError):
        gate_targets("NAND3")


def test_gate_problem_layout():
    model, target = gate_problem("full_adder")
    assert model.num_nodes == 16
    assert target.nodes == (0, 1, 2, 4, 5)
