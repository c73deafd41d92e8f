import json

import numpy as np
import pytest
from hypothesis import given, strategies as st

from pbitsim.model import (IsingModel, dequantize, energies, energy, model_from_json,
                           model_to_json, quantize)
from pbitsim.topology import build_chimera

from conftest import random_cell_model


def test_quantize_examples():
    assert quantize(0.0, 1.0) == 0
    assert quantize(1.0, 1.0) == 127
    assert quantize(-1.0, 1.0) == -127
    assert quantize(2.5, 1.0) == 127
    assert quantize(-7.0, 2.0) == -127


def test_quantize_rounds_half_away_from_zero():
    assert quantize(0.5 / 127, 1.0) == 1
    assert quantize(-0.5 / 127, 1.0) == -1
    assert quantize(1.5 / 127, 1.0) == 2


def test_quantize_rejects_nonfinite():
    with pytest.raises(FloatingPointError):
        quantize(float("nan"), 1.0)
    with pytest.raises(ValueError):
        quantize(0.1, 0.0)


def test_dequantize_examples():
    assert dequantize(127, 1.0) == 1.0
    assert dequantize(-64, 2.0) == pytest.approx(-1.0078740157480315, abs=1e-15)
    assert dequantize(0, 3.3) == 0.0


def test_code_round_trip():
    codes = np.arange(-127, 128)
    for scale in (0.5, 1.0, 2.0, 3.7):
        assert np.array_equal(quantize(dequantize(codes, scale), scale), codes)


@given(st.floats(-1.0, 1.0), st.sampled_from([0.25, 1.0, 2.0]))
def test_quantization_error_bound(x, scale):
    v = x * scale
    assert abs(dequantize(quantize(v, scale), scale) - v) <= scale / 254 + 1e-12


def test_zero_model_energy(cell):
    m = IsingModel(cell)
    for s in np.random.default_rng(0).choice([-1, 1], size=(10, 8)):
        assert energy(m, s) == 0.0


def test_single_ferromagnetic_edge(cell):
    J = np.zeros(cell.num_edges, dtype=int)
    J[0] = 127
    enable = np.zeros(cell.num_edges, bool)
    enable[0] = True
    m = IsingModel(cell, J=J, enable=enable)
    s = np.ones(8)
    assert energy(m, s) == -1.0
    a, b = cell.edges[0]
    s[a] = -1
    assert energy(m, s) == 1.0


def test_energy_matches_brute_force_sum(cell):
    model = random_cell_model(cell, 3)
    rng = np.random.default_rng(1)
    for s in rng.choice([-1, 1], size=(20, 8)):
        e = 0.0
        for (a, b), c, en in zip(cell.edges, model.J, model.enable):
            if en:
                e -= c / 127 * s[a] * s[b]
        for i in range(8):
            e -= model.h[i] / 127 * s[i]
        assert energy(model, s) == pytest.approx(e, abs=1e-12)
    S = rng.choice([-1, 1], size=(5, 8))
    assert np.allclose(energies(model, S), [energy(model, s) for s in S])


def test_energy_shape_error(cell):
    with pytest.raises(ValueError):
        energy(IsingModel(cell), np.ones(7))


def test_global_flip_symmetry(cell):
    model = random_cell_model(cell, 4).replace(h=np.zeros(8, int))
    for s in np.random.default_rng(2).choice([-1, 1], size=(10, 8)):
        assert energy(model, s) == pytest.approx(energy(model, -s), abs=1e-12)


def test_disabled_edge_contributes_nothing(cell):
    base = random_cell_model(cell, 5)
    en = base.enable.copy()
    en[3] = False
    J = base.J.copy()
    states = np.random.default_rng(3).choice([-1, 1], size=(10, 8))
    ref = energies(base.replace(J=np.where(np.arange(16) == 3, 0, J)), states)
    for code in (-127, 55, 127):
        J[3] = code
        assert np.allclose(energies(base.replace(J=J, enable=en), states), ref)


def test_codes_validated(cell):
    with pytest.raises(ValueError):
        IsingModel(cell, J=np.full(16, 128))
    with pytest.raises(ValueError):
        IsingModel(cell, h=np.zeros(5))


def test_json_round_trip():
    topo = build_chimera(2, 3, 4, [(1, 2)])
    rng = np.random.default_rng(9)
    m = IsingModel(topo, rng.integers(-127, 128, topo.num_edges), rng.integers(-127, 128, topo.num_nodes),
                   rng.random(topo.num_edges) < 0.8, 0.7, 1.3)
    doc = json.loads(json.dumps(model_to_json(m)))
    assert isinstance(doc["weight_scale"], str)
    back = model_from_json(doc)
    assert np.array_equal(back.J, m.J) and np.array_equal(back.h, m.h)
    assert np.array_equal(back.enable, m.enable)
    assert back.weight_scale == m.weight_scale and back.bias_scale == m.bias_scale
    assert back.topology.to_dict() == topo.to_dict()
