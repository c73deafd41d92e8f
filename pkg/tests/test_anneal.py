import math

import numpy as np
import pytest

from pbitsim import AnnealSchedule, IsingModel, SamplerConfig, anneal, beta_at, build_chimera, sk_instance
from pbitsim.anneal import betas
from pbitsim.problems import ground_state
from pbitsim.topology import ConfigurationError


def test_beta_endpoints_exact():
    for shape in ("linear", "geometric"):
        s = AnnealSchedule(0.1, 3.0, 1000, shape)
        assert beta_at(s, 0) == 0.1
        assert beta_at(s, 999) == 3.0


def test_geometric_midpoint():
    s = AnnealSchedule(0.1, 3.0, 3, "geometric")
    assert beta_at(s, 1) == pytest.approx(math.sqrt(0.3), rel=1e-12)
    assert beta_at(AnnealSchedule(1.0, 3.0, 3, "linear"), 1) == pytest.approx(2.0)


def test_schedule_monotone():
    for shape in ("linear", "geometric"):
        b = betas(AnnealSchedule(0.05, 7.0, 5000, shape))
        assert np.all(np.diff(b) >= 0)


def test_beta_at_out_of_range():
    with pytest.raises(IndexError):
        beta_at(AnnealSchedule(sweeps=10), 10)


def test_schedule_validation():
    with pytest.raises(ConfigurationError):
        AnnealSchedule(2.0, 1.0)
    with pytest.raises(ConfigurationError):
        AnnealSchedule(shape="cosine")


def test_ferromagnet_ground_state():
    topo = build_chimera(1, 2, 3)
    model = IsingModel(topo, J=np.full(topo.num_edges, 127))
    r = anneal(model, AnnealSchedule(sweeps=500), SamplerConfig(seed=0), restarts=2)
    assert abs(r.best_state.sum()) == topo.num_nodes
    assert r.best_energy == pytest.approx(-topo.num_edges)


def test_running_min_non_increasing():
    model = sk_instance(build_chimera(2, 2, 4), "gaussian", seed=3)
    r = anneal(model, AnnealSchedule(sweeps=300), SamplerConfig(seed=1), restarts=4)
    assert r.min_traces.shape == (4, 300)
    assert np.all(np.diff(r.min_traces, axis=1) <= 0)
    assert r.best_energy == r.min_traces.min()
    assert r.best_restart == int(np.argmin(r.restart_best))


def test_restarts_independent_of_threads():
    model = sk_instance(build_chimera(2, 2, 4), "pm1", seed=5)
    a = anneal(model, AnnealSchedule(sweeps=200), SamplerConfig(seed=9), restarts=6, threads=1)
    b = anneal(model, AnnealSchedule(sweeps=200), SamplerConfig(seed=9), restarts=6, threads=8)
    assert np.array_equal(a.energy_traces, b.energy_traces)
    assert np.array_equal(a.best_state, b.best_state)


def test_anneal_finds_small_ground_state():
    model = sk_instance(build_chimera(1, 2, 3), "pm1", seed=17)
    e0, _ = ground_state(model)
    assert anneal(model, AnnealSchedule(), SamplerConfig(seed=0)).best_energy == pytest.approx(e0)


def test_sk_statistics():
    topo = build_chimera(7, 8, 4, [(0, 0)])
    pm = sk_instance(topo, "pm1", seed=0)
    assert set(np.unique(pm.J)) == {-127, 127}
    assert np.all(pm.h == 0)
    g = sk_instance(topo, "gaussian", seed=0, sigma=0.3)
    assert abs(np.std(g.coupling_values) - 0.3) < 0.03
    with pytest.raises(ConfigurationError):
        sk_instance(topo, "cauchy")
