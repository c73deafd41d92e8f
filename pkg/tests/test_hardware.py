import numpy as np
import pytest
from scipy.stats import chisquare

from pbitsim import HardwareProfile, LfsrBank, build_chimera
from pbitsim.hardware import (IdealRng, LfsrRng, TAPS_16, TAPS_32, byte_to_uniform, make_rng,
                              mismatch_tables, rand_for_node, reverse8, splitmix64)
from pbitsim.topology import ConfigurationError, NodeId, Shore


def python_lfsr(state, width, taps):
    """Reference single shift, written independently of the kernel."""
    fb = 0
    for t in taps:
        fb ^= (state >> (width - t)) & 1
    return (state >> 1) | (fb << (width - 1))


def test_kernel_matches_reference():
    bank = LfsrBank(1, seeds=[0xACE1ACE1])
    s = 0xACE1ACE1
    for _ in range(500):
        s = python_lfsr(s, 32, TAPS_32)
        assert bank.shift(0) == s


def test_step_is_width_shifts():
    a = LfsrBank(1, seeds=[12345])
    b = LfsrBank(1, seeds=[12345])
    for _ in range(32):
        b.shift(0)
    assert a.step(0) == b.word(0)


def test_16bit_full_period():
    bank = LfsrBank(1, width=16, taps=TAPS_16, seeds=[1])
    seen = set()
    s = bank.word(0)
    for i in range(1, 70000):
        s = bank.shift(0)
        assert s != 0
        if s == 1:
            break
        seen.add(s)
    assert i == 65535
    assert len(seen) == 65534


def _gf2_mulmod(a, b, poly, deg):
    r = 0
    while b:
        if b & 1:
            r ^= a
        b >>= 1
        a <<= 1
        if a >> deg & 1:
            a ^= poly
    return r


def _gf2_powmod(base, e, poly, deg):
    r = 1
    while e:
        if e & 1:
            r = _gf2_mulmod(r, base, poly, deg)
        base = _gf2_mulmod(base, base, poly, deg)
        e >>= 1
    return r


def test_32bit_polynomial_is_primitive():
    # x has order exactly 2^32 - 1 modulo the tap polynomial
    poly = sum(1 << t for t in TAPS_32) | 1
    order = 2 ** 32 - 1
    assert _gf2_powmod(2, order, poly, 32) == 1
    for p in (3, 5, 17, 257, 65537):
        assert order % p == 0
        assert _gf2_powmod(2, order // p, poly, 32) != 1


def test_zero_seed_rejected():
    with pytest.raises(ConfigurationError):
        LfsrBank(2, seeds=[1, 0])


def test_cell_seeds_distinct_and_reproducible():
    a, b = LfsrBank(55, seed=7), LfsrBank(55, seed=7)
    assert np.array_equal(a.state, b.state)
    assert len(set(a.state.tolist())) == 55
    assert not np.array_equal(a.state, LfsrBank(55, seed=8).state)
    assert splitmix64(0, 1)[0] == 0xE220A8397B1DCDAF


def test_reverse8():
    assert reverse8(0b10110010) == 0b01001101 == 77
    assert all(reverse8(reverse8(u)) == u for u in range(256))


def test_lane_layout():
    topo = build_chimera(1, 1, 4)
    bank = LfsrBank(1, seeds=[0x11_B2_33_44])
    assert bank.word(0) == 0x11B23344
    vert = [rand_for_node(bank, topo, topo.flat_id(NodeId(0, 0, Shore.VERTICAL, k))) for k in range(4)]
    hori = [rand_for_node(bank, topo, topo.flat_id(NodeId(0, 0, Shore.HORIZONTAL, k))) for k in range(4)]
    lanes = [0x44, 0x33, 0xB2, 0x11]
    assert vert == pytest.approx(list(byte_to_uniform(np.array(lanes))))
    assert hori[2] == pytest.approx(byte_to_uniform(77))
    assert hori == pytest.approx(list(byte_to_uniform(np.array([reverse8(u) for u in lanes]))))


def test_draw_matches_rand_for_node():
    topo = build_chimera(2, 2, 4, [(1, 0)])
    rng = LfsrRng(topo, seed=3)
    ref = LfsrBank(topo.n_cells, seed=3)
    block = rng.draw(5)
    for t in range(5):
        for c in range(topo.n_cells):
            ref.step(c)
        assert block[t] == pytest.approx([rand_for_node(ref, topo, u) for u in range(topo.num_nodes)])


def test_dac_levels():
    u = np.arange(256)
    vals = byte_to_uniform(u, 8)
    assert len(np.unique(vals)) == 256
    assert vals.min() == -1 and vals.max() == 1
    assert np.all(vals != 0)
    assert len(np.unique(byte_to_uniform(np.arange(8), 3))) == 8


def test_lane_uniformity_chi_square():
    topo = build_chimera(1, 1, 4)
    vals = LfsrRng(topo, seed=11).draw(250_000)[:, :4]  # vertical lanes, 10^6 bytes
    codes = np.rint((vals.ravel() + 1) * 127.5).astype(int)
    counts = np.bincount(codes, minlength=256)
    assert counts.sum() == 10 ** 6
    assert chisquare(counts).pvalue > 0.01


def test_ideal_rng_range():
    r = IdealRng(8, 0).draw(10_000)
    assert r.min() >= -1 and r.max() < 1
    assert abs(r.mean()) < 0.02


def test_make_rng_dispatch():
    topo = build_chimera(1, 1, 4)
    assert isinstance(make_rng(HardwareProfile(), topo, 0), IdealRng)
    lf = make_rng(HardwareProfile(rng="lfsr", dac_bits=4), topo, np.random.SeedSequence(1))
    assert isinstance(lf, LfsrRng) and lf.dac_bits == 4


def test_mismatch_tables_deterministic():
    hw = HardwareProfile(gain_sigma=0.1, offset_sigma=0.05, mismatch_seed=9)
    g1, o1 = mismatch_tables(hw, 440)
    g2, o2 = mismatch_tables(HardwareProfile(gain_sigma=0.1, offset_sigma=0.05, mismatch_seed=9), 440)
    assert np.array_equal(g1, g2) and np.array_equal(o1, o2)
    assert np.all(g1 > 0)
    assert 0.08 < np.std(np.log(g1)) < 0.12
    with pytest.raises(ValueError):
        g1[0] = 2.0


def test_ideal_profile_is_identity():
    g, o = mismatch_tables(HardwareProfile(), 16)
    assert np.all(g == 1) and np.all(o == 0)


def test_profile_validation():
    with pytest.raises(ConfigurationError):
        HardwareProfile(rng="quantum")
    with pytest.raises(ConfigurationError):
        HardwareProfile(dac_bits=9)
    with pytest.raises(ConfigurationError):
        HardwareProfile(gain_sigma=-0.1)
