import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from secrecy_lab import capacity as cap
from secrecy_lab._util import binary_entropy as h
from secrecy_lab.channels import FadingSpec, WiretapPair, bsc, dmc
from secrecy_lab.errors import DomainError, ShapeError
from secrecy_lab.metrics import mutual_information


def test_bsc_capacity_examples():
    assert cap.bsc_secrecy_capacity(0.2, 0.2) == 0.0
    assert cap.bsc_secrecy_capacity(0.0, 0.5) == 1.0
    assert cap.bsc_secrecy_capacity(0.1, 0.3) == pytest.approx(0.41229, abs=1e-5)
    assert cap.bsc_secrecy_capacity(0.1, 0.3) == pytest.approx(h(0.3) - h(0.1), abs=1e-15)
    with pytest.raises(DomainError):
        cap.bsc_secrecy_capacity(0.3, 0.1)


def test_gaussian_capacity_examples():
    assert cap.gaussian_secrecy_capacity(5.0, 2.0, 2.0) == 0.0
    assert cap.gaussian_secrecy_capacity(0.0, 1.0, 3.0) == 0.0
    assert cap.gaussian_secrecy_capacity(1e-12, 1.0, 3.0) < 1e-11
    assert cap.gaussian_secrecy_capacity(1, 1, 3) == pytest.approx(0.5 - 0.5 * math.log2(4 / 3), abs=1e-15)
    assert cap.gaussian_secrecy_capacity(1, 1, 3) == pytest.approx(0.29248, abs=1e-5)
    with pytest.raises(DomainError):
        cap.gaussian_secrecy_capacity(1, 3, 1)


def test_gaussian_monotonicity():
    ps = np.linspace(0, 20, 41)
    vals = [cap.gaussian_secrecy_capacity(p, 1.0, 2.5) for p in ps]
    assert all(b >= a for a, b in zip(vals, vals[1:]))
    sms = np.linspace(0.1, 2.5, 25)
    vals = [cap.gaussian_secrecy_capacity(3.0, s, 2.5) for s in sms]
    assert all(b <= a for a, b in zip(vals, vals[1:]))


def test_input_mutual_information_matches_joint():
    rng = np.random.default_rng(2)
    w = dmc(rng.dirichlet(np.ones(4), size=3))
    P = rng.dirichlet(np.ones(3), size=10)
    got = cap.input_mutual_information(w, P)
    expect = [mutual_information(p[:, None] * w.transition) for p in P]
    assert np.allclose(got, expect, atol=1e-12)


def test_simplex_grid():
    g = cap.simplex_grid(3, 0.25)
    assert len(g) == 15
    assert np.allclose(g.sum(axis=1), 1)
    with pytest.raises(DomainError):
        cap.simplex_grid(2, 0.3)


def test_dm_capacity_examples():
    res = cap.dm_secrecy_capacity(WiretapPair(bsc(0.1), bsc(0.3)))
    assert res.value == pytest.approx(0.41229, abs=1e-4)
    assert res.argmax == pytest.approx([0.5, 0.5], abs=1e-3)
    same = cap.dm_secrecy_capacity(WiretapPair(bsc(0.2), bsc(0.2)))
    assert same.value == pytest.approx(0.0, abs=1e-12)
    deaf = cap.dm_secrecy_capacity(WiretapPair(bsc(0.1), bsc(0.5)))
    assert deaf.value == pytest.approx(1 - h(0.1), abs=1e-4)
    with pytest.raises(ShapeError):
        cap.dm_secrecy_capacity(WiretapPair(dmc(np.eye(5)), dmc(np.eye(5))))


def test_dm_capacity_matches_bsc_closed_form():
    rng = np.random.default_rng(31)
    for _ in range(20):
        d1, d2 = sorted(rng.uniform(0, 0.5, size=2))
        got = cap.dm_secrecy_capacity(WiretapPair(bsc(d1), bsc(d2))).value
        assert got == pytest.approx(cap.bsc_secrecy_capacity(d1, d2), abs=1e-4)


def test_dm_capacity_against_fine_grid():
    rng = np.random.default_rng(5)
    pair = WiretapPair(dmc(rng.dirichlet(np.ones(3), size=3)), dmc(rng.dirichlet(np.ones(3), size=3)))
    res = cap.dm_secrecy_capacity(pair)
    fine = cap.simplex_grid(3, 1 / 400)
    oracle = np.max(cap.input_mutual_information(pair.main, fine) - cap.input_mutual_information(pair.eve, fine))
    assert res.value >= oracle - 1e-4
    assert cap.secrecy_rate(pair, res.argmax) == pytest.approx(res.value, abs=1e-12)


def test_fading_no_advantage():
    spec = FadingSpec(((0.5, 1.0, 1.0),), 1.0, 1.0, 2.0)
    alloc = cap.fading_secrecy_capacity(spec)
    assert np.all(alloc.gamma == 0) and alloc.achieved_rate == 0.0


def dense_fading_oracle(spec, points=4001):
    """Brute-force max of the fading rate on an active-constraint grid (2 or 3 states)."""
    p = spec.probabilities
    P = spec.power_budget
    k = len(p)
    if k == 1:
        return cap.fading_rate(spec, [P / p[0]])
    if k == 2:
        g1 = np.linspace(0, P / p[0], points)
        g2 = np.maximum((P - p[0] * g1) / p[1], 0)
        G = np.column_stack([g1, g2])
    else:
        t = np.linspace(0, 1, 301)
        a, b = np.meshgrid(t, t)
        keep = a + b <= 1
        f1, f2 = a[keep], b[keep]
        G = np.column_stack([f1 * P / p[0], f2 * P / p[1], (1 - f1 - f2) * P / p[2]])
    a_m, a_e = spec.snr_main, spec.snr_eve
    vals = (np.log2(1 + G * a_m) - np.log2(1 + G * a_e)) @ p
    best = G[np.argmax(vals)]
    # local refinement around the incumbent: the objective is concave on the good states
    for _ in range(3):
        scale = np.maximum(best, 1e-3 * P) * 0.05
        local = best + np.random.default_rng(0).uniform(-1, 1, size=(20000, k)) * scale
        local = np.clip(local, 0, None)
        local *= P / np.maximum(local @ p, 1e-300)[:, None]
        lv = (np.log2(1 + local * a_m) - np.log2(1 + local * a_e)) @ p
        if lv.max() > vals.max():
            best, vals = local[np.argmax(lv)], lv
    return float(max(vals.max(), 0.0))


def test_fading_single_state_large_power():
    spec = FadingSpec(((3.0, 1.0, 1.0),), 1.0, 1.0, 1e4)
    alloc = cap.fading_secrecy_capacity(spec)
    assert alloc.gamma[0] == pytest.approx(1e4, rel=1e-9)
    assert cap.kkt_residual(spec, alloc) <= 1e-6
    g = np.linspace(0, 1e4, 100001)
    assert alloc.achieved_rate >= np.max(np.log2(1 + 3 * g) - np.log2(1 + g)) - 1e-9


def random_fading(rng, k):
    probs = rng.dirichlet(np.ones(k))
    states = tuple((float(rng.exponential()), float(rng.exponential()), float(q)) for q in probs)
    probs_fixed = np.array([s[2] for s in states])
    states = tuple((a, b, q / probs_fixed.sum()) for a, b, q in states)
    return FadingSpec(states, float(rng.uniform(0.2, 2)), float(rng.uniform(0.2, 2)), float(rng.uniform(0.2, 5)))


def test_fading_matches_grid_oracle():
    rng = np.random.default_rng(2024)
    for i in range(20):
        spec = random_fading(rng, 2 if i % 2 == 0 else 3)
        alloc = cap.fading_secrecy_capacity(spec)
        assert cap.kkt_residual(spec, alloc) <= 1e-6
        assert np.all(alloc.gamma >= 0)
        assert spec.probabilities @ alloc.gamma <= spec.power_budget + 1e-9
        assert alloc.lam * (spec.power_budget - alloc.power_used) <= 1e-8
        oracle = dense_fading_oracle(spec)
        assert alloc.achieved_rate >= oracle - 1e-8
        if oracle > 0:
            assert abs(alloc.achieved_rate - oracle) <= 1e-3 * oracle


def test_fading_eve_absent_is_water_filling():
    spec = FadingSpec(((2.0, 0.0, 0.5), (0.5, 0.0, 0.5)), 1.0, 1.0, 1.0)
    alloc = cap.fading_secrecy_capacity(spec)
    level = 1 / (alloc.lam * math.log(2))
    assert alloc.gamma == pytest.approx(np.maximum(level - 1 / spec.snr_main, 0), abs=1e-9)


def test_compound_examples():
    p = [0.5, 0.5]
    one = [WiretapPair(bsc(0.1), bsc(0.3))]
    assert cap.compound_rate(one, p) == pytest.approx(h(0.3) - h(0.1), abs=1e-12)
    assert cap.compound_rate(one * 4, p) == cap.compound_rate(one, p)
    rng = np.random.default_rng(9)
    pairs = [WiretapPair(bsc(a), bsc(b)) for a, b in rng.uniform(0, 0.5, size=(3, 2))]
    mains = [1 - h(pr.main.transition[0, 1]) for pr in pairs]
    eves = [1 - h(pr.eve.transition[0, 1]) for pr in pairs]
    assert cap.compound_rate(pairs, p) == pytest.approx(min(mains) - max(eves), abs=1e-12)
    with pytest.raises(DomainError):
        cap.compound_rate([], p)


@given(st.integers(0, 2**32 - 1), st.integers(1, 5))
def test_compound_equals_brute_min_max(seed, k):
    rng = np.random.default_rng(seed)
    pairs = [WiretapPair(dmc(rng.dirichlet(np.ones(3), 2)), dmc(rng.dirichlet(np.ones(2), 2))) for _ in range(k)]
    p = rng.dirichlet(np.ones(2))
    mains = [mutual_information(p[:, None] * c.main.transition) for c in pairs]
    eves = [mutual_information(p[:, None] * c.eve.transition) for c in pairs]
    brute = min(mains) - max(eves)
    assert cap.compound_rate(pairs, p) == pytest.approx(brute, abs=1e-12)
    w = rng.dirichlet(np.ones(k))
    assert cap.mixed_rate(pairs, w, p).value == cap.compound_rate(pairs, p)
    # adding a pair never increases the value
    extra = WiretapPair(dmc(rng.dirichlet(np.ones(3), 2)), dmc(rng.dirichlet(np.ones(2), 2)))
    assert cap.compound_rate(pairs + [extra], p) <= cap.compound_rate(pairs, p) + 1e-15


def test_mixed_examples():
    p = [0.5, 0.5]
    same = [WiretapPair(bsc(0.1), bsc(0.3))] * 2
    assert cap.mixed_rate(same, [0.5, 0.5], p).value == pytest.approx(h(0.3) - h(0.1), abs=1e-12)
    pairs = [WiretapPair(bsc(0.1), bsc(0.3)), WiretapPair(bsc(0.3), bsc(0.4))]
    mixed = cap.mixed_rate(pairs, [0.5, 0.5], p)
    assert np.allclose(mixed.averaged.main.transition, [[0.8, 0.2], [0.2, 0.8]], atol=1e-15)
    assert np.allclose(mixed.averaged.eve.transition, [[0.65, 0.35], [0.35, 0.65]], atol=1e-15)
    with pytest.raises(ShapeError):
        cap.mixed_rate(pairs, [1.0], p)
