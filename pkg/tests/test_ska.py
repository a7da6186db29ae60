import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from secrecy_lab import ska
from secrecy_lab._util import binary_entropy as h
from secrecy_lab.errors import DomainError, ShapeError
from secrecy_lab.metrics import mutual_information


def _h(p):
    p = np.asarray(p, dtype=float).ravel()
    p = p[p > 0]
    return float(-(p * np.log2(p)).sum())


def _cond_entropy(pxv):
    # H(X|V) from the joint, written out independently of the package
    return _h(pxv) - _h(pxv.sum(axis=0))


def binary_source(d1, d2):
    b1 = np.array([[1 - d1, d1], [d1, 1 - d1]])
    b2 = np.array([[1 - d2, d2], [d2, 1 - d2]])
    return ska.TripartiteSource(0.5 * b1[:, :, None] * b2[:, None, :])


def random_source(rng, nx, ny, nz):
    return ska.TripartiteSource(rng.dirichlet(np.full(nx * ny * nz, 0.5)).reshape(nx, ny, nz))


def test_source_validation():
    with pytest.raises(ShapeError):
        ska.TripartiteSource(np.ones((2, 2)) / 4)
    with pytest.raises(DomainError):
        ska.TripartiteSource(np.ones((2, 2, 2)))


def test_conceptual_identities_random_sources(rng):
    worst = 0.0
    for i in range(500):
        nx = 2 + i % 3
        src = random_source(rng, nx, int(rng.integers(2, 4)), int(rng.integers(2, 4)))
        main, eve = ska.conceptual_rates(src)
        worst = max(
            worst,
            abs(main - (np.log2(nx) - _cond_entropy(src.pxy()))),
            abs(eve - (np.log2(nx) - _cond_entropy(src.pxz()))),
        )
        b = ska.iid_key_bounds(src)
        assert b.lower <= b.upper + 1e-12
    assert worst <= 1e-12


def test_conceptual_channel_is_stochastic(rng):
    src = random_source(rng, 3, 2, 4)
    pair = ska.conceptual_wiretap(src)
    assert pair.main.transition.shape == (3, 2 * 3)
    assert pair.eve.transition.shape == (3, 4 * 3)
    np.testing.assert_allclose(pair.main.transition.sum(axis=1), 1.0, atol=1e-14)


def test_conceptual_channel_entries():
    # brute-force W((y, w)|u) = sum_x p(x, y) 1[w = u + x]
    src = random_source(np.random.default_rng(3), 3, 2, 2)
    pxy = src.pxy()
    w = ska.conceptual_wiretap(src).main.transition
    for u in range(3):
        for y in range(2):
            for ww in range(3):
                expect = sum(pxy[x, y] for x in range(3) if (u + x) % 3 == ww)
                assert w[u, y * 3 + ww] == pytest.approx(expect, abs=1e-15)


def test_public_signal_uniform_and_independent(rng):
    for nx in (2, 3, 4):
        src = random_source(rng, nx, 3, 2)
        joint = ska.public_signal_joint(src)
        expect = np.repeat(src.pmf[..., None] / nx, nx, axis=3)
        np.testing.assert_array_equal(joint, expect)


def test_key_bounds_examples():
    indep = ska.TripartiteSource(np.einsum("xy,z->xyz", np.array([[0.4, 0.1], [0.1, 0.4]]), [0.3, 0.7]))
    b = ska.iid_key_bounds(indep)
    ixy = mutual_information(indep.pxy())
    assert b.lower_branches[0] == pytest.approx(ixy, abs=1e-12)
    assert b.upper == pytest.approx(ixy, abs=1e-12)

    same = np.zeros((2, 2, 2))
    same[0, 0, 0] = same[1, 1, 1] = 0.5
    b = ska.iid_key_bounds(ska.TripartiteSource(same))
    assert b.lower == pytest.approx(0.0, abs=1e-12)
    assert b.upper == pytest.approx(0.0, abs=1e-12)


def test_binary_example_branches():
    b = ska.iid_key_bounds(binary_source(0.1, 0.3))
    assert b.lower_branches[0] == pytest.approx(h(0.3) - h(0.1), abs=1e-12)
    assert b.lower_branches[0] == pytest.approx(0.41229, abs=1e-5)
    # Y and Z are conditionally independent given X, so I(X;Y) - I(Y;Z) = I(X;Y|Z)
    d = 0.1 * 0.7 + 0.9 * 0.3
    assert b.lower_branches[1] == pytest.approx((1 - h(0.1)) - (1 - h(d)), abs=1e-12)
    assert b.lower == pytest.approx(b.upper, abs=1e-12)
    assert b.lower == max(b.lower_branches)


@given(st.integers(0, 2**31 - 1), st.integers(2, 4), st.integers(2, 3), st.integers(2, 3))
def test_swap_xy_swaps_branches(seed, nx, ny, nz):
    src = random_source(np.random.default_rng(seed), nx, ny, nz)
    a = ska.iid_key_bounds(src)
    b = ska.iid_key_bounds(src.swap_xy())
    assert a.lower_branches[0] == pytest.approx(b.lower_branches[1], abs=1e-12)
    assert a.lower_branches[1] == pytest.approx(b.lower_branches[0], abs=1e-12)
    assert a.lower == pytest.approx(b.lower, abs=1e-12)
    assert a.upper == pytest.approx(b.upper, abs=1e-12)


def test_perfect_correlation_gap():
    p = np.zeros((4, 4, 3))
    for x in range(4):
        p[x, x, :] = 0.25 / 3
    main, eve = ska.conceptual_rates(ska.TripartiteSource(p))
    assert main == pytest.approx(2.0, abs=1e-12)
    assert eve == pytest.approx(0.0, abs=1e-12)


def _copy_source(eve_knows):
    p = np.zeros((2, 2, 2))
    for x in range(2):
        if eve_knows:
            p[x, x, x] = 0.5
        else:
            p[x, x, :] = 0.25
    return ska.TripartiteSource(p)


def test_distill_key_private_correlation():
    r = ska.distill_key(_copy_source(False), n=4, rate=0.8, seed=1)
    assert r.error_prob == 0.0
    assert r.secrecy["S2"] <= 1e-12
    assert r.uniformity == 0.0
    assert r.M1 == 10


def test_distill_key_eve_knows_everything():
    r = ska.distill_key(_copy_source(True), n=4, rate=0.5, seed=1)
    assert r.secrecy["S2"] > 0.1
    assert r.uniformity == 0.0


def test_distill_key_zero_rate():
    r = ska.distill_key(binary_source(0.1, 0.3), n=3, rate=0.0, seed=2)
    assert r.M1 == 1
    assert r.error_prob == 0.0
    assert all(r.secrecy[k] == 0.0 for k in ("S1", "S2", "S3", "S4", "S5", "S6"))


def test_distill_key_deterministic():
    a = ska.distill_key(binary_source(0.1, 0.3), n=4, rate=0.3, seed=7)
    b = ska.distill_key(binary_source(0.1, 0.3), n=4, rate=0.3, seed=7)
    assert a.as_dict() == b.as_dict()
    with pytest.raises(DomainError):
        ska.distill_key(binary_source(0.1, 0.3), n=4, rate=-0.1)
