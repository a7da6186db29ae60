import json
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from secrecy_lab import channels as ch
from secrecy_lab._util import all_sequences
from secrecy_lab.errors import DomainError, NumericalAccuracyError, ShapeError


def test_bsc_examples():
    assert np.array_equal(ch.bsc(0).transition, np.eye(2))
    assert np.all(ch.bsc(0.5).transition == 0.5)
    assert np.allclose(ch.bsc(0.1).transition, [[0.9, 0.1], [0.1, 0.9]], atol=0)


@pytest.mark.parametrize("delta", [-0.01, 0.51, 1.0])
def test_bsc_rejects_out_of_range(delta):
    with pytest.raises(DomainError):
        ch.bsc(delta)


def test_dmc_validation():
    with pytest.raises(DomainError):
        ch.dmc([[0.5, 0.6], [0.5, 0.5]])
    with pytest.raises(DomainError):
        ch.dmc([[1.2, -0.2]])
    with pytest.raises(ShapeError):
        ch.dmc([0.5, 0.5])


def test_channel_is_immutable():
    w = ch.bsc(0.2)
    with pytest.raises(ValueError):
        w.transition[0, 0] = 1.0


def test_extend_examples():
    assert ch.extend(ch.bsc(0.1), 2).prob((0, 0), (0, 1)) == pytest.approx(0.09, abs=1e-15)
    assert ch.extend(ch.bsc(0.25), 3).prob((0, 0, 0), (1, 1, 1)) == 0.015625
    w = ch.dmc([[0.2, 0.3, 0.5], [0.6, 0.4, 0.0]])
    one = ch.extend(w, 1)
    for x in range(2):
        assert np.array_equal(one.row([x]), w.transition[x])


def test_extend_rejects_zero():
    with pytest.raises(DomainError):
        ch.extend(ch.bsc(0.1), 0)


def test_extend_row_matches_pointwise_product():
    w = ch.dmc([[0.2, 0.3, 0.5], [0.6, 0.4, 0.0], [0.1, 0.1, 0.8]])
    block = ch.extend(w, 3)
    zs = all_sequences(3, 3)
    for x in [(0, 1, 2), (2, 2, 0)]:
        row = block.row(x)
        naive = [math.prod(w.transition[a, b] for a, b in zip(x, z)) for z in zs]
        assert np.allclose(row, naive, rtol=0, atol=1e-15)


@given(
    st.integers(2, 3), st.integers(2, 3), st.integers(1, 3), st.integers(0, 2**32 - 1)
)
def test_block_rows_sum_to_one(nx, nz, n, seed):
    rng = np.random.default_rng(seed)
    w = ch.dmc(rng.dirichlet(np.ones(nz), size=nx))
    rows = ch.likelihood_rows(w, all_sequences(nx, n))
    assert np.allclose(rows.sum(axis=1), 1.0, atol=1e-10)


@given(st.integers(0, 2**32 - 1))
def test_output_of_product_input_is_product(seed):
    rng = np.random.default_rng(seed)
    w = ch.dmc(rng.dirichlet(np.ones(3), size=2))
    p1, p2 = rng.dirichlet(np.ones(2)), rng.dirichlet(np.ones(2))
    joint_in = np.kron(p1, p2)
    out = joint_in @ ch.likelihood_rows(w, all_sequences(2, 2))
    expect = np.kron(ch.output_distribution(w, p1), ch.output_distribution(w, p2))
    assert np.allclose(out, expect, atol=1e-12)


def test_output_distribution_examples():
    assert np.allclose(ch.output_distribution(ch.bsc(0.37), [0.5, 0.5]), [0.5, 0.5])
    assert np.allclose(ch.output_distribution(ch.bsc(0.1), [1, 0]), [0.9, 0.1])
    assert np.allclose(ch.output_distribution(ch.bsc(0.3), [0.25, 0.75]), [0.4, 0.6], atol=1e-15)
    with pytest.raises(ShapeError):
        ch.output_distribution(ch.bsc(0.1), [1.0, 0.0, 0.0])


def awgn_closed_form(sigma):
    # |p(z|+1) - p(z)| = |p(z|+1) - p(z|-1)| / 2 integrates to 2 Phi(1/sigma) - 1
    return math.erf(1.0 / (sigma * math.sqrt(2.0)))


@pytest.mark.parametrize("sigma", [0.3, 1.0, 2.0, 8.0, 64.0])
def test_awgn_matches_closed_form(sigma):
    got = ch.bpsk_awgn_variational(ch.GaussianSpec(sigma**2))
    assert got == pytest.approx(awgn_closed_form(sigma), abs=1e-9)


def test_awgn_limits():
    assert ch.bpsk_awgn_variational(ch.GaussianSpec(1e12)) <= 1e-6
    assert ch.bpsk_awgn_variational(ch.GaussianSpec(1e-4)) == pytest.approx(1.0, abs=1e-9)


def test_awgn_monotone_in_sigma():
    vals = [ch.bpsk_awgn_variational(ch.GaussianSpec(s**2)) for s in (1, 2, 4, 8, 16, 32, 64)]
    assert all(b <= a for a, b in zip(vals, vals[1:]))


def test_awgn_report_metadata():
    rep = ch.bpsk_awgn_report(ch.GaussianSpec(4.0))
    assert rep.interval == (-21.0, 21.0)
    assert rep.tail_mass_bound < 1e-12
    assert rep.abs_error <= 1e-8


def test_awgn_rejects_other_constellations():
    with pytest.raises(DomainError):
        ch.bpsk_awgn_variational(ch.GaussianSpec(1.0, (0.0, 1.0)))


def test_awgn_accuracy_error(monkeypatch):
    def noisy_quad(*args, **kwargs):
        return 0.1, 1e-3

    monkeypatch.setattr(ch.integrate, "quad", noisy_quad)
    with pytest.raises(NumericalAccuracyError):
        ch.bpsk_awgn_variational(ch.GaussianSpec(1.0))


def test_gaussian_and_fading_validation():
    with pytest.raises(DomainError):
        ch.GaussianSpec(0.0)
    with pytest.raises(DomainError):
        ch.GaussianSpec(1.0, (1.0, 1.0))
    with pytest.raises(DomainError):
        ch.FadingSpec(((1, 1, 0.5), (1, 1, 0.4)), 1, 1, 1)
    with pytest.raises(DomainError):
        ch.FadingSpec(((1, 1, 1.0),), 1, 1, 0)


def test_json_roundtrip_is_bit_exact(rng):
    w = ch.dmc(rng.dirichlet(np.ones(4), size=3))
    text = json.dumps(ch.channel_to_spec(w))
    back = ch.channel_from_spec(text)
    assert np.array_equal(back.transition, w.transition)
    assert ch.channel_from_spec({"kind": "bsc", "delta": 0.1}) == ch.bsc(0.1)
    f = ch.FadingSpec(((1 / 3, 0.7, 0.25), (2.0, 0.1, 0.75)), 1.5, 2 / 3, 1.0)
    assert ch.channel_from_spec(json.dumps(ch.fading_to_spec(f))) == f
    with pytest.raises(DomainError):
        ch.channel_from_spec({"kind": "awgn"})


def test_wiretap_pair_shapes():
    with pytest.raises(ShapeError):
        ch.WiretapPair(ch.bsc(0.1), ch.dmc(np.full((3, 2), 0.5)))
