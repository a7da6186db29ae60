import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from secrecy_lab import metrics as mt
from secrecy_lab._util import binary_entropy
from secrecy_lab.errors import DomainError, InconsistentSupportError, PreconditionError, ShapeError

DIAG = np.array([[0.5, 0.0], [0.0, 0.5]])


def random_joint(seed, max_size=8):
    rng = np.random.default_rng(seed)
    a, b = rng.integers(1, max_size + 1, size=2)
    p = rng.dirichlet(np.full(a * b, rng.choice([0.2, 1.0, 5.0]))).reshape(a, b)
    if rng.random() < 0.3:
        p[rng.random(p.shape) < 0.3] = 0.0
        if p.sum() == 0:
            p[0, 0] = 1.0
        p /= p.sum()
    return mt.JointDistribution(p)


def test_joint_validation():
    with pytest.raises(DomainError):
        mt.JointDistribution([[0.5, 0.6]])
    with pytest.raises(ShapeError):
        mt.JointDistribution([0.5, 0.5])


def test_mutual_information_examples():
    assert mt.mutual_information(np.outer([0.3, 0.7], [0.2, 0.5, 0.3])) == pytest.approx(0.0, abs=1e-15)
    assert mt.mutual_information(DIAG) == 1.0
    val = mt.mutual_information([[0.4, 0.1], [0.1, 0.4]])
    assert val == pytest.approx(1 - binary_entropy(0.2), abs=1e-14)
    assert val == pytest.approx(0.2780719051126377, abs=1e-12)


def test_variational_examples():
    assert mt.variational([0.2, 0.8], [0.2, 0.8]) == 0
    assert mt.variational([1, 0], [0, 1]) == 2
    assert mt.variational([0.7, 0.3], [0.5, 0.5]) == pytest.approx(0.4, abs=1e-15)
    with pytest.raises(ShapeError):
        mt.variational([1.0], [0.5, 0.5])


def test_kl_sentinel():
    assert mt.kl_divergence([0.5, 0.5], [1.0, 0.0]) == math.inf
    assert mt.kl_divergence([1.0, 0.0], [0.5, 0.5]) == 1.0


def test_secrecy_metric_examples():
    prod = np.outer([0.25, 0.75], [0.1, 0.6, 0.3])
    for k in range(1, 7):
        assert mt.secrecy_metric(prod, mt.MetricId(k, 0.1, 3)) == pytest.approx(0.0, abs=1e-12)
    assert mt.secrecy_metric(DIAG, mt.MetricId(2)) == 1.0
    assert mt.secrecy_metric(DIAG, mt.MetricId(3, epsilon=0.5)) == 1.0
    assert mt.secrecy_metric(DIAG, mt.MetricId(3, epsilon=1.0)) == 0.0
    assert mt.secrecy_metric(DIAG, mt.MetricId(6, epsilon=0.4, n=2)) == 1.0


def test_metric_id_validation():
    with pytest.raises(DomainError):
        mt.MetricId(3)
    with pytest.raises(DomainError):
        mt.MetricId(4)
    with pytest.raises(DomainError):
        mt.MetricId(7)


@given(st.integers(0, 2**32 - 1), st.integers(1, 20))
def test_normalized_metrics_are_exact_quotients(seed, n):
    j = random_joint(seed)
    vals = mt.all_metrics(j, n, 0.1)
    assert vals["S4"] == vals["S1"] / n
    assert vals["S5"] == vals["S2"] / n
    assert mt.secrecy_metric(j, mt.MetricId(1)) == vals["S1"]
    assert mt.secrecy_metric(j, mt.MetricId(5, n=n)) == vals["S5"]


@given(st.integers(0, 2**32 - 1))
def test_s1_zero_iff_product(seed):
    rng = np.random.default_rng(seed)
    a = rng.integers(1, 6, size=2)
    pm, pz = rng.dirichlet(np.ones(a[0])), rng.dirichlet(np.ones(a[1]))
    assert mt.mutual_information(np.outer(pm, pz)) <= 1e-12
    j = random_joint(seed)
    dep = mt.variational(j.pmf, j.product()) > 1e-6
    assert (mt.mutual_information(j) > 1e-12) == dep


@given(st.integers(0, 2**32 - 1))
def test_s3_monotone_and_vanishing(seed):
    j = random_joint(seed)
    eps = np.linspace(0.01, 6, 40)
    vals = [mt.secrecy_metric(j, mt.MetricId(3, e)) for e in eps]
    assert all(b <= a for a, b in zip(vals, vals[1:]))
    # with uniform M the density is at most log2|M|, so S3 vanishes past it
    rows = j.pmf / j.pmf.sum(axis=1, keepdims=True).clip(1e-300)
    rows[j.pmf.sum(axis=1) == 0] = 1.0 / j.z_size
    uni = mt.JointDistribution(rows / j.m_size)
    cap = math.log2(j.m_size) + math.log2(j.z_size)
    assert mt.secrecy_metric(uni, mt.MetricId(3, cap + 1e-6)) == 0.0
    assert mt.secrecy_metric(uni, mt.MetricId(3, math.log2(j.m_size) + 1e-9)) == 0.0


def test_pinsker_examples():
    assert mt.pinsker_check(np.outer([0.5, 0.5], [0.3, 0.7])) == pytest.approx((0.0, 0.0), abs=1e-7)
    lhs, rhs = mt.pinsker_check(DIAG)
    assert lhs == 1.0
    assert rhs == pytest.approx(math.sqrt(2 * math.log(2)), abs=1e-15)
    assert rhs == pytest.approx(1.1774100225154747, abs=1e-12)


def test_pinsker_sweep():
    for seed in range(500):
        lhs, rhs = mt.pinsker_check(random_joint(seed))
        assert lhs <= rhs + 1e-12


def test_divergence_bound_examples():
    assert mt.divergence_variational_bound([0.25] * 4, [0.25] * 4, 4) == (0.0, 0.0)
    p = [0.3, 0.3, 0.2, 0.2]
    d, rhs = mt.divergence_variational_bound(p, [0.25] * 4, 4)
    # hand plug-in: D = 2 - H(p); V = 0.2; rhs = 0.2 log2(20)
    h = -(0.6 * math.log2(0.3) + 0.4 * math.log2(0.2))
    assert d == pytest.approx(2 - h, abs=1e-14)
    assert rhs == pytest.approx(0.2 * math.log2(20), abs=1e-14)
    assert d <= rhs


def test_divergence_bound_errors():
    with pytest.raises(InconsistentSupportError):
        mt.divergence_variational_bound([0.5, 0.5], [1.0, 0.0])
    with pytest.raises(PreconditionError):
        mt.divergence_variational_bound([1.0, 0.0, 0.0], [0.2, 0.4, 0.4])


def test_divergence_bound_sweep_uniform_reference():
    rng = np.random.default_rng(7)
    checked = 0
    while checked < 500:
        a = int(rng.integers(2, 9))
        q = np.full(a, 1.0 / a)
        p = q + rng.normal(scale=rng.choice([0.01, 0.05, 0.1]) / a, size=a)
        p = np.clip(p, 0, None)
        p /= p.sum()
        if mt.variational(p, q) > 0.5:
            continue
        d, rhs = mt.divergence_variational_bound(p, q, a)
        assert d <= rhs + 1e-9
        checked += 1


def test_calculus_examples():
    p = np.array([0.2, 0.3, 0.5])
    rep = mt.variational_calculus_checks(p, p, p, np.eye(3))
    assert rep.triangle_slack == rep.marginal_slack == rep.data_processing_slack == 0
    q = np.array([0.5, 0.3, 0.2])
    rep = mt.variational_calculus_checks(p, q, q, np.eye(3))
    assert rep.data_processing_slack == 0.0


def test_calculus_sweep():
    rng = np.random.default_rng(11)
    for _ in range(1000):
        a, b = rng.integers(1, 9, size=2)
        p, q, r = rng.dirichlet(np.ones(a), size=3)
        kernel = rng.dirichlet(np.ones(b), size=a)
        side = rng.dirichlet(np.ones(a), size=4)
        w = rng.dirichlet(np.ones(4))
        rep = mt.variational_calculus_checks(p, q, r, kernel, side, w)
        assert rep.max_violation <= 1e-12


@given(st.integers(0, 2**32 - 1))
def test_data_processing_on_metrics(seed):
    j = random_joint(seed)
    rng = np.random.default_rng(seed + 1)
    kernel = rng.dirichlet(np.ones(int(rng.integers(1, 6))), size=j.z_size)
    after = mt.apply_channel_to_z(j, kernel)
    assert mt.mutual_information(after) <= mt.mutual_information(j) + 1e-10
    assert mt.pinsker_check(after)[0] <= mt.pinsker_check(j)[0] + 1e-10


def test_joint_roundtrips(rng):
    j = mt.JointDistribution(rng.dirichlet(np.ones(6)).reshape(2, 3))
    assert np.array_equal(mt.joint_from_csv(mt.joint_to_csv(j)).pmf, j.pmf)
    assert np.array_equal(mt.joint_from_json(mt.joint_to_json(j)).pmf, j.pmf)
    assert mt.joint_to_csv(DIAG).splitlines()[0] == "m,z,probability"
