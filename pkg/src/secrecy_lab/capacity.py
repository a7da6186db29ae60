"""Secrecy capacities: closed forms, grid search, fading power allocation, compound sets."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from ._util import as_pmf, binary_entropy
from .channels import DiscreteChannel, FadingSpec, WiretapPair, mix_channels
from .errors import DomainError, NumericalAccuracyError, ShapeError

LN2 = math.log(2.0)


def bsc_secrecy_capacity(delta1: float, delta2: float) -> float:
    """``h(delta2) - h(delta1)`` for a degraded pair of binary symmetric channels."""
    if not 0 <= delta1 <= delta2 <= 0.5:
        raise DomainError("need 0 <= delta1 <= delta2 <= 1/2")
    return binary_entropy(delta2) - binary_entropy(delta1)


def gaussian_secrecy_capacity(P: float, sigma_m2: float, sigma_e2: float) -> float:
    if P < 0 or not (sigma_m2 > 0 and sigma_e2 > 0):
        raise DomainError("power must be nonnegative and variances positive")
    if sigma_e2 < sigma_m2:
        raise DomainError("formula needs sigma_e2 >= sigma_m2")
    return 0.5 * math.log2(1 + P / sigma_m2) - 0.5 * math.log2(1 + P / sigma_e2)


def input_mutual_information(channel: DiscreteChannel, inputs) -> np.ndarray:
    """``I(X;Z)`` for each row of ``inputs`` (shape ``(G, |X|)``), vectorized."""
    P = np.atleast_2d(np.asarray(inputs, dtype=float))
    w = channel.transition
    with np.errstate(divide="ignore", invalid="ignore"):
        row_term = np.where(w > 0, w * np.log2(w), 0.0).sum(axis=1)
        Q = P @ w
        out_ent = -np.where(Q > 0, Q * np.log2(Q), 0.0).sum(axis=1)
    return np.maximum(P @ row_term + out_ent, 0.0)


def secrecy_rate(pair: WiretapPair, input_pmf) -> float:
    p = as_pmf(input_pmf, name="input pmf")
    return float(input_mutual_information(pair.main, p)[0] - input_mutual_information(pair.eve, p)[0])


def simplex_grid(size: int, step: float) -> np.ndarray:
    """All pmfs on ``size`` points whose entries are multiples of ``step``."""
    k = int(round(1 / step))
    if abs(k * step - 1) > 1e-9:
        raise DomainError("step must divide 1")
    pts = [c for c in itertools.product(range(k + 1), repeat=size - 1) if sum(c) <= k]
    a = np.array(pts, dtype=float).reshape(-1, size - 1)
    return np.column_stack([a, k - a.sum(axis=1)]) / k


def _local_grid(center: np.ndarray, radius: float, step: float) -> np.ndarray:
    size = center.size
    offs = np.arange(-radius, radius + step / 2, step)
    pts = np.array(list(itertools.product(offs, repeat=size - 1))).reshape(-1, size - 1)
    head = center[:-1] + pts
    last = 1 - head.sum(axis=1)
    cand = np.column_stack([head, last])
    return cand[np.all(cand >= -1e-12, axis=1)].clip(0, None)


@dataclass(frozen=True)
class GridOptimum:
    value: float
    argmax: np.ndarray


def dm_secrecy_capacity(pair: WiretapPair, step: float = 1e-2, refine_step: float = 1e-3) -> GridOptimum:
    """Maximize ``I(X;Y) - I(X;Z)`` over input pmfs by grid search plus one local refinement."""
    size = pair.input_size
    if size > 4:
        raise ShapeError("grid search supports at most 4 input symbols")

    def objective(P):
        return input_mutual_information(pair.main, P) - input_mutual_information(pair.eve, P)

    grid = simplex_grid(size, step)
    vals = objective(grid)
    best = int(np.argmax(vals))
    center, value = grid[best], float(vals[best])
    if refine_step and size > 1:
        local = _local_grid(center, step, refine_step)
        lv = objective(local)
        j = int(np.argmax(lv))
        if lv[j] > value:
            center, value = local[j], float(lv[j])
    return GridOptimum(max(value, 0.0), center)


# -- fading -----------------------------------------------------------------

@dataclass(frozen=True)
class PowerAllocation:
    gamma: np.ndarray
    lam: float
    achieved_rate: float
    power_used: float


def _gamma_of_lambda(a_m: np.ndarray, a_e: np.ndarray, lam: float) -> np.ndarray:
    """Per-state power solving ``(1/ln2)(a_m/(1+a_m g) - a_e/(1+a_e g)) = lam``, clipped at 0.

    The stationarity condition is the quadratic
    ``a_m a_e g^2 + (a_m + a_e) g + 1 - (a_m - a_e)/(lam ln2) = 0``; its positive
    root is written as ``-2c / (b + sqrt(b^2 - 4ac))`` so ``a_e = 0`` needs no
    special case.
    """
    c = 1.0 - (a_m - a_e) / (lam * LN2)
    b = a_m + a_e
    disc = np.maximum(b * b - 4 * a_m * a_e * c, 0.0)
    with np.errstate(divide="ignore", invalid="ignore"):
        g = np.where(c < 0, -2 * c / (b + np.sqrt(disc)), 0.0)
    return np.where(a_m > a_e, np.maximum(g, 0.0), 0.0)


def fading_rate(spec: FadingSpec, gamma) -> float:
    g = np.asarray(gamma, dtype=float)
    a_m, a_e = spec.snr_main, spec.snr_eve
    per = np.log2(1 + a_m * g) - np.log2(1 + a_e * g)
    return float(spec.probabilities @ per)


def fading_secrecy_capacity(spec: FadingSpec, tol: float = 1e-9, max_iter: int = 2000) -> PowerAllocation:
    """Optimal power allocation across fading states under ``E[gamma] <= P``.

    States where the eavesdropper is at least as strong get no power.  When
    any state favours the main channel the rate keeps growing with power, so
    the constraint is active and the multiplier is found by geometric
    bisection on ``(0, max (a_m - a_e)/ln2]`` until ``|E[gamma] - P| <= tol``.
    """
    a_m, a_e, prob = spec.snr_main, spec.snr_eve, spec.probabilities
    P = spec.power_budget
    good = (a_m > a_e) & (prob > 0)
    if not np.any(good):
        zero = np.zeros(a_m.size)
        return PowerAllocation(zero, 0.0, 0.0, 0.0)
    hi = float(np.max((a_m - a_e)[good])) / LN2

    def power(lam):
        return float(prob @ _gamma_of_lambda(a_m, a_e, lam))

    lo = hi
    while power(lo) < P:
        lo /= 2
        if lo < 1e-300:
            raise NumericalAccuracyError("could not bracket the Lagrange multiplier")
    for _ in range(max_iter):
        mid = math.sqrt(lo * hi)
        e = power(mid)
        if abs(e - P) <= tol:
            lo = hi = mid
            break
        if e > P:
            lo = mid
        else:
            hi = mid
        if hi / lo - 1 < 1e-15:
            break
    lam = math.sqrt(lo * hi)
    gamma = _gamma_of_lambda(a_m, a_e, lam)
    used = float(prob @ gamma)
    if abs(used - P) > max(tol, 1e-12 * P):
        raise NumericalAccuracyError(f"power constraint missed by {abs(used - P):.3g}")
    return PowerAllocation(gamma, lam, fading_rate(spec, gamma), used)


def kkt_residual(spec: FadingSpec, alloc: PowerAllocation) -> float:
    """Largest first-order violation: equality at interior states, ``<= lam`` at zero states."""
    a_m, a_e, g = spec.snr_main, spec.snr_eve, alloc.gamma
    marg = (a_m / (1 + a_m * g) - a_e / (1 + a_e * g)) / LN2
    interior = g > 0
    res = np.abs(marg - alloc.lam)[interior]
    at_zero = np.maximum(marg[~interior & (spec.probabilities > 0)] - alloc.lam, 0.0)
    return float(max(res.max(initial=0.0), at_zero.max(initial=0.0)))


# -- compound and mixed ---------------------------------------------------

def _check_pairs(pairs):
    if not pairs:
        raise DomainError("at least one wiretap pair is required")
    sizes = {p.input_size for p in pairs}
    if len(sizes) != 1:
        raise ShapeError("all pairs need the same input alphabet")


def compound_rate(pairs, input_pmf) -> float:
    """``min_k I(X;Y_k) - max_k I(X;Z_k)`` at a fixed input law."""
    _check_pairs(pairs)
    p = as_pmf(input_pmf, name="input pmf")
    main = min(float(input_mutual_information(c.main, p)[0]) for c in pairs)
    eve = max(float(input_mutual_information(c.eve, p)[0]) for c in pairs)
    return main - eve


@dataclass(frozen=True)
class MixedRate:
    value: float
    averaged: WiretapPair


def mixed_rate(pairs, weights, input_pmf) -> MixedRate:
    """Same min/max value as the compound set plus the weight-averaged pair."""
    _check_pairs(pairs)
    w = as_pmf(weights, name="weights")
    if w.size != len(pairs):
        raise ShapeError("one weight per pair is required")
    avg = WiretapPair(
        mix_channels([c.main for c in pairs], w),
        mix_channels([c.eve for c in pairs], w),
    )
    return MixedRate(compound_rate(pairs, input_pmf), avg)
