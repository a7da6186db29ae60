"""Secrecy metrics on explicit joint pmfs and the variational-distance toolkit.

The six metrics on a joint ``p(m, z)`` are

* ``S1 = I(M; Z)``
* ``S2 = V(p_MZ, p_M p_Z)``
* ``S3 = P[i(M; Z) > eps]``
* ``S4 = S1 / n``, ``S5 = S2 / n``, ``S6 = P[i(M; Z) / n > eps]``

where ``i`` is the information density and every logarithm is base 2.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass

import numpy as np

from ._util import PMF_ATOL, as_pmf, fmt17
from .errors import DomainError, InconsistentSupportError, PreconditionError, ShapeError

LN2 = math.log(2.0)
TIE_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class JointDistribution:
    """Finite joint pmf ``p(m, z)`` stored as an ``(|M|, |Z|)`` matrix."""

    pmf: np.ndarray

    def __post_init__(self):
        p = np.array(self.pmf, dtype=float, copy=True)
        if p.ndim != 2 or 0 in p.shape:
            raise ShapeError("joint pmf must be a nonempty matrix")
        if np.any(p < 0) or not np.all(np.isfinite(p)):
            raise DomainError("joint pmf has negative or non-finite entries")
        if abs(p.sum() - 1.0) > PMF_ATOL:
            raise DomainError(f"joint pmf sums to {p.sum()!r}")
        p.flags.writeable = False
        object.__setattr__(self, "pmf", p)

    @property
    def m_size(self) -> int:
        return self.pmf.shape[0]

    @property
    def z_size(self) -> int:
        return self.pmf.shape[1]

    def marginal_m(self) -> np.ndarray:
        return self.pmf.sum(axis=1)

    def marginal_z(self) -> np.ndarray:
        return self.pmf.sum(axis=0)

    def product(self) -> np.ndarray:
        return np.outer(self.marginal_m(), self.marginal_z())


@dataclass(frozen=True)
class MetricId:
    index: int
    epsilon: float | None = None
    n: int | None = None

    def __post_init__(self):
        if self.index not in range(1, 7):
            raise DomainError("metric index must be in 1..6")
        if self.index in (3, 6) and not (self.epsilon is not None and self.epsilon > 0):
            raise DomainError(f"S{self.index} needs a positive epsilon")
        if self.index in (4, 5, 6) and not (self.n is not None and self.n >= 1):
            raise DomainError(f"S{self.index} needs a blocklength n >= 1")


def _joint(j) -> JointDistribution:
    return j if isinstance(j, JointDistribution) else JointDistribution(j)


def mutual_information(joint) -> float:
    j = _joint(joint)
    p = j.pmf
    q = j.product()
    mask = p > 0
    val = float(np.sum(p[mask] * np.log2(p[mask] / q[mask])))
    return max(val, 0.0)


def variational(p, q) -> float:
    """``sum_x |p(x) - q(x)|`` for pmfs of equal shape (vectors or matrices)."""
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    if p.shape != q.shape:
        raise ShapeError(f"shape mismatch {p.shape} vs {q.shape}")
    return float(np.abs(p - q).sum())


def kl_divergence(p, q) -> float:
    """``D(p||q)`` in bits; ``inf`` when ``supp(p)`` is not inside ``supp(q)``."""
    p = np.asarray(p, dtype=float).ravel()
    q = np.asarray(q, dtype=float).ravel()
    if p.shape != q.shape:
        raise ShapeError("shape mismatch")
    mask = p > 0
    if np.any(q[mask] == 0):
        return math.inf
    return max(float(np.sum(p[mask] * np.log2(p[mask] / q[mask]))), 0.0)


def entropy(p) -> float:
    p = np.asarray(p, dtype=float).ravel()
    p = p[p > 0]
    return float(-np.sum(p * np.log2(p)))


def info_density_atoms(joint):
    """Values ``log2 p(m,z)/(p(m)p(z))`` and their masses on the support."""
    j = _joint(joint)
    p = j.pmf
    mask = p > 0
    return np.log2(p[mask] / j.product()[mask]), p[mask]


def _tail(joint, threshold: float) -> float:
    vals, mass = info_density_atoms(joint)
    return float(mass[vals > threshold + TIE_TOL].sum())


def secrecy_metric(joint, metric: MetricId) -> float:
    j = _joint(joint)
    k = metric.index
    if k in (1, 4):
        v = mutual_information(j)
    elif k in (2, 5):
        v = variational(j.pmf, j.product())
    elif k == 3:
        return _tail(j, metric.epsilon)
    else:
        return _tail(j, metric.epsilon * metric.n)
    return v / metric.n if k in (4, 5) else v


def all_metrics(joint, n: int, epsilon: float) -> dict:
    """All six metrics at once, sharing the marginal computations."""
    j = _joint(joint)
    s1 = mutual_information(j)
    s2 = variational(j.pmf, j.product())
    return {
        "S1": s1,
        "S2": s2,
        "S3": _tail(j, epsilon),
        "S4": s1 / n,
        "S5": s2 / n,
        "S6": _tail(j, epsilon * n),
    }


def pinsker_check(joint) -> tuple:
    """``(S2, sqrt(2 ln2 S1))``: base-2 Pinsker says the first never exceeds the second."""
    j = _joint(joint)
    lhs = variational(j.pmf, j.product())
    return lhs, math.sqrt(2.0 * LN2 * mutual_information(j))


def divergence_variational_bound(p, q, alphabet_size: int | None = None) -> tuple:
    """``(D(p||q), V log2(|A|/V))`` for ``V = V(p, q) <= 1/2``.

    The right side is the entropy-continuity bound; it is only valid on its
    stated regime, so callers get a PreconditionError for ``V > 1/2``.
    """
    p = as_pmf(np.ravel(p), name="p")
    q = as_pmf(np.ravel(q), name="q")
    if p.shape != q.shape:
        raise ShapeError("shape mismatch")
    a = p.size if alphabet_size is None else int(alphabet_size)
    if np.any((p > 0) & (q == 0)):
        raise InconsistentSupportError("supp(p) is not contained in supp(q)")
    v = variational(p, q)
    if v > 0.5:
        raise PreconditionError(f"variational distance {v:.4g} exceeds 1/2")
    rhs = 0.0 if v == 0 else v * math.log2(a / v)
    return kl_divergence(p, q), rhs


@dataclass(frozen=True)
class CalculusReport:
    triangle_slack: float
    marginal_slack: float
    data_processing_slack: float

    @property
    def max_violation(self) -> float:
        return max(0.0, -self.triangle_slack, -self.marginal_slack, -self.data_processing_slack)


def variational_calculus_checks(p, q, r, kernel, side_rows=None, side_weights=None) -> CalculusReport:
    """Slacks of the three variational-distance properties (negative means violated).

    * triangle: ``V(p,q) + V(q,r) - V(p,r)``
    * marginal: ``sum_s w_s V(p, q_s) - V(p, sum_s w_s q_s)`` with side rows
      ``q_s`` (default rows ``q, r`` with equal weights)
    * data processing: ``V(p,q) - V(pW, qW)`` for a row-stochastic kernel ``W``
    """
    p, q, r = (np.asarray(a, dtype=float) for a in (p, q, r))
    kernel = np.asarray(kernel, dtype=float)
    if side_rows is None:
        side_rows = np.stack([q, r])
        side_weights = np.array([0.5, 0.5])
    side_rows = np.asarray(side_rows, dtype=float)
    side_weights = as_pmf(side_weights, name="side weights")
    tri = variational(p, q) + variational(q, r) - variational(p, r)
    avg = sum(w * variational(p, row) for w, row in zip(side_weights, side_rows))
    marg = avg - variational(p, side_weights @ side_rows)
    dp = variational(p, q) - variational(p @ kernel, q @ kernel)
    return CalculusReport(tri, marg, dp)


def apply_channel_to_z(joint, kernel) -> JointDistribution:
    """Joint of ``(M, Z')`` after passing ``Z`` through ``kernel[z, z']``."""
    return JointDistribution(_joint(joint).pmf @ np.asarray(kernel, dtype=float))


# -- persistence -----------------------------------------------------------

def joint_to_csv(joint) -> str:
    j = _joint(joint)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["m", "z", "probability"])
    for m in range(j.m_size):
        for z in range(j.z_size):
            w.writerow([m, z, fmt17(j.pmf[m, z])])
    return buf.getvalue()


def joint_from_csv(text: str) -> JointDistribution:
    rows = list(csv.DictReader(io.StringIO(text)))
    if not rows:
        raise ShapeError("empty joint CSV")
    ms = [int(r["m"]) for r in rows]
    zs = [int(r["z"]) for r in rows]
    p = np.zeros((max(ms) + 1, max(zs) + 1))
    for m, z, r in zip(ms, zs, rows):
        p[m, z] = float(r["probability"])
    return JointDistribution(p)


def joint_to_json(joint) -> str:
    j = _joint(joint)
    return json.dumps({"pmf": [[fmt17(v) for v in row] for row in j.pmf]})


def joint_from_json(text: str) -> JointDistribution:
    data = json.loads(text)
    return JointDistribution([[float(v) for v in row] for row in data["pmf"]])
